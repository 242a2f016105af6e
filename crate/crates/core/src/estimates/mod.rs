//! Runtime ledgers of the a priori estimates and pass/fail audits over
//! trajectories.

mod diagnostics;
mod gn;
mod ledgers;
mod refine;
mod weak;

pub use diagnostics::{
    diagnose, energy_residual, lq_terms, z_field, DiagnosticsContext, DiagnosticsRecord, StepRates,
};
pub use gn::{gn_probe, gn_ratios, GnLevel, GnReport};
pub use ledgers::{
    energy_audit, energy_residual_order, gronwall_budget, tweighted_h2_audit, w_lq_audit,
    z_diagnostic, EnergyLedger, GronwallBudget, LqLedger, TWeightedLedger, ZSeries,
};
pub use refine::{fit_order, growth_bounded, refinement_stable};
pub use weak::{test_bank, weak_form_residual, TestFunction, WeakResidualTable, WeakRow};
