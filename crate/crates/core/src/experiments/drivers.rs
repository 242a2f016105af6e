//! Single-run drivers behind the command line: simulation, the Stokes
//! self-test and the ledger audit of a stored trajectory.

use std::fmt::Write;

use super::config::RunConfig;
use crate::error::Result;
use crate::estimates::{
    energy_audit, gronwall_budget, w_lq_audit, EnergyLedger, GronwallBudget, LqLedger,
};
use crate::evolution::{run_simulation, Advection, RunFailure, Trajectory};
use crate::fields::random::family_member;
use crate::fields::{BoundaryMode, GridSpec, LqNorm, VectorField};
use crate::stokes::{
    stokes_regularity_probe, SaddleSystem, StokesMethod, StokesProbeReport, DEFAULT_TOL, PROBE_KMAX,
};

/// Run the configured simulation.
pub fn simulate(cfg: &RunConfig) -> std::result::Result<Trajectory, RunFailure> {
    let init = cfg.initial_state().map_err(|error| RunFailure {
        error,
        partial: Box::new(Trajectory {
            grid: cfg.grid(),
            params: cfg.params,
            config: cfg.step_config(),
            options: cfg.run_options(),
            snapshots: Vec::new(),
            records: Vec::new(),
            rates: Vec::new(),
        }),
    })?;
    run_simulation(
        &init,
        cfg.t_end,
        &cfg.step_config(),
        &cfg.params,
        cfg.run_options(),
    )
}

/// Largest acceptable relative disagreement between the two Stokes routes.
pub const ROUTE_TOL: f64 = 1e-8;

/// Residual target of the iterative route, tight enough that its own error
/// stays well below [`ROUTE_TOL`].
const UZAWA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StokesCheck {
    pub sample: usize,
    pub residual_direct: f64,
    pub residual_uzawa: f64,
    /// `|v_direct - v_uzawa|_2 / |v_direct|_2`
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StokesSelftest {
    pub checks: Vec<StokesCheck>,
    pub probe: StokesProbeReport,
}

impl StokesSelftest {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| {
            c.residual_direct <= DEFAULT_TOL
                && c.residual_uzawa <= UZAWA_TOL
                && c.difference <= ROUTE_TOL
        }) && self.probe.stable
            && self.probe.log_stable.unwrap_or(true)
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("sample,residual_direct,residual_uzawa,difference\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{:?},{:?},{:?}",
                c.sample, c.residual_direct, c.residual_uzawa, c.difference
            );
        }
        out
    }
}

/// Solve a few seeded forcings with the direct and the Uzawa route and
/// compare, then run the regularity probe over the configured ladder.
pub fn stokes_selftest(cfg: &RunConfig) -> Result<StokesSelftest> {
    let grid = GridSpec::new(cfg.n, BoundaryMode::DirichletSquare)?;
    let direct = SaddleSystem::new(grid, StokesMethod::Direct)?;
    let uzawa = SaddleSystem::new(
        grid,
        StokesMethod::Uzawa {
            max_iter: 20_000,
            relaxation: 1.0,
        },
    )?;
    let mut checks = Vec::new();
    for sample in 0..5 {
        let fx = family_member(cfg.seed, 2 * sample, PROBE_KMAX);
        let fy = family_member(cfg.seed, 2 * sample + 1, PROBE_KMAX);
        let f = VectorField::sample_mac(grid, |x, y| (fx.eval(x, y), fy.eval(x, y)));
        let a = direct.solve(&f, DEFAULT_TOL)?;
        let b = uzawa.solve(&f, UZAWA_TOL)?;
        let scale = a.v.lq_norm(2.0)?.max(f64::MIN_POSITIVE);
        checks.push(StokesCheck {
            sample,
            residual_direct: a.residual,
            residual_uzawa: b.residual,
            difference: a.v.sub(&b.v)?.lq_norm(2.0)? / scale,
        });
    }
    let grids = cfg
        .probe
        .grids
        .iter()
        .map(|&n| GridSpec::new(n, BoundaryMode::DirichletSquare))
        .collect::<Result<Vec<_>>>()?;
    let probe = stokes_regularity_probe(cfg.probe.samples, cfg.probe.q, &grids, cfg.seed)?;
    Ok(StokesSelftest { checks, probe })
}

/// Tolerance of the `L^q` margin (quadrature round-off).
pub const LQ_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub energy: EnergyLedger,
    pub lq: Vec<LqLedger>,
    /// `L^q` margins are gated only for upwind transport.
    pub lq_gated: bool,
    pub budget: GronwallBudget,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.energy.envelope_holds && (!self.lq_gated || self.lq.iter().all(|l| l.holds(LQ_TOL)))
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "energy: max |residual| {:e}, envelope margin {:e}, envelope {}",
            self.energy.max_abs_residual,
            self.energy.envelope_margin(),
            if self.energy.envelope_holds {
                "holds"
            } else {
                "VIOLATED"
            }
        );
        for l in &self.lq {
            let _ = writeln!(
                s,
                "L^{} ledger: min margin {:e}, max scheme slack {:e}{}",
                l.q,
                l.min_margin,
                l.max_scheme_slack,
                match (self.lq_gated, l.holds(LQ_TOL)) {
                    (false, _) => " (not gated)",
                    (true, true) => "",
                    (true, false) => " VIOLATED",
                }
            );
        }
        for (name, v) in self.budget.entries() {
            let _ = writeln!(s, "budget {name}: {v:e}");
        }
        let _ = writeln!(
            s,
            "audit {}",
            if self.passed() { "passed" } else { "FAILED" }
        );
        s
    }

    /// One row per step: `t`, energy residual, bounded quantity, envelope,
    /// then the margin of each `L^q` ledger.
    pub fn csv(&self) -> String {
        let mut out = String::from("t,energy_residual,bounded,envelope");
        for l in &self.lq {
            let _ = write!(out, ",lq_margin_{}", l.q);
        }
        out.push('\n');
        for (k, t) in self.energy.t.iter().enumerate() {
            let _ = write!(
                out,
                "{t:?},{:?},{:?},{:?}",
                self.energy.residual[k], self.energy.bounded[k], self.energy.envelope[k]
            );
            for l in &self.lq {
                let _ = write!(out, ",{:?}", l.margin.get(k).copied().unwrap_or(0.0));
            }
            out.push('\n');
        }
        out
    }
}

/// Re-run the ledgers on a trajectory. The recorded `L^q` exponent is always
/// audited; `q = 2, 4, 8` are added when every step is stored.
pub fn audit(traj: &Trajectory) -> Result<AuditReport> {
    let params = traj.params;
    let energy = energy_audit(traj, &params)?;
    let mut qs = vec![traj.options.lq_exponent];
    if traj.options.stride == 1 {
        for q in [2.0, 4.0, 8.0] {
            if !qs.contains(&q) {
                qs.push(q);
            }
        }
    }
    let lq = qs
        .into_iter()
        .map(|q| w_lq_audit(traj, q, &params))
        .collect::<Result<Vec<_>>>()?;
    Ok(AuditReport {
        energy,
        lq,
        lq_gated: traj.config.advection != Advection::Central,
        budget: gronwall_budget(traj, &params),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::InitRecipe;
    use crate::experiments::InitSpec;

    #[test]
    fn zero_simulation_records_zeros() {
        let mut c = RunConfig::default();
        c.n = 8;
        c.init = InitSpec::Recipe(InitRecipe::Zero);
        let t = simulate(&c).unwrap();
        assert!(t
            .records
            .iter()
            .all(|r| r.values()[1..].iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn audit_of_smooth_run_passes() {
        let mut c = RunConfig::default();
        c.n = 16;
        c.stride = 1;
        c.t_end = 0.03;
        let t = simulate(&c).unwrap();
        let r = audit(&t).unwrap();
        assert_eq!(r.lq.len(), 3);
        assert!(r.passed(), "{}", r.summary());
        assert_eq!(r.csv().lines().count(), t.records.len() + 1);
    }

    #[test]
    fn stokes_routes_agree() {
        let mut c = RunConfig::default();
        c.n = 12;
        c.probe.samples = 4;
        c.probe.grids = vec![8, 16];
        let r = stokes_selftest(&c).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
