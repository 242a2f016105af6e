//! Experiment drivers, run configuration and file formats.

mod config;
mod convergence;
mod drivers;
mod io;
mod mollify;
mod schauder;
mod uniqueness;

pub use config::{ConvergenceConfig, InitSpec, ProbeConfig, RunConfig, SchauderConfig};
pub use convergence::{convergence_study, ConvergenceReport, FieldErrors, Ladder};
pub use drivers::{
    audit, simulate, stokes_selftest, AuditReport, StokesCheck, StokesSelftest, LQ_TOL, ROUTE_TOL,
};
pub use io::{
    decode_snapshot, diagnostics_csv, encode_snapshot, fnv1a64, format_hex_float, load_trajectory,
    parse_diagnostics_csv, parse_hex_float, parse_rates_csv, rates_csv, read_snapshot,
    save_trajectory, table_csv, write_snapshot, CONFIG_FILE, DIAGNOSTICS_FILE, RATES_FILE,
    SNAPSHOT_DIR,
};
pub use mollify::mollify;
pub use schauder::{
    restrict_cells, schauder_fixed_point, x_norm, ABound, FixedPointMap, History, SchauderAttempt,
    SchauderReport,
};
pub use uniqueness::{squared_distance, uniqueness_probe, unit_perturbation, UniquenessReport};
