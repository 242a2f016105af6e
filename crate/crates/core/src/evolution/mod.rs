//! Time integration of the coupled system, the two sub-solvers used by the
//! fixed-point construction, and manufactured-solution forcing.

mod advection;
mod integrator;
mod recipes;
mod trajectory;

pub use advection::{convect, courant, transport, Advection};
pub use integrator::{
    step_coupled, step_mhd_forced, step_w_transport, Integrator, MhdState, Scheme, StepConfig,
};
pub use recipes::{
    init_state, mms_forcing, rough_magnetic_field, taylor_green_amplitudes, taylor_green_pressure,
    taylor_green_velocity, InitRecipe, Manufactured, MmsForcing, ROUGH_PSI_DECAY,
};
pub use trajectory::{run_simulation, RunFailure, RunOptions, Trajectory};
