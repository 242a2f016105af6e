//! Repeated coupled steps with diagnostics recorded at every step.

use std::fmt;

use super::integrator::{Integrator, StepConfig};
use crate::error::{Error, Result};
use crate::estimates::{diagnose, DiagnosticsContext, DiagnosticsRecord, StepRates};
use crate::fields::{FluidParams, GridSpec, State};

/// Recording options of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Keep every `stride`-th state (the initial and final states are always kept).
    pub stride: usize,
    /// Exponent of the recorded `L^q` margin.
    pub lq_exponent: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            stride: 1,
            lq_exponent: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: GridSpec,
    pub params: FluidParams,
    pub config: StepConfig,
    pub options: RunOptions,
    /// `(step index, state)` pairs, increasing in time.
    pub snapshots: Vec<(usize, State)>,
    /// One record per step, starting with the initial state.
    pub records: Vec<DiagnosticsRecord>,
    pub rates: Vec<StepRates>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn dt(&self) -> f64 {
        self.config.dt
    }

    pub fn final_state(&self) -> Option<&State> {
        self.snapshots.last().map(|(_, s)| s)
    }

    pub fn diagnostics_context(&self) -> DiagnosticsContext {
        DiagnosticsContext {
            params: self.params,
            dt: self.config.dt,
            q: self.options.lq_exponent,
            advection: self.config.advection,
            forcing: self.config.forcing,
        }
    }

    /// Recorded times must advance by `dt` and records and rates must line up.
    pub fn check_uniform(&self) -> Result<()> {
        if self.records.len() != self.rates.len() {
            return Err(Error::Trajectory(
                "records and rates differ in length".into(),
            ));
        }
        let dt = self.config.dt;
        for (k, w) in self.records.windows(2).enumerate() {
            let step = w[1].t - w[0].t;
            if (step - dt).abs() > 1e-9 * dt.max(w[1].t.abs()) {
                return Err(Error::Trajectory(format!(
                    "non-uniform step {step} at record {}",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    /// Consecutive stored states one step apart.
    pub fn consecutive_pairs(&self) -> impl Iterator<Item = (&State, &State)> {
        self.snapshots
            .windows(2)
            .filter(|w| w[1].0 == w[0].0 + 1)
            .map(|w| (&w[0].1, &w[1].1))
    }
}

/// A run that stopped early, with everything recorded before the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Box<Trajectory>,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (after {} steps, t = {})",
            self.error,
            self.partial.steps(),
            self.partial.records.last().map_or(0.0, |r| r.t)
        )
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<RunFailure> for Error {
    fn from(f: RunFailure) -> Self {
        f.error
    }
}

/// Integrate from `init` up to time `t_end` (rounded to a whole number of
/// steps) recording diagnostics at every step.
pub fn run_simulation(
    init: &State,
    t_end: f64,
    cfg: &StepConfig,
    params: &FluidParams,
    options: RunOptions,
) -> std::result::Result<Trajectory, RunFailure> {
    let grid = *init.grid();
    let mut traj = Trajectory {
        grid,
        params: *params,
        config: *cfg,
        options,
        snapshots: Vec::new(),
        records: Vec::new(),
        rates: Vec::new(),
    };
    let fail = |error: Error, traj: Trajectory| RunFailure {
        error,
        partial: Box::new(traj),
    };
    let setup = (|| -> Result<(Integrator, usize)> {
        init.validate_layout()?;
        init.check_finite()?;
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "final time must be >= 0, got {t_end}"
            )));
        }
        if options.stride == 0 {
            return Err(Error::InvalidParameter(
                "snapshot stride must be >= 1".into(),
            ));
        }
        let it = Integrator::new(grid, *params, *cfg)?;
        Ok((it, (t_end / cfg.dt).round() as usize))
    })();
    let (mut it, steps) = match setup {
        Ok(v) => v,
        Err(e) => return Err(fail(e, traj)),
    };
    let ctx = traj.diagnostics_context();
    match diagnose(None, init, &ctx) {
        Ok((r, q)) => {
            traj.records.push(r);
            traj.rates.push(q);
        }
        Err(e) => return Err(fail(e, traj)),
    }
    traj.snapshots.push((0, init.clone()));
    let mut cur = init.clone();
    for n in 1..=steps {
        let next = match it
            .step(&cur)
            .and_then(|next| Ok((diagnose(Some(&cur), &next, &ctx)?, next)))
        {
            Ok(((r, q), next)) => {
                traj.records.push(r);
                traj.rates.push(q);
                next
            }
            Err(e) => {
                if traj.snapshots.last().map(|s| s.0) != Some(n - 1) {
                    traj.snapshots.push((n - 1, cur));
                }
                return Err(fail(e, traj));
            }
        };
        if n % options.stride == 0 || n == steps {
            traj.snapshots.push((n, next.clone()));
        }
        cur = next;
    }
    Ok(traj)
}
