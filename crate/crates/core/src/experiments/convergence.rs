//! Refinement ladders for the manufactured-solution forcing.
//!
//! The spatial ladder runs each grid with the second-order scheme at a small
//! fixed step and measures the error against the exact solution. The
//! temporal ladder runs the configured scheme on one grid and uses
//! differences of successive step sizes, since the exact-solution error
//! saturates at the spatial floor there.

use std::thread;

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::estimates::fit_order;
use crate::evolution::{run_simulation, Manufactured, RunOptions, Scheme};
use crate::fields::{LqNorm, State};

/// `L^2` and `L^4` norms of the `u`, `w`, `b` components of a difference.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldErrors(pub [f64; 6]);

impl FieldErrors {
    pub const COLUMNS: [&'static str; 6] = ["u_l2", "w_l2", "b_l2", "u_l4", "w_l4", "b_l4"];

    pub fn between(a: &State, b: &State) -> Result<Self> {
        let (du, dw, db) = (a.u.sub(&b.u)?, a.w.sub(&b.w)?, a.b.sub(&b.b)?);
        Ok(Self([
            du.lq_norm(2.0)?,
            dw.lq_norm(2.0)?,
            db.lq_norm(2.0)?,
            du.lq_norm(4.0)?,
            dw.lq_norm(4.0)?,
            db.lq_norm(4.0)?,
        ]))
    }

    /// The three `L^2` entries.
    pub fn l2(&self) -> [f64; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    /// `h` or `dt` per level.
    pub sizes: Vec<f64>,
    pub errors: Vec<FieldErrors>,
    /// Fitted slope per column.
    pub orders: FieldErrors,
}

impl Ladder {
    fn new(sizes: Vec<f64>, errors: Vec<FieldErrors>) -> Self {
        let mut orders = FieldErrors::default();
        for (k, o) in orders.0.iter_mut().enumerate() {
            let e: Vec<f64> = errors.iter().map(|x| x.0[k]).collect();
            *o = fit_order(&sizes, &e);
        }
        Self {
            sizes,
            errors,
            orders,
        }
    }

    /// Every `L^2` order at least `min`; a column that is exactly zero on
    /// every level counts as converged.
    pub fn l2_orders_at_least(&self, min: f64) -> bool {
        (0..3).all(|k| self.orders.0[k] >= min || self.errors.iter().all(|e| e.0[k] == 0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub recipe: Manufactured,
    pub spatial: Ladder,
    pub temporal: Ladder,
}

impl ConvergenceReport {
    pub const SPATIAL_MIN: f64 = 1.8;
    pub const TEMPORAL_MIN: f64 = 0.9;

    pub fn passes(&self) -> bool {
        self.spatial.l2_orders_at_least(Self::SPATIAL_MIN)
            && self.temporal.l2_orders_at_least(Self::TEMPORAL_MIN)
    }
}

/// Final state of a forced run on `n` cells with step `dt`.
fn final_state(cfg: &RunConfig, n: usize, dt: f64, scheme: Scheme) -> Result<State> {
    let mut c = cfg.clone();
    c.n = n;
    c.dt = dt;
    c.scheme = scheme;
    c.validate()?;
    let m = c.forcing.expect("checked by caller");
    let init = m.exact_state(0.0, c.grid())?;
    let steps = (c.convergence.t_end / dt).round().max(1.0) as usize;
    let traj = run_simulation(
        &init,
        c.convergence.t_end,
        &c.step_config(),
        &c.params,
        RunOptions {
            stride: steps,
            ..c.run_options()
        },
    )?;
    Ok(traj.final_state().expect("final state").clone())
}

/// Run `jobs` concurrently, keeping their order.
fn parallel<T: Send, F: Fn(usize) -> Result<T> + Sync>(count: usize, job: F) -> Result<Vec<T>> {
    thread::scope(|s| {
        let handles: Vec<_> = (0..count)
            .map(|k| {
                s.spawn({
                    let job = &job;
                    move || job(k)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("ladder worker panicked"))
            .collect()
    })
}

pub fn convergence_study(cfg: &RunConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let recipe = cfg.forcing.ok_or_else(|| {
        Error::Experiment(
            "convergence study needs scheme.forcing set to a manufactured recipe".into(),
        )
    })?;
    let c = &cfg.convergence;
    if c.grids.len() < 3 || c.dts.len() < 3 {
        return Err(Error::Experiment(
            "convergence ladders need at least 3 levels".into(),
        ));
    }
    let t_end = c.t_end;

    let spatial_errors = parallel(c.grids.len(), |k| {
        let s = final_state(cfg, c.grids[k], c.spatial_dt, Scheme::ImexAb2)?;
        let exact = recipe.exact_state(s.t, *s.grid())?;
        FieldErrors::between(&s, &exact)
    })?;
    let spatial = Ladder::new(
        c.grids.iter().map(|&n| 1.0 / n as f64).collect(),
        spatial_errors,
    );

    let states = parallel(c.dts.len(), |k| {
        final_state(cfg, c.temporal_n, c.dts[k], cfg.scheme)
    })?;
    for s in &states {
        if (s.t - t_end).abs() > 1e-9 * t_end {
            return Err(Error::Experiment(format!(
                "step ladder does not divide t_end: reached {}",
                s.t
            )));
        }
    }
    let temporal_errors = states
        .windows(2)
        .map(|w| FieldErrors::between(&w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    let temporal = Ladder::new(c.dts[..c.dts.len() - 1].to_vec(), temporal_errors);

    Ok(ConvergenceReport {
        recipe,
        spatial,
        temporal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::InitSpec;

    fn cfg(recipe: Manufactured) -> RunConfig {
        let mut c = RunConfig::default();
        c.forcing = Some(recipe);
        c.init = InitSpec::Manufactured;
        c.convergence.grids = vec![8, 12, 16];
        c.convergence.temporal_n = 8;
        c.convergence.dts = vec![0.01, 0.005, 0.0025];
        c.convergence.spatial_dt = 0.005;
        c.convergence.t_end = 0.02;
        c
    }

    #[test]
    fn zero_recipe_has_zero_errors() {
        let r = convergence_study(&cfg(Manufactured::Zero)).unwrap();
        for e in r.spatial.errors.iter().chain(&r.temporal.errors) {
            assert_eq!(e.0, [0.0; 6]);
        }
        assert!(r.passes());
    }

    #[test]
    fn short_ladders_and_missing_forcing_are_rejected() {
        let mut c = cfg(Manufactured::Zero);
        c.convergence.grids = vec![8, 16];
        assert!(convergence_study(&c).is_err());
        let mut c = cfg(Manufactured::Zero);
        c.forcing = None;
        c.init = InitSpec::Recipe(crate::evolution::InitRecipe::Zero);
        assert!(convergence_study(&c).is_err());
    }

    #[test]
    fn trig_errors_decrease() {
        let r = convergence_study(&cfg(Manufactured::Trig1 { amplitude: 1.0 })).unwrap();
        for l in [&r.spatial, &r.temporal] {
            for w in l.errors.windows(2) {
                for k in 0..3 {
                    assert!(w[1].0[k] < w[0].0[k], "{l:?}");
                }
            }
        }
    }
}
