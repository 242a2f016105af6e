//! Fixed-point construction of the micro-rotation: iterate the map
//! `f -> w`, where `(u, b)` solve the MHD system driven by the torque
//! `chi C^T rho*f` and `w` solves the linear transport-damping equation
//! driven by that `u`.

use super::config::RunConfig;
use super::mollify::mollify;
use crate::error::{Error, Result};
use crate::evolution::{run_simulation, Integrator, MhdState, RunOptions};
use crate::fields::{ops, GridSpec, LqNorm, ScalarField, ScalarPlacement, State};

/// A micro-rotation history sampled at every step `0..=N`.
pub type History = Vec<ScalarField>;

/// Discrete `C(0, T; L^4)` norm: the max over steps of the `L^4` norm.
pub fn x_norm(f: &[ScalarField]) -> Result<f64> {
    f.iter().try_fold(0.0f64, |m, g| Ok(m.max(g.lq_norm(4.0)?)))
}

fn x_distance(a: &[ScalarField], b: &[ScalarField]) -> Result<f64> {
    a.iter()
        .zip(b)
        .try_fold(0.0f64, |m, (x, y)| Ok(m.max(x.sub(y)?.lq_norm(4.0)?)))
}

/// Regularized data of the map: `u_0`, `b_0` as given, `w_0` mollified.
#[derive(Debug, Clone)]
pub struct FixedPointMap {
    pub init: State,
    pub steps: usize,
    pub eps: f64,
    cfg: RunConfig,
}

/// Measured pieces of the a priori `L^4` bound for one application of the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ABound {
    /// `max_t ( |w(t)|_4 + 2 chi int_0^t |w|_4 )`
    pub lhs: f64,
    /// `|w_0^eps|_4`
    pub data: f64,
    /// `int_0^T |Lap u|_2`
    pub drive: f64,
    /// `(lhs - data) / drive`: the constant the bound needs at this resolution.
    pub implied_constant: f64,
}

impl FixedPointMap {
    pub fn new(cfg: &RunConfig, steps: usize) -> Result<Self> {
        if cfg.forcing.is_some() {
            return Err(Error::InvalidParameter(
                "the fixed-point map takes no manufactured forcing".into(),
            ));
        }
        let grid = cfg.grid();
        let eps = cfg.schauder.epsilon.unwrap_or(2.0 * grid.h());
        let mut init = cfg.initial_state()?;
        init.w = mollify(&init.w, eps)?;
        Ok(Self {
            init,
            steps,
            eps,
            cfg: cfg.clone(),
        })
    }

    pub fn t_end(&self) -> f64 {
        self.steps as f64 * self.cfg.dt
    }

    pub fn zero_history(&self) -> History {
        vec![ScalarField::zeros(*self.init.grid(), ScalarPlacement::CellCenter); self.steps + 1]
    }

    /// `F(f)` together with the measured a-bound.
    pub fn apply(&self, f: &[ScalarField]) -> Result<(History, ABound)> {
        if f.len() != self.steps + 1 {
            return Err(Error::InvalidParameter(format!(
                "history has {} entries, expected {}",
                f.len(),
                self.steps + 1
            )));
        }
        let dt = self.cfg.dt;
        let chi = self.cfg.params.chi;
        let mut it = Integrator::new(*self.init.grid(), self.cfg.params, self.cfg.step_config())?;
        let mut mhd = MhdState::new(self.init.t, self.init.u.clone(), self.init.b.clone());
        let mut w = self.init.w.clone();
        let data = w.lq_norm(4.0)?;
        let (mut damped, mut drive) = (0.0, 0.0);
        let mut lhs = data;
        let mut out = Vec::with_capacity(f.len());
        out.push(w.clone());
        for fn_ in &f[..self.steps] {
            let torque = mollify(fn_, self.eps)?;
            let next = it.step_mhd(&mhd, &torque)?;
            let w_next = it.step_w(&w, &mhd.u, mhd.t)?;
            damped += dt * w_next.lq_norm(4.0)?;
            drive += dt * ops::vector_laplacian(&next.u)?.lq_norm(2.0)?;
            lhs = lhs.max(w_next.lq_norm(4.0)? + 2.0 * chi * damped);
            out.push(w_next.clone());
            mhd = next;
            w = w_next;
        }
        let implied_constant = if drive > 0.0 {
            (lhs - data) / drive
        } else {
            0.0
        };
        Ok((
            out,
            ABound {
                lhs,
                data,
                drive,
                implied_constant,
            },
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchauderAttempt {
    pub t_end: f64,
    /// `|f^{k+1} - f^k|_X` for each application of the map.
    pub increments: Vec<f64>,
    /// `|f^k|_X` for the iterates `f^1, f^2, ...`.
    pub iterate_norms: Vec<f64>,
    pub converged: bool,
}

impl SchauderAttempt {
    /// Successive increment ratios `d_{k+1} / d_k`.
    pub fn ratios(&self) -> Vec<f64> {
        self.increments.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SchauderReport {
    pub eps: f64,
    /// Every attempt, the last one converged.
    pub attempts: Vec<SchauderAttempt>,
    /// Applications of the map in the converged attempt.
    pub iterations: usize,
    pub fixed_point: History,
    pub a_bound: ABound,
    /// `|w* - w_coupled|_2` at the final time.
    pub coupled_l2: f64,
    /// `|w_n - R w_{2n}|_2` at the final time for the coupled solver.
    pub self_convergence_l2: f64,
}

impl SchauderReport {
    pub fn final_attempt(&self) -> &SchauderAttempt {
        self.attempts.last().expect("at least one attempt")
    }

    pub fn halvings(&self) -> usize {
        self.attempts.len() - 1
    }

    pub fn t_end(&self) -> f64 {
        self.final_attempt().t_end
    }

    /// Contraction over the converged attempt.
    pub fn contracts(&self) -> bool {
        self.final_attempt().ratios().iter().all(|r| *r < 1.0)
    }
}

/// Iterate the map from `f^0 = 0` until the increment is within tolerance.
/// Non-contraction (a ratio `>= 1`) or running out of iterations halves `T`
/// and restarts, at most `max_halvings` times.
fn iterate(
    map: &FixedPointMap,
    tol: f64,
    max_iter: usize,
) -> Result<(SchauderAttempt, History, ABound)> {
    let mut f = map.zero_history();
    let mut attempt = SchauderAttempt {
        t_end: map.t_end(),
        increments: Vec::new(),
        iterate_norms: Vec::new(),
        converged: false,
    };
    let mut bound = None;
    for _ in 0..max_iter {
        let (next, b) = map.apply(&f)?;
        let d = x_distance(&next, &f)?;
        attempt.increments.push(d);
        attempt.iterate_norms.push(x_norm(&next)?);
        f = next;
        bound = Some(b);
        if d <= tol {
            attempt.converged = true;
            break;
        }
        if attempt.ratios().last().is_some_and(|r| *r >= 1.0) {
            break;
        }
    }
    Ok((attempt, f, bound.expect("max_iter >= 1")))
}

/// Average 2x2 blocks of a cell field on the doubled grid.
pub fn restrict_cells(fine: &ScalarField, coarse: GridSpec) -> Result<ScalarField> {
    let n = coarse.n();
    if fine.grid().n() != 2 * n || fine.placement() != ScalarPlacement::CellCenter {
        return Err(Error::GridMismatch);
    }
    let m = 2 * n;
    let mut data = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let at = |a: usize, b: usize| fine.data[(2 * j + b) * m + 2 * i + a];
            data.push(0.25 * (at(0, 0) + at(1, 0) + at(0, 1) + at(1, 1)));
        }
    }
    ScalarField::from_data(coarse, ScalarPlacement::CellCenter, data)
}

fn coupled_w(cfg: &RunConfig, eps: f64, steps: usize) -> Result<ScalarField> {
    let mut init = cfg.initial_state()?;
    init.w = mollify(&init.w, eps)?;
    let t_end = steps as f64 * cfg.dt;
    let traj = run_simulation(
        &init,
        t_end,
        &cfg.step_config(),
        &cfg.params,
        RunOptions {
            stride: steps.max(1),
            ..cfg.run_options()
        },
    )?;
    Ok(traj.final_state().expect("final state").w.clone())
}

pub fn schauder_fixed_point(cfg: &RunConfig) -> Result<SchauderReport> {
    cfg.validate()?;
    let mut steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut attempts = Vec::new();
    for _ in 0..=cfg.schauder.max_halvings {
        if steps == 0 {
            break;
        }
        let map = FixedPointMap::new(cfg, steps)?;
        let (attempt, fixed_point, a_bound) =
            iterate(&map, cfg.schauder.tol, cfg.schauder.max_iter)?;
        let converged = attempt.converged;
        attempts.push(attempt);
        if converged {
            let coupled = coupled_w(cfg, map.eps, steps)?;
            let w_star = fixed_point.last().expect("non-empty history");
            let coupled_l2 = w_star.sub(&coupled)?.lq_norm(2.0)?;
            let mut fine = cfg.clone();
            fine.n *= 2;
            let w_fine = coupled_w(&fine, map.eps, steps)?;
            let self_convergence_l2 = coupled
                .sub(&restrict_cells(&w_fine, cfg.grid())?)?
                .lq_norm(2.0)?;
            let iterations = attempts.last().map_or(0, |a| a.increments.len());
            return Ok(SchauderReport {
                eps: map.eps,
                attempts,
                iterations,
                fixed_point,
                a_bound,
                coupled_l2,
                self_convergence_l2,
            });
        }
        steps /= 2;
    }
    let summary: Vec<String> = attempts
        .iter()
        .map(|a| {
            format!(
                "T = {}: iterate norms {:?}, increments {:?}",
                a.t_end, a.iterate_norms, a.increments
            )
        })
        .collect();
    Err(Error::Experiment(format!(
        "fixed-point iteration did not contract after {} halvings; {}",
        attempts.len().saturating_sub(1),
        summary.join("; ")
    )))
}
