//! Empirical constants of the Stokes regularity estimates
//! `||v||_{W^{1,q}} <= C ||w||_q` and
//! `||grad v||_inf <= C (1 + ||w||_inf) ln(e + ||grad w||_q)` for
//! `v = A^{-1} perp_grad(w)`.

use super::saddle::shared_saddle;
use super::DEFAULT_TOL;
use crate::error::{Error, Result};
use crate::estimates::growth_bounded;
use crate::fields::random::family_member;
use crate::fields::{ops, Derivatives, GridSpec, LqNorm, ScalarPlacement};

/// Truncation of the random sample family; fixed so every grid sees the
/// same continuous fields.
pub const PROBE_KMAX: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeLevel {
    pub n: usize,
    /// Max over samples of `||v||_{W^{1,q}} / ||w||_q`.
    pub max_ratio: f64,
    /// Max over samples of the logarithmic `L^inf` ratio (`q > 2` only).
    pub max_log_ratio: Option<f64>,
    /// Samples with `w != 0`.
    pub samples_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StokesProbeReport {
    pub q: f64,
    pub seed: u64,
    pub levels: Vec<ProbeLevel>,
    /// No level-to-level growth of `max_ratio` above 25%.
    pub stable: bool,
    /// Same rule for the logarithmic ratio.
    pub log_stable: Option<bool>,
}

fn w1q(v: &crate::fields::VectorField, q: f64) -> Result<f64> {
    let a = v.lq_norm(q)?;
    let b = v.grad_norm(q)?;
    Ok((a.powf(q) + b.powf(q)).powf(1.0 / q))
}

/// Run `sample_count` members of the seeded random family through the Stokes
/// solve on each grid.
pub fn stokes_regularity_probe(
    sample_count: usize,
    q: f64,
    grids: &[GridSpec],
    seed: u64,
) -> Result<StokesProbeReport> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "probe exponent must lie in (1, inf), got {q}"
        )));
    }
    if grids.iter().any(|g| g.is_periodic()) {
        return Err(Error::InvalidParameter(
            "regularity probe needs the walled square".into(),
        ));
    }
    let with_log = q > 2.0;
    let mut levels = Vec::with_capacity(grids.len());
    for g in grids {
        let sys = shared_saddle(g)?;
        let mut max_ratio: f64 = 0.0;
        let mut max_log: f64 = 0.0;
        let mut used = 0;
        for m in 0..sample_count {
            let series = family_member(seed, m, PROBE_KMAX);
            if series.is_zero() {
                continue;
            }
            let w = series.sample(*g, ScalarPlacement::CellCenter);
            let wq = w.lq_norm(q)?;
            if wq == 0.0 {
                continue;
            }
            used += 1;
            let sol = sys.solve(&ops::perp_grad(&w)?, DEFAULT_TOL)?;
            if !sol.converged {
                return Err(Error::ToleranceNotReached {
                    residual: sol.residual,
                    tol: DEFAULT_TOL,
                });
            }
            max_ratio = max_ratio.max(w1q(&sol.v, q)? / wq);
            if with_log {
                let num = sol.v.grad_norm(f64::INFINITY)?;
                let den = (1.0 + w.lq_norm(f64::INFINITY)?)
                    * (std::f64::consts::E + w.grad_norm(q)?).ln();
                max_log = max_log.max(num / den);
            }
        }
        levels.push(ProbeLevel {
            n: g.n(),
            max_ratio,
            max_log_ratio: with_log.then_some(max_log),
            samples_used: used,
        });
    }
    let ratios: Vec<f64> = levels.iter().map(|l| l.max_ratio).collect();
    let log_stable = with_log.then(|| {
        let s: Vec<f64> = levels.iter().filter_map(|l| l.max_log_ratio).collect();
        growth_bounded(&s)
    });
    Ok(StokesProbeReport {
        q,
        seed,
        stable: growth_bounded(&ratios),
        levels,
        log_stable,
    })
}
