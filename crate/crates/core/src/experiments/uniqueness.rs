//! Continuous dependence: the growth of the squared difference of two runs
//! whose data differ by a small smooth perturbation.

use std::f64::consts::PI;

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::estimates::fit_order;
use crate::evolution::{run_simulation, RunOptions};
use crate::fields::{ops, GridSpec, LqNorm, ScalarField, State};

/// Fixed smooth perturbation with `|U|^2 + |W|^2 + |B|^2 = 1`, compatible
/// with both boundary modes.
pub fn unit_perturbation(grid: GridSpec) -> Result<State> {
    let s = |z: f64| (PI * z).sin();
    let su = ScalarField::nodes(grid, |x, y| {
        (s(x) * s(y)).powi(2) * (1.0 + 0.5 * (2.0 * PI * x).cos())
    });
    let sb = ScalarField::nodes(grid, |x, y| (s(x) * s(y)).powi(2) * (2.0 * PI * y).sin());
    let w = ScalarField::cells(grid, |x, y| s(2.0 * x) * s(y));
    let mut p = State::new(0.0, ops::perp_grad(&su)?, w, ops::perp_grad(&sb)?)?;
    let norm2 = p.u.lq_norm(2.0)?.powi(2) + p.w.lq_norm(2.0)?.powi(2) + p.b.lq_norm(2.0)?.powi(2);
    let k = norm2.sqrt().recip();
    p.u.scale(k);
    p.w.scale(k);
    p.b.scale(k);
    Ok(p)
}

/// `|U|^2 + |W|^2 + |B|^2` of the difference of two states.
pub fn squared_distance(a: &State, b: &State) -> Result<f64> {
    Ok(a.u.sub(&b.u)?.lq_norm(2.0)?.powi(2)
        + a.w.sub(&b.w)?.lq_norm(2.0)?.powi(2)
        + a.b.sub(&b.b)?.lq_norm(2.0)?.powi(2))
}

fn perturbed(base: &State, dir: &State, delta: f64) -> Result<State> {
    let mut s = base.clone();
    s.u.axpy(delta, &dir.u)?;
    s.w.axpy(delta, &dir.w)?;
    s.b.axpy(delta, &dir.b)?;
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub delta: f64,
    pub t: Vec<f64>,
    /// `D_delta(t)`
    pub d: Vec<f64>,
    /// `D_{delta/2}(t)`
    pub d_half: Vec<f64>,
    /// Least-squares slope of `log D_delta` against `t` over `t > 0`;
    /// `None` when `D` vanishes.
    pub growth_rate: Option<f64>,
}

impl UniquenessReport {
    /// `D_delta / D_{delta/2}` at every recorded time.
    pub fn ratios(&self) -> Vec<f64> {
        self.d
            .iter()
            .zip(&self.d_half)
            .map(|(a, b)| a / b)
            .collect()
    }
}

/// Least-squares slope of `log y` against `x`.
fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let ex: Vec<f64> = x.iter().map(|v| v.exp()).collect();
    fit_order(&ex, y)
}

pub fn uniqueness_probe(cfg: &RunConfig, delta: f64) -> Result<UniquenessReport> {
    cfg.validate()?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "perturbation size must be >= 0, got {delta}"
        )));
    }
    let base = cfg.initial_state()?;
    let dir = unit_perturbation(cfg.grid())?;
    let opts = RunOptions {
        stride: 1,
        ..cfg.run_options()
    };
    let step = cfg.step_config();
    let run =
        |s: &State| run_simulation(s, cfg.t_end, &step, &cfg.params, opts).map_err(Error::from);
    let reference = run(&base)?;
    let a = run(&perturbed(&base, &dir, delta)?)?;
    let b = run(&perturbed(&base, &dir, 0.5 * delta)?)?;
    let mut report = UniquenessReport {
        delta,
        t: Vec::new(),
        d: Vec::new(),
        d_half: Vec::new(),
        growth_rate: None,
    };
    for ((r, x), y) in reference
        .snapshots
        .iter()
        .zip(&a.snapshots)
        .zip(&b.snapshots)
    {
        report.t.push(r.1.t);
        report.d.push(squared_distance(&x.1, &r.1)?);
        report.d_half.push(squared_distance(&y.1, &r.1)?);
    }
    if report.d.iter().all(|d| *d > 0.0) {
        let (t, d): (Vec<f64>, Vec<f64>) = report
            .t
            .iter()
            .zip(&report.d)
            .filter(|(t, _)| **t > 0.0)
            .unzip();
        report.growth_rate = Some(log_slope(&t, &d)).filter(|r| r.is_finite());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::InitRecipe;
    use crate::experiments::InitSpec;

    fn cfg() -> RunConfig {
        let mut c = RunConfig::default();
        c.n = 16;
        c.init = InitSpec::Recipe(InitRecipe::Smooth);
        c.dt = 2e-3;
        c.t_end = 0.04;
        c
    }

    #[test]
    fn perturbation_has_unit_norm_and_is_solenoidal() {
        for g in [
            GridSpec::dirichlet(16).unwrap(),
            GridSpec::periodic(16).unwrap(),
        ] {
            let p = unit_perturbation(g).unwrap();
            assert!((squared_distance(&p, &State::zeros(g)).unwrap() - 1.0).abs() < 1e-14);
            assert!(ops::div(&p.u).unwrap().max_abs() < 1e-12);
            assert!(ops::div(&p.b).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn zero_perturbation_gives_bit_zero_difference() {
        let r = uniqueness_probe(&cfg(), 0.0).unwrap();
        assert!(r.d.iter().chain(&r.d_half).all(|d| *d == 0.0));
        assert_eq!(r.growth_rate, None);
    }

    #[test]
    fn difference_scales_quadratically() {
        let r = uniqueness_probe(&cfg(), 1e-6).unwrap();
        assert!((r.d[0] - 1e-12).abs() < 1e-20);
        for q in r.ratios() {
            assert!((3.5..=4.5).contains(&q), "{q}");
        }
        assert!(r.growth_rate.unwrap().is_finite());
    }

    #[test]
    fn slope_of_exponential() {
        let t = [0.1, 0.2, 0.3];
        let y: Vec<f64> = t.iter().map(|s: &f64| 2.0 * (-3.0 * s).exp()).collect();
        assert!((log_slope(&t, &y) + 3.0).abs() < 1e-12);
    }
}
