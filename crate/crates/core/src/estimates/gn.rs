//! Empirical constants of four two-dimensional Gagliardo-Nirenberg
//! inequalities:
//!
//! 1. `|f|_4 <= C (|f|_2^{1/2} |grad f|_2^{1/2} + |f|_2)`
//! 2. `|grad f|_4 <= C (|f|_2^{1/4} |grad^2 f|_2^{3/4} + |f|_2)`
//! 3. `|f|_inf <= C (|f|_2^{1/2} |grad^2 f|_2^{1/2} + |f|_2)`
//! 4. `|f|_inf <= C (|f|_2^{2/3} |grad^3 f|_2^{1/3} + |f|_2)`

use super::refine::growth_bounded;
use crate::error::Result;
use crate::fields::random::family_member;
use crate::fields::{Derivatives, GridSpec, LqNorm, ScalarField, ScalarPlacement};
use crate::stokes::PROBE_KMAX;

/// `LHS / RHS` with `C = 1` for the four inequalities, or `None` for `f = 0`.
pub fn gn_ratios(f: &ScalarField) -> Result<Option<[f64; 4]>> {
    let l2 = f.lq_norm(2.0)?;
    if l2 == 0.0 {
        return Ok(None);
    }
    let linf = f.lq_norm(f64::INFINITY)?;
    let g2 = f.grad_norm(2.0)?;
    let h2 = f.hessian_norm(2.0)?;
    let t2 = f.third_norm(2.0)?;
    Ok(Some([
        f.lq_norm(4.0)? / (l2.sqrt() * g2.sqrt() + l2),
        f.grad_norm(4.0)? / (l2.powf(0.25) * h2.powf(0.75) + l2),
        linf / (l2.sqrt() * h2.sqrt() + l2),
        linf / (l2.powf(2.0 / 3.0) * t2.powf(1.0 / 3.0) + l2),
    ]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnLevel {
    pub n: usize,
    /// Max over samples of each ratio.
    pub max_ratio: [f64; 4],
    pub samples_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnReport {
    pub seed: u64,
    pub levels: Vec<GnLevel>,
    /// Per inequality: no level-to-level growth above 25%.
    pub stable: [bool; 4],
}

impl GnReport {
    /// Level maxima of inequality `k` (0-based), coarse to fine.
    pub fn series(&self, k: usize) -> Vec<f64> {
        self.levels.iter().map(|l| l.max_ratio[k]).collect()
    }
}

/// Sample `sample_count` members of the seeded random family (cell-centered)
/// on every grid.
pub fn gn_probe(sample_count: usize, grids: &[GridSpec], seed: u64) -> Result<GnReport> {
    let mut levels = Vec::with_capacity(grids.len());
    for g in grids {
        let mut max_ratio = [0.0f64; 4];
        let mut used = 0;
        for m in 0..sample_count {
            let f = family_member(seed, m, PROBE_KMAX).sample(*g, ScalarPlacement::CellCenter);
            if let Some(r) = gn_ratios(&f)? {
                used += 1;
                for (a, b) in max_ratio.iter_mut().zip(r) {
                    *a = a.max(b);
                }
            }
        }
        levels.push(GnLevel {
            n: g.n(),
            max_ratio,
            samples_used: used,
        });
    }
    let mut report = GnReport {
        seed,
        levels,
        stable: [false; 4],
    };
    for k in 0..4 {
        report.stable[k] = growth_bounded(&report.series(k));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_is_skipped() {
        let g = GridSpec::dirichlet(8).unwrap();
        assert_eq!(
            gn_ratios(&ScalarField::zeros(g, ScalarPlacement::CellCenter)).unwrap(),
            None
        );
    }

    #[test]
    fn constant_field_has_unit_first_ratio() {
        for g in [
            GridSpec::dirichlet(8).unwrap(),
            GridSpec::periodic(8).unwrap(),
        ] {
            let f = ScalarField::cells(g, |_, _| -2.5);
            let r = gn_ratios(&f).unwrap().unwrap();
            assert!((r[0] - 1.0).abs() < 1e-14, "{r:?}");
            assert!((r[2] - 1.0).abs() < 1e-14 && (r[3] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn ratios_are_scale_invariant() {
        let g = GridSpec::dirichlet(16).unwrap();
        let f = family_member(3, 1, PROBE_KMAX).sample(g, ScalarPlacement::CellCenter);
        let a = gn_ratios(&f).unwrap().unwrap();
        let b = gn_ratios(&f.scaled(7.0)).unwrap().unwrap();
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12 * x);
        }
    }

    #[test]
    fn probe_is_reproducible_and_bounded() {
        let grids = [
            GridSpec::dirichlet(16).unwrap(),
            GridSpec::dirichlet(32).unwrap(),
        ];
        let a = gn_probe(8, &grids, 1).unwrap();
        assert_eq!(a, gn_probe(8, &grids, 1).unwrap());
        assert_eq!(a.levels[0].samples_used, 8);
        assert!(a.stable.iter().all(|&s| s), "{a:?}");
    }
}
