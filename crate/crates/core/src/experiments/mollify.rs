//! Grid Gaussian mollifier for cell-centered scalars.

use crate::error::{Error, Result};
use crate::fields::{ScalarField, ScalarPlacement};

/// 1D weights at offsets `-r..=r`: a Gaussian with standard deviation
/// `eps / 2`, truncated at distance `eps`.
fn kernel(eps: f64, h: f64) -> Vec<f64> {
    let r = (eps / h).floor() as isize;
    let sigma = 0.5 * eps;
    (-r..=r)
        .map(|k| (-((k as f64 * h).powi(2)) / (2.0 * sigma * sigma)).exp())
        .collect()
}

/// One normalized 1D pass along `x` (`along_x`) or `y`. On walled grids the
/// kernel is cut at the boundary and renormalized over the in-domain cells;
/// on the torus it wraps.
fn pass(src: &[f64], n: usize, periodic: bool, w: &[f64], along_x: bool) -> Vec<f64> {
    let r = (w.len() / 2) as isize;
    let mut out = vec![0.0; src.len()];
    for j in 0..n {
        for i in 0..n {
            let (mut acc, mut mass) = (0.0, 0.0);
            for (k, wk) in w.iter().enumerate() {
                let c = if along_x { i } else { j } as isize + k as isize - r;
                let c = if periodic {
                    c.rem_euclid(n as isize) as usize
                } else if c < 0 || c >= n as isize {
                    continue;
                } else {
                    c as usize
                };
                let idx = if along_x { j * n + c } else { c * n + i };
                acc += wk * src[idx];
                mass += wk;
            }
            out[j * n + i] = acc / mass;
        }
    }
    out
}

/// Truncated Gaussian blur of width `eps` (physical units), renormalized to
/// unit mass on the grid. Widths below one grid spacing return the input.
pub fn mollify(f: &ScalarField, eps: f64) -> Result<ScalarField> {
    if f.placement() != ScalarPlacement::CellCenter {
        return Err(Error::PlacementMismatch(
            "mollifier acts on cell-centered scalars".into(),
        ));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mollifier width must be > 0, got {eps}"
        )));
    }
    let g = *f.grid();
    let w = kernel(eps, g.h());
    if w.len() == 1 {
        return Ok(f.clone());
    }
    let n = g.n();
    let tmp = pass(&f.data, n, g.is_periodic(), &w, true);
    let data = pass(&tmp, n, g.is_periodic(), &w, false);
    ScalarField::from_data(g, ScalarPlacement::CellCenter, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{GridSpec, LqNorm};
    use std::f64::consts::PI;

    #[test]
    fn constants_are_fixed() {
        for g in [
            GridSpec::dirichlet(16).unwrap(),
            GridSpec::periodic(16).unwrap(),
        ] {
            let f = ScalarField::cells(g, |_, _| 1.5);
            let m = mollify(&f, 3.0 * g.h()).unwrap();
            assert!(m.sub(&f).unwrap().max_abs() < 1e-15);
        }
    }

    #[test]
    fn periodic_blur_preserves_mean_and_damps_modes() {
        let g = GridSpec::periodic(32).unwrap();
        let f = ScalarField::cells(g, |x, y| 1.0 + (2.0 * PI * x).sin() * (4.0 * PI * y).cos());
        let m = mollify(&f, 2.0 * g.h()).unwrap();
        assert!((m.mean() - f.mean()).abs() < 1e-14);
        for q in [2.0, 4.0] {
            assert!(m.lq_norm(q).unwrap() <= f.lq_norm(q).unwrap());
        }
        // a Fourier mode is an eigenvector; its multiplier lies in (0, 1)
        let s = ScalarField::cells(g, |x, _| (2.0 * PI * x).sin());
        let ms = mollify(&s, 2.0 * g.h()).unwrap();
        let ratio = ms.inner(&s).unwrap() / s.inner(&s).unwrap();
        assert!(ratio > 0.9 && ratio < 1.0, "{ratio}");
        assert!(ms.sub(&s.scaled(ratio)).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn narrow_width_is_identity_and_bad_width_errors() {
        let g = GridSpec::dirichlet(8).unwrap();
        let f = ScalarField::cells(g, |x, y| x * y);
        assert_eq!(mollify(&f, 0.5 * g.h()).unwrap(), f);
        assert!(mollify(&f, 0.0).is_err());
        assert!(mollify(&ScalarField::nodes(g, |x, _| x), 0.2).is_err());
    }
}
