//! Discrete Lebesgue and Sobolev norms by midpoint quadrature at each
//! placement.
//!
//! Vector norms combine components in the `l^q` sense,
//! `|v|_q^q = |v_x|_q^q + |v_y|_q^q`, which is the Euclidean norm for `q = 2`
//! and equivalent to it otherwise. Derivative tensors are combined the same
//! way, with mixed second derivatives counted twice and mixed third
//! derivatives three times (the multiplicity in the full tensor).

use super::field::{ScalarField, ScalarPlacement, VectorField, VectorPlacement};
use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Exponent of an `L^q` norm, `q >= 1` or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(q: f64) -> Result<Self> {
        if q == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if q >= 1.0 && q.is_finite() {
            Ok(Exponent::Finite(q))
        } else {
            Err(Error::InvalidParameter(format!(
                "L^q exponent must be >= 1, got {q}"
            )))
        }
    }
}

/// Accumulator for `sum w_k |f_k|^q` or `max |f_k|`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LqSum {
    q: Exponent,
    acc: f64,
}

impl LqSum {
    pub(crate) fn new(q: Exponent) -> Self {
        Self { q, acc: 0.0 }
    }

    #[inline]
    pub(crate) fn add(&mut self, weight: f64, v: f64) {
        match self.q {
            Exponent::Infinity => self.acc = self.acc.max(v.abs()),
            Exponent::Finite(q) => {
                let a = v.abs();
                if a != 0.0 {
                    self.acc += weight * if q == 2.0 { a * a } else { a.powf(q) };
                }
            }
        }
    }

    #[inline]
    pub(crate) fn add_times(&mut self, weight: f64, v: f64, multiplicity: f64) {
        match self.q {
            Exponent::Infinity => self.acc = self.acc.max(v.abs()),
            Exponent::Finite(_) => self.add(weight * multiplicity, v),
        }
    }

    /// The norm itself (q-th root taken).
    pub(crate) fn norm(&self) -> f64 {
        match self.q {
            Exponent::Infinity => self.acc,
            Exponent::Finite(q) => {
                if q == 2.0 {
                    self.acc.sqrt()
                } else {
                    self.acc.powf(1.0 / q)
                }
            }
        }
    }
}

/// Anything with an `L^q` norm on the unit square.
pub trait LqNorm {
    fn lq_norm(&self, q: f64) -> Result<f64>;
}

impl LqNorm for ScalarField {
    fn lq_norm(&self, q: f64) -> Result<f64> {
        let mut acc = LqSum::new(Exponent::new(q)?);
        let (c, r) = self.dims();
        for j in 0..r {
            for i in 0..c {
                acc.add(self.weight(i, j), self.data[j * c + i]);
            }
        }
        Ok(acc.norm())
    }
}

impl LqNorm for VectorField {
    fn lq_norm(&self, q: f64) -> Result<f64> {
        let mut acc = LqSum::new(Exponent::new(q)?);
        let (xc, xr) = self.xdims();
        for j in 0..xr {
            for i in 0..xc {
                acc.add(self.xweight(i, j), self.x[j * xc + i]);
            }
        }
        let (yc, yr) = self.ydims();
        for j in 0..yr {
            for i in 0..yc {
                acc.add(self.yweight(i, j), self.y[j * yc + i]);
            }
        }
        Ok(acc.norm())
    }
}

/// `||f||_{L^q}`; `q = f64::INFINITY` gives the max norm.
pub fn lq_norm<F: LqNorm + ?Sized>(f: &F, q: f64) -> Result<f64> {
    f.lq_norm(q)
}

/// The standard Sobolev quantities of one field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SobolevNorms {
    /// `||grad f||_{L^2}`
    pub h1_semi: f64,
    /// `(||f||^2 + ||grad f||^2)^{1/2}`
    pub h1_full: f64,
    /// `||grad^2 f||_{L^2}`
    pub h2_semi: f64,
    /// `(||f||_{L^4}^4 + ||grad f||_{L^4}^4)^{1/4}`
    pub w14: f64,
}

/// Discrete derivative norms.
pub trait Derivatives {
    /// `||grad f||_{L^q}`
    fn grad_norm(&self, q: f64) -> Result<f64>;
    /// `||grad^2 f||_{L^q}`
    fn hessian_norm(&self, q: f64) -> Result<f64>;
    /// `||grad^3 f||_{L^q}`
    fn third_norm(&self, q: f64) -> Result<f64>;
}

pub fn sobolev_norms<F: Derivatives + LqNorm>(f: &F) -> Result<SobolevNorms> {
    let l2 = f.lq_norm(2.0)?;
    let g2 = f.grad_norm(2.0)?;
    let l4 = f.lq_norm(4.0)?;
    let g4 = f.grad_norm(4.0)?;
    Ok(SobolevNorms {
        h1_semi: g2,
        h1_full: (l2 * l2 + g2 * g2).sqrt(),
        h2_semi: f.hessian_norm(2.0)?,
        w14: (l4.powi(4) + g4.powi(4)).powf(0.25),
    })
}

/// One-dimensional line of samples with an optional wall closure.
///
/// Scalars carry no boundary condition, so their differences only use
/// in-domain samples. Velocity components tangential to a wall see the zero
/// wall value through a ghost sample.
#[derive(Clone, Copy, PartialEq)]
enum Closure {
    /// Periodic wrap.
    Wrap,
    /// Only in-range differences.
    Open,
    /// Samples sit half a cell inside zero walls at both ends.
    HalfCellWall,
    /// Samples include the wall points themselves (values zero there).
    OnWall,
}

/// Difference stencils of order 1..=3 along one line of `len` samples,
/// each returned with its quadrature multiplier (1 or 1/2 at walls).
fn line_diffs(vals: &[f64], closure: Closure, h: f64, order: usize, out: &mut Vec<(f64, f64)>) {
    out.clear();
    let len = vals.len();
    match closure {
        Closure::Wrap => {
            let at = |k: isize| vals[k.rem_euclid(len as isize) as usize];
            for k in 0..len as isize {
                let d = match order {
                    1 => (at(k) - at(k - 1)) / h,
                    2 => (at(k + 1) - 2.0 * at(k) + at(k - 1)) / (h * h),
                    _ => (at(k + 1) - 3.0 * at(k) + 3.0 * at(k - 1) - at(k - 2)) / (h * h * h),
                };
                out.push((d, 1.0));
            }
        }
        Closure::Open | Closure::OnWall => {
            if len <= order {
                return;
            }
            for k in 0..len - order {
                let d = match order {
                    1 => (vals[k + 1] - vals[k]) / h,
                    2 => (vals[k + 2] - 2.0 * vals[k + 1] + vals[k]) / (h * h),
                    _ => {
                        (vals[k + 3] - 3.0 * vals[k + 2] + 3.0 * vals[k + 1] - vals[k])
                            / (h * h * h)
                    }
                };
                out.push((d, 1.0));
            }
        }
        Closure::HalfCellWall => {
            // First differences: linear ghost (wall gradient 2 u_0 / h), weight 1/2
            // on the wall points; consistent with the solver Laplacian.
            // Higher differences: quadratic ghost -2 u_0 + u_1 / 3.
            let ghost_lo = -2.0 * vals[0] + vals[1] / 3.0;
            let ghost_hi = -2.0 * vals[len - 1] + vals[len - 2] / 3.0;
            match order {
                1 => {
                    out.push((2.0 * vals[0] / h, 0.5));
                    for k in 0..len - 1 {
                        out.push(((vals[k + 1] - vals[k]) / h, 1.0));
                    }
                    out.push((-2.0 * vals[len - 1] / h, 0.5));
                }
                2 => {
                    let mut ext = Vec::with_capacity(len + 2);
                    ext.push(ghost_lo);
                    ext.extend_from_slice(vals);
                    ext.push(ghost_hi);
                    for k in 1..=len {
                        out.push(((ext[k + 1] - 2.0 * ext[k] + ext[k - 1]) / (h * h), 1.0));
                    }
                }
                _ => {
                    let mut ext = Vec::with_capacity(len + 2);
                    ext.push(ghost_lo);
                    ext.extend_from_slice(vals);
                    ext.push(ghost_hi);
                    for k in 0..ext.len() - 3 {
                        let d = (ext[k + 3] - 3.0 * ext[k + 2] + 3.0 * ext[k + 1] - ext[k])
                            / (h * h * h);
                        out.push((d, 1.0));
                    }
                }
            }
        }
    }
}

/// A 2D array with a closure per axis.
struct Plane<'a> {
    data: &'a [f64],
    cols: usize,
    rows: usize,
    cx: Closure,
    cy: Closure,
    h: f64,
}

impl Plane<'_> {
    fn col(&self, i: usize) -> Vec<f64> {
        (0..self.rows)
            .map(|j| self.data[j * self.cols + i])
            .collect()
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.cols..(j + 1) * self.cols]
    }

    /// Apply `order_x` differences along x then `order_y` along y, feeding every
    /// resulting value to `acc` with multiplicity `mult`.
    fn mixed(&self, order_x: usize, order_y: usize, mult: f64, acc: &mut LqSum) {
        let h2 = self.h * self.h;
        let mut buf = Vec::new();
        // differentiate along x row by row
        let (xd, xw): (Vec<Vec<f64>>, Vec<f64>) = if order_x == 0 {
            (
                (0..self.rows).map(|j| self.row(j).to_vec()).collect(),
                vec![1.0; self.cols],
            )
        } else {
            let mut rows = Vec::with_capacity(self.rows);
            let mut weights = Vec::new();
            for j in 0..self.rows {
                line_diffs(self.row(j), self.cx, self.h, order_x, &mut buf);
                if j == 0 {
                    weights = buf.iter().map(|p| p.1).collect();
                }
                rows.push(buf.iter().map(|p| p.0).collect::<Vec<_>>());
            }
            (rows, weights)
        };
        let ncols = xw.len();
        if ncols == 0 {
            return;
        }
        if order_y == 0 {
            let yw = self.axis_weights(self.cy, self.rows);
            for (j, row) in xd.iter().enumerate() {
                for (i, v) in row.iter().enumerate() {
                    acc.add_times(h2 * xw[i] * yw[j], *v, mult);
                }
            }
            return;
        }
        for i in 0..ncols {
            let column: Vec<f64> = xd.iter().map(|r| r[i]).collect();
            line_diffs(&column, self.cy, self.h, order_y, &mut buf);
            for (d, wy) in &buf {
                acc.add_times(h2 * xw[i] * wy, *d, mult);
            }
        }
    }

    fn axis_weights(&self, c: Closure, len: usize) -> Vec<f64> {
        let mut w = vec![1.0; len];
        if c == Closure::OnWall && len > 1 {
            w[0] = 0.5;
            w[len - 1] = 0.5;
        }
        w
    }

    #[allow(dead_code)]
    fn column_count(&self) -> usize {
        self.col(0).len()
    }
}

fn scalar_plane(s: &ScalarField) -> Plane<'_> {
    let g = s.grid();
    let (cols, rows) = s.dims();
    let c = if g.is_periodic() {
        Closure::Wrap
    } else {
        match s.placement() {
            ScalarPlacement::CellCenter => Closure::Open,
            ScalarPlacement::Node => Closure::OnWall,
        }
    };
    Plane {
        data: &s.data,
        cols,
        rows,
        cx: c,
        cy: c,
        h: g.h(),
    }
}

/// The component planes of a MAC field: x-component has wall points along x
/// and half-cell walls along y; mirrored for the y-component.
fn mac_planes(v: &VectorField) -> [Plane<'_>; 2] {
    let g = v.grid();
    let (xc, xr) = v.xdims();
    let (yc, yr) = v.ydims();
    let (a, b) = if g.is_periodic() {
        (Closure::Wrap, Closure::Wrap)
    } else {
        (Closure::OnWall, Closure::HalfCellWall)
    };
    [
        Plane {
            data: &v.x,
            cols: xc,
            rows: xr,
            cx: a,
            cy: b,
            h: g.h(),
        },
        Plane {
            data: &v.y,
            cols: yc,
            rows: yr,
            cx: b,
            cy: a,
            h: g.h(),
        },
    ]
}

fn colocated_planes(v: &VectorField) -> [Plane<'_>; 2] {
    let g = v.grid();
    let (c, r) = v.xdims();
    let cl = if g.is_periodic() {
        Closure::Wrap
    } else {
        Closure::OnWall
    };
    [
        Plane {
            data: &v.x,
            cols: c,
            rows: r,
            cx: cl,
            cy: cl,
            h: g.h(),
        },
        Plane {
            data: &v.y,
            cols: c,
            rows: r,
            cx: cl,
            cy: cl,
            h: g.h(),
        },
    ]
}

fn derivative_norm(planes: &[Plane<'_>], order: usize, q: f64) -> Result<f64> {
    let mut acc = LqSum::new(Exponent::new(q)?);
    for p in planes {
        for ox in 0..=order {
            let oy = order - ox;
            let mult = binomial(order, ox) as f64;
            p.mixed(ox, oy, mult, &mut acc);
        }
    }
    Ok(acc.norm())
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

impl Derivatives for ScalarField {
    fn grad_norm(&self, q: f64) -> Result<f64> {
        derivative_norm(&[scalar_plane(self)], 1, q)
    }
    fn hessian_norm(&self, q: f64) -> Result<f64> {
        derivative_norm(&[scalar_plane(self)], 2, q)
    }
    fn third_norm(&self, q: f64) -> Result<f64> {
        derivative_norm(&[scalar_plane(self)], 3, q)
    }
}

impl Derivatives for VectorField {
    fn grad_norm(&self, q: f64) -> Result<f64> {
        derivative_norm(&self.planes(), 1, q)
    }
    fn hessian_norm(&self, q: f64) -> Result<f64> {
        derivative_norm(&self.planes(), 2, q)
    }
    fn third_norm(&self, q: f64) -> Result<f64> {
        derivative_norm(&self.planes(), 3, q)
    }
}

impl VectorField {
    fn planes(&self) -> [Plane<'_>; 2] {
        match self.placement() {
            VectorPlacement::Mac => mac_planes(self),
            VectorPlacement::Colocated => colocated_planes(self),
        }
    }
}

/// Grid-level helper used by estimate probes: max over entries.
pub fn max_abs_cells(g: &GridSpec, data: &[f64]) -> f64 {
    debug_assert_eq!(data.len(), g.n() * g.n());
    data.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ops;
    use std::f64::consts::PI;

    #[test]
    fn unit_constant_any_q() {
        let g = GridSpec::dirichlet(16).unwrap();
        for pl in [ScalarPlacement::CellCenter, ScalarPlacement::Node] {
            let f = ScalarField::sample(g, pl, |_, _| 1.0);
            for q in [1.0, 2.0, 3.5, 8.0, f64::INFINITY] {
                assert!((lq_norm(&f, q).unwrap() - 1.0).abs() < 1e-13, "{pl:?} {q}");
            }
        }
    }

    #[test]
    fn zero_and_bad_exponent() {
        let g = GridSpec::dirichlet(8).unwrap();
        let f = ScalarField::zeros(g, ScalarPlacement::CellCenter);
        assert_eq!(lq_norm(&f, 3.0).unwrap(), 0.0);
        assert!(lq_norm(&f, 0.5).is_err());
    }

    #[test]
    fn half_indicator_l2() {
        let g = GridSpec::dirichlet(16).unwrap();
        let f = ScalarField::cells(g, |x, _| if x < 0.5 { 1.0 } else { 0.0 });
        assert!((lq_norm(&f, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn constant_has_zero_seminorms() {
        let g = GridSpec::dirichlet(16).unwrap();
        let f = ScalarField::cells(g, |_, _| 2.0);
        let s = sobolev_norms(&f).unwrap();
        assert_eq!(s.h1_semi, 0.0);
        assert_eq!(s.h2_semi, 0.0);
        assert!((s.h1_full - 2.0).abs() < 1e-13);
    }

    #[test]
    fn h1_seminorm_matches_energy_form_for_mac() {
        // ||grad u||^2 == -<u, Lap u> for wall-admissible MAC fields
        let g = GridSpec::dirichlet(16).unwrap();
        let mut u =
            VectorField::sample_mac(g, |x, y| ((3.0 * x).sin() + y * y, (x * y).cos() - 0.3 * x));
        u.zero_wall_normals();
        let l = ops::laplacian(&u).unwrap();
        let form = -u.inner(&l).unwrap();
        let h1 = u.grad_norm(2.0).unwrap();
        assert!(
            (h1 * h1 - form).abs() < 1e-10 * form.abs(),
            "{} vs {}",
            h1 * h1,
            form
        );
    }

    #[test]
    fn periodic_h1_converges_to_analytic() {
        let ratio = |n: usize| {
            let g = GridSpec::periodic(n).unwrap();
            let f = ScalarField::cells(g, |x, y| (2.0 * PI * x).sin() * (2.0 * PI * y).sin());
            let s = sobolev_norms(&f).unwrap();
            let l2 = lq_norm(&f, 2.0).unwrap();
            (s.h1_semi / l2).powi(2) / (8.0 * PI * PI)
        };
        let e1 = (ratio(32) - 1.0).abs();
        let e2 = (ratio(64) - 1.0).abs();
        assert!(e2 < 1e-2);
        assert!((e1 / e2 - 4.0).abs() < 0.6);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 1), 3);
        assert_eq!(binomial(2, 1), 2);
        assert_eq!(binomial(3, 0), 1);
    }
}
