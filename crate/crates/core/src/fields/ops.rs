//! Second-order staggered difference operators.
//!
//! Every operator is linear and allocation-returning. On a dirichlet grid the
//! tangential velocity ghost across a wall is the negated interior value, so the
//! wall value is zero to second order; wall-normal faces are stored and are zero
//! for admissible fields.

use super::field::{ScalarField, ScalarPlacement, VectorField, VectorPlacement};
use crate::error::{Error, Result};

fn mismatch(what: &str) -> Error {
    Error::PlacementMismatch(what.to_string())
}

/// Gradient.
///
/// * cell-centered `s` gives a MAC field: face differences between adjacent cells,
///   zero on wall-normal faces (the adjoint of `-div`).
/// * node `s` gives a colocated field: central differences, one-sided
///   second-order differences on the walls.
pub fn grad(s: &ScalarField) -> Result<VectorField> {
    if !s.is_finite() {
        return Err(Error::InvalidParameter("grad of non-finite field".into()));
    }
    let g = *s.grid();
    let n = g.n();
    let ih = 1.0 / g.h();
    match s.placement() {
        ScalarPlacement::CellCenter => {
            let mut out = VectorField::mac_zeros(g);
            let (xc, xr) = out.xdims();
            let (yc, yr) = out.ydims();
            if g.is_periodic() {
                for j in 0..n {
                    for i in 0..n {
                        let im = g.wrap(i as isize - 1);
                        let jm = g.wrap(j as isize - 1);
                        out.x[j * n + i] = (s.at(i, j) - s.at(im, j)) * ih;
                        out.y[j * n + i] = (s.at(i, j) - s.at(i, jm)) * ih;
                    }
                }
            } else {
                for j in 0..xr {
                    for i in 1..xc - 1 {
                        out.x[j * xc + i] = (s.at(i, j) - s.at(i - 1, j)) * ih;
                    }
                }
                for j in 1..yr - 1 {
                    for i in 0..yc {
                        out.y[j * yc + i] = (s.at(i, j) - s.at(i, j - 1)) * ih;
                    }
                }
            }
            Ok(out)
        }
        ScalarPlacement::Node => {
            let mut out = VectorField::zeros(g, VectorPlacement::Colocated);
            let (c, r) = s.dims();
            for j in 0..r {
                for i in 0..c {
                    out.x[j * c + i] = node_diff(s, i, j, true);
                    out.y[j * c + i] = node_diff(s, i, j, false);
                }
            }
            Ok(out)
        }
    }
}

fn node_diff(s: &ScalarField, i: usize, j: usize, along_x: bool) -> f64 {
    let g = s.grid();
    let (c, _) = s.dims();
    let k = if along_x { i } else { j };
    let val = |kk: usize| if along_x { s.at(kk, j) } else { s.at(i, kk) };
    let ih = 1.0 / g.h();
    if g.is_periodic() {
        let kp = g.wrap(k as isize + 1);
        let km = g.wrap(k as isize - 1);
        return 0.5 * (val(kp) - val(km)) * ih;
    }
    let last = c - 1;
    if k == 0 {
        0.5 * (-3.0 * val(0) + 4.0 * val(1) - val(2)) * ih
    } else if k == last {
        0.5 * (3.0 * val(last) - 4.0 * val(last - 1) + val(last - 2)) * ih
    } else {
        0.5 * (val(k + 1) - val(k - 1)) * ih
    }
}

/// Staggered divergence of a MAC field, landing at cell centers.
pub fn div(v: &VectorField) -> Result<ScalarField> {
    if v.placement() != VectorPlacement::Mac {
        return Err(mismatch("div expects a MAC field"));
    }
    let g = *v.grid();
    let n = g.n();
    let ih = 1.0 / g.h();
    let mut out = ScalarField::zeros(g, ScalarPlacement::CellCenter);
    let (xc, _) = v.xdims();
    let (yc, _) = v.ydims();
    for j in 0..n {
        for i in 0..n {
            let (ip, jp) = if g.is_periodic() {
                (g.wrap(i as isize + 1), g.wrap(j as isize + 1))
            } else {
                (i + 1, j + 1)
            };
            let dx = v.x[j * xc + ip] - v.x[j * xc + i];
            let dy = v.y[jp * yc + i] - v.y[j * yc + i];
            out.data[j * n + i] = (dx + dy) * ih;
        }
    }
    Ok(out)
}

/// Rotated gradient `(-d/dy, d/dx)`.
///
/// * node `s`: exact MAC stencil, `div(perp_grad(s)) == 0` bit-for-bit up to
///   rounding.
/// * cell-centered `s`: the negated transpose of [`cell_vorticity`], which keeps
///   the micro-rotation torque and the vorticity source exactly adjoint.
pub fn perp_grad(s: &ScalarField) -> Result<VectorField> {
    match s.placement() {
        ScalarPlacement::Node => Ok(perp_grad_nodes(s)),
        ScalarPlacement::CellCenter => {
            let mut t = vorticity_adjoint(s)?;
            t.scale(-1.0);
            Ok(t)
        }
    }
}

fn perp_grad_nodes(s: &ScalarField) -> VectorField {
    let g = *s.grid();
    let ih = 1.0 / g.h();
    let mut out = VectorField::mac_zeros(g);
    let (xc, xr) = out.xdims();
    let (yc, yr) = out.ydims();
    if g.is_periodic() {
        for j in 0..xr {
            let jp = g.wrap(j as isize + 1);
            for i in 0..xc {
                out.x[j * xc + i] = -(s.at(i, jp) - s.at(i, j)) * ih;
            }
        }
        for j in 0..yr {
            for i in 0..yc {
                let ip = g.wrap(i as isize + 1);
                out.y[j * yc + i] = (s.at(ip, j) - s.at(i, j)) * ih;
            }
        }
    } else {
        for j in 0..xr {
            for i in 0..xc {
                out.x[j * xc + i] = -(s.at(i, j + 1) - s.at(i, j)) * ih;
            }
        }
        for j in 0..yr {
            for i in 0..yc {
                out.y[j * yc + i] = (s.at(i + 1, j) - s.at(i, j)) * ih;
            }
        }
    }
    out
}

/// Scalar curl `d vy/dx - d vx/dy` of a MAC field at nodes. Wall nodes use the
/// no-slip ghost for the tangential component.
pub fn curl2(v: &VectorField) -> Result<ScalarField> {
    if v.placement() != VectorPlacement::Mac {
        return Err(mismatch("curl2 expects a MAC field"));
    }
    let g = *v.grid();
    let n = g.n();
    let ih = 1.0 / g.h();
    let mut out = ScalarField::zeros(g, ScalarPlacement::Node);
    if g.is_periodic() {
        for j in 0..n {
            let jm = g.wrap(j as isize - 1);
            for i in 0..n {
                let im = g.wrap(i as isize - 1);
                let dvy = v.y[j * n + i] - v.y[j * n + im];
                let dvx = v.x[j * n + i] - v.x[jm * n + i];
                out.data[j * n + i] = (dvy - dvx) * ih;
            }
        }
        return Ok(out);
    }
    let (xc, _) = v.xdims();
    let (yc, _) = v.ydims();
    let nc = n + 1;
    for j in 0..=n {
        for i in 0..=n {
            // y-faces in row j east/west of node i
            let (e, w) = if i == 0 {
                let e = v.y[j * yc];
                (e, -e)
            } else if i == n {
                let w = v.y[j * yc + n - 1];
                (-w, w)
            } else {
                (v.y[j * yc + i], v.y[j * yc + i - 1])
            };
            // x-faces in column i north/south of node j
            let (nn, ss) = if j == 0 {
                let nn = v.x[i];
                (nn, -nn)
            } else if j == n {
                let ss = v.x[(n - 1) * xc + i];
                (-ss, ss)
            } else {
                (v.x[j * xc + i], v.x[(j - 1) * xc + i])
            };
            out.data[j * nc + i] = ((e - w) - (nn - ss)) * ih;
        }
    }
    Ok(out)
}

/// Vorticity `curl2(v)` averaged from the four corner nodes to each cell center.
pub fn cell_vorticity(v: &VectorField) -> Result<ScalarField> {
    let nodes = curl2(v)?;
    let g = *v.grid();
    let n = g.n();
    let mut out = ScalarField::zeros(g, ScalarPlacement::CellCenter);
    for j in 0..n {
        for i in 0..n {
            let (ip, jp) = if g.is_periodic() {
                (g.wrap(i as isize + 1), g.wrap(j as isize + 1))
            } else {
                (i + 1, j + 1)
            };
            out.data[j * n + i] =
                0.25 * (nodes.at(i, j) + nodes.at(ip, j) + nodes.at(i, jp) + nodes.at(ip, jp));
        }
    }
    Ok(out)
}

/// Transpose of [`cell_vorticity`] under the cell and face inner products;
/// approximates `-perp_grad(w)`. Wall-normal faces are zero.
pub fn vorticity_adjoint(w: &ScalarField) -> Result<VectorField> {
    if w.placement() != ScalarPlacement::CellCenter {
        return Err(mismatch("vorticity adjoint expects a cell-centered scalar"));
    }
    let g = *w.grid();
    let n = g.n();
    let ih = 1.0 / g.h();
    // spread cell values to nodes with the transposed averaging weights
    let mut a = ScalarField::zeros(g, ScalarPlacement::Node);
    let (nc, _) = a.dims();
    for j in 0..n {
        for i in 0..n {
            let q = 0.25 * w.at(i, j);
            let (ip, jp) = if g.is_periodic() {
                (g.wrap(i as isize + 1), g.wrap(j as isize + 1))
            } else {
                (i + 1, j + 1)
            };
            a.data[j * nc + i] += q;
            a.data[j * nc + ip] += q;
            a.data[jp * nc + i] += q;
            a.data[jp * nc + ip] += q;
        }
    }
    let mut out = VectorField::mac_zeros(g);
    let (xc, xr) = out.xdims();
    let (yc, yr) = out.ydims();
    if g.is_periodic() {
        for j in 0..n {
            let jp = g.wrap(j as isize + 1);
            for i in 0..n {
                let ip = g.wrap(i as isize + 1);
                out.x[j * n + i] = (a.at(i, jp) - a.at(i, j)) * ih;
                out.y[j * n + i] = (a.at(i, j) - a.at(ip, j)) * ih;
            }
        }
        return Ok(out);
    }
    for r in 0..xr {
        for i in 1..xc - 1 {
            let mut val = a.at(i, r + 1) - a.at(i, r);
            if r == 0 {
                val -= a.at(i, 0);
            }
            if r == n - 1 {
                val += a.at(i, n);
            }
            out.x[r * xc + i] = val * ih;
        }
    }
    for j in 1..yr - 1 {
        for c in 0..yc {
            let mut val = a.at(c, j) - a.at(c + 1, j);
            if c == 0 {
                val += a.at(0, j);
            }
            if c == n - 1 {
                val -= a.at(n, j);
            }
            out.y[j * yc + c] = val * ih;
        }
    }
    Ok(out)
}

/// 5-point Laplacian of a scalar or each component of a vector.
pub trait Laplacian: Sized {
    fn laplacian(&self) -> Result<Self>;
}

impl Laplacian for ScalarField {
    fn laplacian(&self) -> Result<Self> {
        scalar_laplacian(self)
    }
}

impl Laplacian for VectorField {
    fn laplacian(&self) -> Result<Self> {
        vector_laplacian(self)
    }
}

pub fn laplacian<F: Laplacian>(f: &F) -> Result<F> {
    f.laplacian()
}

/// Scalar Laplacian. Cell-centered fields see a homogeneous Dirichlet wall
/// through reflected ghosts; node fields are zero on wall nodes.
pub fn scalar_laplacian(s: &ScalarField) -> Result<ScalarField> {
    let g = *s.grid();
    let ih2 = 1.0 / (g.h() * g.h());
    let mut out = ScalarField::zeros(g, s.placement());
    let (c, r) = s.dims();
    if g.is_periodic() {
        for j in 0..r {
            let jp = g.wrap(j as isize + 1);
            let jm = g.wrap(j as isize - 1);
            for i in 0..c {
                let ip = g.wrap(i as isize + 1);
                let im = g.wrap(i as isize - 1);
                out.data[j * c + i] = (s.at(ip, j) + s.at(im, j) + s.at(i, jp) + s.at(i, jm)
                    - 4.0 * s.at(i, j))
                    * ih2;
            }
        }
        return Ok(out);
    }
    match s.placement() {
        ScalarPlacement::CellCenter => {
            for j in 0..r {
                for i in 0..c {
                    let x0 = s.at(i, j);
                    let xe = if i + 1 < c { s.at(i + 1, j) } else { -x0 };
                    let xw = if i > 0 { s.at(i - 1, j) } else { -x0 };
                    let xn = if j + 1 < r { s.at(i, j + 1) } else { -x0 };
                    let xs = if j > 0 { s.at(i, j - 1) } else { -x0 };
                    out.data[j * c + i] = (xe + xw + xn + xs - 4.0 * x0) * ih2;
                }
            }
        }
        ScalarPlacement::Node => {
            for j in 1..r - 1 {
                for i in 1..c - 1 {
                    out.data[j * c + i] =
                        (s.at(i + 1, j) + s.at(i - 1, j) + s.at(i, j + 1) + s.at(i, j - 1)
                            - 4.0 * s.at(i, j))
                            * ih2;
                }
            }
        }
    }
    Ok(out)
}

/// Component-wise Laplacian. For MAC fields on a dirichlet grid the wall-normal
/// faces are held at zero and tangential ghosts are reflected.
pub fn vector_laplacian(v: &VectorField) -> Result<VectorField> {
    let g = *v.grid();
    match v.placement() {
        VectorPlacement::Colocated => {
            let (c, r) = v.xdims();
            let xs = ScalarField::from_data(g, ScalarPlacement::Node, v.x.clone())?;
            let ys = ScalarField::from_data(g, ScalarPlacement::Node, v.y.clone())?;
            let lx = scalar_laplacian(&xs)?;
            let ly = scalar_laplacian(&ys)?;
            debug_assert_eq!(lx.data.len(), c * r);
            VectorField::from_data(g, VectorPlacement::Colocated, lx.data, ly.data)
        }
        VectorPlacement::Mac => {
            let mut out = VectorField::mac_zeros(g);
            let ih2 = 1.0 / (g.h() * g.h());
            if g.is_periodic() {
                let n = g.n();
                for comp in 0..2 {
                    let src = if comp == 0 { &v.x } else { &v.y };
                    let dst = if comp == 0 { &mut out.x } else { &mut out.y };
                    for j in 0..n {
                        let jp = g.wrap(j as isize + 1);
                        let jm = g.wrap(j as isize - 1);
                        for i in 0..n {
                            let ip = g.wrap(i as isize + 1);
                            let im = g.wrap(i as isize - 1);
                            dst[j * n + i] = (src[j * n + ip]
                                + src[j * n + im]
                                + src[jp * n + i]
                                + src[jm * n + i]
                                - 4.0 * src[j * n + i])
                                * ih2;
                        }
                    }
                }
                return Ok(out);
            }
            // x component: interior columns 1..n-1, ghost rows below/above
            let (xc, xr) = v.xdims();
            for j in 0..xr {
                for i in 1..xc - 1 {
                    let x0 = v.x[j * xc + i];
                    let xn = if j + 1 < xr {
                        v.x[(j + 1) * xc + i]
                    } else {
                        -x0
                    };
                    let xs = if j > 0 { v.x[(j - 1) * xc + i] } else { -x0 };
                    out.x[j * xc + i] =
                        (v.x[j * xc + i + 1] + v.x[j * xc + i - 1] + xn + xs - 4.0 * x0) * ih2;
                }
            }
            let (yc, yr) = v.ydims();
            for j in 1..yr - 1 {
                for i in 0..yc {
                    let y0 = v.y[j * yc + i];
                    let ye = if i + 1 < yc { v.y[j * yc + i + 1] } else { -y0 };
                    let yw = if i > 0 { v.y[j * yc + i - 1] } else { -y0 };
                    out.y[j * yc + i] =
                        (ye + yw + v.y[(j + 1) * yc + i] + v.y[(j - 1) * yc + i] - 4.0 * y0) * ih2;
                }
            }
            Ok(out)
        }
    }
}

/// Average MAC components to cell centers.
pub fn mac_to_cells(v: &VectorField) -> Result<(ScalarField, ScalarField)> {
    if v.placement() != VectorPlacement::Mac {
        return Err(mismatch("expected a MAC field"));
    }
    let g = *v.grid();
    let n = g.n();
    let (xc, _) = v.xdims();
    let (yc, _) = v.ydims();
    let mut cx = ScalarField::zeros(g, ScalarPlacement::CellCenter);
    let mut cy = ScalarField::zeros(g, ScalarPlacement::CellCenter);
    for j in 0..n {
        for i in 0..n {
            let (ip, jp) = if g.is_periodic() {
                (g.wrap(i as isize + 1), g.wrap(j as isize + 1))
            } else {
                (i + 1, j + 1)
            };
            cx.data[j * n + i] = 0.5 * (v.x[j * xc + i] + v.x[j * xc + ip]);
            cy.data[j * n + i] = 0.5 * (v.y[j * yc + i] + v.y[jp * yc + i]);
        }
    }
    Ok((cx, cy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::GridSpec;
    use std::f64::consts::PI;

    fn dgrid(n: usize) -> GridSpec {
        GridSpec::dirichlet(n).unwrap()
    }

    #[test]
    fn grad_of_constant_is_zero() {
        for g in [dgrid(16), GridSpec::periodic(16).unwrap()] {
            let s = ScalarField::cells(g, |_, _| 5.0);
            assert_eq!(grad(&s).unwrap().max_abs(), 0.0);
            let s = ScalarField::nodes(g, |_, _| 5.0);
            assert_eq!(grad(&s).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn grad_of_linear_node_field() {
        let g = dgrid(16);
        let s = ScalarField::nodes(g, |x, _| x);
        let v = grad(&s).unwrap();
        for k in 0..v.x.len() {
            assert!((v.x[k] - 1.0).abs() < 1e-12);
            assert!(v.y[k].abs() < 1e-12);
        }
    }

    #[test]
    fn grad_of_linear_cell_field_interior() {
        let g = dgrid(16);
        let s = ScalarField::cells(g, |x, _| x);
        let v = grad(&s).unwrap();
        for j in 0..16 {
            for i in 1..16 {
                assert!((v.xat(i, j) - 1.0).abs() < 1e-12);
            }
        }
        assert!(v.y.iter().all(|y| y.abs() < 1e-12));
    }

    #[test]
    fn div_rejects_colocated() {
        let g = dgrid(8);
        let v = VectorField::zeros(g, VectorPlacement::Colocated);
        assert!(matches!(div(&v), Err(Error::PlacementMismatch(_))));
    }

    #[test]
    fn div_of_hyperbolic_field_is_zero() {
        let g = dgrid(16);
        let v = VectorField::sample_mac(g, |x, y| (x, -y));
        let d = div(&v).unwrap();
        assert!(d.max_abs() < 1e-12);
    }

    #[test]
    fn perp_grad_of_y_is_minus_one_zero() {
        let g = dgrid(16);
        let s = ScalarField::nodes(g, |_, y| y);
        let v = perp_grad(&s).unwrap();
        assert!(v.x.iter().all(|x| (x + 1.0).abs() < 1e-12));
        assert!(v.y.iter().all(|y| y.abs() < 1e-12));
    }

    #[test]
    fn cell_perp_grad_of_y_in_interior() {
        let g = dgrid(16);
        let s = ScalarField::cells(g, |_, y| y);
        let v = perp_grad(&s).unwrap();
        for j in 1..15 {
            for i in 1..16 {
                assert!((v.xat(i, j) + 1.0).abs() < 1e-12, "{i} {j} {}", v.xat(i, j));
            }
        }
        for j in 1..16 {
            for i in 1..15 {
                assert!(v.yat(i, j).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rigid_rotation_has_vorticity_two() {
        let g = dgrid(16);
        let v = VectorField::sample_mac(g, |x, y| (-y, x));
        let c = curl2(&v).unwrap();
        for j in 1..16 {
            for i in 1..16 {
                assert!((c.at(i, j) - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dirichlet_cell_laplacian_is_second_order() {
        let err = |n: usize| {
            let g = dgrid(n);
            let f = ScalarField::cells(g, |x, y| (PI * x).sin() * (PI * y).sin());
            let l = laplacian(&f).unwrap();
            let mut e: f64 = 0.0;
            for k in 0..f.data.len() {
                e = e.max((l.data[k] + 2.0 * PI * PI * f.data[k]).abs());
            }
            e
        };
        let r = err(32) / err(64);
        assert!((r - 4.0).abs() < 0.6, "ratio {r}");
    }

    #[test]
    fn periodic_constant_laplacian_zero() {
        let g = GridSpec::periodic(16).unwrap();
        let f = ScalarField::cells(g, |_, _| 3.0);
        assert_eq!(laplacian(&f).unwrap().max_abs(), 0.0);
        let v = VectorField::sample_mac(g, |_, _| (1.0, -2.0));
        assert_eq!(laplacian(&v).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn vorticity_adjoint_approximates_minus_perp_grad_in_interior() {
        let g = dgrid(64);
        let w = ScalarField::cells(g, |x, y| (2.0 * PI * x).cos() * (PI * y).sin());
        let t = vorticity_adjoint(&w).unwrap();
        // -perp_grad(w) = (dw/dy, -dw/dx)
        let (xc, xr) = t.xdims();
        let mut e: f64 = 0.0;
        for j in 1..xr - 1 {
            for i in 1..xc - 1 {
                let (x, y) = g.xface(i, j);
                let ex = PI * (2.0 * PI * x).cos() * (PI * y).cos();
                e = e.max((t.xat(i, j) - ex).abs());
            }
        }
        assert!(e < 0.05, "interior error {e}");
    }
}
