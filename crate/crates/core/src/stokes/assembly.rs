//! Sparse matrices of the staggered operators, stencil-for-stencil identical to
//! the matrix-free versions in `fields::ops`.

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};
use crate::fields::{GridSpec, VectorField, VectorPlacement};

/// Numbering of the free (non wall-normal) MAC velocity unknowns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacIndex {
    grid: GridSpec,
    nx: usize,
    ny: usize,
}

impl MacIndex {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.n();
        let (nx, ny) = if grid.is_periodic() {
            (n * n, n * n)
        } else {
            ((n - 1) * n, n * (n - 1))
        };
        Self { grid, nx, ny }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.nx + self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x_count(&self) -> usize {
        self.nx
    }

    /// Unknown number of x-face `(i, j)`, `None` on a wall.
    pub fn x_dof(&self, i: usize, j: usize) -> Option<usize> {
        let n = self.grid.n();
        if self.grid.is_periodic() {
            Some(j * n + i)
        } else if i == 0 || i >= n {
            None
        } else {
            Some(j * (n - 1) + i - 1)
        }
    }

    /// Unknown number of y-face `(i, j)`, `None` on a wall.
    pub fn y_dof(&self, i: usize, j: usize) -> Option<usize> {
        let n = self.grid.n();
        if self.grid.is_periodic() {
            Some(self.nx + j * n + i)
        } else if j == 0 || j >= n {
            None
        } else {
            Some(self.nx + (j - 1) * n + i)
        }
    }

    /// Visit every unknown as `(dof, component, i, j)`.
    pub fn for_each(&self, mut f: impl FnMut(usize, usize, usize, usize)) {
        let n = self.grid.n();
        let (xc, xr) = self.grid.xface_dims();
        for j in 0..xr {
            for i in 0..xc {
                if let Some(k) = self.x_dof(i, j) {
                    f(k, 0, i, j);
                }
            }
        }
        let (yc, yr) = self.grid.yface_dims();
        for j in 0..yr {
            for i in 0..yc {
                if let Some(k) = self.y_dof(i, j) {
                    f(k, 1, i, j);
                }
            }
        }
        debug_assert!(n > 0);
    }

    pub fn gather(&self, v: &VectorField) -> Result<Vec<f64>> {
        if v.placement() != VectorPlacement::Mac || v.grid() != &self.grid {
            return Err(Error::PlacementMismatch(
                "expected a MAC field on the index grid".into(),
            ));
        }
        let mut out = vec![0.0; self.len()];
        self.for_each(|k, comp, i, j| {
            out[k] = if comp == 0 { v.xat(i, j) } else { v.yat(i, j) };
        });
        Ok(out)
    }

    /// MAC field from unknowns; wall-normal faces are zero.
    pub fn scatter(&self, data: &[f64]) -> VectorField {
        let mut v = VectorField::mac_zeros(self.grid);
        let (xc, _) = v.xdims();
        let (yc, _) = v.ydims();
        self.for_each(|k, comp, i, j| {
            if comp == 0 {
                v.x[j * xc + i] = data[k];
            } else {
                v.y[j * yc + i] = data[k];
            }
        });
        v
    }
}

/// Cell index of cell `(i, j)`, wrapping in periodic mode.
fn cell(g: &GridSpec, i: isize, j: isize) -> usize {
    let n = g.n() as isize;
    let (i, j) = if g.is_periodic() {
        (i.rem_euclid(n), j.rem_euclid(n))
    } else {
        (i, j)
    };
    (j * n + i) as usize
}

/// The two cells a free face separates, as `(cell, coefficient of grad)`.
pub fn face_gradient(g: &GridSpec, comp: usize, i: usize, j: usize) -> [(usize, f64); 2] {
    let ih = 1.0 / g.h();
    let (i, j) = (i as isize, j as isize);
    if comp == 0 {
        [(cell(g, i, j), ih), (cell(g, i - 1, j), -ih)]
    } else {
        [(cell(g, i, j), ih), (cell(g, i, j - 1), -ih)]
    }
}

/// `-Lap` on the free MAC unknowns with reflected tangential ghosts.
pub fn neg_laplacian(idx: &MacIndex) -> SparseMatrix {
    let g = *idx.grid();
    let n = g.n() as isize;
    let ih2 = 1.0 / (g.h() * g.h());
    let mut m = SparseMatrix::new(idx.len());
    let dof = |comp: usize, i: isize, j: isize| -> Option<usize> {
        let (i, j) = if g.is_periodic() {
            (i.rem_euclid(n), j.rem_euclid(n))
        } else {
            (i, j)
        };
        if i < 0 || j < 0 {
            return None;
        }
        if comp == 0 {
            idx.x_dof(i as usize, j as usize)
        } else {
            idx.y_dof(i as usize, j as usize)
        }
    };
    idx.for_each(|k, comp, i, j| {
        let (i, j) = (i as isize, j as isize);
        m.add(k, k, 4.0 * ih2);
        // neighbours along the component direction hit wall-normal faces (zero)
        // when they leave the domain; across it they reflect.
        let along = if comp == 0 {
            [(i + 1, j), (i - 1, j)]
        } else {
            [(i, j + 1), (i, j - 1)]
        };
        let across = if comp == 0 {
            [(i, j + 1), (i, j - 1)]
        } else {
            [(i + 1, j), (i - 1, j)]
        };
        for (a, b) in along {
            if let Some(c) = dof(comp, a, b) {
                m.add(k, c, -ih2);
            }
        }
        for (a, b) in across {
            let outside = !g.is_periodic() && (a < 0 || b < 0 || a >= n || b >= n);
            if outside {
                m.add(k, k, ih2);
            } else if let Some(c) = dof(comp, a, b) {
                m.add(k, c, -ih2);
            }
        }
    });
    m
}

/// `I + alpha (-Lap)` on the free MAC unknowns.
pub fn helmholtz(idx: &MacIndex, alpha: f64) -> SparseMatrix {
    let l = neg_laplacian(idx);
    let mut m = SparseMatrix::new(idx.len());
    for r in 0..l.dim() {
        m.add(r, r, 1.0);
        for &(c, v) in l.row(r) {
            m.add(r, c, alpha * v);
        }
    }
    m
}

/// `-div grad` on cells with homogeneous Neumann walls (singular: constants).
pub fn neumann_poisson(g: &GridSpec) -> SparseMatrix {
    let n = g.n();
    let ih2 = 1.0 / (g.h() * g.h());
    let mut m = SparseMatrix::new(n * n);
    for j in 0..n as isize {
        for i in 0..n as isize {
            let k = cell(g, i, j);
            for (a, b) in [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)] {
                let inside =
                    g.is_periodic() || (a >= 0 && b >= 0 && a < n as isize && b < n as isize);
                if inside {
                    m.add(k, k, ih2);
                    m.add(k, cell(g, a, b), -ih2);
                }
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ops, ScalarField};

    fn wavy(g: GridSpec) -> VectorField {
        let mut v =
            VectorField::sample_mac(g, |x, y| ((7.0 * x * y).sin() + x, (3.0 * x).cos() * y));
        v.zero_wall_normals();
        v
    }

    #[test]
    fn gather_scatter_round_trip() {
        for g in [
            GridSpec::dirichlet(8).unwrap(),
            GridSpec::periodic(8).unwrap(),
        ] {
            let idx = MacIndex::new(g);
            let v = wavy(g);
            let back = idx.scatter(&idx.gather(&v).unwrap());
            assert_eq!(back.x, v.x);
            assert_eq!(back.y, v.y);
        }
    }

    #[test]
    fn matrix_laplacian_matches_stencil() {
        for g in [
            GridSpec::dirichlet(10).unwrap(),
            GridSpec::periodic(10).unwrap(),
        ] {
            let idx = MacIndex::new(g);
            let v = wavy(g);
            let m = neg_laplacian(&idx);
            let x = idx.gather(&v).unwrap();
            let mut y = vec![0.0; x.len()];
            m.matvec(&x, &mut y);
            let l = idx.gather(&ops::laplacian(&v).unwrap()).unwrap();
            for (a, b) in y.iter().zip(&l) {
                assert!((a + b).abs() < 1e-9 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn neumann_poisson_matches_div_grad() {
        for g in [
            GridSpec::dirichlet(9).unwrap(),
            GridSpec::periodic(9).unwrap(),
        ] {
            let s = ScalarField::cells(g, |x, y| (4.0 * x).sin() * (1.0 + y * y));
            let dg = ops::div(&ops::grad(&s).unwrap()).unwrap();
            let m = neumann_poisson(&g);
            let mut y = vec![0.0; s.data.len()];
            m.matvec(&s.data, &mut y);
            for (a, b) in y.iter().zip(&dg.data) {
                assert!((a + b).abs() < 1e-9 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn face_gradient_matches_grad() {
        let g = GridSpec::dirichlet(8).unwrap();
        let s = ScalarField::cells(g, |x, y| x * x - y);
        let gr = ops::grad(&s).unwrap();
        let idx = MacIndex::new(g);
        let gv = idx.gather(&gr).unwrap();
        idx.for_each(|k, comp, i, j| {
            let e = face_gradient(&g, comp, i, j);
            let val = e[0].1 * s.data[e[0].0] + e[1].1 * s.data[e[1].0];
            assert!((val - gv[k]).abs() < 1e-12);
        });
    }
}
