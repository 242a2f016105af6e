//! Factorized discrete Stokes, Poisson and Helmholtz systems.
//!
//! Unknown layout of the saddle system: free MAC velocities, cell pressures,
//! one multiplier enforcing zero-mean pressure and, on the torus, two more
//! enforcing zero-mean velocity components (the constants are then in the
//! kernel of the vector Laplacian too).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::assembly::{face_gradient, helmholtz, neg_laplacian, neumann_poisson, MacIndex};
use super::sparse::{Factorization, SparseMatrix};
use crate::error::{Error, Result};
use crate::fields::{ops, BoundaryMode, GridSpec, ScalarField, ScalarPlacement, VectorField};

/// How the saddle system is solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StokesMethod {
    /// Sparse LU of the full bordered saddle matrix.
    Direct,
    /// Pressure Richardson iteration around a Cholesky-factored velocity block.
    Uzawa { max_iter: usize, relaxation: f64 },
}

/// Discrete solution of `-Lap v + grad p = f`, `div v = 0`.
#[derive(Debug, Clone)]
pub struct StokesSolution {
    pub v: VectorField,
    /// Zero-mean pressure.
    pub p: ScalarField,
    /// Max-norm residual of the discrete saddle equations.
    pub residual: f64,
    /// `residual <= tol`.
    pub converged: bool,
}

#[derive(Debug)]
enum Engine {
    Bordered(Factorization),
    /// Pressure pinned at cell 0 instead of bordered; used when the bordered
    /// factorization breaks down.
    Pinned(Factorization),
    Uzawa {
        velocity: Factorization,
        max_iter: usize,
        relaxation: f64,
    },
}

/// Assembled saddle matrix of one grid together with its factorization.
#[derive(Debug)]
pub struct SaddleSystem {
    idx: MacIndex,
    matrix: SparseMatrix,
    engine: Engine,
}

impl SaddleSystem {
    pub fn new(grid: GridSpec, method: StokesMethod) -> Result<Self> {
        let idx = MacIndex::new(grid);
        let matrix = assemble_saddle(&idx);
        let engine = match method {
            StokesMethod::Direct => match Factorization::lu(&matrix) {
                Ok(f) => Engine::Bordered(f),
                Err(_) => Engine::Pinned(Factorization::lu(&pinned_saddle(&idx))?),
            },
            StokesMethod::Uzawa {
                max_iter,
                relaxation,
            } => {
                if grid.is_periodic() {
                    return Err(Error::InvalidParameter(
                        "Uzawa iteration needs wall boundaries (the periodic velocity block is singular)".into(),
                    ));
                }
                if !(relaxation > 0.0 && relaxation < 2.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Uzawa relaxation {relaxation} outside (0, 2)"
                    )));
                }
                Engine::Uzawa {
                    velocity: Factorization::cholesky(&neg_laplacian(&idx))?,
                    max_iter,
                    relaxation,
                }
            }
        };
        Ok(Self {
            idx,
            matrix,
            engine,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.idx.grid()
    }

    pub fn index(&self) -> &MacIndex {
        &self.idx
    }

    /// The assembled bordered saddle matrix.
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    fn n_cells(&self) -> usize {
        let n = self.grid().n();
        n * n
    }

    /// Solve for a MAC forcing `f`; wall-normal entries of `f` are ignored.
    pub fn solve(&self, f: &VectorField, tol: f64) -> Result<StokesSolution> {
        if !f.is_finite() {
            return Err(Error::InvalidParameter("non-finite Stokes forcing".into()));
        }
        let nv = self.idx.len();
        let nc = self.n_cells();
        let fv = self.idx.gather(f)?;
        let mut z = vec![0.0; self.matrix.dim()];
        match &self.engine {
            Engine::Bordered(lu) => {
                z[..nv].copy_from_slice(&fv);
                lu.solve_in_place(&mut z)?;
            }
            Engine::Pinned(lu) => {
                z[..nv].copy_from_slice(&fv);
                lu.solve_in_place(&mut z)?;
                z[nv + nc] = 0.0;
            }
            Engine::Uzawa {
                velocity,
                max_iter,
                relaxation,
            } => {
                self.uzawa(velocity, &fv, tol, *max_iter, *relaxation, &mut z)?;
            }
        }
        let mut p = ScalarField::from_data(
            *self.grid(),
            ScalarPlacement::CellCenter,
            z[nv..nv + nc].to_vec(),
        )?;
        let mean = p.mean();
        for x in &mut p.data {
            *x -= mean;
        }
        z[nv..nv + nc].copy_from_slice(&p.data);
        let residual = self.residual(&z, &fv);
        Ok(StokesSolution {
            v: self.idx.scatter(&z[..nv]),
            p,
            residual,
            converged: residual <= tol,
        })
    }

    fn residual(&self, z: &[f64], fv: &[f64]) -> f64 {
        let mut r = vec![0.0; z.len()];
        self.matrix.matvec(z, &mut r);
        let nv = self.idx.len();
        let nc = self.n_cells();
        // multiplier rows are constraints on the solution, not equations of the
        // physical system; the multipliers themselves are free.
        let mut worst: f64 = 0.0;
        for k in 0..nv + nc {
            let rhs = if k < nv { fv[k] } else { 0.0 };
            worst = worst.max((r[k] - rhs).abs());
        }
        worst
    }

    fn uzawa(
        &self,
        velocity: &Factorization,
        fv: &[f64],
        tol: f64,
        max_iter: usize,
        relaxation: f64,
        z: &mut [f64],
    ) -> Result<()> {
        let g = *self.grid();
        let nv = self.idx.len();
        let nc = self.n_cells();
        let mut p = vec![0.0; nc];
        let mut v = vec![0.0; nv];
        for _ in 0..max_iter.max(1) {
            v.copy_from_slice(fv);
            self.idx.for_each(|k, comp, i, j| {
                for (c, coef) in face_gradient(&g, comp, i, j) {
                    v[k] -= coef * p[c];
                }
            });
            velocity.solve_in_place(&mut v)?;
            let d = ops::div(&self.idx.scatter(&v))?;
            let dmax = d.max_abs();
            for (pc, dc) in p.iter_mut().zip(&d.data) {
                *pc -= relaxation * dc;
            }
            let mean = p.iter().sum::<f64>() / nc as f64;
            p.iter_mut().for_each(|x| *x -= mean);
            if dmax <= 0.1 * tol {
                break;
            }
        }
        z[..nv].copy_from_slice(&v);
        z[nv..nv + nc].copy_from_slice(&p);
        Ok(())
    }
}

/// `[[-Lap, G, 0], [G^T, 0, 1], [0, 1^T, 0]]` plus velocity-mean borders on the torus.
fn assemble_saddle(idx: &MacIndex) -> SparseMatrix {
    let (mut m, nv, nc) = saddle_core(idx, borders(idx.grid()));
    for c in 0..nc {
        m.add(nv + c, nv + nc, 1.0);
        m.add(nv + nc, nv + c, 1.0);
    }
    if idx.grid().is_periodic() {
        for k in 0..nv {
            let row = if k < idx.x_count() {
                nv + nc + 1
            } else {
                nv + nc + 2
            };
            m.add(k, row, 1.0);
            m.add(row, k, 1.0);
        }
    }
    m
}

/// Pressure pinned at cell 0 instead of the zero-mean border.
fn pinned_saddle(idx: &MacIndex) -> SparseMatrix {
    let extra = borders(idx.grid()) - 1;
    let (mut m, nv, nc) = saddle_core(idx, extra + 1);
    m.pin(nv);
    // the slot of the pressure multiplier becomes an isolated unit row
    m.add(nv + nc, nv + nc, 1.0);
    if idx.grid().is_periodic() {
        for k in 0..nv {
            let row = if k < idx.x_count() {
                nv + nc + 1
            } else {
                nv + nc + 2
            };
            m.add(k, row, 1.0);
            m.add(row, k, 1.0);
        }
    }
    m
}

fn borders(g: &GridSpec) -> usize {
    if g.is_periodic() {
        3
    } else {
        1
    }
}

fn saddle_core(idx: &MacIndex, extra: usize) -> (SparseMatrix, usize, usize) {
    let g = *idx.grid();
    let nv = idx.len();
    let nc = g.n() * g.n();
    let a = neg_laplacian(idx);
    let mut m = SparseMatrix::new(nv + nc + extra);
    for r in 0..nv {
        for &(c, v) in a.row(r) {
            m.add(r, c, v);
        }
    }
    idx.for_each(|k, comp, i, j| {
        for (c, coef) in face_gradient(&g, comp, i, j) {
            m.add(k, nv + c, coef);
            m.add(nv + c, k, coef);
        }
    });
    (m, nv, nc)
}

/// Cholesky-factored Neumann Poisson problem driving the Leray projection.
#[derive(Debug)]
pub struct Projector {
    grid: GridSpec,
    factor: Factorization,
}

impl Projector {
    pub fn new(grid: GridSpec) -> Result<Self> {
        let mut m = neumann_poisson(&grid);
        m.pin(0);
        Ok(Self {
            grid,
            factor: Factorization::cholesky(&m)?,
        })
    }

    /// Zero-mean `phi` with `div grad phi = rhs` (`rhs` must sum to zero).
    pub fn solve_poisson(&self, rhs: &ScalarField) -> Result<ScalarField> {
        if rhs.grid() != &self.grid || rhs.placement() != ScalarPlacement::CellCenter {
            return Err(Error::PlacementMismatch(
                "Poisson right-hand side must live on cells".into(),
            ));
        }
        let mut z: Vec<f64> = rhs.data.iter().map(|v| -v).collect();
        z[0] = 0.0;
        self.factor.solve_in_place(&mut z)?;
        let mut phi = ScalarField::from_data(self.grid, ScalarPlacement::CellCenter, z)?;
        let mean = phi.mean();
        phi.data.iter_mut().for_each(|x| *x -= mean);
        Ok(phi)
    }

    /// `(u_star - grad phi, phi)` with `div grad phi = div u_star`; wall-normal
    /// entries of `u_star` are treated as zero.
    pub fn project(&self, u_star: &VectorField) -> Result<(VectorField, ScalarField)> {
        if !u_star.is_finite() {
            return Err(Error::InvalidParameter(
                "non-finite field in projection".into(),
            ));
        }
        let mut u = u_star.clone();
        u.zero_wall_normals();
        let phi = self.solve_poisson(&ops::div(&u)?)?;
        u.axpy(-1.0, &ops::grad(&phi)?)?;
        Ok((u, phi))
    }
}

/// Cholesky-factored `I - alpha Lap` on free MAC unknowns.
#[derive(Debug)]
pub struct HelmholtzSolver {
    idx: MacIndex,
    alpha: f64,
    factor: Factorization,
}

impl HelmholtzSolver {
    pub fn new(grid: GridSpec, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Helmholtz coefficient {alpha}"
            )));
        }
        let idx = MacIndex::new(grid);
        let factor = Factorization::cholesky(&helmholtz(&idx, alpha))?;
        Ok(Self { idx, alpha, factor })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn solve(&self, rhs: &VectorField) -> Result<VectorField> {
        let mut z = self.idx.gather(rhs)?;
        self.factor.solve_in_place(&mut z)?;
        Ok(self.idx.scatter(&z))
    }
}

type Key = (usize, BoundaryMode);

fn key(g: &GridSpec) -> Key {
    (g.n(), g.mode())
}

/// Direct saddle system of `grid`, factorized once per process.
pub fn shared_saddle(grid: &GridSpec) -> Result<Arc<SaddleSystem>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<SaddleSystem>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(s) = cache.lock().expect("saddle cache poisoned").get(&key(grid)) {
        return Ok(s.clone());
    }
    let s = Arc::new(SaddleSystem::new(*grid, StokesMethod::Direct)?);
    cache
        .lock()
        .expect("saddle cache poisoned")
        .insert(key(grid), s.clone());
    Ok(s)
}

/// Projector of `grid`, factorized once per process.
pub fn shared_projector(grid: &GridSpec) -> Result<Arc<Projector>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Projector>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(s) = cache
        .lock()
        .expect("projector cache poisoned")
        .get(&key(grid))
    {
        return Ok(s.clone());
    }
    let s = Arc::new(Projector::new(*grid)?);
    cache
        .lock()
        .expect("projector cache poisoned")
        .insert(key(grid), s.clone());
    Ok(s)
}
