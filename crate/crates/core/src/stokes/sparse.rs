//! Thin layer over faer's sparse direct solvers.

use faer::col::ColMut;
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::Side;

use crate::error::{Error, Result};

/// Square sparse matrix kept in row lists, assembled by accumulation.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Add `v` to entry `(r, c)`.
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        let row = &mut self.rows[r];
        match row.iter_mut().find(|e| e.0 == c) {
            Some(e) => e.1 += v,
            None => row.push((c, v)),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.rows[r].iter().find(|e| e.0 == c).map_or(0.0, |e| e.1)
    }

    pub fn row(&self, r: usize) -> &[(usize, f64)] {
        &self.rows[r]
    }

    /// Replace row and column `k` by the identity.
    pub fn pin(&mut self, k: usize) {
        for row in &mut self.rows {
            row.retain(|e| e.0 != k);
        }
        self.rows[k] = vec![(k, 1.0)];
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, row) in self.rows.iter().enumerate() {
            y[r] = row.iter().map(|&(c, v)| v * x[c]).sum();
        }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let trip: Vec<Triplet<usize, usize, f64>> = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| Triplet::new(r, c, v)))
            .collect();
        SparseColMat::try_new_from_triplets(self.n, self.n, &trip)
            .map_err(|e| Error::SolverBreakdown(format!("sparse assembly: {e:?}")))
    }
}

/// A reusable sparse factorization.
pub enum Factorization {
    Cholesky(Llt<usize, f64>),
    Lu(Lu<usize, f64>),
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Factorization::Cholesky(_) => f.write_str("Factorization::Cholesky"),
            Factorization::Lu(_) => f.write_str("Factorization::Lu"),
        }
    }
}

impl Factorization {
    /// Cholesky factor of a symmetric positive definite matrix.
    pub fn cholesky(m: &SparseMatrix) -> Result<Self> {
        let a = m.to_faer()?;
        a.sp_cholesky(Side::Lower)
            .map(Factorization::Cholesky)
            .map_err(|e| Error::SolverBreakdown(format!("cholesky: {e:?}")))
    }

    /// LU factor with partial pivoting.
    pub fn lu(m: &SparseMatrix) -> Result<Self> {
        let a = m.to_faer()?;
        a.sp_lu()
            .map(Factorization::Lu)
            .map_err(|e| Error::SolverBreakdown(format!("lu: {e:?}")))
    }

    /// Overwrite `rhs` with the solution. A non-finite result means the
    /// factorization hit a numerically zero pivot.
    pub fn solve_in_place(&self, rhs: &mut [f64]) -> Result<()> {
        let col = ColMut::from_slice_mut(rhs);
        match self {
            Factorization::Cholesky(f) => f.solve_in_place(col),
            Factorization::Lu(f) => f.solve_in_place(col),
        }
        if let Some(k) = rhs.iter().position(|v| !v.is_finite()) {
            return Err(Error::SolverBreakdown(format!(
                "non-finite solution entry {k}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SparseMatrix {
        let mut m = SparseMatrix::new(n);
        for i in 0..n {
            m.add(i, i, 2.0);
            if i > 0 {
                m.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                m.add(i, i + 1, -1.0);
            }
        }
        m
    }

    #[test]
    fn cholesky_and_lu_agree() {
        let m = tridiag(20);
        let x: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut b = vec![0.0; 20];
        m.matvec(&x, &mut b);
        for f in [
            Factorization::cholesky(&m).unwrap(),
            Factorization::lu(&m).unwrap(),
        ] {
            let mut y = b.clone();
            f.solve_in_place(&mut y).unwrap();
            for (a, e) in y.iter().zip(&x) {
                assert!((a - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn accumulation_and_pin() {
        let mut m = tridiag(4);
        m.add(0, 0, 1.0);
        assert_eq!(m.get(0, 0), 3.0);
        m.pin(1);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.row(1), &[(1, 1.0)]);
    }

    #[test]
    fn indefinite_matrix_rejected_by_cholesky() {
        let mut m = tridiag(5);
        m.add(2, 2, -10.0);
        assert!(Factorization::cholesky(&m).is_err());
    }
}
