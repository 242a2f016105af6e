use crate::error::{Error, Result};

/// Boundary treatment of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryMode {
    /// No-slip walls on all four sides.
    DirichletSquare,
    /// Doubly periodic unit torus.
    Periodic,
}

impl BoundaryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryMode::DirichletSquare => "dirichlet-square",
            BoundaryMode::Periodic => "periodic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dirichlet-square" | "dirichlet" => Some(BoundaryMode::DirichletSquare),
            "periodic" => Some(BoundaryMode::Periodic),
            _ => None,
        }
    }
}

/// Uniform square grid on the unit square, `n` cells per side.
///
/// Storage conventions (row-major, row index `j` runs in `y`):
///
/// | placement   | dirichlet-square    | periodic |
/// |-------------|---------------------|----------|
/// | cell center | `n x n`             | `n x n`  |
/// | node        | `(n+1) x (n+1)`     | `n x n`  |
/// | x-face      | `(n+1)` cols, `n` rows | `n x n` |
/// | y-face      | `n` cols, `(n+1)` rows | `n x n` |
///
/// Cell `(i, j)` is centered at `((i + 1/2) h, (j + 1/2) h)`, node `(i, j)` sits at
/// `(i h, j h)`, x-face `(i, j)` at `(i h, (j + 1/2) h)` and y-face `(i, j)` at
/// `((i + 1/2) h, j h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    h: f64,
    mode: BoundaryMode,
}

/// `(cols, rows)` of a staggered array.
pub type Dims = (usize, usize);

impl GridSpec {
    pub const MIN_CELLS: usize = 8;

    pub fn new(n: usize, mode: BoundaryMode) -> Result<Self> {
        if n < Self::MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "cell count {n} below minimum {}",
                Self::MIN_CELLS
            )));
        }
        Ok(Self {
            n,
            h: 1.0 / n as f64,
            mode,
        })
    }

    pub fn dirichlet(n: usize) -> Result<Self> {
        Self::new(n, BoundaryMode::DirichletSquare)
    }

    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, BoundaryMode::Periodic)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    #[inline]
    pub fn is_periodic(&self) -> bool {
        self.mode == BoundaryMode::Periodic
    }

    pub fn cell_dims(&self) -> Dims {
        (self.n, self.n)
    }

    pub fn node_dims(&self) -> Dims {
        match self.mode {
            BoundaryMode::DirichletSquare => (self.n + 1, self.n + 1),
            BoundaryMode::Periodic => (self.n, self.n),
        }
    }

    pub fn xface_dims(&self) -> Dims {
        match self.mode {
            BoundaryMode::DirichletSquare => (self.n + 1, self.n),
            BoundaryMode::Periodic => (self.n, self.n),
        }
    }

    pub fn yface_dims(&self) -> Dims {
        match self.mode {
            BoundaryMode::DirichletSquare => (self.n, self.n + 1),
            BoundaryMode::Periodic => (self.n, self.n),
        }
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.h, j as f64 * self.h)
    }

    pub fn xface(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.h, (j as f64 + 0.5) * self.h)
    }

    pub fn yface(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.h, j as f64 * self.h)
    }

    /// Periodic index wrap; only meaningful in periodic mode.
    #[inline]
    pub(crate) fn wrap(&self, k: isize) -> usize {
        k.rem_euclid(self.n as isize) as usize
    }

    /// Midpoint-rule weight of a node; trapezoid halving on walls.
    #[inline]
    pub(crate) fn node_weight(&self, i: usize, j: usize) -> f64 {
        let h2 = self.h * self.h;
        if self.is_periodic() {
            return h2;
        }
        let wx = if i == 0 || i == self.n { 0.5 } else { 1.0 };
        let wy = if j == 0 || j == self.n { 0.5 } else { 1.0 };
        h2 * wx * wy
    }

    /// Weight of an x-face (`i` is the column index).
    #[inline]
    pub(crate) fn xface_weight(&self, i: usize) -> f64 {
        let h2 = self.h * self.h;
        if !self.is_periodic() && (i == 0 || i == self.n) {
            0.5 * h2
        } else {
            h2
        }
    }

    /// Weight of a y-face (`j` is the row index).
    #[inline]
    pub(crate) fn yface_weight(&self, j: usize) -> f64 {
        let h2 = self.h * self.h;
        if !self.is_periodic() && (j == 0 || j == self.n) {
            0.5 * h2
        } else {
            h2
        }
    }
}
