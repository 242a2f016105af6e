use super::grid::{Dims, GridSpec};
use crate::error::{Error, Result};

/// Where a scalar lives on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarPlacement {
    CellCenter,
    Node,
}

/// Where the components of a vector field live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VectorPlacement {
    /// `x` on x-faces, `y` on y-faces.
    Mac,
    /// Both components at nodes.
    Colocated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    placement: ScalarPlacement,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec, placement: ScalarPlacement) -> Self {
        let (c, r) = Self::dims_for(&grid, placement);
        Self {
            grid,
            placement,
            data: vec![0.0; c * r],
        }
    }

    pub fn from_data(grid: GridSpec, placement: ScalarPlacement, data: Vec<f64>) -> Result<Self> {
        let (c, r) = Self::dims_for(&grid, placement);
        if data.len() != c * r {
            return Err(Error::PlacementMismatch(format!(
                "scalar data length {} does not match {}x{}",
                data.len(),
                c,
                r
            )));
        }
        Ok(Self {
            grid,
            placement,
            data,
        })
    }

    /// Sample `f(x, y)` at the placement's points.
    pub fn sample(grid: GridSpec, placement: ScalarPlacement, f: impl Fn(f64, f64) -> f64) -> Self {
        let (c, r) = Self::dims_for(&grid, placement);
        let mut data = Vec::with_capacity(c * r);
        for j in 0..r {
            for i in 0..c {
                let (x, y) = match placement {
                    ScalarPlacement::CellCenter => grid.cell_center(i, j),
                    ScalarPlacement::Node => grid.node(i, j),
                };
                data.push(f(x, y));
            }
        }
        Self {
            grid,
            placement,
            data,
        }
    }

    pub fn cells(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::sample(grid, ScalarPlacement::CellCenter, f)
    }

    pub fn nodes(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::sample(grid, ScalarPlacement::Node, f)
    }

    pub fn dims_for(grid: &GridSpec, placement: ScalarPlacement) -> Dims {
        match placement {
            ScalarPlacement::CellCenter => grid.cell_dims(),
            ScalarPlacement::Node => grid.node_dims(),
        }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn placement(&self) -> ScalarPlacement {
        self.placement
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        Self::dims_for(&self.grid, self.placement)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.dims().0 + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let c = self.dims().0;
        self.data[j * c + i] = v;
    }

    /// Quadrature weight of entry `(i, j)`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match self.placement {
            ScalarPlacement::CellCenter => self.grid.h() * self.grid.h(),
            ScalarPlacement::Node => self.grid.node_weight(i, j),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Quadrature mean over the unit square.
    pub fn mean(&self) -> f64 {
        let (c, r) = self.dims();
        let mut s = 0.0;
        for j in 0..r {
            for i in 0..c {
                s += self.weight(i, j) * self.data[j * c + i];
            }
        }
        s
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        let (c, r) = self.dims();
        let mut s = 0.0;
        for j in 0..r {
            for i in 0..c {
                let k = j * c + i;
                s += self.weight(i, j) * self.data[k] * other.data[k];
            }
        }
        Ok(s)
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.placement != other.placement {
            return Err(Error::PlacementMismatch(format!(
                "{:?} vs {:?}",
                self.placement, other.placement
            )));
        }
        Ok(())
    }

    /// `self + alpha * other`, in place.
    pub fn axpy(&mut self, alpha: f64, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn first_nonfinite(&self) -> Option<usize> {
        self.data.iter().position(|v| !v.is_finite())
    }

    pub fn is_finite(&self) -> bool {
        self.first_nonfinite().is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    placement: VectorPlacement,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: GridSpec, placement: VectorPlacement) -> Self {
        let (xd, yd) = Self::dims_for(&grid, placement);
        Self {
            grid,
            placement,
            x: vec![0.0; xd.0 * xd.1],
            y: vec![0.0; yd.0 * yd.1],
        }
    }

    pub fn mac_zeros(grid: GridSpec) -> Self {
        Self::zeros(grid, VectorPlacement::Mac)
    }

    pub fn from_data(
        grid: GridSpec,
        placement: VectorPlacement,
        x: Vec<f64>,
        y: Vec<f64>,
    ) -> Result<Self> {
        let (xd, yd) = Self::dims_for(&grid, placement);
        if x.len() != xd.0 * xd.1 || y.len() != yd.0 * yd.1 {
            return Err(Error::PlacementMismatch(format!(
                "vector component lengths ({}, {}) do not match {:?}",
                x.len(),
                y.len(),
                placement
            )));
        }
        Ok(Self {
            grid,
            placement,
            x,
            y,
        })
    }

    /// Sample `f(x, y) -> (vx, vy)` on the MAC faces. Normal components on the
    /// walls of a dirichlet grid are sampled as given, not zeroed.
    pub fn sample_mac(grid: GridSpec, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let (xd, yd) = Self::dims_for(&grid, VectorPlacement::Mac);
        let mut x = Vec::with_capacity(xd.0 * xd.1);
        for j in 0..xd.1 {
            for i in 0..xd.0 {
                let (px, py) = grid.xface(i, j);
                x.push(f(px, py).0);
            }
        }
        let mut y = Vec::with_capacity(yd.0 * yd.1);
        for j in 0..yd.1 {
            for i in 0..yd.0 {
                let (px, py) = grid.yface(i, j);
                y.push(f(px, py).1);
            }
        }
        Self {
            grid,
            placement: VectorPlacement::Mac,
            x,
            y,
        }
    }

    pub fn dims_for(grid: &GridSpec, placement: VectorPlacement) -> (Dims, Dims) {
        match placement {
            VectorPlacement::Mac => (grid.xface_dims(), grid.yface_dims()),
            VectorPlacement::Colocated => (grid.node_dims(), grid.node_dims()),
        }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn placement(&self) -> VectorPlacement {
        self.placement
    }

    #[inline]
    pub fn xdims(&self) -> Dims {
        Self::dims_for(&self.grid, self.placement).0
    }

    #[inline]
    pub fn ydims(&self) -> Dims {
        Self::dims_for(&self.grid, self.placement).1
    }

    #[inline]
    pub fn xat(&self, i: usize, j: usize) -> f64 {
        self.x[j * self.xdims().0 + i]
    }

    #[inline]
    pub fn yat(&self, i: usize, j: usize) -> f64 {
        self.y[j * self.ydims().0 + i]
    }

    pub fn xweight(&self, i: usize, j: usize) -> f64 {
        match self.placement {
            VectorPlacement::Mac => self.grid.xface_weight(i),
            VectorPlacement::Colocated => self.grid.node_weight(i, j),
        }
    }

    pub fn yweight(&self, i: usize, j: usize) -> f64 {
        match self.placement {
            VectorPlacement::Mac => self.grid.yface_weight(j),
            VectorPlacement::Colocated => self.grid.node_weight(i, j),
        }
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.placement != other.placement {
            return Err(Error::PlacementMismatch(format!(
                "{:?} vs {:?}",
                self.placement, other.placement
            )));
        }
        Ok(())
    }

    /// Discrete `L^2` inner product, components summed at their own placement.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        let (xc, xr) = self.xdims();
        let (yc, yr) = self.ydims();
        let mut s = 0.0;
        for j in 0..xr {
            for i in 0..xc {
                let k = j * xc + i;
                s += self.xweight(i, j) * self.x[k] * other.x[k];
            }
        }
        for j in 0..yr {
            for i in 0..yc {
                let k = j * yc + i;
                s += self.yweight(i, j) * self.y[k] * other.y[k];
            }
        }
        Ok(s)
    }

    pub fn axpy(&mut self, alpha: f64, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a += alpha * b;
        }
        for (a, b) in self.y.iter_mut().zip(&other.y) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.x.iter_mut().for_each(|v| *v *= alpha);
        self.y.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.x
            .iter()
            .chain(&self.y)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn first_nonfinite(&self) -> Option<usize> {
        self.x.iter().chain(&self.y).position(|v| !v.is_finite())
    }

    pub fn is_finite(&self) -> bool {
        self.first_nonfinite().is_none()
    }

    /// Zero the wall-normal faces of a MAC field on a dirichlet grid.
    pub fn zero_wall_normals(&mut self) {
        if self.placement != VectorPlacement::Mac || self.grid.is_periodic() {
            return;
        }
        let n = self.grid.n();
        for j in 0..n {
            self.x[j * (n + 1)] = 0.0;
            self.x[j * (n + 1) + n] = 0.0;
        }
        for i in 0..n {
            self.y[i] = 0.0;
            self.y[n * n + i] = 0.0;
        }
    }

    /// Largest wall-normal magnitude (zero in periodic mode).
    pub fn wall_normal_max(&self) -> f64 {
        if self.placement != VectorPlacement::Mac || self.grid.is_periodic() {
            return 0.0;
        }
        let n = self.grid.n();
        let mut m: f64 = 0.0;
        for j in 0..n {
            m = m
                .max(self.x[j * (n + 1)].abs())
                .max(self.x[j * (n + 1) + n].abs());
        }
        for i in 0..n {
            m = m.max(self.y[i].abs()).max(self.y[n * n + i].abs());
        }
        m
    }
}

/// Physical constants: kinematic viscosity `mu`, vortex viscosity `chi`,
/// magnetic diffusivity `nu`. Angular viscosity is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    pub mu: f64,
    pub chi: f64,
    pub nu: f64,
}

impl FluidParams {
    pub fn new(mu: f64, chi: f64, nu: f64) -> Result<Self> {
        let p = Self { mu, chi, nu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mu must be > 0, got {}",
                self.mu
            )));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "nu must be > 0, got {}",
                self.nu
            )));
        }
        if !(self.chi >= 0.0 && self.chi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "chi must be >= 0, got {}",
                self.chi
            )));
        }
        Ok(())
    }

    /// Effective momentum viscosity `mu + chi`.
    #[inline]
    pub fn momentum_viscosity(&self) -> f64 {
        self.mu + self.chi
    }

    /// The coefficient `chi / (mu + chi)` that couples `w` into `v` and `Z`.
    #[inline]
    pub fn coupling_ratio(&self) -> f64 {
        self.chi / (self.mu + self.chi)
    }
}

/// Time-stamped `(u, w, b)` with the latest pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: VectorField,
    pub w: ScalarField,
    pub b: VectorField,
    pub p: ScalarField,
}

impl State {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            t: 0.0,
            u: VectorField::mac_zeros(grid),
            w: ScalarField::zeros(grid, ScalarPlacement::CellCenter),
            b: VectorField::mac_zeros(grid),
            p: ScalarField::zeros(grid, ScalarPlacement::CellCenter),
        }
    }

    pub fn new(t: f64, u: VectorField, w: ScalarField, b: VectorField) -> Result<Self> {
        let grid = *u.grid();
        let p = ScalarField::zeros(grid, ScalarPlacement::CellCenter);
        let s = Self { t, u, w, b, p };
        s.validate_layout()?;
        Ok(s)
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }

    pub fn validate_layout(&self) -> Result<()> {
        let g = self.u.grid();
        if self.w.grid() != g || self.b.grid() != g || self.p.grid() != g {
            return Err(Error::GridMismatch);
        }
        if self.u.placement() != VectorPlacement::Mac || self.b.placement() != VectorPlacement::Mac
        {
            return Err(Error::PlacementMismatch("state vectors must be MAC".into()));
        }
        if self.w.placement() != ScalarPlacement::CellCenter
            || self.p.placement() != ScalarPlacement::CellCenter
        {
            return Err(Error::PlacementMismatch(
                "state scalars must be cell-centered".into(),
            ));
        }
        if !(self.t >= 0.0) {
            return Err(Error::InvalidParameter(format!("negative time {}", self.t)));
        }
        Ok(())
    }

    /// Locate the first non-finite entry, reporting which field it is in.
    pub fn check_finite(&self) -> Result<()> {
        let checks: [(&str, Option<usize>); 5] = [
            ("u", self.u.first_nonfinite()),
            ("w", self.w.first_nonfinite()),
            ("b", self.b.first_nonfinite()),
            ("p", self.p.first_nonfinite()),
            ("t", if self.t.is_finite() { None } else { Some(0) }),
        ];
        for (name, idx) in checks {
            if let Some(index) = idx {
                return Err(Error::NonFinite {
                    field: name.to_string(),
                    index,
                    t: self.t,
                });
            }
        }
        Ok(())
    }
}
