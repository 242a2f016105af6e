//! Initial-data catalog and manufactured solutions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::{
    ops, FluidParams, GridSpec, ScalarField, ScalarPlacement, SineSeries, State, VectorField,
};

/// Initial data recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitRecipe {
    Zero,
    /// Fixed trigonometric `(u, w, b)`, smooth in both boundary modes.
    Smooth,
    /// Periodic Taylor-Green vortex with `w = b = 0`.
    TaylorGreen,
    /// Smooth `u`, `w`; random `b` in `H^1_0` but not `H^2`.
    RandomH1,
}

impl InitRecipe {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(InitRecipe::Zero),
            "smooth" => Ok(InitRecipe::Smooth),
            "taylor-green" => Ok(InitRecipe::TaylorGreen),
            "random-h1" => Ok(InitRecipe::RandomH1),
            other => Err(Error::UnknownRecipe(other.to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InitRecipe::Zero => "zero",
            InitRecipe::Smooth => "smooth",
            InitRecipe::TaylorGreen => "taylor-green",
            InitRecipe::RandomH1 => "random-h1",
        }
    }
}

/// Decay exponent of the stream-function coefficients of the rough magnetic
/// field; `b` then has coefficients `~ |k|^-2.6`, i.e. `grad b ~ |k|^-1.6`.
pub const ROUGH_PSI_DECAY: f64 = 3.6;

fn bump(x: f64, y: f64) -> f64 {
    (PI * x).sin() * (PI * y).sin()
}

/// Stream function of the smooth velocity.
fn smooth_psi_u(x: f64, y: f64) -> f64 {
    ((PI * x).sin() * (PI * y).sin()).powi(2) / PI
}

fn smooth_psi_b(x: f64, y: f64) -> f64 {
    0.5 * (2.0 * PI * x).sin().powi(2) * (PI * y).sin().powi(2) / PI
}

fn smooth_w(x: f64, y: f64) -> f64 {
    0.5 * (2.0 * PI * x).sin() * (2.0 * PI * y).sin()
}

/// Rough magnetic field: `perp_grad` of `bump * sum a_kl sin sin` with the
/// series truncated at half the grid resolution.
pub fn rough_magnetic_field(grid: GridSpec, seed: u64) -> Result<VectorField> {
    let kmax = (grid.n() / 2).max(1);
    let series = SineSeries::random_nested(seed, kmax, ROUGH_PSI_DECAY);
    let mut psi = series.sample(grid, ScalarPlacement::Node);
    let (c, r) = psi.dims();
    for j in 0..r {
        for i in 0..c {
            let (x, y) = grid.node(i, j);
            let wall = i == 0 || j == 0 || i == c - 1 || j == r - 1;
            psi.data[j * c + i] *= if wall { 0.0 } else { bump(x, y) };
        }
    }
    ops::perp_grad(&psi)
}

/// Taylor-Green velocity on the unit torus at time `t` for viscosity `visc`.
pub fn taylor_green_velocity(grid: GridSpec, t: f64, visc: f64) -> VectorField {
    let tp = 2.0 * PI;
    let decay = (-2.0 * tp * tp * visc * t).exp();
    VectorField::sample_mac(grid, |x, y| {
        (
            decay * (tp * x).sin() * (tp * y).cos(),
            -decay * (tp * x).cos() * (tp * y).sin(),
        )
    })
}

/// Amplitudes `(a, c)` of the coupled Taylor-Green solution
/// `u = a(t) u_tg`, `w = c(t) sin(2 pi x) sin(2 pi y)` started from `a = 1`,
/// `c = 0`, with `b = 0`. Transport terms vanish on this family, leaving
/// `a' = -2 k^2 (mu + chi) a + chi k c` and `c' = 2 chi k a - 2 chi c`.
pub fn taylor_green_amplitudes(t: f64, params: &FluidParams) -> (f64, f64) {
    let k = 2.0 * PI;
    let chi = params.chi;
    let (m11, m12) = (-2.0 * k * k * params.momentum_viscosity(), chi * k);
    let (m21, m22) = (2.0 * chi * k, -2.0 * chi);
    let tau = 0.5 * (m11 + m22);
    let delta = (0.25 * (m11 - m22).powi(2) + m12 * m21).sqrt();
    let e = (tau * t).exp();
    let (ch, sh) = (
        (delta * t).cosh(),
        if delta > 0.0 {
            (delta * t).sinh() / delta
        } else {
            t
        },
    );
    (e * (ch + sh * (m11 - tau)), e * sh * m21)
}

/// Pressure of the Taylor-Green vortex (zero mean).
pub fn taylor_green_pressure(grid: GridSpec, t: f64, visc: f64) -> ScalarField {
    let tp = 2.0 * PI;
    let decay = (-2.0 * tp * tp * visc * t).exp();
    ScalarField::cells(grid, |x, y| {
        -0.25 * decay * decay * ((2.0 * tp * x).cos() + (2.0 * tp * y).cos())
    })
}

/// Build the initial state of a recipe.
pub fn init_state(recipe: InitRecipe, grid: GridSpec, seed: u64) -> Result<State> {
    match recipe {
        InitRecipe::Zero => Ok(State::zeros(grid)),
        InitRecipe::Smooth => {
            let u = ops::perp_grad(&ScalarField::nodes(grid, smooth_psi_u))?;
            let b = ops::perp_grad(&ScalarField::nodes(grid, smooth_psi_b))?;
            State::new(0.0, u, ScalarField::cells(grid, smooth_w), b)
        }
        InitRecipe::TaylorGreen => {
            if !grid.is_periodic() {
                return Err(Error::InvalidParameter(
                    "taylor-green needs a periodic grid".into(),
                ));
            }
            let mut s = State::new(
                0.0,
                taylor_green_velocity(grid, 0.0, 0.0),
                ScalarField::zeros(grid, ScalarPlacement::CellCenter),
                VectorField::mac_zeros(grid),
            )?;
            s.p = taylor_green_pressure(grid, 0.0, 0.0);
            Ok(s)
        }
        InitRecipe::RandomH1 => {
            if grid.is_periodic() {
                return Err(Error::InvalidParameter(
                    "random-h1 needs the walled square".into(),
                ));
            }
            let u = ops::perp_grad(&ScalarField::nodes(grid, smooth_psi_u))?;
            let b = rough_magnetic_field(grid, seed)?;
            State::new(0.0, u, ScalarField::cells(grid, smooth_w), b)
        }
    }
}

/// Manufactured-solution catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Manufactured {
    /// All fields and forcings zero.
    Zero,
    /// `u = curl(e^-t A sin^2 sin^2)`, `w = e^-t A sin sin`,
    /// `b = curl(e^-t A/2 sin^3 sin^3)`, `p = 0`. Amplitude `A` is 1 for the
    /// catalog entry.
    Trig1 { amplitude: f64 },
}

impl Manufactured {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Manufactured::Zero),
            "trig-1" => Ok(Manufactured::Trig1 { amplitude: 1.0 }),
            other => Err(Error::UnknownRecipe(other.to_string())),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Manufactured::Zero => "zero",
            Manufactured::Trig1 { .. } => "trig-1",
        }
    }
}

/// A profile and its first three derivatives.
type Jet = [f64; 4];

fn sin2(z: f64) -> Jet {
    let s = (PI * z).sin();
    let s2 = (2.0 * PI * z).sin();
    let c2 = (2.0 * PI * z).cos();
    [s * s, PI * s2, 2.0 * PI * PI * c2, -4.0 * PI.powi(3) * s2]
}

fn sin3(z: f64) -> Jet {
    let s = (PI * z).sin();
    let c = (PI * z).cos();
    [
        s.powi(3),
        3.0 * PI * s * s * c,
        3.0 * PI * PI * (2.0 * s - 3.0 * s.powi(3)),
        3.0 * PI.powi(3) * c * (2.0 - 9.0 * s * s),
    ]
}

/// Velocity-like field `curl(a P(x) P(y))` with all derivatives needed by the
/// forcings, at one point.
#[derive(Debug, Clone, Copy)]
struct CurlJet {
    v: [f64; 2],
    /// `grad[c][d] = d v_c / d x_d`
    grad: [[f64; 2]; 2],
    lap: [f64; 2],
    curl: f64,
}

fn curl_jet(a: f64, px: Jet, py: Jet) -> CurlJet {
    CurlJet {
        v: [-a * px[0] * py[1], a * px[1] * py[0]],
        grad: [
            [-a * px[1] * py[1], -a * px[0] * py[2]],
            [a * px[2] * py[0], a * px[1] * py[1]],
        ],
        lap: [
            -a * (px[2] * py[1] + px[0] * py[3]),
            a * (px[3] * py[0] + px[1] * py[2]),
        ],
        curl: a * (px[2] * py[0] + px[0] * py[2]),
    }
}

fn dot_grad(a: [f64; 2], g: [[f64; 2]; 2], c: usize) -> f64 {
    a[0] * g[c][0] + a[1] * g[c][1]
}

impl Manufactured {
    fn amplitudes(&self, t: f64) -> Option<(f64, f64, f64)> {
        match *self {
            Manufactured::Zero => None,
            Manufactured::Trig1 { amplitude } => {
                let e = (-t).exp() * amplitude;
                Some((e, e, 0.5 * e))
            }
        }
    }

    pub fn velocity(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        match self.amplitudes(t) {
            None => (0.0, 0.0),
            Some((a, _, _)) => {
                let j = curl_jet(a, sin2(x), sin2(y));
                (j.v[0], j.v[1])
            }
        }
    }

    pub fn magnetic(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        match self.amplitudes(t) {
            None => (0.0, 0.0),
            Some((_, _, c)) => {
                let j = curl_jet(c, sin3(x), sin3(y));
                (j.v[0], j.v[1])
            }
        }
    }

    pub fn micro_rotation(&self, t: f64, x: f64, y: f64) -> f64 {
        match self.amplitudes(t) {
            None => 0.0,
            Some((_, b, _)) => b * (PI * x).sin() * (PI * y).sin(),
        }
    }

    /// Stream functions of velocity and magnetic field.
    fn stream_functions(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        match self.amplitudes(t) {
            None => (0.0, 0.0),
            Some((a, _, c)) => (a * sin2(x)[0] * sin2(y)[0], c * sin3(x)[0] * sin3(y)[0]),
        }
    }

    /// Pointwise residual forcings `(f_u, f_w, f_b)`.
    pub fn forcing_at(&self, t: f64, x: f64, y: f64, p: &FluidParams) -> ([f64; 2], f64, [f64; 2]) {
        let Some((a, bw, c)) = self.amplitudes(t) else {
            return ([0.0; 2], 0.0, [0.0; 2]);
        };
        // every amplitude is e^-t times a constant, so d/dt = -identity
        let u = curl_jet(a, sin2(x), sin2(y));
        let b = curl_jet(c, sin3(x), sin3(y));
        let (sx, cx) = ((PI * x).sin(), (PI * x).cos());
        let (sy, cy) = ((PI * y).sin(), (PI * y).cos());
        let w = bw * sx * sy;
        let grad_w = [bw * PI * cx * sy, bw * PI * sx * cy];
        let perp_grad_w = [-grad_w[1], grad_w[0]];
        let visc = p.momentum_viscosity();
        let mut fu = [0.0; 2];
        let mut fb = [0.0; 2];
        for k in 0..2 {
            fu[k] = -u.v[k] + dot_grad(u.v, u.grad, k) - visc * u.lap[k] - dot_grad(b.v, b.grad, k)
                + p.chi * perp_grad_w[k];
            fb[k] = -b.v[k] + dot_grad(u.v, b.grad, k) - p.nu * b.lap[k] - dot_grad(b.v, u.grad, k);
        }
        let fw = -w + u.v[0] * grad_w[0] + u.v[1] * grad_w[1] + 2.0 * p.chi * w - p.chi * u.curl;
        (fu, fw, fb)
    }

    /// Exact discrete-compatible state: `u`, `b` are `perp_grad` of the nodal
    /// stream functions (exactly solenoidal), `w` is sampled at cells.
    pub fn exact_state(&self, t: f64, grid: GridSpec) -> Result<State> {
        let psi_u = ScalarField::nodes(grid, |x, y| self.stream_functions(t, x, y).0);
        let psi_b = ScalarField::nodes(grid, |x, y| self.stream_functions(t, x, y).1);
        let w = ScalarField::cells(grid, |x, y| self.micro_rotation(t, x, y));
        State::new(t, ops::perp_grad(&psi_u)?, w, ops::perp_grad(&psi_b)?)
    }

    /// Exact fields sampled pointwise at their staggered locations.
    pub fn sampled(&self, t: f64, grid: GridSpec) -> (VectorField, ScalarField, VectorField) {
        let mut u = VectorField::sample_mac(grid, |x, y| self.velocity(t, x, y));
        let mut b = VectorField::sample_mac(grid, |x, y| self.magnetic(t, x, y));
        u.zero_wall_normals();
        b.zero_wall_normals();
        (
            u,
            ScalarField::cells(grid, |x, y| self.micro_rotation(t, x, y)),
            b,
        )
    }
}

/// Manufactured forcing fields at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MmsForcing {
    pub fu: VectorField,
    pub fw: ScalarField,
    pub fb: VectorField,
}

/// Residual forcings of recipe `recipe` at time `t`, evaluated analytically at
/// the staggered locations of `grid`.
pub fn mms_forcing(
    t: f64,
    recipe: &Manufactured,
    params: &FluidParams,
    grid: GridSpec,
) -> Result<MmsForcing> {
    params.validate()?;
    if let Manufactured::Trig1 { .. } = recipe {
        if grid.is_periodic() {
            return Err(Error::InvalidParameter(
                "trig-1 lives on the walled square".into(),
            ));
        }
    }
    let mut fu = VectorField::sample_mac(grid, |x, y| {
        let f = recipe.forcing_at(t, x, y, params).0;
        (f[0], f[1])
    });
    let mut fb = VectorField::sample_mac(grid, |x, y| {
        let f = recipe.forcing_at(t, x, y, params).2;
        (f[0], f[1])
    });
    fu.zero_wall_normals();
    fb.zero_wall_normals();
    let fw = ScalarField::cells(grid, |x, y| recipe.forcing_at(t, x, y, params).1);
    Ok(MmsForcing { fu, fw, fb })
}
