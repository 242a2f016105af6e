//! Residuals of the weak formulation along a trajectory, tested against a
//! bank of compactly supported divergence-free fields.
//!
//! For a time-independent test field `phi` the momentum identity over
//! `[t_0, t_N]` reads
//! `<u(t_N) - u(t_0), phi> = int <(mu + chi) Lap u - div(u u) + div(b b) + chi C^T w, phi> dt`,
//! and similarly for `w` and `b`. The time integral is taken by the
//! trapezoidal rule over the stored states, so the residual measures the
//! time discretization as seen through each test field.

use crate::error::{Error, Result};
use crate::evolution::{convect, mms_forcing, transport, Manufactured, Trajectory};
use crate::fields::{ops, FluidParams, GridSpec, ScalarField, State, VectorField};

/// One member of the test bank.
#[derive(Debug, Clone)]
pub struct TestFunction {
    /// Divergence-free test field for the momentum and induction identities.
    pub field: VectorField,
    /// Scalar test function for the micro-rotation identity and the
    /// solenoidality pairings.
    pub scalar: ScalarField,
}

const BUMP_RADIUS: f64 = 0.2;

fn bump(cx: f64, cy: f64, x: f64, y: f64) -> f64 {
    let r2 = ((x - cx).powi(2) + (y - cy).powi(2)) / (BUMP_RADIUS * BUMP_RADIUS);
    if r2 < 1.0 {
        (1.0 - r2).powi(4)
    } else {
        0.0
    }
}

/// `size` bumps of radius 0.2 centered at a low-discrepancy sequence in
/// `[0.3, 0.7]^2`; the vector fields are `perp_grad` of the nodal bumps.
pub fn test_bank(grid: GridSpec, size: usize) -> Result<Vec<TestFunction>> {
    let (a1, a2) = (0.754_877_666_246_692_8, 0.569_840_290_998_053_2);
    (0..size)
        .map(|m| {
            let cx = 0.3 + 0.4 * (0.5 + a1 * m as f64).fract();
            let cy = 0.3 + 0.4 * (0.5 + a2 * m as f64).fract();
            let stream = ScalarField::nodes(grid, |x, y| bump(cx, cy, x, y));
            Ok(TestFunction {
                field: ops::perp_grad(&stream)?,
                scalar: ScalarField::cells(grid, |x, y| bump(cx, cy, x, y)),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakRow {
    pub momentum: f64,
    pub micro_rotation: f64,
    pub magnetic: f64,
}

impl WeakRow {
    pub fn max_abs(&self) -> f64 {
        self.momentum
            .abs()
            .max(self.micro_rotation.abs())
            .max(self.magnetic.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakResidualTable {
    pub rows: Vec<WeakRow>,
    pub max_residual: f64,
    /// Largest `|<u, grad theta>|` or `|<b, grad theta>|` over tests and stored times.
    pub max_solenoidal: f64,
}

/// Right-hand sides of the three evolution equations at one state.
struct Rates {
    u: VectorField,
    w: ScalarField,
    b: VectorField,
}

fn rates(s: &State, traj: &Trajectory, params: &FluidParams) -> Result<Rates> {
    let chi = params.chi;
    let mut u = ops::vector_laplacian(&s.u)?;
    u.scale(params.momentum_viscosity());
    u.axpy(-1.0, &convect(&s.u, &s.u)?)?;
    u.axpy(1.0, &convect(&s.b, &s.b)?)?;
    u.axpy(chi, &ops::vorticity_adjoint(&s.w)?)?;
    let mut w = transport(&s.u, &s.w, traj.config.advection)?;
    w.scale(-1.0);
    w.axpy(-2.0 * chi, &s.w)?;
    w.axpy(chi, &ops::cell_vorticity(&s.u)?)?;
    let mut b = ops::vector_laplacian(&s.b)?;
    b.scale(params.nu);
    b.axpy(-1.0, &convect(&s.u, &s.b)?)?;
    b.axpy(1.0, &convect(&s.b, &s.u)?)?;
    if let Some(m) = traj.config.forcing.filter(|m| *m != Manufactured::Zero) {
        let f = mms_forcing(s.t, &m, params, *s.grid())?;
        u.axpy(1.0, &f.fu)?;
        w.axpy(1.0, &f.fw)?;
        b.axpy(1.0, &f.fb)?;
    }
    Ok(Rates { u, w, b })
}

/// Residual of each weak identity over the whole stored window, per test.
pub fn weak_form_residual(
    traj: &Trajectory,
    test_bank_size: usize,
    params: &FluidParams,
) -> Result<WeakResidualTable> {
    if test_bank_size == 0 {
        return Err(Error::InvalidParameter(
            "weak-form residual needs a non-empty test bank".into(),
        ));
    }
    let bank = test_bank(traj.grid, test_bank_size)?;
    let states: Vec<&State> = traj.snapshots.iter().map(|s| &s.1).collect();
    let (first, last) = match (states.first(), states.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::Trajectory("trajectory has no stored states".into())),
    };
    let mut rows: Vec<WeakRow> = Vec::with_capacity(bank.len());
    for tf in &bank {
        rows.push(WeakRow {
            momentum: last.u.sub(&first.u)?.inner(&tf.field)?,
            micro_rotation: last.w.sub(&first.w)?.inner(&tf.scalar)?,
            magnetic: last.b.sub(&first.b)?.inner(&tf.field)?,
        });
    }
    let mut max_solenoidal: f64 = 0.0;
    let mut prev: Option<(f64, Vec<[f64; 3]>)> = None;
    for s in &states {
        let r = rates(s, traj, params)?;
        let mut pairs = Vec::with_capacity(bank.len());
        for tf in &bank {
            pairs.push([
                r.u.inner(&tf.field)?,
                r.w.inner(&tf.scalar)?,
                r.b.inner(&tf.field)?,
            ]);
            let g = ops::grad(&tf.scalar)?;
            max_solenoidal = max_solenoidal
                .max(s.u.inner(&g)?.abs())
                .max(s.b.inner(&g)?.abs());
        }
        if let Some((t0, p0)) = &prev {
            let h = 0.5 * (s.t - t0);
            for ((row, a), b) in rows.iter_mut().zip(p0).zip(&pairs) {
                row.momentum -= h * (a[0] + b[0]);
                row.micro_rotation -= h * (a[1] + b[1]);
                row.magnetic -= h * (a[2] + b[2]);
            }
        }
        prev = Some((s.t, pairs));
    }
    Ok(WeakResidualTable {
        max_residual: rows.iter().map(|r| r.max_abs()).fold(0.0, f64::max),
        rows,
        max_solenoidal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{init_state, run_simulation, InitRecipe, RunOptions, StepConfig};

    #[test]
    fn bank_is_solenoidal_and_compactly_supported() {
        let g = GridSpec::dirichlet(32).unwrap();
        let bank = test_bank(g, 10).unwrap();
        assert_eq!(bank.len(), 10);
        for tf in &bank {
            assert!(ops::div(&tf.field).unwrap().max_abs() < 1e-13);
            assert_eq!(tf.field.xat(0, 5), 0.0);
            assert_eq!(tf.field.yat(5, 32), 0.0);
            assert!(tf.field.max_abs() > 0.0);
        }
    }

    #[test]
    fn empty_bank_is_rejected() {
        let g = GridSpec::dirichlet(8).unwrap();
        let p = FluidParams::new(0.1, 0.1, 0.1).unwrap();
        let traj = run_simulation(
            &State::zeros(g),
            0.02,
            &StepConfig::new(0.01),
            &p,
            RunOptions::default(),
        )
        .unwrap();
        assert!(weak_form_residual(&traj, 0, &p).is_err());
        let t = weak_form_residual(&traj, 4, &p).unwrap();
        assert_eq!(t.max_residual, 0.0);
        assert_eq!(t.max_solenoidal, 0.0);
    }

    #[test]
    fn residual_shrinks_with_step() {
        let g = GridSpec::dirichlet(16).unwrap();
        let p = FluidParams::new(0.05, 0.3, 0.05).unwrap();
        let s0 = init_state(InitRecipe::Smooth, g, 0).unwrap();
        let res = |dt: f64| {
            let traj =
                run_simulation(&s0, 0.04, &StepConfig::new(dt), &p, RunOptions::default()).unwrap();
            let t = weak_form_residual(&traj, 6, &p).unwrap();
            assert!(t.max_solenoidal < 1e-10);
            t.max_residual
        };
        let (r1, r2) = (res(0.004), res(0.002));
        assert!(r1 / r2 > 1.7, "{r1} {r2}");
    }
}
