//! Per-step diagnostic quantities recorded along a trajectory.

use crate::error::{Error, Result};
use crate::evolution::{mms_forcing, transport, Advection, Manufactured};
use crate::fields::{ops, Derivatives, FluidParams, LqNorm, ScalarField, State, VectorField};

/// Norms of one recorded state. Difference quotients, the energy residual
/// and the `L^q` margin refer to the step that produced the state and are
/// zero on the initial record.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub u_l2: f64,
    pub grad_u_l2: f64,
    pub w_l2: f64,
    pub w_l4: f64,
    pub grad_w_l4: f64,
    pub b_l2: f64,
    pub grad_b_l2: f64,
    pub hess_u_l2: f64,
    pub hess_b_l2: f64,
    pub hess_u_l4: f64,
    pub dtw_l2: f64,
    pub dtw_l4: f64,
    pub energy_residual: f64,
    pub lq_margin: f64,
    pub z_l2: f64,
}

impl DiagnosticsRecord {
    pub const COLUMNS: [&'static str; 16] = [
        "t",
        "u_l2",
        "grad_u_l2",
        "w_l2",
        "w_l4",
        "grad_w_l4",
        "b_l2",
        "grad_b_l2",
        "hess_u_l2",
        "hess_b_l2",
        "hess_u_l4",
        "dtw_l2",
        "dtw_l4",
        "energy_residual",
        "lq_margin",
        "z_l2",
    ];

    pub fn values(&self) -> [f64; 16] {
        [
            self.t,
            self.u_l2,
            self.grad_u_l2,
            self.w_l2,
            self.w_l4,
            self.grad_w_l4,
            self.b_l2,
            self.grad_b_l2,
            self.hess_u_l2,
            self.hess_b_l2,
            self.hess_u_l4,
            self.dtw_l2,
            self.dtw_l4,
            self.energy_residual,
            self.lq_margin,
            self.z_l2,
        ]
    }

    pub fn from_values(v: &[f64]) -> Result<Self> {
        let v: &[f64; 16] = v.try_into().map_err(|_| {
            Error::Trajectory(format!(
                "diagnostics row has {} values, expected 16",
                v.len()
            ))
        })?;
        Ok(Self {
            t: v[0],
            u_l2: v[1],
            grad_u_l2: v[2],
            w_l2: v[3],
            w_l4: v[4],
            grad_w_l4: v[5],
            b_l2: v[6],
            grad_b_l2: v[7],
            hess_u_l2: v[8],
            hess_b_l2: v[9],
            hess_u_l4: v[10],
            dtw_l2: v[11],
            dtw_l4: v[12],
            energy_residual: v[13],
            lq_margin: v[14],
            z_l2: v[15],
        })
    }

    /// `||u||^2 + ||w||^2 + ||b||^2`
    pub fn energy(&self) -> f64 {
        self.u_l2 * self.u_l2 + self.w_l2 * self.w_l2 + self.b_l2 * self.b_l2
    }
}

/// Time-derivative norms and the pieces of the `L^q` ledger for one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepRates {
    pub t: f64,
    pub dtu_l2: f64,
    pub dtb_l2: f64,
    pub grad_dtu_l2: f64,
    pub grad_dtb_l2: f64,
    /// `(a_{n+1}^q - e^{-2 q chi dt} a_n^q) / (q dt)` with `a = ||w||_q`.
    pub lq_lhs: f64,
    /// `s (e^{-2 chi dt} a_n + s)^{q-1} / dt`, `s = e^{-2 chi dt} dt ||chi Cu^n + f_w||_q`.
    pub lq_rhs: f64,
    /// `||w^n - dt A(u^n) w^n||_q - ||w^n||_q`: growth due to the transport scheme alone.
    pub scheme_slack: f64,
}

impl StepRates {
    pub const COLUMNS: [&'static str; 8] = [
        "t",
        "dtu_l2",
        "dtb_l2",
        "grad_dtu_l2",
        "grad_dtb_l2",
        "lq_lhs",
        "lq_rhs",
        "scheme_slack",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.t,
            self.dtu_l2,
            self.dtb_l2,
            self.grad_dtu_l2,
            self.grad_dtb_l2,
            self.lq_lhs,
            self.lq_rhs,
            self.scheme_slack,
        ]
    }

    pub fn from_values(v: &[f64]) -> Result<Self> {
        let v: &[f64; 8] = v.try_into().map_err(|_| {
            Error::Trajectory(format!("rates row has {} values, expected 8", v.len()))
        })?;
        Ok(Self {
            t: v[0],
            dtu_l2: v[1],
            dtb_l2: v[2],
            grad_dtu_l2: v[3],
            grad_dtb_l2: v[4],
            lq_lhs: v[5],
            lq_rhs: v[6],
            scheme_slack: v[7],
        })
    }
}

/// What the diagnostics need to know about the run that produced the states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsContext {
    pub params: FluidParams,
    pub dt: f64,
    /// Exponent of the recorded `L^q` margin.
    pub q: f64,
    pub advection: Advection,
    pub forcing: Option<Manufactured>,
}

/// `Z = Cu - chi / (mu + chi) w`.
pub fn z_field(s: &State, params: &FluidParams) -> Result<ScalarField> {
    let mut z = ops::cell_vorticity(&s.u)?;
    z.axpy(-params.coupling_ratio(), &s.w)?;
    Ok(z)
}

fn sq(x: f64) -> f64 {
    x * x
}

/// Residual of the discrete energy identity over the step `prev -> cur`:
/// `1/2 (E_{n+1} - E_n) / dt + (mu + chi) |grad u|^2 + 2 chi |w|^2 + nu |grad b|^2 - 2 chi <Cu, w>`,
/// dissipation and coupling taken at `n + 1`.
pub fn energy_residual(prev: &State, cur: &State, dt: f64, params: &FluidParams) -> Result<f64> {
    let energy =
        |s: &State| -> Result<f64> { Ok(s.u.inner(&s.u)? + s.w.inner(&s.w)? + s.b.inner(&s.b)?) };
    let chi = params.chi;
    let coupling = ops::cell_vorticity(&cur.u)?.inner(&cur.w)?;
    Ok(0.5 * (energy(cur)? - energy(prev)?) / dt
        + params.momentum_viscosity() * sq(cur.u.grad_norm(2.0)?)
        + 2.0 * chi * cur.w.inner(&cur.w)?
        + params.nu * sq(cur.b.grad_norm(2.0)?)
        - 2.0 * chi * coupling)
}

/// `(lhs, rhs, scheme_slack)` of the `L^q` ledger for the step `prev -> cur`.
pub fn lq_terms(
    prev: &State,
    cur: &State,
    ctx: &DiagnosticsContext,
    q: f64,
) -> Result<(f64, f64, f64)> {
    if !(q >= 2.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "L^q ledger needs q in [2, inf), got {q}"
        )));
    }
    let dt = ctx.dt;
    let chi = ctx.params.chi;
    let e = (-2.0 * chi * dt).exp();
    let a0 = prev.w.lq_norm(q)?;
    let a1 = cur.w.lq_norm(q)?;
    let mut source = ops::cell_vorticity(&prev.u)?;
    source.scale(chi);
    if let Some(m) = ctx.forcing.filter(|m| *m != Manufactured::Zero) {
        source.axpy(
            1.0,
            &mms_forcing(prev.t, &m, &ctx.params, *prev.w.grid())?.fw,
        )?;
    }
    let s = e * dt * source.lq_norm(q)?;
    let lhs = (a1.powf(q) - (e * a0).powf(q)) / (q * dt);
    let rhs = s * (e * a0 + s).powf(q - 1.0) / dt;
    let mut moved = prev.w.clone();
    moved.axpy(-dt, &transport(&prev.u, &prev.w, ctx.advection)?)?;
    Ok((lhs, rhs, moved.lq_norm(q)? - a0))
}

fn quotient_norms(a: &VectorField, b: &VectorField, dt: f64) -> Result<(f64, f64)> {
    let mut d = b.sub(a)?;
    d.scale(1.0 / dt);
    Ok((d.lq_norm(2.0)?, d.grad_norm(2.0)?))
}

/// Record for `cur`, reached from `prev` in one step (`None` for the initial state).
pub fn diagnose(
    prev: Option<&State>,
    cur: &State,
    ctx: &DiagnosticsContext,
) -> Result<(DiagnosticsRecord, StepRates)> {
    let mut rec = DiagnosticsRecord {
        t: cur.t,
        u_l2: cur.u.lq_norm(2.0)?,
        grad_u_l2: cur.u.grad_norm(2.0)?,
        w_l2: cur.w.lq_norm(2.0)?,
        w_l4: cur.w.lq_norm(4.0)?,
        grad_w_l4: cur.w.grad_norm(4.0)?,
        b_l2: cur.b.lq_norm(2.0)?,
        grad_b_l2: cur.b.grad_norm(2.0)?,
        hess_u_l2: cur.u.hessian_norm(2.0)?,
        hess_b_l2: cur.b.hessian_norm(2.0)?,
        hess_u_l4: cur.u.hessian_norm(4.0)?,
        z_l2: z_field(cur, &ctx.params)?.lq_norm(2.0)?,
        ..Default::default()
    };
    let mut rates = StepRates {
        t: cur.t,
        ..Default::default()
    };
    if let Some(prev) = prev {
        let dt = ctx.dt;
        let mut dw = cur.w.sub(&prev.w)?;
        dw.scale(1.0 / dt);
        rec.dtw_l2 = dw.lq_norm(2.0)?;
        rec.dtw_l4 = dw.lq_norm(4.0)?;
        rec.energy_residual = energy_residual(prev, cur, dt, &ctx.params)?;
        let (lhs, rhs, slack) = lq_terms(prev, cur, ctx, ctx.q)?;
        rec.lq_margin = rhs - lhs;
        (rates.dtu_l2, rates.grad_dtu_l2) = quotient_norms(&prev.u, &cur.u, dt)?;
        (rates.dtb_l2, rates.grad_dtb_l2) = quotient_norms(&prev.b, &cur.b, dt)?;
        (rates.lq_lhs, rates.lq_rhs, rates.scheme_slack) = (lhs, rhs, slack);
    }
    Ok((rec, rates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{init_state, InitRecipe, Integrator, StepConfig};
    use crate::fields::GridSpec;

    fn ctx(params: FluidParams, dt: f64) -> DiagnosticsContext {
        DiagnosticsContext {
            params,
            dt,
            q: 4.0,
            advection: Advection::Upwind2,
            forcing: None,
        }
    }

    #[test]
    fn columns_round_trip() {
        let r = DiagnosticsRecord {
            t: 0.5,
            hess_u_l4: 3.0,
            lq_margin: -1e-3,
            ..Default::default()
        };
        assert_eq!(DiagnosticsRecord::from_values(&r.values()).unwrap(), r);
        assert!(DiagnosticsRecord::from_values(&[0.0; 3]).is_err());
        let s = StepRates {
            scheme_slack: -2.0,
            ..Default::default()
        };
        assert_eq!(StepRates::from_values(&s.values()).unwrap(), s);
    }

    #[test]
    fn zero_state_gives_zero_record() {
        let g = GridSpec::dirichlet(8).unwrap();
        let z = State::zeros(g);
        let mut next = z.clone();
        next.t = 0.1;
        let c = ctx(FluidParams::new(0.1, 0.2, 0.3).unwrap(), 0.1);
        let (rec, rates) = diagnose(Some(&z), &next, &c).unwrap();
        assert!(rec.values()[1..].iter().all(|&v| v == 0.0));
        assert!(rates.values()[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn z_reduces_to_vorticity_without_rotation() {
        let g = GridSpec::dirichlet(12).unwrap();
        let mut s = init_state(InitRecipe::Smooth, g, 0).unwrap();
        s.w.scale(0.0);
        let p = FluidParams::new(0.1, 0.4, 0.1).unwrap();
        assert_eq!(z_field(&s, &p).unwrap(), ops::cell_vorticity(&s.u).unwrap());
        let torus = GridSpec::periodic(12).unwrap();
        let tp = 2.0 * std::f64::consts::PI;
        let grad = ops::grad(&ScalarField::cells(torus, |x, y| {
            (tp * x).sin() * (tp * y).cos()
        }))
        .unwrap();
        let mut irrot = State::zeros(torus);
        irrot.u = grad;
        assert!(z_field(&irrot, &p).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn coupling_is_dominated_by_dissipation() {
        // 4 chi <Cu, w> <= (mu + chi) |grad u|^2 + 4 chi^2 / (mu + chi) |w|^2 needs |Cu| <= |grad u|.
        let g = GridSpec::dirichlet(16).unwrap();
        for seed in 0..4 {
            let s = init_state(InitRecipe::RandomH1, g, seed).unwrap();
            for u in [&s.u, &s.b] {
                let cu = ops::cell_vorticity(u).unwrap().lq_norm(2.0).unwrap();
                assert!(cu <= u.grad_norm(2.0).unwrap() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn energy_residual_shrinks_with_dt() {
        // Central transport: upwinding adds a dt-independent dissipation.
        let g = GridSpec::dirichlet(16).unwrap();
        let s0 = init_state(InitRecipe::Smooth, g, 0).unwrap();
        let p = FluidParams::new(0.05, 0.2, 0.05).unwrap();
        let res = |dt: f64| {
            let cfg = StepConfig::new(dt).with_advection(Advection::Central);
            let mut it = Integrator::new(g, p, cfg).unwrap();
            let mut s = s0.clone();
            for _ in 0..(0.008 / dt).round() as usize - 1 {
                s = it.step(&s).unwrap();
            }
            let last = it.step(&s).unwrap();
            energy_residual(&s, &last, dt, &p).unwrap().abs()
        };
        let (r1, r2) = (res(0.004), res(0.002));
        assert!(r1 / r2 > 1.8, "{r1} {r2}");
    }

    #[test]
    fn lq_ledger_is_exact_without_flow() {
        let g = GridSpec::dirichlet(12).unwrap();
        let mut s0 = State::zeros(g);
        s0.w = ScalarField::cells(g, |x, y| (4.0 * x).cos() * y);
        let p = FluidParams::new(0.1, 0.6, 0.1).unwrap();
        let dt = 0.01;
        let mut it = Integrator::new(g, p, StepConfig::new(dt)).unwrap();
        let s1 = it.step(&s0).unwrap();
        for q in [2.0, 3.0, 4.0] {
            let (lhs, rhs, slack) = lq_terms(&s0, &s1, &ctx(p, dt), q).unwrap();
            assert!(
                lhs.abs() < 1e-10 && rhs == 0.0 && slack == 0.0,
                "{lhs} {rhs} {slack}"
            );
        }
        assert!(lq_terms(&s0, &s1, &ctx(p, dt), 1.5).is_err());
    }
}
