//! IMEX time stepping of the coupled system.
//!
//! Per step, with all transport and coupling terms explicit at `t_n`:
//!
//! * velocity: implicit `(mu + chi) Lap`, incremental pressure correction;
//! * magnetic field: implicit `nu Lap`, then projected;
//! * micro-rotation: explicit transport and source under the exact
//!   integrating factor `e^{-2 chi dt}`.
//!
//! `ImexAb2` is SBDF2 for the diffusive fields with Adams-Bashforth
//! extrapolation of the explicit terms (integrating-factor AB2 for `w`); its
//! first step falls back to `ImexEuler`.

use std::collections::HashMap;
use std::sync::Arc;

use super::advection::{convect, transport, Advection};
use super::recipes::{mms_forcing, Manufactured, MmsForcing};
use crate::error::{Error, Result};
use crate::fields::{ops, FluidParams, GridSpec, ScalarField, State, VectorField};
use crate::stokes::{shared_projector, HelmholtzSolver, Projector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ImexEuler,
    ImexAb2,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::ImexEuler => "imex-euler",
            Scheme::ImexAb2 => "imex-ab2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "imex-euler" => Some(Scheme::ImexEuler),
            "imex-ab2" => Some(Scheme::ImexAb2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub advection: Advection,
    /// Largest admissible `dt max(|u|, |b|) / h`.
    pub cfl_limit: f64,
    pub forcing: Option<Manufactured>,
}

impl StepConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            scheme: Scheme::ImexEuler,
            advection: Advection::Upwind2,
            cfl_limit: 0.5,
            forcing: None,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_advection(mut self, advection: Advection) -> Self {
        self.advection = advection;
        self
    }

    pub fn with_forcing(mut self, forcing: Manufactured) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn with_cfl_limit(mut self, cfl_limit: f64) -> Self {
        self.cfl_limit = cfl_limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if !(self.cfl_limit > 0.0 && self.cfl_limit <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl_limit must lie in (0, 1], got {}",
                self.cfl_limit
            )));
        }
        Ok(())
    }
}

/// Velocity, magnetic field and pressure of the forced MHD subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct MhdState {
    pub t: f64,
    pub u: VectorField,
    pub b: VectorField,
    pub p: ScalarField,
}

impl MhdState {
    pub fn new(t: f64, u: VectorField, b: VectorField) -> Self {
        let p = ScalarField::zeros(*u.grid(), crate::fields::ScalarPlacement::CellCenter);
        Self { t, u, b, p }
    }
}

#[derive(Debug, Clone)]
struct History {
    u: VectorField,
    b: VectorField,
    nu: VectorField,
    nb: VectorField,
}

/// Stateful stepper: caches factorizations and the multistep history.
#[derive(Debug)]
pub struct Integrator {
    grid: GridSpec,
    params: FluidParams,
    cfg: StepConfig,
    projector: Arc<Projector>,
    helmholtz: HashMap<u64, HelmholtzSolver>,
    hist: Option<History>,
    w_hist: Option<ScalarField>,
}

impl Integrator {
    pub fn new(grid: GridSpec, params: FluidParams, cfg: StepConfig) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        Ok(Self {
            grid,
            params,
            cfg,
            projector: shared_projector(&grid)?,
            helmholtz: HashMap::new(),
            hist: None,
            w_hist: None,
        })
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    pub fn params(&self) -> &FluidParams {
        &self.params
    }

    /// Forget the multistep history (next step is a start-up step).
    pub fn reset(&mut self) {
        self.hist = None;
        self.w_hist = None;
    }

    fn check_grid(&self, g: &GridSpec) -> Result<()> {
        if g != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn check_cfl(&self, u: &VectorField, b: Option<&VectorField>) -> Result<()> {
        let speed = b.map_or(u.max_abs(), |b| u.max_abs().max(b.max_abs()));
        let cfl = self.cfg.dt * speed / self.grid.h();
        if !(cfl <= self.cfg.cfl_limit) {
            return Err(Error::CflViolation {
                cfl,
                limit: self.cfg.cfl_limit,
            });
        }
        Ok(())
    }

    fn forcing(&self, t: f64) -> Result<Option<MmsForcing>> {
        match &self.cfg.forcing {
            None | Some(Manufactured::Zero) => Ok(None),
            Some(m) => mms_forcing(t, m, &self.params, self.grid).map(Some),
        }
    }

    fn solver(&mut self, alpha: f64) -> Result<&HelmholtzSolver> {
        let key = alpha.to_bits();
        if !self.helmholtz.contains_key(&key) {
            self.helmholtz
                .insert(key, HelmholtzSolver::new(self.grid, alpha)?);
        }
        Ok(&self.helmholtz[&key])
    }

    /// Advance `(u, b, p)` one step with torque scalar `torque` (the
    /// micro-rotation, or the frozen forcing of the MHD subproblem).
    fn advance_mhd(
        &mut self,
        u: &VectorField,
        b: &VectorField,
        p: &ScalarField,
        torque: &ScalarField,
        fu: Option<&VectorField>,
        fb: Option<&VectorField>,
    ) -> Result<(VectorField, VectorField, ScalarField)> {
        let dt = self.cfg.dt;
        let chi = self.params.chi;
        let mut nu = convect(b, b)?;
        nu.axpy(-1.0, &convect(u, u)?)?;
        nu.axpy(chi, &ops::vorticity_adjoint(torque)?)?;
        let mut nb = convect(b, u)?;
        nb.axpy(-1.0, &convect(u, b)?)?;

        let hist = self
            .hist
            .take()
            .filter(|_| self.cfg.scheme == Scheme::ImexAb2);
        let (gamma, mut ru, mut rb) = match &hist {
            None => {
                let mut ru = nu.clone();
                let mut rb = nb.clone();
                ru.scale(dt);
                rb.scale(dt);
                ru.axpy(1.0, u)?;
                rb.axpy(1.0, b)?;
                (1.0, ru, rb)
            }
            Some(h) => {
                // (4 x^n - x^{n-1}) / 3 + (2/3) dt (2 N^n - N^{n-1})
                let g = 2.0 / 3.0;
                let mut ru = u.scaled(4.0 / 3.0);
                ru.axpy(-1.0 / 3.0, &h.u)?;
                ru.axpy(2.0 * g * dt, &nu)?;
                ru.axpy(-g * dt, &h.nu)?;
                let mut rb = b.scaled(4.0 / 3.0);
                rb.axpy(-1.0 / 3.0, &h.b)?;
                rb.axpy(2.0 * g * dt, &nb)?;
                rb.axpy(-g * dt, &h.nb)?;
                (g, ru, rb)
            }
        };
        let gdt = gamma * dt;
        ru.axpy(-gdt, &ops::grad(p)?)?;
        if let Some(f) = fu {
            ru.axpy(gdt, f)?;
        }
        if let Some(f) = fb {
            rb.axpy(gdt, f)?;
        }
        let visc_u = self.params.momentum_viscosity();
        let visc_b = self.params.nu;
        let u_star = self.solver(gdt * visc_u)?.solve(&ru)?;
        let b_star = self.solver(gdt * visc_b)?.solve(&rb)?;
        let (u_new, phi) = self.projector.project(&u_star)?;
        let (b_new, _) = self.projector.project(&b_star)?;
        let mut p_new = p.clone();
        p_new.axpy(1.0 / gdt, &phi)?;
        self.hist = Some(History {
            u: u.clone(),
            b: b.clone(),
            nu,
            nb,
        });
        Ok((u_new, b_new, p_new))
    }

    /// `w^{n+1}` from the integrating-factor update with transport by `u` and
    /// source `chi curl(u)` (+ optional forcing).
    fn advance_w(
        &mut self,
        w: &ScalarField,
        u: &VectorField,
        fw: Option<&ScalarField>,
    ) -> Result<ScalarField> {
        let dt = self.cfg.dt;
        let chi = self.params.chi;
        let decay = (-2.0 * chi * dt).exp();
        let mut rate = transport(u, w, self.cfg.advection)?;
        rate.scale(-1.0);
        rate.axpy(chi, &ops::cell_vorticity(u)?)?;
        if let Some(f) = fw {
            rate.axpy(1.0, f)?;
        }
        let prev = self
            .w_hist
            .take()
            .filter(|_| self.cfg.scheme == Scheme::ImexAb2);
        let mut next = w.clone();
        match &prev {
            None => next.axpy(dt, &rate)?,
            Some(r_prev) => {
                next.axpy(1.5 * dt, &rate)?;
                next.axpy(-0.5 * dt * decay, r_prev)?;
            }
        }
        next.scale(decay);
        self.w_hist = Some(rate);
        Ok(next)
    }

    /// One step of the full coupled system.
    pub fn step(&mut self, s: &State) -> Result<State> {
        s.validate_layout()?;
        self.check_grid(s.grid())?;
        s.check_finite()?;
        self.check_cfl(&s.u, Some(&s.b))?;
        let dt = self.cfg.dt;
        let f_new = self.forcing(s.t + dt)?;
        let f_old = self.forcing(s.t)?;
        let (u, b, p) = self.advance_mhd(
            &s.u,
            &s.b,
            &s.p,
            &s.w,
            f_new.as_ref().map(|f| &f.fu),
            f_new.as_ref().map(|f| &f.fb),
        )?;
        let w = self.advance_w(&s.w, &s.u, f_old.as_ref().map(|f| &f.fw))?;
        let next = State {
            t: s.t + dt,
            u,
            w,
            b,
            p,
        };
        next.check_finite()?;
        Ok(next)
    }

    /// One step of the MHD subsystem with body force `-chi perp_grad(f)`.
    pub fn step_mhd(&mut self, s: &MhdState, f: &ScalarField) -> Result<MhdState> {
        self.check_grid(s.u.grid())?;
        self.check_grid(f.grid())?;
        self.check_cfl(&s.u, Some(&s.b))?;
        let (u, b, p) = self.advance_mhd(&s.u, &s.b, &s.p, f, None, None)?;
        let t = s.t + self.cfg.dt;
        for (name, v) in [("u", &u), ("b", &b)] {
            if let Some(index) = v.first_nonfinite() {
                return Err(Error::NonFinite {
                    field: name.into(),
                    index,
                    t,
                });
            }
        }
        Ok(MhdState { t, u, b, p })
    }

    /// One step of the linear transport-damping equation for `w` driven by `u`.
    pub fn step_w(&mut self, w: &ScalarField, u: &VectorField, t: f64) -> Result<ScalarField> {
        self.check_grid(w.grid())?;
        self.check_grid(u.grid())?;
        self.check_cfl(u, None)?;
        let next = self.advance_w(w, u, None)?;
        if let Some(index) = next.first_nonfinite() {
            return Err(Error::NonFinite {
                field: "w".into(),
                index,
                t: t + self.cfg.dt,
            });
        }
        Ok(next)
    }
}

/// One start-up step of the coupled system (no multistep history).
pub fn step_coupled(s: &State, cfg: &StepConfig, params: &FluidParams) -> Result<State> {
    Integrator::new(*s.grid(), *params, *cfg)?.step(s)
}

/// One start-up step of the forced MHD subsystem, starting from zero pressure.
pub fn step_mhd_forced(
    u: &VectorField,
    b: &VectorField,
    f: &ScalarField,
    cfg: &StepConfig,
    params: &FluidParams,
) -> Result<(VectorField, VectorField)> {
    let mut it = Integrator::new(*u.grid(), *params, *cfg)?;
    let s = it.step_mhd(&MhdState::new(0.0, u.clone(), b.clone()), f)?;
    Ok((s.u, s.b))
}

/// One step of `w_t + u . grad w = -2 chi w + chi curl u`.
pub fn step_w_transport(
    w: &ScalarField,
    u: &VectorField,
    cfg: &StepConfig,
    params: &FluidParams,
) -> Result<ScalarField> {
    Integrator::new(*w.grid(), *params, *cfg)?.step_w(w, u, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::recipes::{
        init_state, taylor_green_amplitudes, taylor_green_velocity, InitRecipe,
    };
    use crate::fields::{lq_norm, ScalarPlacement};
    use std::f64::consts::PI;

    fn params(mu: f64, chi: f64, nu: f64) -> FluidParams {
        FluidParams::new(mu, chi, nu).unwrap()
    }

    fn run(s0: &State, cfg: StepConfig, p: FluidParams, steps: usize) -> State {
        let mut it = Integrator::new(*s0.grid(), p, cfg).unwrap();
        let mut s = s0.clone();
        for _ in 0..steps {
            s = it.step(&s).unwrap();
        }
        s
    }

    fn radial(x: f64, y: f64) -> f64 {
        (x - 0.5).powi(2) + (y - 0.5).powi(2)
    }

    /// Rotating flow with circular streamlines, vanishing near the walls.
    fn swirl(g: GridSpec) -> VectorField {
        let psi = ScalarField::nodes(g, |x, y| 10.0 * (0.16 - radial(x, y)).max(0.0).powi(2));
        ops::perp_grad(&psi).unwrap()
    }

    #[test]
    fn zero_state_stays_zero() {
        for g in [
            GridSpec::dirichlet(8).unwrap(),
            GridSpec::periodic(8).unwrap(),
        ] {
            for scheme in [Scheme::ImexEuler, Scheme::ImexAb2] {
                let s0 = State::zeros(g);
                let s = run(
                    &s0,
                    StepConfig::new(0.01).with_scheme(scheme),
                    params(0.1, 0.3, 0.2),
                    5,
                );
                assert_eq!(
                    s.u.max_abs() + s.w.max_abs() + s.b.max_abs() + s.p.max_abs(),
                    0.0
                );
                assert!((s.t - 0.05).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_magnetic_field_is_invariant() {
        let g = GridSpec::dirichlet(16).unwrap();
        let mut s0 = init_state(InitRecipe::Smooth, g, 0).unwrap();
        s0.b = VectorField::mac_zeros(g);
        for scheme in [Scheme::ImexEuler, Scheme::ImexAb2] {
            let s = run(
                &s0,
                StepConfig::new(0.005).with_scheme(scheme),
                params(0.05, 0.2, 0.1),
                8,
            );
            assert_eq!(s.b.max_abs(), 0.0);
            assert!(s.u.max_abs() > 0.0);
        }
    }

    #[test]
    fn divergence_stays_discrete_zero() {
        for g in [
            GridSpec::dirichlet(16).unwrap(),
            GridSpec::periodic(16).unwrap(),
        ] {
            let s0 = init_state(InitRecipe::Smooth, g, 0).unwrap();
            let mut it =
                Integrator::new(g, params(0.05, 0.2, 0.1), StepConfig::new(0.005)).unwrap();
            let mut s = s0;
            for _ in 0..10 {
                s = it.step(&s).unwrap();
                assert!(ops::div(&s.u).unwrap().max_abs() <= 1e-10);
                assert!(ops::div(&s.b).unwrap().max_abs() <= 1e-10);
                assert!(s.u.wall_normal_max() == 0.0 && s.b.wall_normal_max() == 0.0);
            }
        }
    }

    #[test]
    fn w_without_flow_decays_by_integrating_factor() {
        let g = GridSpec::dirichlet(12).unwrap();
        let w = ScalarField::cells(g, |x, y| (3.0 * x).sin() + y * y);
        let u = VectorField::mac_zeros(g);
        let cfg = StepConfig::new(0.02);
        let p = params(0.1, 0.7, 0.1);
        let w1 = step_w_transport(&w, &u, &cfg, &p).unwrap();
        assert_eq!(w1, w.scaled((-2.0 * 0.7 * 0.02_f64).exp()));
        let frozen = step_w_transport(&w, &u, &cfg, &params(0.1, 0.0, 0.1)).unwrap();
        assert_eq!(frozen, w);
    }

    #[test]
    fn uncoupled_mhd_step_ignores_forcing_scalar() {
        let g = GridSpec::dirichlet(12).unwrap();
        let s = init_state(InitRecipe::Smooth, g, 0).unwrap();
        let cfg = StepConfig::new(0.01);
        let p = params(0.1, 0.0, 0.1);
        let f1 = ScalarField::cells(g, |x, y| (5.0 * x * y).cos());
        let f2 = ScalarField::cells(g, |x, _| 40.0 * x);
        let a = step_mhd_forced(&s.u, &s.b, &f1, &cfg, &p).unwrap();
        let b = step_mhd_forced(&s.u, &s.b, &f2, &cfg, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constant_forcing_scalar_exerts_no_force() {
        for g in [
            GridSpec::dirichlet(12).unwrap(),
            GridSpec::periodic(12).unwrap(),
        ] {
            let zero = VectorField::mac_zeros(g);
            let f = ScalarField::cells(g, |_, _| 3.0);
            let (u, b) = step_mhd_forced(
                &zero,
                &zero,
                &f,
                &StepConfig::new(0.01),
                &params(0.1, 0.5, 0.1),
            )
            .unwrap();
            assert!(u.max_abs() < 1e-13, "{}", u.max_abs());
            assert_eq!(b.max_abs(), 0.0);
        }
    }

    fn taylor_green_error(n: usize, dt: f64, p: FluidParams, t_end: f64) -> (f64, f64) {
        let g = GridSpec::periodic(n).unwrap();
        let s0 = init_state(InitRecipe::TaylorGreen, g, 0).unwrap();
        let steps = (t_end / dt).round() as usize;
        let s = run(&s0, StepConfig::new(dt), p, steps);
        let (a, c) = taylor_green_amplitudes(s.t, &p);
        let u_exact = taylor_green_velocity(g, 0.0, 0.0).scaled(a);
        let w_exact = ScalarField::cells(g, |x, y| c * (2.0 * PI * x).sin() * (2.0 * PI * y).sin());
        (
            s.u.sub(&u_exact).unwrap().max_abs(),
            s.w.sub(&w_exact).unwrap().max_abs(),
        )
    }

    #[test]
    fn taylor_green_decay_converges() {
        let p = params(0.02, 0.0, 0.02);
        let (e1, _) = taylor_green_error(16, 0.004, p, 0.2);
        let (e2, _) = taylor_green_error(32, 0.001, p, 0.2);
        assert!(e1 < 0.05, "{e1}");
        assert!(e1 / e2 > 3.0, "{e1} {e2}");
    }

    #[test]
    fn coupled_taylor_green_converges() {
        let p = params(0.02, 0.3, 0.02);
        let (u1, w1) = taylor_green_error(16, 0.004, p, 0.2);
        let (u2, w2) = taylor_green_error(32, 0.001, p, 0.2);
        assert!(u1 / u2 > 3.0, "{u1} {u2}");
        assert!(w1 / w2 > 3.0, "{w1} {w2}");
    }

    #[test]
    fn taylor_green_amplitudes_solve_their_ode() {
        let p = params(0.03, 0.4, 0.1);
        let k = 2.0 * PI;
        let (t, e) = (0.3, 1e-5);
        let (a, c) = taylor_green_amplitudes(t, &p);
        let (ap, cp) = taylor_green_amplitudes(t + e, &p);
        let (am, cm) = taylor_green_amplitudes(t - e, &p);
        let da = (ap - am) / (2.0 * e);
        let dc = (cp - cm) / (2.0 * e);
        assert!((da - (-2.0 * k * k * p.momentum_viscosity() * a + p.chi * k * c)).abs() < 1e-6);
        assert!((dc - (2.0 * p.chi * k * a - 2.0 * p.chi * c)).abs() < 1e-6);
        assert_eq!(taylor_green_amplitudes(0.0, &p), (1.0, 0.0));
    }

    /// Navier-Stokes step written without any coupling terms.
    fn reference_ns_step(
        u: &VectorField,
        pr: &ScalarField,
        dt: f64,
        visc: f64,
    ) -> (VectorField, ScalarField) {
        let g = *u.grid();
        let mut n = VectorField::mac_zeros(g);
        n.axpy(-1.0, &convect(u, u).unwrap()).unwrap();
        let mut r = n;
        r.scale(dt);
        r.axpy(1.0, u).unwrap();
        r.axpy(-dt, &ops::grad(pr).unwrap()).unwrap();
        let star = HelmholtzSolver::new(g, dt * visc)
            .unwrap()
            .solve(&r)
            .unwrap();
        let (u1, phi) = shared_projector(&g).unwrap().project(&star).unwrap();
        let mut p1 = pr.clone();
        p1.axpy(1.0 / dt, &phi).unwrap();
        (u1, p1)
    }

    #[test]
    fn uncoupled_step_matches_navier_stokes_reference() {
        let g = GridSpec::dirichlet(16).unwrap();
        let mut s = init_state(InitRecipe::Smooth, g, 0).unwrap();
        s.w = ScalarField::zeros(g, ScalarPlacement::CellCenter);
        s.b = VectorField::mac_zeros(g);
        let p = params(0.07, 0.0, 0.1);
        let dt = 0.005;
        let mut it = Integrator::new(g, p, StepConfig::new(dt)).unwrap();
        let (mut u, mut pr) = (s.u.clone(), s.p.clone());
        for _ in 0..4 {
            s = it.step(&s).unwrap();
            (u, pr) = reference_ns_step(&u, &pr, dt, 0.07);
            assert_eq!(s.u, u);
            assert_eq!(s.p, pr);
            assert_eq!(s.w.max_abs(), 0.0);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let g = GridSpec::dirichlet(16).unwrap();
        let s0 = init_state(InitRecipe::RandomH1, g, 11).unwrap();
        let cfg = StepConfig::new(0.002).with_scheme(Scheme::ImexAb2);
        let a = run(&s0, cfg, params(0.05, 0.3, 0.05), 6);
        let b = run(&s0, cfg, params(0.05, 0.3, 0.05), 6);
        assert_eq!(a, b);
    }

    #[test]
    fn oversized_step_is_refused() {
        let g = GridSpec::dirichlet(16).unwrap();
        let s0 = init_state(InitRecipe::Smooth, g, 0).unwrap();
        let err = step_coupled(&s0, &StepConfig::new(0.5), &params(0.1, 0.1, 0.1)).unwrap_err();
        assert!(matches!(err, Error::CflViolation { limit, .. } if limit == 0.5));
        let w_err = step_w_transport(&s0.w, &s0.u, &StepConfig::new(0.5), &params(0.1, 0.1, 0.1));
        assert!(matches!(w_err, Err(Error::CflViolation { .. })));
    }

    #[test]
    fn nonfinite_input_is_located() {
        let g = GridSpec::dirichlet(8).unwrap();
        let mut s0 = State::zeros(g);
        s0.w.data[13] = f64::NAN;
        let err = step_coupled(&s0, &StepConfig::new(0.01), &params(0.1, 0.1, 0.1)).unwrap_err();
        match err {
            Error::NonFinite { field, index, .. } => assert_eq!((field.as_str(), index), ("w", 13)),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let g = GridSpec::dirichlet(8).unwrap();
        let p = params(0.1, 0.1, 0.1);
        assert!(Integrator::new(g, p, StepConfig::new(0.0)).is_err());
        assert!(Integrator::new(g, p, StepConfig::new(0.1).with_cfl_limit(1.5)).is_err());
        assert_eq!(Scheme::parse("imex-ab2"), Some(Scheme::ImexAb2));
        assert_eq!(
            Scheme::parse(Scheme::ImexEuler.as_str()),
            Some(Scheme::ImexEuler)
        );
    }

    #[test]
    fn upwind_transport_of_swirl_is_lq_nonexpansive() {
        let g = GridSpec::dirichlet(32).unwrap();
        let u = swirl(g);
        let w0 = ScalarField::cells(g, |x, y| (-radial(x, y) / 0.02).exp());
        let p = params(0.1, 0.0, 0.1);
        let mut it = Integrator::new(g, p, StepConfig::new(0.01)).unwrap();
        let mut w = w0.clone();
        let mut prev = [lq_norm(&w, 2.0).unwrap(), lq_norm(&w, 4.0).unwrap()];
        for n in 0..40 {
            w = it.step_w(&w, &u, n as f64 * 0.01).unwrap();
            let cur = [lq_norm(&w, 2.0).unwrap(), lq_norm(&w, 4.0).unwrap()];
            for (c, p) in cur.iter().zip(&prev) {
                assert!(*c <= p * (1.0 + 1e-12), "{c} > {p} at step {n}");
            }
            prev = cur;
        }
    }

    #[test]
    fn swirl_preserves_radial_profile() {
        let err = |n: usize| {
            let g = GridSpec::dirichlet(n).unwrap();
            let u = swirl(g);
            let w0 = ScalarField::cells(g, |x, y| (-radial(x, y) / 0.02).exp());
            let dt = 0.16 / n as f64;
            let mut it = Integrator::new(g, params(0.1, 0.0, 0.1), StepConfig::new(dt)).unwrap();
            let mut w = w0.clone();
            for k in 0..(n / 4) {
                w = it.step_w(&w, &u, k as f64 * dt).unwrap();
            }
            w.sub(&w0).unwrap().max_abs()
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e1 < 0.05, "{e1}");
        assert!(e2 < e1, "{e1} {e2}");
    }
}
