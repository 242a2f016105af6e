//! Ledgers built from a trajectory's records: energy balance and its Gronwall
//! envelope, the `L^q` inequality for `w`, the budget of the first-level
//! estimate, and the t-weighted second-derivative estimate.

use super::diagnostics::{lq_terms, z_field, DiagnosticsRecord};
use super::refine::fit_order;
use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::fields::{FluidParams, LqNorm};

fn sq(x: f64) -> f64 {
    x * x
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    pub dt: f64,
    pub t: Vec<f64>,
    /// Discrete energy identity residual per step (0 at the initial record).
    pub residual: Vec<f64>,
    /// `E_n + dt sum_{k <= n} ((mu + chi) |grad u_k|^2 + 4 chi |w_k|^2 + 2 nu |grad b_k|^2)`
    pub bounded: Vec<f64>,
    /// Gronwall envelope for `bounded`.
    pub envelope: Vec<f64>,
    pub max_abs_residual: f64,
    pub envelope_holds: bool,
}

impl EnergyLedger {
    /// Smallest `envelope - bounded` over the run.
    pub fn envelope_margin(&self) -> f64 {
        self.envelope
            .iter()
            .zip(&self.bounded)
            .map(|(e, b)| e - b)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Energy identity residuals plus the envelope
/// `y_{n+1} = y_n (1 + c' dt) + d'_n dt`, with `c = 4 chi^2 / (mu + chi)`
/// from absorbing the coupling `4 chi <Cu, w>` into the velocity dissipation,
/// `c' = c / (1 - c dt)` and `d'_n = 2 max(residual_n, 0) / (1 - c dt)`.
pub fn energy_audit(traj: &Trajectory, params: &FluidParams) -> Result<EnergyLedger> {
    traj.check_uniform()?;
    let dt = traj.dt();
    let recs = &traj.records;
    let c = 4.0 * sq(params.chi) / params.momentum_viscosity();
    let damp = 1.0 - c * dt;
    let dissipation = |r: &DiagnosticsRecord| {
        params.momentum_viscosity() * sq(r.grad_u_l2)
            + 4.0 * params.chi * sq(r.w_l2)
            + 2.0 * params.nu * sq(r.grad_b_l2)
    };
    let mut bounded = Vec::with_capacity(recs.len());
    let mut envelope = Vec::with_capacity(recs.len());
    let mut acc = 0.0;
    for (n, r) in recs.iter().enumerate() {
        if n == 0 {
            envelope.push(r.energy());
        } else {
            acc += dt * dissipation(r);
            let prev = envelope[n - 1];
            envelope.push(if damp > 0.0 {
                prev * (1.0 + c / damp * dt) + 2.0 * r.energy_residual.max(0.0) / damp * dt
            } else {
                f64::INFINITY
            });
        }
        bounded.push(r.energy() + acc);
    }
    let envelope_holds = bounded
        .iter()
        .zip(&envelope)
        .all(|(b, e)| *b <= e * (1.0 + 1e-12) + 1e-14);
    let residual: Vec<f64> = recs.iter().map(|r| r.energy_residual).collect();
    Ok(EnergyLedger {
        dt,
        t: recs.iter().map(|r| r.t).collect(),
        max_abs_residual: residual.iter().fold(0.0, |m, r| m.max(r.abs())),
        residual,
        bounded,
        envelope,
        envelope_holds,
    })
}

/// For each ledger, the largest `|residual|` at the recorded times of the
/// coarsest ledger (excluding `t = 0`), together with the fitted order in `dt`.
pub fn energy_residual_order(ledgers: &[EnergyLedger]) -> Result<(Vec<f64>, f64)> {
    let coarse = ledgers
        .iter()
        .max_by(|a, b| a.dt.total_cmp(&b.dt))
        .ok_or_else(|| Error::InvalidParameter("no ledgers to compare".into()))?;
    let times = &coarse.t[1..];
    let mut maxima = Vec::with_capacity(ledgers.len());
    for l in ledgers {
        let mut m: f64 = 0.0;
        for &t in times {
            let k = (t / l.dt).round() as usize;
            let r = l
                .residual
                .get(k)
                .filter(|_| (l.t[k] - t).abs() <= 1e-9 * t.max(1.0))
                .ok_or_else(|| {
                    Error::Trajectory(format!(
                        "time {t} is not a step of the run with dt {}",
                        l.dt
                    ))
                })?;
            m = m.max(r.abs());
        }
        maxima.push(m);
    }
    let dts: Vec<f64> = ledgers.iter().map(|l| l.dt).collect();
    let order = fit_order(&dts, &maxima);
    Ok((maxima, order))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LqLedger {
    pub q: f64,
    pub t: Vec<f64>,
    /// Discrete `(1/q) d/dt |w|_q^q + 2 chi |w|_q^q`.
    pub lhs: Vec<f64>,
    /// Discrete `chi |curl u|_q |w|_q^{q-1}` (plus forcing).
    pub rhs: Vec<f64>,
    pub margin: Vec<f64>,
    /// Growth of `|w|_q` caused by the transport scheme alone; `<= 0` for a
    /// non-expansive scheme.
    pub scheme_slack: Vec<f64>,
    pub min_margin: f64,
    pub max_scheme_slack: f64,
}

impl LqLedger {
    pub fn holds(&self, tol: f64) -> bool {
        self.min_margin >= -tol
    }
}

/// Per-step ledger of the `L^q` inequality for `w`, `q in [2, inf)`. Uses the
/// recorded terms when `q` is the recorded exponent, otherwise recomputes
/// them from the stored states (which then must be consecutive).
pub fn w_lq_audit(traj: &Trajectory, q: f64, _params: &FluidParams) -> Result<LqLedger> {
    if !(q >= 2.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "L^q ledger needs q in [2, inf), got {q}"
        )));
    }
    traj.check_uniform()?;
    let steps = &traj.rates[1..];
    let (t, terms): (Vec<f64>, Vec<(f64, f64, f64)>) = if q == traj.options.lq_exponent {
        steps
            .iter()
            .map(|r| (r.t, (r.lq_lhs, r.lq_rhs, r.scheme_slack)))
            .unzip()
    } else {
        if traj.consecutive_pairs().count() != traj.steps() {
            return Err(Error::Trajectory(format!(
                "L^{q} ledger needs every step stored (stride 1) or the recorded exponent {}",
                traj.options.lq_exponent
            )));
        }
        let ctx = traj.diagnostics_context();
        let mut t = Vec::new();
        let mut terms = Vec::new();
        for (a, b) in traj.consecutive_pairs() {
            t.push(b.t);
            terms.push(lq_terms(a, b, &ctx, q)?);
        }
        (t, terms)
    };
    let lhs: Vec<f64> = terms.iter().map(|x| x.0).collect();
    let rhs: Vec<f64> = terms.iter().map(|x| x.1).collect();
    let scheme_slack: Vec<f64> = terms.iter().map(|x| x.2).collect();
    let margin: Vec<f64> = rhs.iter().zip(&lhs).map(|(r, l)| r - l).collect();
    Ok(LqLedger {
        q,
        t,
        min_margin: margin.iter().copied().fold(f64::INFINITY, f64::min),
        max_scheme_slack: scheme_slack
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max),
        lhs,
        rhs,
        margin,
        scheme_slack,
    })
}

/// Suprema and time integrals of the first-level estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GronwallBudget {
    /// `sup |u|_{H^1}^2`
    pub sup_u_h1: f64,
    /// `sup |w|_{W^{1,4}}^2`
    pub sup_w_w14: f64,
    /// `sup |b|_{H^1}^2`
    pub sup_b_h1: f64,
    /// `int |grad^2 u|_{L^4}^2`
    pub int_hess_u_l4: f64,
    /// `int |grad^2 b|_{L^2}^2`
    pub int_hess_b_l2: f64,
    /// `int |u_t|_{L^2}^2`
    pub int_dtu_l2: f64,
    /// `int |w_t|_{L^4}^2`
    pub int_dtw_l4: f64,
    /// `int |b_t|_{L^2}^2`
    pub int_dtb_l2: f64,
}

impl GronwallBudget {
    pub fn entries(&self) -> [(&'static str, f64); 8] {
        [
            ("sup_u_h1", self.sup_u_h1),
            ("sup_w_w14", self.sup_w_w14),
            ("sup_b_h1", self.sup_b_h1),
            ("int_hess_u_l4", self.int_hess_u_l4),
            ("int_hess_b_l2", self.int_hess_b_l2),
            ("int_dtu_l2", self.int_dtu_l2),
            ("int_dtw_l4", self.int_dtw_l4),
            ("int_dtb_l2", self.int_dtb_l2),
        ]
    }

    /// Left-hand side of the estimate: all entries summed.
    pub fn total(&self) -> f64 {
        self.entries().iter().map(|e| e.1).sum()
    }
}

/// Integrals are right-endpoint sums over the steps.
pub fn gronwall_budget(traj: &Trajectory, _params: &FluidParams) -> GronwallBudget {
    let dt = traj.dt();
    let mut b = GronwallBudget::default();
    for (n, (r, s)) in traj.records.iter().zip(&traj.rates).enumerate() {
        b.sup_u_h1 = b.sup_u_h1.max(sq(r.u_l2) + sq(r.grad_u_l2));
        b.sup_w_w14 = b
            .sup_w_w14
            .max((r.w_l4.powi(4) + r.grad_w_l4.powi(4)).sqrt());
        b.sup_b_h1 = b.sup_b_h1.max(sq(r.b_l2) + sq(r.grad_b_l2));
        if n > 0 {
            b.int_hess_u_l4 += dt * sq(r.hess_u_l4);
            b.int_hess_b_l2 += dt * sq(r.hess_b_l2);
            b.int_dtu_l2 += dt * sq(s.dtu_l2);
            b.int_dtw_l4 += dt * sq(r.dtw_l4);
            b.int_dtb_l2 += dt * sq(s.dtb_l2);
        }
    }
    b
}

#[derive(Debug, Clone, PartialEq)]
pub struct TWeightedLedger {
    pub t: Vec<f64>,
    /// `t |grad^2 u|^2`
    pub tw_hess_u: Vec<f64>,
    /// `t |grad^2 b|^2`
    pub tw_hess_b: Vec<f64>,
    /// Running `int t (|grad u_t|^2 + |grad b_t|^2)`, accumulated from step 2.
    pub accumulation: Vec<f64>,
    pub sup_tw_hess_u: f64,
    pub sup_tw_hess_b: f64,
    pub integral: f64,
    /// Unweighted `|grad^2 b|^2` after the first step.
    pub first_step_hess_b: f64,
}

/// Ledger of the t-weighted second-derivative estimate.
pub fn tweighted_h2_audit(traj: &Trajectory, _params: &FluidParams) -> Result<TWeightedLedger> {
    if traj.steps() < 4 {
        return Err(Error::Trajectory(format!(
            "t-weighted audit needs at least 4 steps, got {}",
            traj.steps()
        )));
    }
    traj.check_uniform()?;
    let dt = traj.dt();
    let t0 = traj.records[0].t;
    let mut led = TWeightedLedger {
        t: Vec::new(),
        tw_hess_u: Vec::new(),
        tw_hess_b: Vec::new(),
        accumulation: Vec::new(),
        sup_tw_hess_u: 0.0,
        sup_tw_hess_b: 0.0,
        integral: 0.0,
        first_step_hess_b: sq(traj.records[1].hess_b_l2),
    };
    for (n, (r, s)) in traj.records.iter().zip(&traj.rates).enumerate() {
        let t = r.t - t0;
        let hu = t * sq(r.hess_u_l2);
        let hb = t * sq(r.hess_b_l2);
        if n >= 2 {
            led.integral += dt * t * (sq(s.grad_dtu_l2) + sq(s.grad_dtb_l2));
        }
        led.sup_tw_hess_u = led.sup_tw_hess_u.max(hu);
        led.sup_tw_hess_b = led.sup_tw_hess_b.max(hb);
        led.t.push(r.t);
        led.tw_hess_u.push(hu);
        led.tw_hess_b.push(hb);
        led.accumulation.push(led.integral);
    }
    Ok(led)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZSeries {
    pub t: Vec<f64>,
    pub z_l2: Vec<f64>,
}

/// `|Z|_{L^2}` at every stored state, `Z = curl u - chi / (mu + chi) w`.
pub fn z_diagnostic(traj: &Trajectory, params: &FluidParams) -> Result<ZSeries> {
    let mut out = ZSeries {
        t: Vec::new(),
        z_l2: Vec::new(),
    };
    for (_, s) in &traj.snapshots {
        out.t.push(s.t);
        out.z_l2.push(z_field(s, params)?.lq_norm(2.0)?);
    }
    Ok(out)
}
