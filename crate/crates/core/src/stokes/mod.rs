//! Stationary Stokes solves, Leray projection and the auxiliary split
//! `u = g + v` where `v` absorbs the micro-rotation torque.

pub mod assembly;
mod probe;
mod saddle;
pub mod sparse;

pub use probe::{stokes_regularity_probe, ProbeLevel, StokesProbeReport, PROBE_KMAX};
pub use saddle::{
    shared_projector, shared_saddle, HelmholtzSolver, Projector, SaddleSystem, StokesMethod,
    StokesSolution,
};

use crate::error::{Error, Result};
use crate::fields::{ops, FluidParams, ScalarField, VectorField};

/// Default absolute tolerance on the saddle residual.
pub const DEFAULT_TOL: f64 = 1e-8;

/// `-Lap v + grad p = f`, `div v = 0`, `v = 0` on the walls, zero-mean `p`.
pub fn solve_stationary_stokes(f: &VectorField, tol: f64) -> Result<StokesSolution> {
    shared_saddle(f.grid())?.solve(f, tol)
}

/// `u_star - grad phi` with `Lap phi = div u_star`, Neumann walls, zero-mean `phi`.
pub fn leray_project(u_star: &VectorField) -> Result<VectorField> {
    Ok(shared_projector(u_star.grid())?.project(u_star)?.0)
}

/// Stokes solution driven by the micro-rotation torque
/// `-chi / (mu + chi) perp_grad(w)`.
pub fn aux_field_v(w: &ScalarField, params: &FluidParams, tol: f64) -> Result<StokesSolution> {
    params.validate()?;
    if !w.is_finite() {
        return Err(Error::InvalidParameter("non-finite micro-rotation".into()));
    }
    let sys = shared_saddle(w.grid())?;
    if params.chi == 0.0 {
        let mut sol = sys.solve(&VectorField::mac_zeros(*w.grid()), tol)?;
        sol.residual = 0.0;
        return Ok(sol);
    }
    let f = ops::perp_grad(w)?.scaled(-params.coupling_ratio());
    sys.solve(&f, tol)
}

/// `g = u - v`.
pub fn compose_g(u: &VectorField, w: &ScalarField, params: &FluidParams) -> Result<VectorField> {
    if u.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    let v = aux_field_v(w, params, DEFAULT_TOL)?;
    if !v.converged {
        return Err(Error::ToleranceNotReached {
            residual: v.residual,
            tol: DEFAULT_TOL,
        });
    }
    u.sub(&v.v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{GridSpec, ScalarPlacement};
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mac(g: GridSpec, seed: u64) -> VectorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = VectorField::mac_zeros(g);
        v.x.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
        v.y.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
        v.zero_wall_normals();
        v
    }

    /// Dense bordered saddle matrix built column by column from the
    /// matrix-free operators.
    fn dense_saddle(g: GridSpec) -> (DMatrix<f64>, assembly::MacIndex) {
        let idx = assembly::MacIndex::new(g);
        let nv = idx.len();
        let nc = g.n() * g.n();
        let dim = nv + nc + 1;
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..nv {
            let mut e = vec![0.0; nv];
            e[k] = 1.0;
            let v = idx.scatter(&e);
            let lap = idx.gather(&ops::laplacian(&v).unwrap()).unwrap();
            let d = ops::div(&v).unwrap();
            for r in 0..nv {
                m[(r, k)] = -lap[r];
            }
            for c in 0..nc {
                m[(nv + c, k)] = -d.data[c];
            }
        }
        for c in 0..nc {
            let mut s = ScalarField::zeros(g, ScalarPlacement::CellCenter);
            s.data[c] = 1.0;
            let gr = idx.gather(&ops::grad(&s).unwrap()).unwrap();
            for r in 0..nv {
                m[(r, nv + c)] = gr[r];
            }
            m[(nv + c, nv + nc)] = 1.0;
            m[(nv + nc, nv + c)] = 1.0;
        }
        (m, idx)
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let g = GridSpec::dirichlet(12).unwrap();
        let s = solve_stationary_stokes(&VectorField::mac_zeros(g), DEFAULT_TOL).unwrap();
        assert_eq!(s.v.max_abs(), 0.0);
        assert_eq!(s.p.max_abs(), 0.0);
    }

    #[test]
    fn gradient_forcing_is_absorbed_by_pressure() {
        let g = GridSpec::dirichlet(32).unwrap();
        let phi = ScalarField::cells(g, |x, y| (x * x * y).cos() + x);
        let s = solve_stationary_stokes(&ops::grad(&phi).unwrap(), DEFAULT_TOL).unwrap();
        assert!(s.v.max_abs() < 1e-10);
        let mean = phi.mean();
        for (a, b) in s.p.data.iter().zip(&phi.data) {
            assert!((a - (b - mean)).abs() < 1e-10);
        }
    }

    #[test]
    fn matches_dense_saddle_oracle() {
        let g = GridSpec::dirichlet(12).unwrap();
        let (m, idx) = dense_saddle(g);
        let dim = m.nrows();
        let lu = m.lu();
        let nv = idx.len();
        for seed in 0..3 {
            let f = random_mac(g, seed);
            let mut rhs = DVector::zeros(dim);
            for (k, v) in idx.gather(&f).unwrap().into_iter().enumerate() {
                rhs[k] = v;
            }
            let z = lu.solve(&rhs).unwrap();
            let s = solve_stationary_stokes(&f, DEFAULT_TOL).unwrap();
            assert!(s.converged);
            let v = idx.gather(&s.v).unwrap();
            for k in 0..nv {
                assert!((v[k] - z[k]).abs() < 1e-10);
            }
            for c in 0..g.n() * g.n() {
                assert!((s.p.data[c] - z[nv + c]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn solution_is_solenoidal_and_zero_mean() {
        let g = GridSpec::dirichlet(16).unwrap();
        let s = solve_stationary_stokes(&random_mac(g, 9), DEFAULT_TOL).unwrap();
        assert!(ops::div(&s.v).unwrap().max_abs() < 1e-10);
        assert!(s.p.mean().abs() < 1e-13);
        assert_eq!(s.v.wall_normal_max(), 0.0);
    }

    #[test]
    fn linear_in_forcing() {
        let g = GridSpec::dirichlet(16).unwrap();
        let (f1, f2) = (random_mac(g, 1), random_mac(g, 2));
        let mut comb = f1.scaled(2.0);
        comb.axpy(-0.5, &f2).unwrap();
        let s1 = solve_stationary_stokes(&f1, DEFAULT_TOL).unwrap();
        let s2 = solve_stationary_stokes(&f2, DEFAULT_TOL).unwrap();
        let s = solve_stationary_stokes(&comb, DEFAULT_TOL).unwrap();
        let mut expect = s1.v.scaled(2.0);
        expect.axpy(-0.5, &s2.v).unwrap();
        assert!(s.v.sub(&expect).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn discrete_energy_identity() {
        let g = GridSpec::dirichlet(16).unwrap();
        let f = random_mac(g, 4);
        let s = solve_stationary_stokes(&f, DEFAULT_TOL).unwrap();
        let dv = -s.v.inner(&ops::laplacian(&s.v).unwrap()).unwrap();
        let fv = f.inner(&s.v).unwrap();
        assert!((dv - fv).abs() < 1e-10 * fv.abs().max(1.0));
    }

    #[test]
    fn uzawa_fallback_agrees_with_direct() {
        let g = GridSpec::dirichlet(8).unwrap();
        let f = random_mac(g, 5);
        let uz = SaddleSystem::new(
            g,
            StokesMethod::Uzawa {
                max_iter: 20_000,
                relaxation: 1.0,
            },
        )
        .unwrap();
        let a = uz.solve(&f, 1e-7).unwrap();
        let b = solve_stationary_stokes(&f, DEFAULT_TOL).unwrap();
        assert!(a.converged, "uzawa residual {}", a.residual);
        assert!(a.v.sub(&b.v).unwrap().max_abs() < 1e-6);
    }

    #[test]
    fn uzawa_flags_nonconvergence() {
        let g = GridSpec::dirichlet(8).unwrap();
        let uz = SaddleSystem::new(
            g,
            StokesMethod::Uzawa {
                max_iter: 2,
                relaxation: 1.0,
            },
        )
        .unwrap();
        let s = uz.solve(&random_mac(g, 6), 1e-12).unwrap();
        assert!(!s.converged);
        assert!(s.residual > 1e-12);
    }

    #[test]
    fn periodic_stokes_solves() {
        let g = GridSpec::periodic(16).unwrap();
        let f = random_mac(g, 7);
        let s = solve_stationary_stokes(&f, DEFAULT_TOL).unwrap();
        assert!(s.converged);
        assert!(ops::div(&s.v).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn projection_properties() {
        for g in [
            GridSpec::dirichlet(16).unwrap(),
            GridSpec::periodic(16).unwrap(),
        ] {
            let u = random_mac(g, 8);
            let pu = leray_project(&u).unwrap();
            assert!(ops::div(&pu).unwrap().max_abs() < 1e-11);
            let again = leray_project(&pu).unwrap();
            assert!(again.sub(&pu).unwrap().max_abs() < 1e-12);
            let orth = u.sub(&pu).unwrap().inner(&pu).unwrap();
            assert!(orth.abs() < 1e-10);
            let phi = ScalarField::cells(g, |x, y| (6.0 * x).sin() * y.cos());
            let killed = leray_project(&ops::grad(&phi).unwrap()).unwrap();
            assert!(killed.max_abs() < 1e-10);
        }
    }

    #[test]
    fn projection_matches_dense_poisson() {
        let g = GridSpec::dirichlet(10).unwrap();
        let nc = g.n() * g.n();
        // dense div grad with the constant removed by a border row
        let mut m = DMatrix::zeros(nc + 1, nc + 1);
        for c in 0..nc {
            let mut s = ScalarField::zeros(g, ScalarPlacement::CellCenter);
            s.data[c] = 1.0;
            let l = ops::div(&ops::grad(&s).unwrap()).unwrap();
            for r in 0..nc {
                m[(r, c)] = l.data[r];
            }
            m[(nc, c)] = 1.0;
            m[(c, nc)] = 1.0;
        }
        let u = random_mac(g, 10);
        let d = ops::div(&u).unwrap();
        let mut rhs = DVector::zeros(nc + 1);
        for c in 0..nc {
            rhs[c] = d.data[c];
        }
        let z = m.lu().solve(&rhs).unwrap();
        let phi =
            ScalarField::from_data(g, ScalarPlacement::CellCenter, z.as_slice()[..nc].to_vec())
                .unwrap();
        let mut expect = u.clone();
        expect.axpy(-1.0, &ops::grad(&phi).unwrap()).unwrap();
        assert!(leray_project(&u).unwrap().sub(&expect).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn aux_field_trivial_cases() {
        let g = GridSpec::dirichlet(16).unwrap();
        let p = FluidParams::new(1.0, 1.0, 1.0).unwrap();
        let zero = ScalarField::zeros(g, ScalarPlacement::CellCenter);
        assert_eq!(
            aux_field_v(&zero, &p, DEFAULT_TOL).unwrap().v.max_abs(),
            0.0
        );
        let w = ScalarField::cells(g, |x, y| (3.0 * x).sin() + y);
        let no_coupling = FluidParams::new(1.0, 0.0, 1.0).unwrap();
        assert_eq!(
            aux_field_v(&w, &no_coupling, DEFAULT_TOL)
                .unwrap()
                .v
                .max_abs(),
            0.0
        );
        let u = random_mac(g, 3);
        assert_eq!(compose_g(&u, &zero, &p).unwrap(), u);
    }

    #[test]
    fn aux_field_scales_with_coupling_ratio() {
        let g = GridSpec::dirichlet(16).unwrap();
        let w = ScalarField::cells(g, |x, y| {
            (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin()
        });
        let p1 = FluidParams::new(1.0, 1.0, 1.0).unwrap();
        let p2 = FluidParams::new(1.0, 2.0, 1.0).unwrap();
        let v1 = aux_field_v(&w, &p1, DEFAULT_TOL).unwrap().v;
        let v2 = aux_field_v(&w, &p2, DEFAULT_TOL).unwrap().v;
        let ratio = p2.coupling_ratio() / p1.coupling_ratio();
        assert!(v2.sub(&v1.scaled(ratio)).unwrap().max_abs() < 1e-12 * v1.max_abs().max(1.0));
    }

    #[test]
    fn g_is_solenoidal() {
        let g = GridSpec::dirichlet(16).unwrap();
        let p = FluidParams::new(0.5, 1.5, 1.0).unwrap();
        let u = leray_project(&random_mac(g, 12)).unwrap();
        let w = ScalarField::cells(g, |x, y| (5.0 * x * y).sin());
        let gv = compose_g(&u, &w, &p).unwrap();
        assert!(ops::div(&gv).unwrap().max_abs() < 1e-10);
        let zero_u = VectorField::mac_zeros(g);
        let minus_v = compose_g(&zero_u, &w, &p).unwrap();
        let v = aux_field_v(&w, &p, DEFAULT_TOL).unwrap().v;
        assert_eq!(minus_v, v.scaled(-1.0));
    }
}
