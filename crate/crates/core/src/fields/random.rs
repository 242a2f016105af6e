//! Random smooth fields: truncated Dirichlet-Laplacian eigenfunction
//! expansions `sum a_kl sin(k pi x) sin(l pi y)` with algebraically decaying
//! coefficients drawn from a seeded ChaCha stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::{ScalarField, ScalarPlacement};
use super::grid::GridSpec;

/// Coefficients of a truncated sine series, `a[(l - 1) * kmax + (k - 1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineSeries {
    kmax: usize,
    a: Vec<f64>,
}

impl SineSeries {
    /// `a_kl = xi_kl (k^2 + l^2)^(-decay / 2)` with `xi_kl` uniform in `[-1, 1]`.
    pub fn random(seed: u64, kmax: usize, decay: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Vec::with_capacity(kmax * kmax);
        for l in 1..=kmax {
            for k in 1..=kmax {
                let xi: f64 = rng.gen_range(-1.0..=1.0);
                a.push(xi * ((k * k + l * l) as f64).powf(-0.5 * decay));
            }
        }
        Self { kmax, a }
    }

    /// Like [`SineSeries::random`] but the draws are taken shell by shell
    /// (`max(k, l) = 1, 2, ...`), so the coefficients of modes below a
    /// truncation do not depend on the truncation.
    pub fn random_nested(seed: u64, kmax: usize, decay: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![0.0; kmax * kmax];
        for m in 1..=kmax {
            let shell = (1..=m).map(|k| (k, m)).chain((1..m).map(|l| (m, l)));
            for (k, l) in shell {
                let xi: f64 = rng.gen_range(-1.0..=1.0);
                a[(l - 1) * kmax + (k - 1)] = xi * ((k * k + l * l) as f64).powf(-0.5 * decay);
            }
        }
        Self { kmax, a }
    }

    /// Multiply every coefficient by `s`.
    pub fn scaled(mut self, s: f64) -> Self {
        self.a.iter_mut().for_each(|c| *c *= s);
        self
    }

    /// Single mode `sin(k pi x) sin(l pi y)`.
    pub fn mode(k: usize, l: usize) -> Self {
        let kmax = k.max(l);
        let mut a = vec![0.0; kmax * kmax];
        a[(l - 1) * kmax + (k - 1)] = 1.0;
        Self { kmax, a }
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn coefficient(&self, k: usize, l: usize) -> f64 {
        self.a[(l - 1) * self.kmax + (k - 1)]
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&c| c == 0.0)
    }

    /// Evaluate at arbitrary points.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let pi = std::f64::consts::PI;
        let sx: Vec<f64> = (1..=self.kmax).map(|k| (k as f64 * pi * x).sin()).collect();
        let sy: Vec<f64> = (1..=self.kmax).map(|l| (l as f64 * pi * y).sin()).collect();
        self.combine(&sx, &sy)
    }

    fn combine(&self, sx: &[f64], sy: &[f64]) -> f64 {
        let mut s = 0.0;
        for (l, syl) in sy.iter().enumerate() {
            let row = &self.a[l * self.kmax..(l + 1) * self.kmax];
            let inner: f64 = row.iter().zip(sx).map(|(a, s)| a * s).sum();
            s += syl * inner;
        }
        s
    }

    /// Sample on a grid placement.
    pub fn sample(&self, grid: GridSpec, placement: ScalarPlacement) -> ScalarField {
        let pi = std::f64::consts::PI;
        let mut out = ScalarField::zeros(grid, placement);
        let (c, r) = out.dims();
        let coord = |k: usize| match placement {
            ScalarPlacement::CellCenter => (k as f64 + 0.5) * grid.h(),
            ScalarPlacement::Node => k as f64 * grid.h(),
        };
        let table = |len: usize| -> Vec<Vec<f64>> {
            (0..len)
                .map(|i| {
                    (1..=self.kmax)
                        .map(|k| (k as f64 * pi * coord(i)).sin())
                        .collect()
                })
                .collect()
        };
        let tx = table(c);
        let ty = table(r);
        for j in 0..r {
            for i in 0..c {
                out.data[j * c + i] = self.combine(&tx[i], &ty[j]);
            }
        }
        out
    }
}

/// Decay exponent used for sample `m` of a probe family; cycles through four
/// regularity classes.
pub fn family_decay(m: usize) -> f64 {
    1.0 + 0.75 * (m % 4) as f64
}

/// Sample `m` of the probe family: truncation `kmax`, seed `seed + m`.
pub fn family_member(seed: u64, m: usize, kmax: usize) -> SineSeries {
    SineSeries::random(seed.wrapping_add(m as u64), kmax, family_decay(m))
}
