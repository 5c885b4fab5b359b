//! Brownian couplings, one independent Gaussian draw per time step.
//!
//! The Hamiltonian is `H = Σ_{P,Q} J_PQ c_P† c_Q` over ordered fermion pairs
//! `P = (i<j)`, `Q = (k<l)`, with `c_P† = c_i†c_j†` and `c_Q = c_k c_l`.
//! Entries with `P < Q` are independent complex Gaussians whose real and
//! imaginary parts each have variance `J/(N³ dt)`; `J_QP = conj(J_PQ)` is
//! then imposed. Diagonal entries are real with variance `2J/(N³ dt)`. Every
//! coupling therefore satisfies `E|J_PQ|² = 2J/(N³ dt)`, the discretized white
//! noise kernel `2J δ(t−t')/N³`.

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::SimConfig;
use crate::linalg::C64;

/// RNG stream of trajectory `index`: ChaCha8 keyed by `master_seed`, with the
/// trajectory index as the stream (nonce) number. Streams are independent and
/// need no shared state, so results do not depend on scheduling.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Fermion pairs `(i, j)` with `i < j`, lexicographic.
pub fn fermion_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

/// One time step's coupling tensor, stored as a Hermitian matrix over pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSample {
    n: usize,
    pairs: Vec<(usize, usize)>,
    values: Vec<C64>,
}

impl CouplingSample {
    pub fn zeros(n: usize) -> Self {
        let pairs = fermion_pairs(n);
        let m = pairs.len();
        CouplingSample {
            n,
            pairs,
            values: vec![C64::new(0.0, 0.0); m * m],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// `J_PQ` with pair indices into [`Self::pairs`].
    #[inline]
    pub fn value(&self, p: usize, q: usize) -> C64 {
        self.values[p * self.pairs.len() + q]
    }

    /// Sets `J_PQ` and its Hermitian partner.
    pub fn set(&mut self, p: usize, q: usize, v: C64) {
        let m = self.pairs.len();
        if p == q {
            self.values[p * m + p] = C64::new(v.re, 0.0);
        } else {
            self.values[p * m + q] = v;
            self.values[q * m + p] = v.conj();
        }
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        let m = self.pairs.len();
        let mut worst: f64 = 0.0;
        for p in 0..m {
            for q in 0..m {
                worst = worst.max((self.value(p, q) - self.value(q, p).conj()).norm());
            }
        }
        worst
    }
}

/// Per-step variance `E|J_PQ|²` for the given configuration.
pub fn coupling_variance(config: &SimConfig) -> f64 {
    2.0 * config.j / ((config.n as f64).powi(3) * config.dt)
}

pub fn sample_couplings<R: RngExt + ?Sized>(rng: &mut R, config: &SimConfig) -> CouplingSample {
    let mut sample = CouplingSample::zeros(config.n);
    let var = coupling_variance(config);
    let sigma_part = (0.5 * var).sqrt();
    let sigma_diag = var.sqrt();
    let m = sample.n_pairs();
    for p in 0..m {
        let x: f64 = rng.sample(StandardNormal);
        sample.set(p, p, Complex64::new(sigma_diag * x, 0.0));
        for q in p + 1..m {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            sample.set(p, q, Complex64::new(sigma_part * re, sigma_part * im));
        }
    }
    sample
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, j: f64, dt: f64) -> SimConfig {
        SimConfig::new(n, j, 0.0, 1.0, 1).with_dt(dt)
    }

    #[test]
    fn pairs_are_lexicographic() {
        assert_eq!(fermion_pairs(3), vec![(0, 1), (0, 2), (1, 2)]);
        assert!(fermion_pairs(1).is_empty());
    }

    #[test]
    fn entry_variance_matches_kernel() {
        // 2J/(N³ dt) = 2/(64 · 0.01) = 3.125
        let config = cfg(4, 1.0, 0.01);
        assert!((coupling_variance(&config) - 3.125).abs() < 1e-12);
        let mut rng = trajectory_rng(7, 0);
        let draws = 100_000;
        let (mut off, mut diag) = (0.0, 0.0);
        for _ in 0..draws {
            let s = sample_couplings(&mut rng, &config);
            off += s.value(0, 3).norm_sqr();
            diag += s.value(2, 2).norm_sqr();
        }
        let off = off / draws as f64;
        let diag = diag / draws as f64;
        assert!((off / 3.125 - 1.0).abs() < 0.05, "off-diagonal variance {off}");
        assert!((diag / 3.125 - 1.0).abs() < 0.05, "diagonal variance {diag}");
    }

    #[test]
    fn free_limit_is_exactly_zero() {
        let config = cfg(4, 0.0, 0.01);
        let s = sample_couplings(&mut trajectory_rng(1, 3), &config);
        assert!(s.values.iter().all(|v| v.re == 0.0 && v.im == 0.0));
    }

    #[test]
    fn same_stream_same_tensor() {
        let config = cfg(4, 1.0, 0.01);
        let a = sample_couplings(&mut trajectory_rng(11, 5), &config);
        let b = sample_couplings(&mut trajectory_rng(11, 5), &config);
        let c = sample_couplings(&mut trajectory_rng(11, 6), &config);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.max_hermiticity_error(), 0.0);
    }
}
