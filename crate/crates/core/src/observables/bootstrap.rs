//! Nonparametric bootstrap over trajectories.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_RESAMPLES: usize = 400;

/// ChaCha stream reserved for resampling; trajectory streams use their index.
const BOOTSTRAP_STREAM: u64 = u64::MAX;

/// A fixed table of resampled trajectory indices, shared by every estimator
/// of a run so errors of different observables are computed consistently.
#[derive(Clone, Debug)]
pub struct Bootstrap {
    n: usize,
    draws: Vec<Vec<usize>>,
}

impl Bootstrap {
    pub fn new(n: usize, resamples: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(BOOTSTRAP_STREAM);
        let draws = if n < 2 {
            Vec::new()
        } else {
            (0..resamples)
                .map(|_| (0..n).map(|_| rng.random_range(0..n)).collect())
                .collect()
        };
        Bootstrap { n, draws }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Standard deviation of `stat` over the resamples (zero for fewer than
    /// two trajectories).
    pub fn stderr<F: Fn(&mut dyn Iterator<Item = usize>) -> f64>(&self, stat: F) -> f64 {
        if self.draws.is_empty() {
            return 0.0;
        }
        let values: Vec<f64> = self.draws.iter().map(|d| stat(&mut d.iter().copied())).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1).max(1) as f64;
        var.sqrt()
    }

    /// Mean of `x` and its bootstrap error.
    pub fn mean(&self, x: &[f64]) -> (f64, f64) {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let err = self.stderr(|idx| {
            let (s, c) = idx.fold((0.0, 0usize), |(s, c), i| (s + x[i], c + 1));
            s / c as f64
        });
        (mean, err)
    }

    /// `Σ num / Σ den` and its bootstrap error.
    pub fn ratio(&self, num: &[f64], den: &[f64]) -> (f64, f64) {
        let value = num.iter().sum::<f64>() / den.iter().sum::<f64>();
        let err = self.stderr(|idx| {
            let (a, b) = idx.fold((0.0, 0.0), |(a, b), i| (a + num[i], b + den[i]));
            a / b
        });
        (value, err)
    }

    /// `−ln(mean x)` and its bootstrap error.
    pub fn neg_log_mean(&self, x: &[f64]) -> (f64, f64) {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let err = self.stderr(|idx| {
            let (s, c) = idx.fold((0.0, 0usize), |(s, c), i| (s + x[i], c + 1));
            -(s / c as f64).ln()
        });
        (-mean.ln(), err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_of_mean_tracks_standard_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..400).map(|_| rng.random::<f64>()).collect();
        let (_, err) = Bootstrap::new(x.len(), 400, 7).mean(&x);
        // uniform variance 1/12
        let expected = (1.0f64 / 12.0 / 400.0).sqrt();
        assert!((err / expected - 1.0).abs() < 0.2, "{err} vs {expected}");
    }

    #[test]
    fn single_trajectory_has_zero_error() {
        assert_eq!(Bootstrap::new(1, 400, 0).mean(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn table_is_deterministic() {
        let a = Bootstrap::new(10, 5, 3);
        let b = Bootstrap::new(10, 5, 3);
        assert_eq!(a.draws, b.draws);
    }
}
