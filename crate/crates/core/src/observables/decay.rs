//! Exponential fit of the closed-system two-point function.

use serde::{Deserialize, Serialize};

use super::series::ObservableSeries;
use super::Estimator;
use crate::error::{Error, Result};

/// Relative fit residual above which a decay fit is flagged.
pub const RESIDUAL_FLAG: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted rate `r` in `G(u) ≈ A e^{−r u}`.
    pub rate: f64,
    pub rate_stderr: f64,
    pub amplitude: f64,
    /// RMS of `G/G_fit − 1` over the window.
    pub residual: f64,
    pub flagged: bool,
    pub window: (f64, f64),
    pub points: usize,
    pub series: ObservableSeries,
}

/// Least-squares line through `(x, y)`: returns (slope, intercept).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn fit_log(u: &[f64], g: &[f64]) -> (f64, f64) {
    let ln: Vec<f64> = g.iter().map(|v| v.ln()).collect();
    let (slope, icpt) = linear_fit(u, &ln);
    (-slope, icpt.exp())
}

/// Fits `ln G(u)` linearly over `u ∈ [0, u_max]`, with `u_max = 4/Γ` and
/// `Γ = J/4` unless given.
pub fn two_point_decay(est: &Estimator<'_>, u_max: Option<f64>) -> Result<DecayFit> {
    let series = est.two_point_function()?;
    let j = est.record().config.j;
    let u_max = u_max.unwrap_or(16.0 / j);
    let idx: Vec<usize> = (0..series.len())
        .filter(|&i| series.times[i] <= u_max * (1.0 + 1e-12) && series.mean[i] > 0.0)
        .collect();
    if idx.len() < 3 {
        return Err(Error::config("checkpoints", "fewer than three points in the decay window"));
    }
    let u: Vec<f64> = idx.iter().map(|&i| series.times[i]).collect();
    let g: Vec<f64> = idx.iter().map(|&i| series.mean[i]).collect();
    let (rate, amplitude) = fit_log(&u, &g);
    let residual = (u
        .iter()
        .zip(&g)
        .map(|(&x, &y)| (y / (amplitude * (-rate * x).exp()) - 1.0).powi(2))
        .sum::<f64>()
        / u.len() as f64)
        .sqrt();
    let rec = est.record();
    let rate_stderr = est.bootstrap().stderr(|draw| {
        let picks: Vec<usize> = draw.collect();
        let g: Vec<f64> = idx
            .iter()
            .map(|&cp| picks.iter().map(|&k| rec.trajectories[k].two_point[cp].0).sum::<f64>() / picks.len() as f64)
            .collect();
        if g.iter().any(|v| *v <= 0.0) {
            return rate;
        }
        fit_log(&u, &g).0
    });
    Ok(DecayFit {
        rate,
        rate_stderr,
        amplitude,
        residual,
        flagged: residual > RESIDUAL_FLAG,
        window: (0.0, u_max),
        points: u.len(),
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ensemble::{run_ensemble, EnsembleOptions};
    use crate::dynamics::SimConfig;

    #[test]
    fn line_fit_is_exact_on_lines() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let (s, i) = linear_fit(&x, &y);
        assert!((s + 0.5).abs() < 1e-14 && (i - 2.0).abs() < 1e-14);
    }

    #[test]
    fn free_fermions_do_not_decay() {
        let config = SimConfig::new(3, 0.0, 0.0, 2.0, 2);
        let rec = run_ensemble(&config, &EnsembleOptions { two_point: true, ..Default::default() }).unwrap();
        let est = Estimator::new(&rec).unwrap();
        let fit = two_point_decay(&est, Some(2.0)).unwrap();
        assert!(fit.rate.abs() < 1e-12);
        assert!(fit.series.mean.iter().all(|g| (g - 0.5).abs() < 1e-14));
    }
}
