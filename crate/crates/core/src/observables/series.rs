use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Plain ensemble mean of a per-trajectory quantity.
    Mean,
    /// Numerator and denominator averaged separately.
    Annealed,
    /// Per-trajectory ratio or logarithm, then averaged.
    Quenched,
    /// Largest value over the ensemble.
    Max,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub observable: String,
    /// Fixed mode pair; `None` for pair-averaged or pair-free observables.
    pub pair: Option<(usize, usize)>,
    pub averaging: Averaging,
    pub config_hash: String,
    pub n_traj: usize,
}

/// A measured time series with bootstrap error bars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub meta: SeriesMeta,
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

pub const CSV_HEADER: &str = "t,mean,stderr";

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the checkpoint closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        let mut best = 0;
        for (i, &ti) in self.times.iter().enumerate() {
            if (ti - t).abs() < (self.times[best] - t).abs() {
                best = i;
            }
        }
        best
    }

    /// Times strictly increasing, errors non-negative, means finite.
    pub fn check_invariants(&self) -> bool {
        self.times.windows(2).all(|w| w[0] < w[1])
            && self.stderr.iter().all(|&e| e >= 0.0)
            && self.mean.iter().all(|m| m.is_finite())
            && self.mean.len() == self.times.len()
            && self.stderr.len() == self.times.len()
    }

    /// CSV with shortest round-trip float formatting, so reruns compare
    /// byte for byte.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for ((t, m), e) in self.times.iter().zip(&self.mean).zip(&self.stderr) {
            writeln!(out, "{t},{m},{e}").expect("writing to a String");
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ObservableSeries {
        ObservableSeries {
            meta: SeriesMeta {
                observable: "S2".into(),
                pair: None,
                averaging: Averaging::Annealed,
                config_hash: "abc".into(),
                n_traj: 3,
            },
            times: vec![0.0, 0.5, 1.0],
            mean: vec![0.0, 0.1, 0.2],
            stderr: vec![0.0, 0.01, 0.02],
        }
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        assert_eq!(csv, "t,mean,stderr\n0,0,0\n0.5,0.1,0.01\n1,0.2,0.02\n");
    }

    #[test]
    fn json_round_trip() {
        let s = sample();
        let back: ObservableSeries = serde_json::from_str(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(s.check_invariants());
        assert_eq!(s.nearest(0.7), 1);
    }
}
