//! Order parameters and entropies estimated from trajectory ensembles.
//!
//! Estimators consume an [`EnsembleRecord`]: per trajectory and checkpoint,
//! the traces needed by every observable, measured on `ρ` while it was in
//! memory. Each checkpoint is reduced independently (in parallel) with the
//! trajectory order fixed.

pub mod bootstrap;
pub mod decay;
pub mod metrics;
pub mod series;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bootstrap::Bootstrap;
pub use decay::{two_point_decay, DecayFit};
pub use metrics::{leakage, psd_sqrt, ObservableKit, SnapshotMetrics};
pub use series::{Averaging, ObservableSeries, SeriesMeta};

use crate::dynamics::ensemble::EnsembleRecord;
use crate::error::{Error, Result};

/// Which mode pairs enter a two-mode observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairSelection {
    Fixed(usize, usize),
    /// Mean over all ordered pairs `i ≠ j`, taken per trajectory.
    AllOrdered,
}

impl PairSelection {
    fn check(self, n: usize) -> Result<()> {
        match self {
            PairSelection::Fixed(i, j) if i >= n || j >= n => Err(Error::ModeOutOfRange {
                mode: i.max(j),
                total: n,
            }),
            PairSelection::AllOrdered if n < 2 => Err(Error::config("pair", "pair average needs N ≥ 2")),
            _ => Ok(()),
        }
    }

    fn pick(self, n: usize, values: &[f64]) -> f64 {
        match self {
            PairSelection::Fixed(i, j) => values[i * n + j],
            PairSelection::AllOrdered => {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            s += values[i * n + j];
                        }
                    }
                }
                s / (n * (n - 1)) as f64
            }
        }
    }

    fn label(self) -> Option<(usize, usize)> {
        match self {
            PairSelection::Fixed(i, j) => Some((i, j)),
            PairSelection::AllOrdered => None,
        }
    }
}

/// Estimator context: one bootstrap table per record.
pub struct Estimator<'a> {
    record: &'a EnsembleRecord,
    boot: Bootstrap,
}

impl<'a> Estimator<'a> {
    pub fn new(record: &'a EnsembleRecord) -> Result<Self> {
        if record.trajectories.is_empty() || record.times.is_empty() {
            return Err(Error::config("snapshots", "ensemble record is empty"));
        }
        Ok(Estimator {
            boot: Bootstrap::new(record.n_traj(), bootstrap::DEFAULT_RESAMPLES, record.config.master_seed),
            record,
        })
    }

    pub fn record(&self) -> &EnsembleRecord {
        self.record
    }

    pub fn bootstrap(&self) -> &Bootstrap {
        &self.boot
    }

    fn series<F>(&self, observable: &str, pair: Option<(usize, usize)>, averaging: Averaging, reduce: F) -> ObservableSeries
    where
        F: Fn(&Bootstrap, usize) -> (f64, f64) + Sync,
    {
        let (mean, stderr): (Vec<f64>, Vec<f64>) = (0..self.record.times.len())
            .into_par_iter()
            .map(|cp| reduce(&self.boot, cp))
            .collect::<Vec<_>>()
            .into_iter()
            .unzip();
        ObservableSeries {
            meta: SeriesMeta {
                observable: observable.to_string(),
                pair,
                averaging,
                config_hash: self.record.config_hash.clone(),
                n_traj: self.record.n_traj(),
            },
            times: self.record.times.clone(),
            mean,
            stderr,
        }
    }

    fn n(&self) -> usize {
        self.record.config.n
    }

    /// Real and imaginary parts of `tr[ρ c_i c_j†]`.
    pub fn conventional_correlator(&self, i: usize, j: usize) -> Result<(ObservableSeries, ObservableSeries)> {
        let n = self.n();
        PairSelection::Fixed(i, j).check(n)?;
        let re = self.series("C_re", Some((i, j)), Averaging::Mean, |b, cp| {
            b.mean(&self.record.column(cp, |m| m.corr_re[i * n + j]))
        });
        let im = self.series("C_im", Some((i, j)), Averaging::Mean, |b, cp| {
            b.mean(&self.record.column(cp, |m| m.corr_im[i * n + j]))
        });
        Ok((re, im))
    }

    /// Annealed `F⁽ⁿ⁾ = avg tr[ρ^{n/2} c_i c_j† ρ^{n/2} c_j c_i†] / avg tr ρⁿ`.
    pub fn renyi_correlator(&self, order: u32, pair: PairSelection) -> Result<ObservableSeries> {
        let n = self.n();
        pair.check(n)?;
        let name = match order {
            1 => "F1",
            2 => "F2",
            _ => {
                return Err(Error::Domain {
                    what: "Rényi index",
                    value: order as f64,
                })
            }
        };
        Ok(self.series(name, pair.label(), Averaging::Annealed, |b, cp| {
            let num = self.record.column(cp, |m| pair.pick(n, if order == 1 { &m.f1 } else { &m.f2 }));
            let den = self.record.column(cp, |m| if order == 1 { m.trace } else { m.purity });
            b.ratio(&num, &den)
        }))
    }

    /// Per-trajectory ratio, then averaged.
    pub fn renyi_correlator_quenched(&self, order: u32, pair: PairSelection) -> Result<ObservableSeries> {
        let n = self.n();
        pair.check(n)?;
        if order != 1 && order != 2 {
            return Err(Error::Domain {
                what: "Rényi index",
                value: order as f64,
            });
        }
        let name = if order == 1 { "F1" } else { "F2" };
        Ok(self.series(name, pair.label(), Averaging::Quenched, |b, cp| {
            let x = self.record.column(cp, |m| {
                let (f, d) = if order == 1 { (&m.f1, m.trace) } else { (&m.f2, m.purity) };
                pair.pick(n, f) / d
            });
            b.mean(&x)
        }))
    }

    /// Annealed `−ln(avg tr ρ²)`.
    pub fn renyi2_entropy(&self) -> ObservableSeries {
        self.series("S2", None, Averaging::Annealed, |b, cp| {
            b.neg_log_mean(&self.record.column(cp, |m| m.purity))
        })
    }

    /// Quenched `avg(−ln tr ρ²)`.
    pub fn renyi2_entropy_quenched(&self) -> ObservableSeries {
        self.series("S2", None, Averaging::Quenched, |b, cp| {
            b.mean(&self.record.column(cp, |m| -m.purity.ln()))
        })
    }

    pub fn von_neumann_entropy(&self) -> ObservableSeries {
        self.series("SvN", None, Averaging::Mean, |b, cp| {
            b.mean(&self.record.column(cp, |m| m.entropy))
        })
    }

    /// Largest leakage over the ensemble at each checkpoint.
    pub fn symmetry_leakage(&self) -> ObservableSeries {
        self.series("leakage", None, Averaging::Max, |_, cp| {
            let v = self.record.column(cp, |m| m.leakage);
            (v.iter().copied().fold(0.0, f64::max), 0.0)
        })
    }

    /// Ensemble mean of `Re G(u)`; requires a run with the two-point probe.
    pub fn two_point_function(&self) -> Result<ObservableSeries> {
        if self.record.trajectories.iter().any(|t| t.two_point.len() != self.record.times.len()) {
            return Err(Error::config("two_point", "run was made without the two-point probe"));
        }
        Ok(self.series("G", None, Averaging::Mean, |b, cp| {
            let x: Vec<f64> = self.record.trajectories.iter().map(|t| t.two_point[cp].0).collect();
            b.mean(&x)
        }))
    }

    /// Worst-case numerical health over every trajectory and checkpoint.
    pub fn health(&self) -> Health {
        let mut h = Health::default();
        let j = self.record.config.j;
        for t in &self.record.trajectories {
            for m in &t.metrics {
                let scale = 1.0 + m.time * j;
                h.max_trace_error = h.max_trace_error.max((m.trace - 1.0).abs() / scale);
                h.max_hermiticity = h.max_hermiticity.max(m.hermiticity);
                h.min_eigenvalue = h.min_eigenvalue.min(m.min_eig);
                h.max_leakage = h.max_leakage.max(m.leakage);
                h.max_f_imag = h.max_f_imag.max(m.f_imag);
            }
            h.renormalizations += t.renormalizations;
        }
        h
    }
}

/// Extremes of the numerical invariants over a record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Health {
    /// `max |tr ρ − 1| / (1 + tJ)`.
    pub max_trace_error: f64,
    pub max_hermiticity: f64,
    pub min_eigenvalue: f64,
    pub max_leakage: f64,
    pub max_f_imag: f64,
    pub renormalizations: usize,
}

impl Default for Health {
    fn default() -> Self {
        Health {
            max_trace_error: 0.0,
            max_hermiticity: 0.0,
            min_eigenvalue: f64::INFINITY,
            max_leakage: 0.0,
            max_f_imag: 0.0,
            renormalizations: 0,
        }
    }
}

/// `F⁽ⁿ⁾` of a single density matrix (block or full space matched to `kit`).
pub fn renyi_correlator_of(kit: &ObservableKit, rho: &crate::linalg::CMatrix, order: u32, pair: PairSelection) -> Result<f64> {
    let m = SnapshotMetrics::measure(kit, rho, f64::NAN, 0.0)?;
    let n = kit.n();
    pair.check(n)?;
    Ok(match order {
        1 => pair.pick(n, &m.f1) / m.trace,
        2 => pair.pick(n, &m.f2) / m.purity,
        _ => {
            return Err(Error::Domain {
                what: "Rényi index",
                value: order as f64,
            })
        }
    })
}

/// `−ln tr ρ²` of a single density matrix.
pub fn renyi2_of(rho: &crate::linalg::CMatrix) -> f64 {
    -rho.iter().map(|v| v.norm_sqr()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ensemble::{run_ensemble, EnsembleOptions};
    use crate::dynamics::{analytic_steady_state, SimConfig};
    use crate::fockspace::{ChargeBlock, ModeLayout};

    fn record(n: usize, gamma: f64, t_max: f64, n_traj: usize) -> EnsembleRecord {
        let config = SimConfig::new(n, 1.0, gamma, t_max, n_traj).with_seed(8);
        run_ensemble(&config, &EnsembleOptions::default()).unwrap()
    }

    #[test]
    fn initial_values() {
        let rec = record(3, 0.1, 0.5, 4);
        let est = Estimator::new(&rec).unwrap();
        let (c, ci) = est.conventional_correlator(0, 1).unwrap();
        assert_eq!(c.mean[0], 0.0);
        assert_eq!(ci.mean[0], 0.0);
        let (cd, _) = est.conventional_correlator(1, 1).unwrap();
        assert!((cd.mean[0] - 0.5).abs() < 1e-14);
        assert!(est.renyi2_entropy().mean[0].abs() < 1e-14);
        assert!(est.renyi_correlator(2, PairSelection::Fixed(0, 1)).unwrap().mean[0].abs() < 1e-14);
        assert!(est.renyi_correlator(1, PairSelection::AllOrdered).unwrap().mean[0].abs() < 1e-14);
        assert!(est.von_neumann_entropy().mean[0].abs() < 1e-12);
        assert_eq!(est.symmetry_leakage().mean[0], 0.0);
    }

    #[test]
    fn unitary_runs_keep_zero_entropy() {
        let rec = record(3, 0.0, 1.0, 3);
        let est = Estimator::new(&rec).unwrap();
        assert!(est.renyi2_entropy().mean.iter().all(|s| s.abs() < 1e-10));
    }

    #[test]
    fn pure_snapshots_have_equal_correlators() {
        // γ = 0 keeps every trajectory pure, where F⁽¹⁾ = F⁽²⁾ = |C|².
        let rec = record(3, 0.0, 1.0, 2);
        for t in &rec.trajectories {
            for m in &t.metrics {
                for k in 0..9 {
                    let c2 = m.corr_re[k].powi(2) + m.corr_im[k].powi(2);
                    assert!((m.f1[k] - c2).abs() < 1e-10);
                    assert!((m.f2[k] - c2).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn bad_index_rejected() {
        let rec = record(2, 0.1, 0.1, 1);
        let est = Estimator::new(&rec).unwrap();
        assert!(matches!(est.conventional_correlator(0, 2), Err(Error::ModeOutOfRange { .. })));
        assert!(est.renyi_correlator(3, PairSelection::AllOrdered).is_err());
    }

    #[test]
    fn steady_state_functionals() {
        // On the sector-mixed limit F⁽²⁾ = 1/6 and F⁽¹⁾ = 1/4 for any N.
        for n in 2..=4 {
            let block = ChargeBlock::new(ModeLayout::new(n).unwrap()).unwrap();
            let kit = ObservableKit::new(&block);
            let rho = analytic_steady_state(&block).to_matrix(&block);
            let f2 = renyi_correlator_of(&kit, &rho, 2, PairSelection::Fixed(0, 1)).unwrap();
            let f1 = renyi_correlator_of(&kit, &rho, 1, PairSelection::AllOrdered).unwrap();
            assert!((f2 - 1.0 / 6.0).abs() < 1e-12, "N = {n}: {f2}");
            assert!((f1 - 0.25).abs() < 1e-12, "N = {n}: {f1}");
            let s2 = renyi2_of(&rho);
            let expected = 2.0 * n as f64 * 2f64.ln() - ((n + 1) as f64).ln();
            assert!((s2 - expected).abs() < 1e-12);
        }
    }
}
