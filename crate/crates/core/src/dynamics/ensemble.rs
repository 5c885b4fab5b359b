//! Independent trajectories run in parallel, reduced in index order.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{Engine, StepObserver, TrajectoryState};
use super::snapshot::write_snapshot;
use super::SimConfig;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::observables::metrics::{ObservableKit, SnapshotMetrics, TwoPointProbe};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotPolicy {
    #[default]
    None,
    /// Only the last checkpoint of each trajectory.
    Final,
    All,
}

#[derive(Clone, Debug, Default)]
pub struct EnsembleOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Track `G(u)` through the accumulated unitary (meaningful at `γ = 0`).
    pub two_point: bool,
    pub snapshots: SnapshotPolicy,
    pub snapshot_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub index: usize,
    pub metrics: Vec<SnapshotMetrics>,
    /// `G(u)` at each checkpoint, real and imaginary parts; empty unless
    /// requested.
    pub two_point: Vec<(f64, f64)>,
    pub renormalizations: usize,
    pub max_trace_drift: f64,
}

/// Per-trajectory, per-checkpoint measurements of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub config: SimConfig,
    pub config_hash: String,
    pub times: Vec<f64>,
    pub trajectories: Vec<TrajectoryRecord>,
}

impl EnsembleRecord {
    /// Builds a record from explicitly supplied block density matrices,
    /// `states[trajectory][checkpoint]`, each with its measured leakage.
    pub fn from_states(
        config: &SimConfig,
        kit: &ObservableKit,
        times: &[f64],
        states: &[Vec<(CMatrix, f64)>],
    ) -> Result<Self> {
        let trajectories = states
            .iter()
            .enumerate()
            .map(|(index, list)| {
                let metrics = list
                    .iter()
                    .zip(times)
                    .map(|((rho, leak), &t)| SnapshotMetrics::measure(kit, rho, t, *leak))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| abort(index, e))?;
                Ok(TrajectoryRecord {
                    index,
                    metrics,
                    two_point: Vec::new(),
                    renormalizations: 0,
                    max_trace_drift: 0.0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EnsembleRecord {
            config: config.clone(),
            config_hash: crate::hash::content_hash(config)?,
            times: times.to_vec(),
            trajectories,
        })
    }

    pub fn n_traj(&self) -> usize {
        self.trajectories.len()
    }

    /// `f(metrics)` for every trajectory at checkpoint `cp`.
    pub fn column<F: Fn(&SnapshotMetrics) -> f64>(&self, cp: usize, f: F) -> Vec<f64> {
        self.trajectories.iter().map(|t| f(&t.metrics[cp])).collect()
    }
}

fn abort(index: usize, e: Error) -> Error {
    match e {
        e @ Error::TrajectoryAbort { .. } => e,
        other => Error::TrajectoryAbort {
            index,
            source: Box::new(other),
        },
    }
}

struct Recorder<'a> {
    engine: &'a Engine,
    kit: &'a ObservableKit,
    options: &'a EnsembleOptions,
    probe: Option<TwoPointProbe>,
    record: TrajectoryRecord,
}

impl StepObserver for Recorder<'_> {
    fn on_unitaries(&mut self, _step: usize, u: &[CMatrix]) {
        if let Some(p) = self.probe.as_mut() {
            p.push(u);
        }
    }

    fn on_checkpoint(&mut self, state: &TrajectoryState, checkpoint: usize) -> Result<()> {
        let block = self.engine.block();
        let t = state.time(self.engine.config().dt);
        let rho = state.rho.to_matrix(block);
        // The block holds the whole support of ρ, so nothing can leak.
        self.record.metrics.push(SnapshotMetrics::measure(self.kit, &rho, t, 0.0)?);
        if let Some(p) = &self.probe {
            let g = p.value();
            self.record.two_point.push((g.re, g.im));
        }
        let last = checkpoint + 1 == self.engine.checkpoint_steps().len();
        let write = match self.options.snapshots {
            SnapshotPolicy::None => false,
            SnapshotPolicy::Final => last,
            SnapshotPolicy::All => true,
        };
        if write {
            if let Some(dir) = &self.options.snapshot_dir {
                write_snapshot(dir, self.engine, state)?;
            }
        }
        Ok(())
    }
}

fn run_one(engine: &Engine, kit: &ObservableKit, options: &EnsembleOptions, index: usize) -> Result<TrajectoryRecord> {
    let mut rec = Recorder {
        engine,
        kit,
        options,
        probe: options.two_point.then(|| TwoPointProbe::new(engine.block().sectors())),
        record: TrajectoryRecord {
            index,
            metrics: Vec::with_capacity(engine.checkpoint_steps().len()),
            two_point: Vec::new(),
            renormalizations: 0,
            max_trace_drift: 0.0,
        },
    };
    let end = engine.run_trajectory(index, &mut rec).map_err(|e| abort(index, e))?;
    let mut record = rec.record;
    record.renormalizations = end.renormalizations;
    record.max_trace_drift = end.max_trace_drift;
    Ok(record)
}

/// Runs `config.n_traj` trajectories. Trajectory `k` draws its couplings
/// from ChaCha8 keyed by `master_seed` on stream `k`, and results are
/// collected in index order, so the record does not depend on the number of
/// threads.
pub fn run_ensemble(config: &SimConfig, options: &EnsembleOptions) -> Result<EnsembleRecord> {
    let engine = Engine::new(config)?;
    let kit = ObservableKit::new(engine.block());
    let work = || -> Vec<Result<TrajectoryRecord>> {
        (0..config.n_traj)
            .into_par_iter()
            .map(|k| run_one(&engine, &kit, options, k))
            .collect()
    };
    let results = match options.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?
            .install(work),
        None => work(),
    };
    let trajectories = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(EnsembleRecord {
        config: config.clone(),
        config_hash: crate::hash::content_hash(config)?,
        times: config.checkpoints.clone(),
        trajectories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_count_does_not_change_results() {
        let config = SimConfig::new(3, 1.0, 0.05, 0.5, 8).with_seed(21);
        let one = run_ensemble(&config, &EnsembleOptions { threads: Some(1), ..Default::default() }).unwrap();
        let many = run_ensemble(&config, &EnsembleOptions { threads: Some(8), ..Default::default() }).unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn rerun_is_identical() {
        let config = SimConfig::new(2, 1.0, 0.1, 0.3, 1).with_seed(4);
        let a = run_ensemble(&config, &EnsembleOptions::default()).unwrap();
        let b = run_ensemble(&config, &EnsembleOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trajectories[0].metrics.len(), config.checkpoints.len());
    }

    #[test]
    fn writes_final_snapshots() {
        let dir = tempfile::tempdir().unwrap();
        let config = SimConfig::new(2, 1.0, 0.1, 0.2, 3);
        let opts = EnsembleOptions {
            snapshots: SnapshotPolicy::Final,
            snapshot_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        run_ensemble(&config, &opts).unwrap();
        let bins = std::fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "bin"))
            .count();
        assert_eq!(bins, 3);
    }
}
