//! `swssb simulate`: run an ensemble and write observable series.

use std::path::Path;

use log::info;
use swssb_core::dynamics::{run_ensemble, EnsembleOptions, EnsembleRecord, SnapshotPolicy};
use swssb_core::observables::{two_point_decay, Estimator, ObservableSeries, PairSelection};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::manifest::{OutputDir, RunManifest};
use crate::Format;

pub const SERIES_DIR: &str = "series";
pub const SNAPSHOT_DIR: &str = "snapshots";

/// Every series of a record, keyed by file stem.
pub fn series_set(record: &EnsembleRecord, pair: (usize, usize)) -> CliResult<Vec<(&'static str, ObservableSeries)>> {
    let est = Estimator::new(record)?;
    let (c_re, c_im) = est.conventional_correlator(pair.0, pair.1)?;
    let mut out = vec![("C", c_re), ("C_im", c_im)];
    if record.config.n >= 2 {
        out.push(("F1", est.renyi_correlator(1, PairSelection::AllOrdered)?));
        out.push(("F2", est.renyi_correlator(2, PairSelection::AllOrdered)?));
    }
    out.push(("S2_annealed", est.renyi2_entropy()));
    out.push(("S2_quenched", est.renyi2_entropy_quenched()));
    out.push(("SvN", est.von_neumann_entropy()));
    out.push(("leakage", est.symmetry_leakage()));
    if record.trajectories.iter().all(|t| t.two_point.len() == record.times.len()) {
        out.push(("G_decay", est.two_point_function()?));
    }
    Ok(out)
}

fn encode(series: &ObservableSeries, format: Format) -> CliResult<Vec<u8>> {
    Ok(match format {
        Format::Csv => series.to_csv().into_bytes(),
        Format::Json => {
            let mut s = series.to_json()?;
            s.push('\n');
            s.into_bytes()
        }
    })
}

pub fn run(config: &RunConfig, out_dir: &Path, format: Format) -> CliResult<RunManifest> {
    let mut out = OutputDir::create(out_dir)?;
    let snapshot_dir = out.root().join(SNAPSHOT_DIR);
    if config.snapshots != SnapshotPolicy::None {
        std::fs::create_dir_all(&snapshot_dir)?;
    }
    let options = EnsembleOptions {
        threads: config.threads,
        two_point: config.two_point,
        snapshots: config.snapshots,
        snapshot_dir: Some(snapshot_dir.clone()),
    };
    let sim = &config.sim;
    info!(
        "simulating N = {}, gamma = {}, J = {}: {} trajectories to t = {}",
        sim.n, sim.gamma, sim.j, sim.n_traj, sim.t_max
    );
    let record = run_ensemble(sim, &options)?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    for (name, series) in series_set(&record, config.pair)? {
        out.write(&format!("{SERIES_DIR}/{name}.{ext}"), &encode(&series, format)?)?;
    }
    if sim.gamma == 0.0 && config.two_point {
        let est = Estimator::new(&record)?;
        let fit = two_point_decay(&est, None)?;
        let mut summary = serde_json::to_value(&fit)?;
        if let Some(obj) = summary.as_object_mut() {
            obj.remove("series");
        }
        out.write_json("G_decay_fit.json", &summary)?;
    }
    out.write_json("health.json", &Estimator::new(&record)?.health())?;
    out.write_json("config.json", config)?;
    if snapshot_dir.is_dir() {
        let mut paths: Vec<_> = std::fs::read_dir(&snapshot_dir)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        paths.sort();
        for p in paths {
            out.adopt(&p)?;
        }
    }
    let manifest = out.finish("simulate", config, Some(sim.master_seed))?;
    info!("wrote {} files to {}", manifest.files.len(), out_dir.display());
    Ok(manifest)
}
