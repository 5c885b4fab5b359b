//! `swssb steady`: the disorder-averaged steady state and its observables.

use std::path::Path;

use serde::{Deserialize, Serialize};
use swssb_core::dynamics::{analytic_steady_state, steady_state};
use swssb_core::fockspace::{ChargeBlock, ModeLayout};
use swssb_core::observables::{renyi2_of, renyi_correlator_of, ObservableKit, PairSelection, SnapshotMetrics};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::manifest::OutputDir;

pub const REQUIRED_KEYS: &[&str] = &["n", "gamma"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyReport {
    pub n: usize,
    pub j: f64,
    pub gamma: f64,
    pub residual: f64,
    /// Evolution time of the averaged generator until convergence.
    pub time: f64,
    pub renyi2: f64,
    pub renyi2_exact: f64,
    pub von_neumann: f64,
    pub purity: f64,
    pub f1: Option<f64>,
    pub f2: Option<f64>,
    /// Frobenius distance to the sector-maximally-mixed state.
    pub distance_to_exact: f64,
}

pub fn compute(config: &RunConfig) -> CliResult<SteadyReport> {
    let sim = &config.sim;
    let s = steady_state(sim)?;
    let block = ChargeBlock::new(ModeLayout::new(sim.n)?)?;
    let exact = analytic_steady_state(&block);
    let rho = s.rho.to_matrix(&block);
    let kit = ObservableKit::new(&block);
    let m = SnapshotMetrics::measure(&kit, &rho, s.time, 0.0)?;
    let pair = |order| -> CliResult<Option<f64>> {
        Ok(if sim.n >= 2 {
            Some(renyi_correlator_of(&kit, &rho, order, PairSelection::AllOrdered)?)
        } else {
            None
        })
    };
    Ok(SteadyReport {
        n: sim.n,
        j: sim.j,
        gamma: sim.gamma,
        residual: s.residual,
        time: s.time,
        renyi2: renyi2_of(&rho),
        renyi2_exact: renyi2_of(&exact.to_matrix(&block)),
        von_neumann: m.entropy,
        purity: m.purity,
        f1: pair(1)?,
        f2: pair(2)?,
        distance_to_exact: s.rho.distance(&exact),
    })
}

pub fn run(config: &RunConfig, out_dir: &Path) -> CliResult<SteadyReport> {
    let report = compute(config)?;
    let mut out = OutputDir::create(out_dir)?;
    out.write_json("steady.json", &report)?;
    out.finish("steady", config, None)?;
    Ok(report)
}
