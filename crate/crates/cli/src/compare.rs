//! `swssb compare`: overlay a simulation run on the large-N predictions.

use std::f64::consts::LN_2;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use swssb_core::dynamics::steady_state;
use swssb_core::fockspace::{ChargeBlock, ModeLayout};
use swssb_core::largen::{dominant_saddle, early_correlator, page_time, SaddleInput};
use swssb_core::observables::decay::linear_fit;
use swssb_core::observables::{renyi2_of, renyi_correlator_of, ObservableKit, PairSelection};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::{OutputDir, RunManifest};
use crate::saddle::{GridSpec, GRID_FILE};
use crate::simulate::SERIES_DIR;

pub const REPORT_SCHEMA: &str = "swssb-compare-report/1";
pub const REPORT_FILE: &str = "report.json";

/// Relative tolerance when matching parameters between the two inputs.
const MATCH_TOL: f64 = 1e-9;

/// A measured series as read back from disk.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Measured {
    pub t: Vec<f64>,
    pub mean: Vec<f64>,
    pub err: Vec<f64>,
}

impl Measured {
    fn nearest(&self, t: f64) -> Option<usize> {
        (0..self.t.len()).min_by(|&a, &b| (self.t[a] - t).abs().total_cmp(&(self.t[b] - t).abs()))
    }
}

pub fn parse_series_csv(text: &str) -> CliResult<Measured> {
    let mut m = Measured::default();
    for (k, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Other(format!("series line {}: {e}", k + 1)))?;
        if cols.len() != 3 {
            return Err(CliError::Other(format!("series line {}: expected 3 columns", k + 1)));
        }
        m.t.push(cols[0]);
        m.mean.push(cols[1]);
        m.err.push(cols[2]);
    }
    Ok(m)
}

fn read_series(dir: &Path, name: &str) -> CliResult<Option<Measured>> {
    let csv = dir.join(SERIES_DIR).join(format!("{name}.csv"));
    if csv.is_file() {
        return parse_series_csv(&std::fs::read_to_string(csv)?).map(Some);
    }
    let json = dir.join(SERIES_DIR).join(format!("{name}.json"));
    if json.is_file() {
        let s: swssb_core::observables::ObservableSeries = serde_json::from_str(&std::fs::read_to_string(json)?)?;
        return Ok(Some(Measured {
            t: s.times,
            mean: s.mean,
            err: s.stderr,
        }));
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub config_hash: String,
    pub n: usize,
    pub gamma: f64,
    pub j: f64,
    pub dt: f64,
    pub n_traj: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheorySummary {
    pub decay: f64,
    pub page_time_renyi2: f64,
    pub page_time_wightman: Option<f64>,
    pub renyi2_rate: f64,
    pub wightman_early: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub observable: String,
    pub window: (f64, f64),
    pub points: usize,
    pub slope: f64,
    pub theory: f64,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Saturation {
    pub window_start: f64,
    pub points: usize,
    pub mean: f64,
    pub max_deviation: f64,
    pub steady_oracle: f64,
    pub maximum: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub early_time: f64,
    pub late_time: f64,
    pub early: f64,
    pub late: f64,
    pub late_stderr: f64,
    pub ratio: f64,
    pub oracle: f64,
    pub large_n: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wightman {
    pub time: f64,
    pub value: f64,
    pub stderr: f64,
    pub theory: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyBenchmark {
    pub renyi2: f64,
    pub purity: f64,
    pub f1: Option<f64>,
    pub f2: Option<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub simulation: SimSummary,
    pub theory: TheorySummary,
    pub slope_fit: Option<SlopeFit>,
    pub saturation: Option<Saturation>,
    pub correlator_jump: Option<Jump>,
    pub wightman: Option<Wightman>,
    pub steady_benchmark: SteadyBenchmark,
    pub checks: Vec<Check>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Differences between a simulation and the saddle grid, one line per key.
pub fn mismatches(config: &RunConfig, grid: &GridSpec) -> Vec<String> {
    let mut out = Vec::new();
    if !grid.gamma.iter().any(|&g| close(g, config.sim.gamma)) {
        out.push(format!("gamma: simulation {} not in saddle grid {:?}", config.sim.gamma, grid.gamma));
    }
    if !grid.j.iter().any(|&j| close(j, config.sim.j)) {
        out.push(format!("j: simulation {} not in saddle grid {:?}", config.sim.j, grid.j));
    }
    if grid.q != 4 {
        out.push(format!("q: simulation 4, saddle grid {}", grid.q));
    }
    out
}

fn overlay<F: Fn(f64) -> CliResult<f64>>(m: &Measured, theory: F) -> CliResult<String> {
    let mut s = String::from("t,sim_mean,sim_err,theory\n");
    for i in 0..m.t.len() {
        let _ = writeln!(s, "{},{},{},{}", m.t[i], m.mean[i], m.err[i], theory(m.t[i])?);
    }
    Ok(s)
}

fn in_window(m: &Measured, lo: f64, hi: f64) -> Vec<usize> {
    (0..m.t.len()).filter(|&i| m.t[i] >= lo - 1e-9 && m.t[i] <= hi + 1e-9).collect()
}

pub fn run(sim_dir: &Path, saddle_dir: &Path, out_dir: &Path) -> CliResult<Report> {
    let manifest = RunManifest::read(sim_dir)?;
    if manifest.command != "simulate" {
        return Err(CliError::config("sim", format!("{} is not a simulate output", sim_dir.display())));
    }
    let config: RunConfig = serde_json::from_value(manifest.config.clone())?;
    let grid_path = saddle_dir.join(GRID_FILE);
    let grid: GridSpec = serde_json::from_str(
        &std::fs::read_to_string(&grid_path)
            .map_err(|e| CliError::config("saddle", format!("cannot read {}: {e}", grid_path.display())))?,
    )?;
    let diff = mismatches(&config, &grid);
    if !diff.is_empty() {
        return Err(CliError::Mismatch(diff));
    }
    let sim = &config.sim;
    let n = sim.n as f64;
    let renyi2 = SaddleInput::new(2.0, sim.gamma, sim.j);
    let wightman = SaddleInput::new(1.0, sim.gamma, sim.j);
    let wightman_ok = sim.gamma < wightman.decay();
    let tp2 = page_time(&renyi2, 2)?;
    let tp1 = if wightman_ok { Some(page_time(&wightman, 1)?) } else { None };

    let mut out = OutputDir::create(out_dir)?;
    let s2 = read_series(sim_dir, "S2_annealed")?.ok_or_else(|| CliError::config("sim", "S2_annealed series missing"))?;
    out.write(
        "overlay_S2.csv",
        overlay(&s2, |t| Ok(n * dominant_saddle(&renyi2, t)?.entropy))?.as_bytes(),
    )?;
    let f2 = read_series(sim_dir, "F2")?;
    if let Some(f) = &f2 {
        out.write(
            "overlay_F2.csv",
            overlay(f, |t| Ok(dominant_saddle(&renyi2, t)?.correlator))?.as_bytes(),
        )?;
    }
    let f1 = read_series(sim_dir, "F1")?;
    if let (Some(f), true) = (&f1, wightman_ok) {
        out.write(
            "overlay_F1.csv",
            overlay(f, |t| Ok(dominant_saddle(&wightman, t)?.correlator))?.as_bytes(),
        )?;
    }

    let steady = steady_state(sim)?;
    let block = ChargeBlock::new(ModeLayout::new(sim.n)?)?;
    let rho = steady.rho.to_matrix(&block);
    let kit = ObservableKit::new(&block);
    let pair_ok = sim.n >= 2;
    let steady_f = |order| -> CliResult<Option<f64>> {
        Ok(if pair_ok {
            Some(renyi_correlator_of(&kit, &rho, order, PairSelection::AllOrdered)?)
        } else {
            None
        })
    };
    let bench = SteadyBenchmark {
        renyi2: renyi2_of(&rho),
        purity: rho.iter().map(|v| v.norm_sqr()).sum(),
        f1: steady_f(1)?,
        f2: steady_f(2)?,
        residual: steady.residual,
    };

    let mut checks = Vec::new();
    let window = (0.05 * tp2, 0.3 * tp2);
    let idx = in_window(&s2, window.0, window.1);
    let slope_fit = (idx.len() >= 3).then(|| {
        let t: Vec<f64> = idx.iter().map(|&i| s2.t[i]).collect();
        let y: Vec<f64> = idx.iter().map(|&i| s2.mean[i]).collect();
        let (slope, _) = linear_fit(&t, &y);
        let theory = n * sim.gamma / 2.0;
        let ratio = slope / theory;
        SlopeFit {
            observable: "S2_annealed".into(),
            window,
            points: idx.len(),
            slope,
            theory,
            ratio,
            pass: (0.85..=1.15).contains(&ratio),
        }
    });
    if let Some(f) = &slope_fit {
        checks.push(Check {
            name: "early S2 slope within 15% of N gamma / 2".into(),
            pass: f.pass,
        });
    }

    let late = in_window(&s2, 3.0 * tp2 + 1e-9, f64::INFINITY);
    let saturation = (!late.is_empty()).then(|| {
        let maximum = 2.0 * n * LN_2;
        let max_deviation = late.iter().map(|&i| (s2.mean[i] - bench.renyi2).abs()).fold(0.0, f64::max);
        Saturation {
            window_start: 3.0 * tp2,
            points: late.len(),
            mean: late.iter().map(|&i| s2.mean[i]).sum::<f64>() / late.len() as f64,
            max_deviation,
            steady_oracle: bench.renyi2,
            maximum,
            pass: max_deviation < 1e-2 && late.iter().all(|&i| s2.mean[i] < maximum),
        }
    });
    if let Some(s) = &saturation {
        checks.push(Check {
            name: "late S2 within 1e-2 of the steady-state oracle".into(),
            pass: s.pass,
        });
    }

    let last = s2.t.last().copied().unwrap_or(0.0);
    let correlator_jump = match (&f2, bench.f2) {
        (Some(f), Some(oracle)) if last >= 3.0 * tp2 - sim.dt => {
            let e = f.nearest(0.3 * tp2).unwrap();
            let l = f.nearest(3.0 * tp2).unwrap();
            let ratio = f.mean[l] / f.mean[e];
            Some(Jump {
                early_time: f.t[e],
                late_time: f.t[l],
                early: f.mean[e],
                late: f.mean[l],
                late_stderr: f.err[l],
                ratio,
                oracle,
                large_n: 0.25,
                pass: ratio >= 5.0 && (f.mean[l] - oracle).abs() <= 2.0 * f.err[l],
            })
        }
        _ => None,
    };
    if let Some(j) = &correlator_jump {
        checks.push(Check {
            name: "F2 jump: factor 5 and late value within 2 errors of the oracle".into(),
            pass: j.pass,
        });
    }

    let wightman_row = match (&f1, tp1) {
        (Some(f), Some(tp1)) if last >= 0.3 * tp1 - sim.dt => {
            let i = f.nearest(0.3 * tp1).unwrap();
            let theory = early_correlator(&wightman)?;
            Some(Wightman {
                time: f.t[i],
                value: f.mean[i],
                stderr: f.err[i],
                theory,
                ratio: f.mean[i] / theory,
            })
        }
        _ => None,
    };

    let report = Report {
        schema: REPORT_SCHEMA.into(),
        simulation: SimSummary {
            config_hash: manifest.config_hash.clone(),
            n: sim.n,
            gamma: sim.gamma,
            j: sim.j,
            dt: sim.dt,
            n_traj: sim.n_traj,
        },
        theory: TheorySummary {
            decay: renyi2.decay(),
            page_time_renyi2: tp2,
            page_time_wightman: tp1,
            renyi2_rate: sim.gamma / 2.0,
            wightman_early: if wightman_ok { Some(early_correlator(&wightman)?) } else { None },
        },
        slope_fit,
        saturation,
        correlator_jump,
        wightman: wightman_row,
        steady_benchmark: bench,
        checks,
    };
    out.write_json(REPORT_FILE, &report)?;
    out.finish(
        "compare",
        &serde_json::json!({
            "sim": manifest.config_hash,
            "saddle": RunManifest::read(saddle_dir).map(|m| m.config_hash).unwrap_or_default(),
        }),
        None,
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let m = parse_series_csv("t,mean,stderr\n0,1,0\n0.5,0.25,0.01\n").unwrap();
        assert_eq!(m.t, [0.0, 0.5]);
        assert_eq!(m.err, [0.0, 0.01]);
        assert!(parse_series_csv("t,mean,stderr\n0,1\n").is_err());
        assert_eq!(m.nearest(0.4), Some(1));
    }
}
