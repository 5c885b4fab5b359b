//! `swssb saddle`: large-N predictions over a parameter grid.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use swssb_core::largen::{
    action_density, crossing_time, default_phi, dominant_saddle, early_correlator, entropy_rate, phi_star, s0,
    s0_continuation, s0_envelope, PhiMethod, SaddleInput, SaddleLabel, LATE_CORRELATOR, SATURATION,
};

use crate::config::{apply_env, check_keys, field, read_table, Table};
use crate::error::{CliError, CliResult};
use crate::manifest::{OutputDir, RunManifest};
use crate::plot::{gnuplot_data, gnuplot_script, svg, Curve};

pub const GRID_KEYS: &[&str] = &["n", "gamma", "j", "q", "t_start", "t_stop", "t_count", "times"];
pub const GRID_FILE: &str = "grid.json";
pub const DEFAULT_T_COUNT: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: Vec<f64>,
    pub gamma: Vec<f64>,
    pub j: Vec<f64>,
    pub q: u32,
    pub times: Vec<f64>,
}

fn list(table: &Table, key: &str, default: Option<Vec<f64>>) -> CliResult<Vec<f64>> {
    let v = match field::<OneOrMany>(table, key)? {
        Some(v) => v.into_vec(),
        None => default.ok_or_else(|| CliError::config(key, "required key is missing"))?,
    };
    if v.is_empty() {
        return Err(CliError::config(key, "grid axis is empty"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(CliError::config(key, "values must be finite"));
    }
    Ok(v)
}

impl GridSpec {
    pub fn from_table(table: &Table) -> CliResult<Self> {
        check_keys(table, GRID_KEYS, &["n", "gamma"])?;
        let times = match field::<Vec<f64>>(table, "times")? {
            Some(ts) => ts,
            None => {
                let start: f64 = field(table, "t_start")?.unwrap_or(0.0);
                let stop: f64 = field(table, "t_stop")?
                    .ok_or_else(|| CliError::config("t_stop", "give either `times` or `t_stop`"))?;
                let count: usize = field(table, "t_count")?.unwrap_or(DEFAULT_T_COUNT);
                if count == 0 {
                    return Err(CliError::config("t_count", "grid axis is empty"));
                }
                if !(stop >= start) {
                    return Err(CliError::config("t_stop", "must not be below t_start"));
                }
                let denom = (count.max(2) - 1) as f64;
                (0..count).map(|k| start + (stop - start) * k as f64 / denom).collect()
            }
        };
        if times.is_empty() {
            return Err(CliError::config("times", "grid axis is empty"));
        }
        if times.iter().any(|t| !(*t >= 0.0)) {
            return Err(CliError::config("times", "times must be non-negative"));
        }
        let spec = GridSpec {
            n: list(table, "n", None)?,
            gamma: list(table, "gamma", None)?,
            j: list(table, "j", Some(vec![1.0]))?,
            q: field(table, "q")?.unwrap_or(4),
            times,
        };
        for &n in &spec.n {
            for &gamma in &spec.gamma {
                for &j in &spec.j {
                    spec.input(n, gamma, j).validate()?;
                }
            }
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let mut table = read_table(path)?;
        apply_env(&mut table, GRID_KEYS, std::env::vars());
        Self::from_table(&table)
    }

    pub fn input(&self, n: f64, gamma: f64, j: f64) -> SaddleInput {
        SaddleInput { n, gamma, j, q: self.q }
    }

    pub fn inputs(&self) -> Vec<SaddleInput> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &gamma in &self.gamma {
                for &j in &self.j {
                    out.push(self.input(n, gamma, j));
                }
            }
        }
        out
    }
}

/// One grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleRow {
    pub input: SaddleInput,
    pub decay: f64,
    pub phi_star: f64,
    pub phi_closed: Option<f64>,
    pub phi_numeric: f64,
    pub phi_numeric_full: f64,
    pub action_density: f64,
    pub entropy_rate: f64,
    pub s0: Option<f64>,
    pub s0_envelope: Option<f64>,
    pub s0_continuation: Option<f64>,
    pub correlator_early: f64,
    pub page_time: f64,
    pub correlator_late: f64,
    pub entropy_late: f64,
    pub warnings: Vec<String>,
}

pub fn evaluate(input: &SaddleInput) -> CliResult<SaddleRow> {
    let at_gamma = |e: swssb_core::Error| match e {
        swssb_core::Error::Domain { what, value } => {
            CliError::config("gamma", format!("{what} = {value} is outside the supported domain"))
        }
        other => other.into(),
    };
    let phi = default_phi(input)?;
    let mut warnings = input.warnings();
    if phi.status == swssb_core::largen::PhiStatus::Boundary {
        warnings.push("no stationary point in (0, Gamma]; phi = 0".into());
    }
    let replica_limit = input.n == 1.0;
    Ok(SaddleRow {
        input: *input,
        decay: input.decay(),
        phi_star: phi.value,
        phi_closed: if input.n < 2.0 {
            Some(phi_star(input, PhiMethod::Closed)?.value)
        } else {
            None
        },
        phi_numeric: phi_star(input, PhiMethod::Numeric)?.value,
        phi_numeric_full: phi_star(input, PhiMethod::NumericFull)?.value,
        action_density: action_density(phi.value, input)?,
        entropy_rate: entropy_rate(input).map_err(at_gamma)?,
        s0: if replica_limit { Some(s0(input).map_err(at_gamma)?) } else { None },
        s0_envelope: replica_limit.then(|| s0_envelope(input)),
        s0_continuation: if replica_limit { Some(s0_continuation(input)?) } else { None },
        correlator_early: early_correlator(input)?,
        page_time: crossing_time(input).map_err(at_gamma)?,
        correlator_late: LATE_CORRELATOR,
        entropy_late: SATURATION,
        warnings,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const ROW_HEADER: &str = "n,gamma,j,q,Gamma,phi_star,phi_closed,phi_numeric,phi_numeric_full,action_density,entropy_rate,s0,s0_envelope,s0_continuation,F_early,page_time,F_late,S_late,warnings";

pub fn rows_csv(rows: &[SaddleRow]) -> String {
    let mut s = String::from(ROW_HEADER);
    s.push('\n');
    for r in rows {
        let i = &r.input;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},\"{}\"",
            i.n,
            i.gamma,
            i.j,
            i.q,
            r.decay,
            r.phi_star,
            opt(r.phi_closed),
            r.phi_numeric,
            r.phi_numeric_full,
            r.action_density,
            r.entropy_rate,
            opt(r.s0),
            opt(r.s0_envelope),
            opt(r.s0_continuation),
            r.correlator_early,
            r.page_time,
            r.correlator_late,
            r.entropy_late,
            r.warnings.join("; ").replace('"', "'")
        );
    }
    s
}

fn label(i: &SaddleInput) -> String {
    format!("n={} gamma={} J={}", i.n, i.gamma, i.j)
}

/// Piecewise curves `(S/N, F)` of the dominant saddle at every grid time.
pub fn curves(spec: &GridSpec) -> CliResult<(String, Vec<Curve>, Vec<Curve>)> {
    let mut csv = String::from("n,gamma,j,t,entropy,correlator,saddle\n");
    let mut entropy = Vec::new();
    let mut corr = Vec::new();
    for input in spec.inputs() {
        let mut e = Vec::with_capacity(spec.times.len());
        let mut c = Vec::with_capacity(spec.times.len());
        for &t in &spec.times {
            let p = dominant_saddle(&input, t)?;
            let tag = match p.label {
                SaddleLabel::Early => "early",
                SaddleLabel::Late => "late",
            };
            let _ = writeln!(csv, "{},{},{},{},{},{},{}", input.n, input.gamma, input.j, t, p.entropy, p.correlator, tag);
            e.push((t, p.entropy));
            c.push((t, p.correlator));
        }
        entropy.push(Curve {
            label: label(&input),
            points: e,
        });
        corr.push(Curve {
            label: label(&input),
            points: c,
        });
    }
    Ok((csv, entropy, corr))
}

pub fn run(spec: &GridSpec, out_dir: &Path) -> CliResult<RunManifest> {
    let rows = spec.inputs().iter().map(evaluate).collect::<CliResult<Vec<_>>>()?;
    let mut out = OutputDir::create(out_dir)?;
    out.write_json(GRID_FILE, spec)?;
    out.write("saddle.csv", rows_csv(&rows).as_bytes())?;
    out.write_json("saddle.json", &rows)?;
    let (csv, entropy, corr) = curves(spec)?;
    out.write("curves.csv", csv.as_bytes())?;
    out.write(
        "entropy.svg",
        svg("Dominant saddle: Renyi entropy per fermion", "t J", "S/N", &entropy).as_bytes(),
    )?;
    out.write(
        "correlator.svg",
        svg("Dominant saddle: Renyi correlator", "t J", "F", &corr).as_bytes(),
    )?;
    out.write("entropy.dat", gnuplot_data(&entropy).as_bytes())?;
    out.write("correlator.dat", gnuplot_data(&corr).as_bytes())?;
    let script = format!(
        "{}\n{}",
        gnuplot_script("entropy.dat", "entropy.png", "t J", "S/N", &entropy),
        gnuplot_script("correlator.dat", "correlator.png", "t J", "F", &corr)
    );
    out.write("plot.gp", script.as_bytes())?;
    out.finish("saddle", spec, None)
}
