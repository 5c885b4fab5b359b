//! Run configuration: TOML or JSON file, `SWSSB_*` environment overrides,
//! then command-line flags.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use swssb_core::dynamics::{SimConfig, SnapshotPolicy};

use crate::error::{CliError, CliResult};

pub const ENV_PREFIX: &str = "SWSSB_";

/// Keys accepted in a run configuration.
pub const RUN_KEYS: &[&str] = &[
    "n",
    "j",
    "gamma",
    "dt",
    "t_max",
    "checkpoints",
    "n_traj",
    "seed",
    "include_diagonal_jumps",
    "pair",
    "snapshots",
    "two_point",
    "threads",
];

pub const DEFAULT_CHECKPOINTS: usize = 50;

pub const REQUIRED_RUN_KEYS: &[&str] = &["n", "gamma", "t_max", "n_traj"];

/// Key-value table after merging file and environment.
pub type Table = BTreeMap<String, Value>;

pub fn read_table(path: &Path) -> CliResult<Table> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    let value: Value = if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::config("config", format!("JSON: {e}")))?
    } else {
        let table: toml::Table = toml::from_str(&text).map_err(|e| CliError::config("config", format!("TOML: {e}")))?;
        serde_json::to_value(table)?
    };
    match value {
        Value::Object(map) => Ok(map.into_iter().collect()),
        _ => Err(CliError::config("config", "top level must be a table")),
    }
}

/// Applies `SWSSB_<KEY>` variables for every known key. Values are parsed
/// as JSON when possible and kept as strings otherwise.
pub fn apply_env<I>(table: &mut Table, keys: &[&str], vars: I)
where
    I: IntoIterator<Item = (String, String)>,
{
    let vars: BTreeMap<String, String> = vars.into_iter().collect();
    for key in keys {
        if let Some(raw) = vars.get(&format!("{ENV_PREFIX}{}", key.to_uppercase())) {
            let v = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.clone()));
            table.insert((*key).to_string(), v);
        }
    }
}

pub fn check_keys(table: &Table, known: &[&str], required: &[&str]) -> CliResult<()> {
    if let Some(k) = table.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(CliError::config(k.clone(), "unknown key"));
    }
    if let Some(k) = required.iter().find(|k| !table.contains_key(**k)) {
        return Err(CliError::config(*k, "required key is missing"));
    }
    Ok(())
}

pub fn field<T: DeserializeOwned>(table: &Table, key: &str) -> CliResult<Option<T>> {
    match table.get(key) {
        None => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| CliError::config(key, e.to_string())),
    }
}

fn required<T: DeserializeOwned>(table: &Table, key: &str) -> CliResult<T> {
    field(table, key)?.ok_or_else(|| CliError::config(key, "required key is missing"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Checkpoints {
    Count(usize),
    Times(Vec<f64>),
}

/// Fully resolved `simulate` configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub pair: (usize, usize),
    pub snapshots: SnapshotPolicy,
    pub two_point: bool,
    /// Scheduling only; results are bitwise identical for any value, so it
    /// stays out of the recorded config and its hash.
    #[serde(skip)]
    pub threads: Option<usize>,
}

/// Command-line overrides.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_table(table: &Table, required_keys: &[&str], over: Overrides) -> CliResult<Self> {
        check_keys(table, RUN_KEYS, required_keys)?;
        let n: usize = required(table, "n")?;
        let gamma: f64 = required(table, "gamma")?;
        let t_max: f64 = field(table, "t_max")?.unwrap_or(1.0);
        let n_traj: usize = field(table, "n_traj")?.unwrap_or(1);
        let j: f64 = field(table, "j")?.unwrap_or(1.0);
        let mut sim = SimConfig::new(n, j, gamma, t_max, n_traj);
        if let Some(dt) = field(table, "dt")? {
            sim = sim.with_dt(dt);
        }
        sim = match field(table, "checkpoints")?.unwrap_or(Checkpoints::Count(DEFAULT_CHECKPOINTS)) {
            Checkpoints::Count(0) => return Err(CliError::config("checkpoints", "need at least one checkpoint")),
            Checkpoints::Count(c) => {
                let grid = sim.grid_checkpoints(c);
                sim.with_checkpoints(grid)
            }
            Checkpoints::Times(ts) => sim.with_checkpoints(ts),
        };
        if let Some(seed) = over.seed.or(field(table, "seed")?) {
            sim = sim.with_seed(seed);
        }
        if let Some(d) = field(table, "include_diagonal_jumps")? {
            sim.include_diagonal_jumps = d;
        }
        sim.validate()?;
        let pair: (usize, usize) = field(table, "pair")?.unwrap_or((0, 1.min(n.saturating_sub(1))));
        if pair.0 >= n || pair.1 >= n {
            return Err(CliError::config("pair", format!("modes must be below n = {n}")));
        }
        let threads = over.threads.or(field(table, "threads")?);
        if threads == Some(0) {
            return Err(CliError::config("threads", "must be at least 1"));
        }
        Ok(RunConfig {
            sim,
            pair,
            snapshots: field(table, "snapshots")?.unwrap_or(SnapshotPolicy::Final),
            two_point: field(table, "two_point")?.unwrap_or(gamma == 0.0),
            threads,
        })
    }

    pub fn load(path: &Path, required_keys: &[&str], over: Overrides) -> CliResult<Self> {
        let mut table = read_table(path)?;
        apply_env(&mut table, RUN_KEYS, std::env::vars());
        Self::from_table(&table, required_keys, over)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> Table {
        let t: toml::Table = toml::from_str(text).unwrap();
        match serde_json::to_value(t).unwrap() {
            Value::Object(m) => m.into_iter().collect(),
            _ => unreachable!(),
        }
    }

    fn load(text: &str) -> CliResult<RunConfig> {
        RunConfig::from_table(&table(text), REQUIRED_RUN_KEYS, Overrides::default())
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let c = load("n = 2\ngamma = 0.1\nt_max = 1.0\nn_traj = 3\n").unwrap();
        assert_eq!(c.sim.j, 1.0);
        assert_eq!(c.sim.dt, 0.01);
        assert_eq!(c.pair, (0, 1));
        assert!(!c.two_point);
        assert_eq!(c.snapshots, SnapshotPolicy::Final);
    }

    #[test]
    fn missing_and_unknown_keys_are_named() {
        match load("n = 2\nt_max = 1.0\nn_traj = 3\n") {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "gamma"),
            other => panic!("{other:?}"),
        }
        match load("n = 2\ngamma = 0.1\nt_max = 1.0\nn_traj = 3\nbogus = 1\n") {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "bogus"),
            other => panic!("{other:?}"),
        }
        match load("n = 2\ngamma = \"x\"\nt_max = 1.0\nn_traj = 3\n") {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "gamma"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn core_validation_maps_to_fields() {
        match load("n = 2\ngamma = 0.1\nt_max = 1.0\nn_traj = 3\ndt = 0.2\n") {
            Err(e @ CliError::Config { .. }) => assert_eq!(e.exit_code(), 2),
            other => panic!("{other:?}"),
        }
        assert!(load("n = 2\ngamma = 0.1\nt_max = 1.0\nn_traj = 3\ncheckpoints = 0\n").is_err());
    }

    #[test]
    fn env_overrides_file() {
        let mut t = table("n = 2\ngamma = 0.1\nt_max = 1.0\nn_traj = 3\n");
        apply_env(
            &mut t,
            RUN_KEYS,
            [
                ("SWSSB_GAMMA".to_string(), "0.2".to_string()),
                ("SWSSB_SNAPSHOTS".to_string(), "none".to_string()),
                ("OTHER".to_string(), "1".to_string()),
            ],
        );
        let c = RunConfig::from_table(&t, REQUIRED_RUN_KEYS, Overrides::default()).unwrap();
        assert_eq!(c.sim.gamma, 0.2);
        assert_eq!(c.snapshots, SnapshotPolicy::None);
    }

    #[test]
    fn flags_override_everything() {
        let t = table("n = 2\ngamma = 0.1\nt_max = 1.0\nn_traj = 3\nseed = 4\n");
        let c = RunConfig::from_table(
            &t,
            REQUIRED_RUN_KEYS,
            Overrides {
                seed: Some(9),
                threads: Some(2),
            },
        )
        .unwrap();
        assert_eq!(c.sim.master_seed, 9);
        assert_eq!(c.threads, Some(2));
    }

    #[test]
    fn explicit_checkpoints() {
        let c = load("n = 2\ngamma = 0.1\nt_max = 1.0\nn_traj = 3\ncheckpoints = [0.0, 0.5, 1.0]\n").unwrap();
        assert_eq!(c.sim.checkpoints, vec![0.0, 0.5, 1.0]);
    }
}
