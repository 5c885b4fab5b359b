use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `J·dt` and `γ·dt` accepted by the stepper.
pub const STABILITY_LIMIT: f64 = 0.05;

/// Parameters of one ensemble run. Times are in units where `J` carries
/// dimensions of inverse time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Number of complex system fermions.
    pub n: usize,
    /// Brownian coupling strength.
    pub j: f64,
    /// Decoherence strength of the bath.
    pub gamma: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Measurement times; each must sit on the `dt` grid inside `[0, t_max]`.
    pub checkpoints: Vec<f64>,
    pub n_traj: usize,
    pub master_seed: u64,
    /// Keep the `L_ii = c_i c_i†` terms in the jump sum.
    #[serde(default = "default_true")]
    pub include_diagonal_jumps: bool,
}

fn default_true() -> bool {
    true
}

impl SimConfig {
    /// Defaults: `dt = 0.01/J`, checkpoints every 1/50 of the horizon.
    pub fn new(n: usize, j: f64, gamma: f64, t_max: f64, n_traj: usize) -> Self {
        let dt = if j > 0.0 { 0.01 / j } else { 0.01 };
        let mut cfg = SimConfig {
            n,
            j,
            gamma,
            dt,
            t_max,
            checkpoints: Vec::new(),
            n_traj,
            master_seed: 0,
            include_diagonal_jumps: true,
        };
        cfg.checkpoints = cfg.grid_checkpoints(50);
        cfg
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<f64>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    /// `count` checkpoints evenly spread over `(0, t_max]` plus `t = 0`,
    /// snapped to the step grid.
    pub fn grid_checkpoints(&self, count: usize) -> Vec<f64> {
        let steps = self.total_steps_unchecked();
        let mut out = vec![0.0];
        let mut last = 0;
        for c in 1..=count {
            let s = ((c as f64) * steps as f64 / count as f64).round() as usize;
            if s > last {
                out.push(s as f64 * self.dt);
                last = s;
            }
        }
        out
    }

    fn total_steps_unchecked(&self) -> usize {
        (self.t_max / self.dt).round().max(0.0) as usize
    }

    pub fn total_steps(&self) -> usize {
        self.total_steps_unchecked()
    }

    fn on_grid(&self, t: f64) -> Option<usize> {
        let x = t / self.dt;
        let r = x.round();
        if (x - r).abs() <= 1e-6 * x.abs().max(1.0) && r >= 0.0 {
            Some(r as usize)
        } else {
            None
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "need at least one fermion"));
        }
        if 2 * self.n > crate::fockspace::MAX_MODES {
            return Err(Error::config("n", format!("{} exceeds the dense limit", self.n)));
        }
        if !(self.j >= 0.0) || !self.j.is_finite() {
            return Err(Error::config("j", "must be finite and non-negative"));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::config("gamma", "must be finite and non-negative"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config("dt", "must be positive"));
        }
        if self.j * self.dt > STABILITY_LIMIT + 1e-12 {
            return Err(Error::config(
                "dt",
                format!("J·dt = {} exceeds {STABILITY_LIMIT}", self.j * self.dt),
            ));
        }
        if self.gamma * self.dt > STABILITY_LIMIT + 1e-12 {
            return Err(Error::config(
                "dt",
                format!("γ·dt = {} exceeds {STABILITY_LIMIT}", self.gamma * self.dt),
            ));
        }
        if !(self.t_max >= 0.0) || self.on_grid(self.t_max).is_none() {
            return Err(Error::config("t_max", "must be a non-negative multiple of dt"));
        }
        if self.n_traj == 0 {
            return Err(Error::config("n_traj", "need at least one trajectory"));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::config("checkpoints", "need at least one checkpoint"));
        }
        let mut prev: Option<usize> = None;
        for &t in &self.checkpoints {
            let step = self.on_grid(t).ok_or_else(|| {
                Error::config("checkpoints", format!("t = {t} is not on the dt grid"))
            })?;
            if t > self.t_max + 1e-9 * self.t_max.max(1.0) {
                return Err(Error::config("checkpoints", format!("t = {t} beyond t_max")));
            }
            if prev.is_some_and(|p| step <= p) {
                return Err(Error::config("checkpoints", "times must be strictly increasing"));
            }
            prev = Some(step);
        }
        Ok(())
    }

    /// Step index of every checkpoint.
    pub fn checkpoint_steps(&self) -> Result<Vec<usize>> {
        self.validate()?;
        Ok(self
            .checkpoints
            .iter()
            .map(|&t| self.on_grid(t).expect("validated"))
            .collect())
    }
}
