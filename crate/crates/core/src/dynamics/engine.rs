//! Trajectory stepper on the charge-zero block.
//!
//! Each step draws fresh couplings, then applies a Strang sequence: half a
//! step of the bath, the exact unitary `exp(−iH dt)`, another half step of the
//! bath. The bath is time independent, so its half-step RK4 map is computed
//! once as a polynomial in the sector generators.

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use super::couplings::{sample_couplings, trajectory_rng};
use super::hamiltonian::SectorHamiltonian;
use super::lindblad::{bath_words, SectorJumps};
use super::state::BlockDensity;
use super::superop::SectorSuperop;
use super::SimConfig;
use crate::error::Result;
use crate::fockspace::{ChargeBlock, ModeLayout};
use crate::linalg::{CMatrix, C64, ZERO};

/// Drift of `tr ρ` from one that triggers a renormalization.
pub const TRACE_TOLERANCE: f64 = 1e-12;

/// State of one trajectory between steps.
#[derive(Clone, Debug)]
pub struct TrajectoryState {
    pub index: usize,
    pub step: usize,
    pub rho: BlockDensity,
    rng: ChaCha8Rng,
    pub renormalizations: usize,
    pub max_trace_drift: f64,
}

impl TrajectoryState {
    /// Position of the coupling stream, for snapshot resumption.
    pub fn rng_word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn time(&self, dt: f64) -> f64 {
        self.step as f64 * dt
    }
}

/// Hooks called while a trajectory advances.
pub trait StepObserver {
    /// Sector propagators of step `step` (1-based), before they are applied.
    fn on_unitaries(&mut self, _step: usize, _u: &[CMatrix]) {}

    fn on_checkpoint(&mut self, state: &TrajectoryState, checkpoint: usize) -> Result<()>;
}

impl<F: FnMut(&TrajectoryState, usize) -> Result<()>> StepObserver for F {
    fn on_checkpoint(&mut self, state: &TrajectoryState, checkpoint: usize) -> Result<()> {
        self(state, checkpoint)
    }
}

#[derive(Clone, Debug)]
pub struct Engine {
    config: SimConfig,
    block: Arc<ChargeBlock>,
    hamiltonian: SectorHamiltonian,
    half: SectorSuperop,
    full: SectorSuperop,
    checkpoint_steps: Vec<usize>,
}

impl Engine {
    pub fn new(config: &SimConfig) -> Result<Self> {
        let checkpoint_steps = config.checkpoint_steps()?;
        let block = Arc::new(ChargeBlock::new(ModeLayout::new(config.n)?)?);
        let sectors = block.sectors();
        let bath = SectorJumps::new(
            sectors,
            &bath_words(config.n, config.include_diagonal_jumps),
            config.gamma / config.n as f64,
        );
        let half = SectorSuperop::generator(config.n, &[&bath]).rk4_propagator(0.5 * config.dt);
        let full = half.squared();
        Ok(Engine {
            config: config.clone(),
            hamiltonian: SectorHamiltonian::new(sectors),
            block,
            half,
            full,
            checkpoint_steps,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn block(&self) -> &Arc<ChargeBlock> {
        &self.block
    }

    pub fn checkpoint_steps(&self) -> &[usize] {
        &self.checkpoint_steps
    }

    /// Trajectory `index` at `t = 0`, in the paired state.
    pub fn initial_state(&self, index: usize) -> TrajectoryState {
        TrajectoryState {
            index,
            step: 0,
            rho: BlockDensity::epr(&self.block),
            rng: trajectory_rng(self.config.master_seed, index as u64),
            renormalizations: 0,
            max_trace_drift: 0.0,
        }
    }

    /// Rebuilds a trajectory from a stored density matrix and stream position.
    pub fn restore_state(&self, index: usize, step: usize, rho: BlockDensity, word_pos: u128) -> TrajectoryState {
        let mut rng = trajectory_rng(self.config.master_seed, index as u64);
        rng.set_word_pos(word_pos);
        TrajectoryState {
            index,
            step,
            rho,
            rng,
            renormalizations: 0,
            max_trace_drift: 0.0,
        }
    }

    fn draw_propagators(&self, rng: &mut ChaCha8Rng) -> Vec<CMatrix> {
        let sample = sample_couplings(rng, &self.config);
        self.hamiltonian.propagators(&sample, self.config.dt)
    }

    /// One Strang step.
    pub fn step(&self, state: &mut TrajectoryState) {
        let u = self.draw_propagators(&mut state.rng);
        let mut scratch = Scratch::default();
        self.half.apply_in_place(&mut state.rho, &mut scratch.bath);
        conjugate(&mut state.rho, &u, &mut scratch);
        self.half.apply_in_place(&mut state.rho, &mut scratch.bath);
        state.step += 1;
        self.settle_trace(state);
    }

    fn settle_trace(&self, state: &mut TrajectoryState) -> f64 {
        let tr = state.rho.trace().re;
        let drift = (tr - 1.0).abs();
        state.max_trace_drift = state.max_trace_drift.max(drift);
        if drift > TRACE_TOLERANCE {
            log::debug!(
                "trajectory {} step {}: trace drift {drift:e}, renormalizing",
                state.index,
                state.step
            );
            state.renormalizations += 1;
            state.rho.scale(1.0 / tr);
            1.0 / tr
        } else {
            1.0
        }
    }

    /// Runs a fresh trajectory to `t_max`, reporting every checkpoint.
    pub fn run_trajectory<O: StepObserver>(&self, index: usize, observer: &mut O) -> Result<TrajectoryState> {
        self.advance(self.initial_state(index), observer, true)
    }

    /// Continues a restored trajectory; its current step is not re-reported.
    pub fn resume<O: StepObserver>(&self, state: TrajectoryState, observer: &mut O) -> Result<TrajectoryState> {
        self.advance(state, observer, false)
    }

    /// Strang steps with adjacent bath half steps merged: between
    /// checkpoints the sequence `P_h U P_h P_h U P_h …` is applied as
    /// `P_h U P_f U P_f … U P_h`.
    fn advance<O: StepObserver>(
        &self,
        mut state: TrajectoryState,
        observer: &mut O,
        report_start: bool,
    ) -> Result<TrajectoryState> {
        let last = self.config.total_steps();
        let mut next_cp = self.checkpoint_steps.partition_point(|&s| s < state.step);
        if next_cp < self.checkpoint_steps.len() && self.checkpoint_steps[next_cp] == state.step {
            if report_start {
                observer.on_checkpoint(&state, next_cp)?;
            }
            next_cp += 1;
        }
        if state.step >= last {
            return Ok(state);
        }
        let mut scratch = Scratch::default();
        let mut y = state.rho.clone();
        self.half.apply_in_place(&mut y, &mut scratch.bath);
        for step in state.step + 1..=last {
            let u = self.draw_propagators(&mut state.rng);
            observer.on_unitaries(step, &u);
            conjugate(&mut y, &u, &mut scratch);
            let at_cp = next_cp < self.checkpoint_steps.len() && self.checkpoint_steps[next_cp] == step;
            if at_cp || step == last {
                self.half.apply(&y, &mut state.rho);
                state.step = step;
                let factor = self.settle_trace(&mut state);
                if at_cp {
                    observer.on_checkpoint(&state, next_cp)?;
                    next_cp += 1;
                }
                if step == last {
                    break;
                }
                if factor != 1.0 {
                    y.scale(factor);
                }
            }
            self.full.apply_in_place(&mut y, &mut scratch.bath);
        }
        state.step = last;
        Ok(state)
    }
}

/// Work buffers for [`conjugate`].
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    re: Vec<f64>,
    im: Vec<f64>,
    bath: Vec<f64>,
}

/// `X ← U_k X U_k'†` on every auxiliary column of every block.
pub fn conjugate(rho: &mut BlockDensity, u: &[CMatrix], scratch: &mut Scratch) {
    let n = rho.n();
    let trivial: Vec<bool> = u.iter().map(is_identity).collect();
    for k in 0..=n {
        for kp in 0..=n {
            if trivial[k] && trivial[kp] {
                continue;
            }
            let (dk, dkp) = (rho.sector_dim(k), rho.sector_dim(kp));
            let big_r = dk * dkp;
            let (re, im) = rho.block_mut(k, kp);
            if !trivial[k] {
                left_multiply(&u[k], false, re, im, dk, dkp * big_r, scratch);
            }
            if !trivial[kp] {
                let len = dkp * big_r;
                for s in 0..dk {
                    let range = s * len..(s + 1) * len;
                    left_multiply(&u[kp], true, &mut re[range.clone()], &mut im[range], dkp, big_r, scratch);
                }
            }
        }
    }
}

fn is_identity(m: &CMatrix) -> bool {
    m.iter().enumerate().all(|(i, v)| {
        let (r, c) = (i % m.nrows(), i / m.nrows());
        *v == if r == c { C64::new(1.0, 0.0) } else { ZERO }
    })
}

/// `data[s, :] ← Σ_x w(s, x) data[x, :]` over `rows` rows of length `len`,
/// with `w = u` or `w = conj(u)`.
fn left_multiply(
    u: &CMatrix,
    conjugated: bool,
    re: &mut [f64],
    im: &mut [f64],
    rows: usize,
    len: usize,
    scratch: &mut Scratch,
) {
    let total = rows * len;
    scratch.re.clear();
    scratch.re.resize(total, 0.0);
    scratch.im.clear();
    scratch.im.resize(total, 0.0);
    for s in 0..rows {
        let out_re = &mut scratch.re[s * len..(s + 1) * len];
        let out_im = &mut scratch.im[s * len..(s + 1) * len];
        for x in 0..rows {
            let w = if conjugated { u[(s, x)].conj() } else { u[(s, x)] };
            if w == ZERO {
                continue;
            }
            let src_re = &re[x * len..(x + 1) * len];
            let src_im = &im[x * len..(x + 1) * len];
            for (((o_re, o_im), &x_re), &x_im) in out_re.iter_mut().zip(out_im.iter_mut()).zip(src_re).zip(src_im) {
                *o_re += w.re * x_re - w.im * x_im;
                *o_im += w.re * x_im + w.im * x_re;
            }
        }
    }
    re.copy_from_slice(&scratch.re[..total]);
    im.copy_from_slice(&scratch.im[..total]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::HermitianEigen;

    fn cfg(n: usize, gamma: f64, t_max: f64) -> SimConfig {
        SimConfig::new(n, 1.0, gamma, t_max, 1).with_seed(5)
    }

    #[test]
    fn merged_run_matches_plain_steps() {
        let config = cfg(3, 0.3, 0.5).with_checkpoints(vec![0.0, 0.13, 0.5]);
        let engine = Engine::new(&config).unwrap();
        let mut seen = Vec::new();
        let end = engine
            .run_trajectory(0, &mut |st: &TrajectoryState, _| {
                seen.push(st.rho.clone());
                Ok(())
            })
            .unwrap();
        let mut st = engine.initial_state(0);
        for _ in 0..13 {
            engine.step(&mut st);
        }
        assert!(st.rho.distance(&seen[1]) < 1e-12);
        for _ in 13..50 {
            engine.step(&mut st);
        }
        assert!(st.rho.distance(&end.rho) < 1e-12);
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn evolution_stays_physical() {
        let engine = Engine::new(&cfg(3, 0.5, 1.0)).unwrap();
        let end = engine.run_trajectory(2, &mut |_: &TrajectoryState, _| Ok(())).unwrap();
        let m = end.rho.to_matrix(engine.block());
        assert!((end.rho.trace().re - 1.0).abs() < 1e-12);
        assert!(crate::linalg::hermiticity_error(&m) < 1e-12);
        assert!(HermitianEigen::new(&m).min() > -1e-10);
    }

    #[test]
    fn unitary_only_run_keeps_purity() {
        let engine = Engine::new(&cfg(3, 0.0, 1.0)).unwrap();
        let end = engine.run_trajectory(0, &mut |_: &TrajectoryState, _| Ok(())).unwrap();
        assert!((end.rho.frobenius() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn resume_reproduces_the_tail() {
        let config = cfg(2, 0.4, 0.3).with_checkpoints(vec![0.1, 0.3]);
        let engine = Engine::new(&config).unwrap();
        let mut mid = None;
        let end = engine
            .run_trajectory(1, &mut |st: &TrajectoryState, cp| {
                if cp == 0 {
                    mid = Some((st.rho.clone(), st.step, st.rng_word_pos()));
                }
                Ok(())
            })
            .unwrap();
        let (rho, step, pos) = mid.unwrap();
        let restored = engine.restore_state(1, step, rho, pos);
        let again = engine.resume(restored, &mut |_: &TrajectoryState, _| Ok(())).unwrap();
        assert!(again.rho.distance(&end.rho) < 1e-13);
    }
}
