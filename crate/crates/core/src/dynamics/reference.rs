//! Dense full-space stepper, used to cross-check the block engine and to
//! measure leakage out of the charge-zero block directly.

use super::couplings::{sample_couplings, trajectory_rng};
use super::hamiltonian::build_hamiltonian;
use super::lindblad::{bath_jumps, dissipator, JumpSet};
use super::state::DensityMatrix;
use super::SimConfig;
use crate::error::Result;
use crate::fockspace::{build_epr_state, ModeLayout};
use crate::linalg::{unitary_propagator, C64};

#[derive(Clone, Debug)]
pub struct ReferenceEngine {
    config: SimConfig,
    layout: ModeLayout,
    jumps: JumpSet,
}

/// One classical RK4 step of `dρ/dt = D[ρ]`.
pub fn rk4_dissipator_step(rho: &mut DensityMatrix, jumps: &JumpSet, h: f64) {
    let x = &rho.matrix;
    let k1 = dissipator(x, jumps);
    let k2 = dissipator(&(x + &k1 * C64::new(0.5 * h, 0.0)), jumps);
    let k3 = dissipator(&(x + &k2 * C64::new(0.5 * h, 0.0)), jumps);
    let k4 = dissipator(&(x + &k3 * C64::new(h, 0.0)), jumps);
    let incr = (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
    rho.matrix += incr;
}

impl ReferenceEngine {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let layout = ModeLayout::new(config.n)?;
        Ok(ReferenceEngine {
            config: config.clone(),
            layout,
            jumps: bath_jumps(layout, config.gamma, config.include_diagonal_jumps),
        })
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn initial_state(&self) -> DensityMatrix {
        let psi = build_epr_state(self.layout).expect("paired layout");
        DensityMatrix {
            matrix: psi.projector(),
            layout: self.layout,
        }
    }

    /// Runs trajectory `index` (same coupling stream as the block engine)
    /// and returns `ρ` at every checkpoint.
    pub fn run_trajectory(&self, index: usize) -> Result<Vec<DensityMatrix>> {
        let steps = self.config.checkpoint_steps()?;
        let mut rng = trajectory_rng(self.config.master_seed, index as u64);
        let mut rho = self.initial_state();
        let mut out = Vec::with_capacity(steps.len());
        let half = 0.5 * self.config.dt;
        let mut cp = 0;
        for step in 0..=self.config.total_steps() {
            if step > 0 {
                let sample = sample_couplings(&mut rng, &self.config);
                let h = build_hamiltonian(&sample, self.layout)?;
                let u = unitary_propagator(&h.matrix, self.config.dt);
                rk4_dissipator_step(&mut rho, &self.jumps, half);
                rho.matrix = &u * &rho.matrix * u.adjoint();
                rk4_dissipator_step(&mut rho, &self.jumps, half);
                let tr = rho.trace().re;
                if (tr - 1.0).abs() > super::engine::TRACE_TOLERANCE {
                    rho.matrix /= C64::new(tr, 0.0);
                }
            }
            if cp < steps.len() && steps[cp] == step {
                out.push(rho.clone());
                cp += 1;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::engine::Engine;
    use crate::dynamics::TrajectoryState;
    use crate::fockspace::{block_projector, build_charges, ChargeBlock};

    #[test]
    fn block_engine_agrees_with_full_space() {
        for n in [2, 3] {
            let config = SimConfig::new(n, 1.0, 0.4, 0.6, 1)
                .with_seed(17)
                .with_checkpoints(vec![0.0, 0.3, 0.6]);
            let reference = ReferenceEngine::new(&config).unwrap().run_trajectory(0).unwrap();
            let engine = Engine::new(&config).unwrap();
            let block: &ChargeBlock = engine.block();
            let mut got = Vec::new();
            engine
                .run_trajectory(0, &mut |st: &TrajectoryState, _| {
                    got.push(block.embed(&st.rho.to_matrix(block)));
                    Ok(())
                })
                .unwrap();
            for (r, b) in reference.iter().zip(&got) {
                assert!((&r.matrix - b).norm() < 1e-10, "N = {n}: {}", (&r.matrix - b).norm());
            }
        }
    }

    #[test]
    fn full_space_evolution_stays_in_block() {
        let config = SimConfig::new(2, 1.0, 0.5, 1.0, 1).with_seed(3);
        let reference = ReferenceEngine::new(&config).unwrap();
        let states = reference.run_trajectory(0).unwrap();
        let charges = build_charges(reference.layout());
        let p0 = block_projector(0, &charges.total).unwrap();
        for rho in &states {
            let outside = &rho.matrix - &p0.op.matrix * &rho.matrix * &p0.op.matrix;
            assert!(outside.norm() < 1e-12);
        }
    }

    #[test]
    fn rk4_matches_fine_euler_for_pure_bath() {
        let config = SimConfig::new(2, 0.0, 0.8, 0.1, 1);
        let reference = ReferenceEngine::new(&config).unwrap();
        let mut a = reference.initial_state();
        rk4_dissipator_step(&mut a, &reference.jumps, 0.05);
        let mut b = reference.initial_state();
        let fine = 20_000;
        for _ in 0..fine {
            let d = dissipator(&b.matrix, &reference.jumps);
            b.matrix += d * C64::new(0.05 / fine as f64, 0.0);
        }
        assert!((&a.matrix - &b.matrix).norm() < 1e-5);
    }
}
