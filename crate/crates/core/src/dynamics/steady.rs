//! Long-time limit of the disorder-averaged dynamics.
//!
//! Averaging the Brownian unitary over one step turns the Hamiltonian into
//! an extra dissipator whose jump operators are the quartic monomials
//! `c_P† c_Q`, each at rate `2J/N³`. Adding the bath gives a time-independent
//! generator; evolving the paired state under it converges to the ensemble
//! mean density matrix at late times.

use super::lindblad::{bath_words, noise_words, SectorJumps};
use super::state::BlockDensity;
use super::superop::SectorSuperop;
use super::SimConfig;
use crate::error::{Error, Result};
use crate::fockspace::{ChargeBlock, ModeLayout};

/// Residual `‖dρ/dt‖_F` accepted as stationary.
pub const STEADY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: BlockDensity,
    pub residual: f64,
    /// Evolution time needed to reach the tolerance.
    pub time: f64,
}

/// Generator of the disorder-averaged evolution on the charge-zero block.
pub fn averaged_generator(config: &SimConfig, block: &ChargeBlock) -> SectorSuperop {
    let n = config.n;
    let bath = SectorJumps::new(
        block.sectors(),
        &bath_words(n, config.include_diagonal_jumps),
        config.gamma / n as f64,
    );
    let noise = SectorJumps::new(block.sectors(), &noise_words(n), 2.0 * config.j / (n as f64).powi(3));
    SectorSuperop::generator(n, &[&bath, &noise])
}

pub fn steady_state(config: &SimConfig) -> Result<SteadyState> {
    let block = ChargeBlock::new(ModeLayout::new(config.n)?)?;
    let generator = averaged_generator(config, &block);
    let norm = generator.max_row_sum();
    let mut rho = BlockDensity::epr(&block);
    let mut deriv = BlockDensity::zeros(&block);
    let residual_of = |rho: &BlockDensity, deriv: &mut BlockDensity| {
        generator.apply(rho, deriv);
        deriv.frobenius()
    };
    let mut residual = residual_of(&rho, &mut deriv);
    if norm == 0.0 || residual < STEADY_TOLERANCE {
        return Ok(SteadyState { rho, residual, time: 0.0 });
    }
    // Repeated squaring of a short, well-resolved step doubles the elapsed
    // time each round.
    let mut h = 0.1 / norm;
    let mut step = generator.rk4_propagator(h);
    let mut time = 0.0;
    let mut scratch = Vec::new();
    const ROUNDS: usize = 80;
    for _ in 0..ROUNDS {
        step.apply_in_place(&mut rho, &mut scratch);
        time += h;
        let tr = rho.trace().re;
        rho.scale(1.0 / tr);
        residual = residual_of(&rho, &mut deriv);
        if residual < STEADY_TOLERANCE {
            return Ok(SteadyState { rho, residual, time });
        }
        step = step.squared();
        h *= 2.0;
    }
    Err(Error::NotConverged {
        steps: ROUNDS,
        residual,
    })
}

/// `ρ_∞ = Σ_k 2^{−N}/C(N,k) · P_k ⊗ P'_{N−k}`: maximally mixed inside every
/// system charge sector, weighted by the binomial populations of the paired
/// state.
pub fn analytic_steady_state(block: &ChargeBlock) -> BlockDensity {
    let n = block.n();
    let mut rho = BlockDensity::zeros(block);
    for k in 0..=n {
        let d = block.sectors().dim(k);
        let weight = 0.5f64.powi(n as i32) / d as f64;
        let big_r = d * d;
        let (re, _) = rho.block_mut(k, k);
        for s in 0..d {
            for a in 0..d {
                re[(s * d + s) * big_r + a * d + a] = weight;
            }
        }
    }
    rho
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_to_sector_mixed_state() {
        for n in 1..=4 {
            let config = SimConfig::new(n, 1.0, 0.1, 1.0, 1);
            let ss = steady_state(&config).unwrap();
            let block = ChargeBlock::new(ModeLayout::new(n).unwrap()).unwrap();
            let exact = analytic_steady_state(&block);
            assert!(ss.residual < STEADY_TOLERANCE);
            assert!(ss.rho.distance(&exact) < 1e-8, "N = {n}: {}", ss.rho.distance(&exact));
            assert!((ss.rho.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn purity_of_limit() {
        // tr ρ∞² = Σ_k C(N,k)² · (2^{−N}/C(N,k))² = (N+1)/4^N
        let block = ChargeBlock::new(ModeLayout::new(3).unwrap()).unwrap();
        let p = analytic_steady_state(&block).frobenius().powi(2);
        assert!((p - 4.0 / 64.0).abs() < 1e-15);
    }
}
