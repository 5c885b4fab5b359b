//! Property tests for algebraic and statistical invariants.

use std::f64::consts::PI;

use proptest::prelude::*;

use swssb_core::dynamics::steady::averaged_generator;
use swssb_core::dynamics::{analytic_steady_state, build_hamiltonian, sample_couplings, trajectory_rng, BlockDensity, SimConfig};
use swssb_core::fockspace::bits::{apply_word, charge_shift, Ladder};
use swssb_core::fockspace::{build_charges, ChargeBlock, ModeLayout};
use swssb_core::largen::{
    dominant_saddle, early_correlator, late_saddle, phi_star, s0, s0_envelope, PhiMethod, SaddleInput,
};
use swssb_core::linalg::{frobenius, hermiticity_error, CMatrix, HermitianEigen, C64};
use swssb_core::observables::bootstrap::Bootstrap;
use swssb_core::observables::psd_sqrt;

const WIDTH: usize = 8;

fn ladder() -> impl Strategy<Value = Ladder> {
    prop_oneof![
        (0..WIDTH).prop_map(Ladder::Create),
        (0..WIDTH).prop_map(Ladder::Annihilate),
    ]
}

/// `⟨target| word |state⟩`.
fn amplitude(word: &[Ladder], state: u32, target: u32) -> f64 {
    match apply_word(word, state) {
        Some((s, sign)) if s == target => sign,
        _ => 0.0,
    }
}

proptest! {
    #[test]
    fn car_on_basis_states(a in 0..WIDTH, b in 0..WIDTH, state in 0u32..(1 << WIDTH)) {
        // {c_a, c_b†} = δ_ab and {c_a, c_b} = 0, checked matrix element by matrix element.
        for target in 0u32..(1 << WIDTH) {
            let mixed = amplitude(&[Ladder::Annihilate(a), Ladder::Create(b)], state, target)
                + amplitude(&[Ladder::Create(b), Ladder::Annihilate(a)], state, target);
            let same = amplitude(&[Ladder::Annihilate(a), Ladder::Annihilate(b)], state, target)
                + amplitude(&[Ladder::Annihilate(b), Ladder::Annihilate(a)], state, target);
            let delta = if a == b && target == state { 1.0 } else { 0.0 };
            prop_assert_eq!(mixed, delta);
            prop_assert_eq!(same, 0.0);
        }
    }

    #[test]
    fn words_shift_particle_number(word in prop::collection::vec(ladder(), 0..6), state in 0u32..(1 << WIDTH)) {
        if let Some((s, sign)) = apply_word(&word, state) {
            prop_assert_eq!(s.count_ones() as i32 - state.count_ones() as i32, charge_shift(&word));
            prop_assert!(sign == 1.0 || sign == -1.0);
        }
    }

    #[test]
    fn sampled_hamiltonians_conserve_charges(n in 1usize..=3, seed in any::<u64>(), index in 0u64..1000) {
        let layout = ModeLayout::new(n).unwrap();
        let config = SimConfig::new(n, 1.0, 0.1, 1.0, 1).with_seed(seed);
        let mut rng = trajectory_rng(seed, index);
        let h = build_hamiltonian(&sample_couplings(&mut rng, &config), layout).unwrap();
        let charges = build_charges(layout);
        let scale = 1.0 + frobenius(&h.matrix);
        prop_assert!(hermiticity_error(&h.matrix) < 1e-12 * scale);
        prop_assert!(h.commutator(&charges.total).norm() < 1e-12 * scale);
        prop_assert!(h.commutator(&charges.system).norm() < 1e-12 * scale);
    }

    #[test]
    fn averaged_step_preserves_trace_and_hermiticity(
        n in 1usize..=3,
        j in 0.0f64..2.0,
        gamma in 0.0f64..1.0,
        h in 0.001f64..0.05,
        diagonal in any::<bool>(),
    ) {
        let mut config = SimConfig::new(n, j, gamma, 1.0, 1);
        config.include_diagonal_jumps = diagonal;
        let block = ChargeBlock::new(ModeLayout::new(n).unwrap()).unwrap();
        let step = averaged_generator(&config, &block).rk4_propagator(h);
        let mut rho = BlockDensity::epr(&block);
        let mut next = BlockDensity::zeros(&block);
        for _ in 0..20 {
            step.apply(&rho, &mut next);
            std::mem::swap(&mut rho, &mut next);
        }
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.trace().im.abs() < 1e-12);
        prop_assert!(hermiticity_error(&rho.to_matrix(&block)) < 1e-12);
    }

    #[test]
    fn sector_mixed_state_is_stationary(n in 1usize..=3, j in 0.0f64..2.0, gamma in 0.0f64..1.0) {
        let config = SimConfig::new(n, j, gamma, 1.0, 1);
        let block = ChargeBlock::new(ModeLayout::new(n).unwrap()).unwrap();
        let rho = analytic_steady_state(&block);
        let mut deriv = BlockDensity::zeros(&block);
        averaged_generator(&config, &block).apply(&rho, &mut deriv);
        prop_assert!(deriv.frobenius() < 1e-13 * (1.0 + j + gamma));
    }

    #[test]
    fn bootstrap_error_is_nonnegative_and_affine(
        x in prop::collection::vec(-10.0f64..10.0, 2..40),
        shift in -5.0f64..5.0,
        scale in -3.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let b = Bootstrap::new(x.len(), 200, seed);
        let (_, err) = b.mean(&x);
        prop_assert!(err >= 0.0);
        let moved: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        let (_, err_moved) = b.mean(&moved);
        prop_assert!((err_moved - scale.abs() * err).abs() < 1e-9 * (1.0 + err));
    }

    #[test]
    fn late_saddle_ignores_decoherence(g1 in 0.0f64..1.0, g2 in 0.0f64..1.0, decay in 0.05f64..2.0) {
        let a = late_saddle(&SaddleInput::with_decay(2.0, g1, decay));
        let b = late_saddle(&SaddleInput::with_decay(2.0, g2, decay));
        prop_assert_eq!(a.correlator, b.correlator);
        prop_assert_eq!(a.saturation, b.saturation);
        prop_assert_eq!(a.correlator, 0.25);
    }

    #[test]
    fn closed_and_numeric_phi_agree(n in 1.0f64..1.95, ratio in 1e-3f64..0.2, decay in 0.05f64..2.0) {
        let input = SaddleInput::with_decay(n, ratio * decay, decay);
        let closed = phi_star(&input, PhiMethod::Closed).unwrap().value;
        let numeric = phi_star(&input, PhiMethod::Numeric).unwrap().value;
        prop_assert!(closed > 0.0);
        prop_assert!((closed - numeric).abs() <= 1e-8 * closed);
    }

    #[test]
    fn wightman_correlator_is_linear_in_gamma(gamma in 1e-4f64..0.1, decay in 0.5f64..2.0) {
        let one = early_correlator(&SaddleInput::with_decay(1.0, gamma, decay)).unwrap();
        let two = early_correlator(&SaddleInput::with_decay(1.0, 2.0 * gamma, decay)).unwrap();
        prop_assert!((two - 2.0 * one).abs() < 1e-15);
        prop_assert!((one - 16.0 * gamma / (9.0 * PI * PI * decay)).abs() < 1e-15);
    }

    #[test]
    fn replica_limit_sits_a_quarter_gamma_below_envelope(ratio in 1e-3f64..0.9, decay in 0.05f64..2.0) {
        let input = SaddleInput::with_decay(1.0, ratio * decay, decay);
        let gap = s0_envelope(&input) - s0(&input).unwrap();
        prop_assert!((gap - input.gamma / 4.0).abs() < 1e-12);
    }

    #[test]
    fn dominant_entropy_never_decreases(ratio in 1e-3f64..0.2, n in prop_oneof![Just(1.0), Just(2.0)], t1 in 0.0f64..500.0, t2 in 0.0f64..500.0) {
        let input = SaddleInput::with_decay(n, ratio * 0.25, 0.25);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let a = dominant_saddle(&input, lo).unwrap();
        let b = dominant_saddle(&input, hi).unwrap();
        prop_assert!(b.entropy >= a.entropy);
        prop_assert!(b.entropy <= 2.0 * std::f64::consts::LN_2 + 1e-15);
    }

    #[test]
    fn psd_square_root_squares_back(dim in 1usize..8, entries in prop::collection::vec(-1.0f64..1.0, 128)) {
        let a = CMatrix::from_fn(dim, dim, |r, c| C64::new(entries[2 * (r * dim + c)], entries[2 * (r * dim + c) + 1]));
        let rho = &a * a.adjoint();
        let root = psd_sqrt(&rho).unwrap();
        prop_assert!(frobenius(&(&root * &root - &rho)) < 1e-10);
        prop_assert!(hermiticity_error(&root) < 1e-12);
        prop_assert!(HermitianEigen::new(&root).min() > -1e-10);
    }
}
