use num_complex::Complex64;
use proptest::prelude::*;
use qmetro_core::bayes::{build_cost_matrix, cost_for_state, lossy_lower_bound, optimal_state_and_cost, CostModel};
use qmetro_core::bounds::{asymptotic_dephasing_bound, asymptotic_loss_bound, cs_epsilons_phase, phase_diffusion_bounds};
use qmetro_core::channels::{
    choi_matrix, dephasing_kraus, loss_kraus_particle, loss_output_state, qubit_phase_generator, LossParams,
    PhaseEncodedChannel,
};
use qmetro_core::errorprop::{coherent_squeezed_precision, input_moments, precision, DecoherencePenalty, InputKind};
use qmetro_core::estimation::{crb, fisher_information, ml_estimate, BinomialP};
use qmetro_core::fock::{build_j_operators, mz_unitary, FockStateN};
use qmetro_core::gaussian::{mean_photon_number, GaussianState, Optic};
use qmetro_core::linalg::{c, identity, max_abs_diff, min_eigenvalue};
use qmetro_core::particle::{apply_iid, particle_qfi, symmetrize, ParticleCaps};
use qmetro_core::qfi::{qfi_blocks, qfi_pure};
use qmetro_core::tridiag::SymTridiagonal;

fn fock_state(max_n: usize) -> impl Strategy<Value = FockStateN> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n + 1)
            .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
            .prop_map(|v| FockStateN::normalized(v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
    })
}

fn number_variance(s: &FockStateN) -> f64 {
    let (mut m1, mut m2) = (0.0, 0.0);
    for (n, z) in s.coeffs().iter().enumerate() {
        m1 += z.norm_sqr() * n as f64;
        m2 += z.norm_sqr() * (n * n) as f64;
    }
    m2 - m1 * m1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pure_qfi_is_four_times_number_variance(s in fock_state(8)) {
        let psi = s.to_vector();
        let na = build_j_operators(s.n_total()).number_a();
        let dpsi = (&na * &psi) * c(0.0, -1.0);
        let f = qfi_pure(&psi, &dpsi).unwrap();
        prop_assert!((f - 4.0 * number_variance(&s)).abs() < 1e-10);
        prop_assert!(f <= (s.n_total() * s.n_total()) as f64 + 1e-10);
    }

    #[test]
    fn interferometer_is_unitary(n in 1usize..12, phi in -3.0f64..3.0) {
        let u = mz_unitary(n, phi);
        prop_assert!(max_abs_diff(&(u.adjoint() * &u), &identity(n + 1)) < 1e-12);
    }

    #[test]
    fn lossy_qfi_stays_below_channel_bound(s in fock_state(7), eta in 0.05f64..0.95) {
        let p = LossParams::equal(eta).unwrap();
        let out = loss_output_state(&s, 0.0, p);
        let f = qfi_blocks(&out).unwrap();
        let n = s.n_total() as f64;
        prop_assert!((out.total_weight() + out.dropped_weight - 1.0).abs() < 1e-12);
        prop_assert!(f <= 4.0 * number_variance(&s) + 1e-9);
        prop_assert!(f <= n * eta / (1.0 - eta) + 1e-9);
    }

    #[test]
    fn choi_matrices_are_positive(ea in 0.0f64..=1.0, eb in 0.0f64..=1.0, eta in 0.0f64..=1.0) {
        let loss = loss_kraus_particle(LossParams::new(ea, eb).unwrap());
        prop_assert!(min_eigenvalue(&choi_matrix(&loss)) > -1e-12);
        let deph = dephasing_kraus(eta).unwrap();
        prop_assert!(min_eigenvalue(&choi_matrix(&deph)) > -1e-12);
    }

    #[test]
    fn optimal_bayes_state_beats_others(s in fock_state(10), eta in 0.3f64..1.0) {
        for model in [CostModel::Ideal, CostModel::Loss(LossParams::equal(eta).unwrap())] {
            let a = build_cost_matrix(model, s.n_total()).unwrap();
            let (_, best) = optimal_state_and_cost(&a).unwrap();
            prop_assert!(best <= cost_for_state(&a, &s).unwrap() + 1e-12);
            if let CostModel::Loss(_) = model {
                prop_assert!(lossy_lower_bound(&a).unwrap() <= best + 1e-12);
            }
        }
    }

    #[test]
    fn asymptotic_bounds_scale_as_inverse_root(n in 1usize..10_000, eta in 0.01f64..0.99) {
        let ratio = asymptotic_loss_bound(4 * n, eta, eta).unwrap().delta_phi / asymptotic_loss_bound(n, eta, eta).unwrap().delta_phi;
        prop_assert!((ratio - 0.5).abs() < 1e-12);
        let ratio = asymptotic_dephasing_bound(4 * n, eta).unwrap().delta_phi / asymptotic_dephasing_bound(n, eta).unwrap().delta_phi;
        prop_assert!((ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn purification_bound_is_weaker(n in 1usize..500, gamma in 0.0f64..2.0) {
        let b = phase_diffusion_bounds(n, gamma).unwrap();
        prop_assert!(b.purification.delta_phi <= b.exact.delta_phi + 1e-15);
    }

    #[test]
    fn symplectic_optics_keep_states_physical_and_pure(
        ops in prop::collection::vec((0usize..4, -2.0f64..2.0, 0.0f64..1.0, 0usize..2), 1..6)
    ) {
        let mut s = GaussianState::vacuum(2);
        for (kind, x, y, mode) in ops {
            let optic = match kind {
                0 => Optic::BeamSplitter { transmissivity: y },
                1 => Optic::PhaseShift { phi: x, mode },
                2 => Optic::Squeeze { r: y, theta: x, mode },
                _ => Optic::Displace { alpha: Complex64::new(x, y), mode },
            };
            s = s.apply(&optic).unwrap();
        }
        prop_assert!(s.is_physical());
        prop_assert!(s.is_pure());
    }

    #[test]
    fn photon_number_adds_over_modes(r in 0.0f64..1.5, a in -2.0f64..2.0) {
        let one = GaussianState::vacuum(1).apply(&Optic::Squeeze { r, theta: 0.3, mode: 0 }).unwrap();
        let two = GaussianState::coherent(&[Complex64::new(a, 0.5), Complex64::new(0.0, 0.0)])
            .apply(&Optic::Squeeze { r, theta: 0.3, mode: 1 }).unwrap();
        let coh = GaussianState::coherent(&[Complex64::new(a, 0.5)]);
        prop_assert!((mean_photon_number(&two) - mean_photon_number(&one) - mean_photon_number(&coh)).abs() < 1e-10);
    }

    #[test]
    fn ideal_penalties_coincide(n in 1usize..50, phi in 0.1f64..3.0) {
        let m = input_moments(InputKind::Fock { n }).unwrap();
        let none = precision(&m, phi, DecoherencePenalty::None).unwrap();
        prop_assert_eq!(none, precision(&m, phi, DecoherencePenalty::Loss { eta: 1.0 }).unwrap());
        prop_assert_eq!(none, precision(&m, phi, DecoherencePenalty::Dephasing { eta: 1.0 }).unwrap());
    }

    #[test]
    fn dephasing_costs_more_than_loss(eta in 0.01f64..0.999, r in 0.0f64..2.0, phi in 0.2f64..2.9) {
        let loss = coherent_squeezed_precision(30.0, r, phi, DecoherencePenalty::Loss { eta }).unwrap();
        let deph = coherent_squeezed_precision(30.0, r, phi, DecoherencePenalty::Dephasing { eta }).unwrap();
        prop_assert!(deph >= loss);
    }

    #[test]
    fn decohered_precision_improves_with_squeezing(eta in 0.3f64..0.95) {
        let n_mean: f64 = 1e8;
        let mut last = f64::INFINITY;
        for k in 0..=16 {
            let r = 0.25 * k as f64;
            let alpha = (n_mean - r.sinh().powi(2)).sqrt();
            let p = coherent_squeezed_precision(alpha, r, std::f64::consts::FRAC_PI_2, DecoherencePenalty::Loss { eta }).unwrap();
            prop_assert!(p <= last * (1.0 + 1e-12));
            prop_assert!(p * n_mean.sqrt() >= ((1.0 - eta) / eta).sqrt() * (1.0 - 1e-9));
            last = p;
        }
    }

    #[test]
    fn fisher_information_and_crb(trials in 1usize..40, p in 0.01f64..0.99, reps in 1.0f64..100.0) {
        let m = BinomialP { trials };
        let f = fisher_information(&m, p).unwrap();
        prop_assert!((f - trials as f64 / (p * (1.0 - p))).abs() < 1e-8 * f);
        prop_assert!((crb(&m, p, reps).unwrap() - 1.0 / (reps * f)).abs() < 1e-12 / f);
    }

    #[test]
    fn ml_estimate_stays_in_domain(trials in 1usize..30, k in 0usize..30) {
        let k = k.min(trials);
        let m = BinomialP { trials };
        let mut counts = vec![0u64; trials + 1];
        counts[k] = 1;
        let est = ml_estimate(&m, &counts).unwrap();
        for e in est {
            prop_assert!((0.0..=1.0).contains(&e));
            prop_assert!((e - k as f64 / trials as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn tridiagonal_matches_dense(diag in prop::collection::vec(-2.0f64..2.0, 2..20), seed in 0u64..1000) {
        let off: Vec<f64> = (0..diag.len() - 1).map(|k| ((k as f64 + seed as f64) * 0.37).sin()).collect();
        let t = SymTridiagonal::new(diag.clone(), off.clone());
        let dense = nalgebra::DMatrix::<f64>::from_fn(diag.len(), diag.len(), |i, j| {
            if i == j { diag[i] } else if i == j + 1 { off[j] } else if j == i + 1 { off[i] } else { 0.0 }
        });
        let mut reference: Vec<f64> = dense.symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        let ours = t.eigenvalues();
        for (a, b) in ours.iter().zip(&reference) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mode_and_particle_loss_qfi_agree(s in fock_state(4), ea in 0.05f64..1.0, eb in 0.05f64..1.0) {
        let p = LossParams::new(ea, eb).unwrap();
        let mode = qfi_blocks(&loss_output_state(&s, 0.0, p)).unwrap();
        let part = particle_qfi(&s, &qmetro_core::particle::mode_a_generator(), &loss_kraus_particle(p), &ParticleCaps::default()).unwrap();
        prop_assert!((mode - part).abs() < 1e-8);
    }

    #[test]
    fn dephased_qfi_respects_cs_bound(s in fock_state(6), eta in 0.2f64..0.95) {
        let ch = dephasing_kraus(eta).unwrap();
        let f = particle_qfi(&s, &qubit_phase_generator(), &ch, &ParticleCaps::default()).unwrap();
        let cs = cs_epsilons_phase(&PhaseEncodedChannel::new(ch, qubit_phase_generator()).unwrap(), 0.0).unwrap();
        let n = s.n_total() as f64;
        prop_assert!(f <= n * cs.fi_bound() + 1e-8);
        prop_assert!(f <= n * eta * eta / (1.0 - eta * eta) + 1e-8);
    }

    #[test]
    fn channels_keep_permutation_symmetry(s in fock_state(4), ea in 0.0f64..1.0, eb in 0.0f64..1.0) {
        let caps = ParticleCaps::default();
        let sym = symmetrize(&s, &caps).unwrap();
        let out = apply_iid(&loss_kraus_particle(LossParams::new(ea, eb).unwrap()), &sym, &caps).unwrap();
        prop_assert!(out.is_permutation_symmetric(1e-10));
        let out = apply_iid(&dephasing_kraus(ea).unwrap(), &sym, &caps).unwrap();
        prop_assert!(out.is_permutation_symmetric(1e-10));
    }
}

#[test]
fn tridiagonal_handles_identity_blocks() {
    // sanity for a degenerate spectrum
    let t = SymTridiagonal::new(vec![1.0; 5], vec![0.0; 4]);
    assert!(t.eigenvalues().iter().all(|&x| (x - 1.0).abs() < 1e-12));
}
