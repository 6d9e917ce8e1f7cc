//! Independent reference computations checked against the library.

use approx::assert_relative_eq;
use num_complex::Complex64;
use qmetro_core::channels::{
    dephasing_kraus, loss_on_blocks, loss_output_state, Block, BlockDiagonalState, KrausChannel, LossParams,
};
use qmetro_core::errorprop::{precision, DecoherencePenalty, InputMoments};
use qmetro_core::fock::{
    beam_splitter_unitary, build_j_operators, embed_on_grid, grid_index, mz_unitary, phase_average,
    phase_average_matrix, FockStateN, TwoModeGrid,
};
use qmetro_core::linalg::{c, cr, expm_i_hermitian, kron, max_abs_diff, CMatrix, CVector};
use qmetro_core::particle::{apply_iid_matrix, symmetrize, ParticleCaps};
use qmetro_core::qfi::{fidelity, qfi_blocks, qfi_mixed, qfi_pure, qfi_unitary};

fn sample_state(n: usize, salt: u64) -> FockStateN {
    // deterministic pseudo-random complex amplitudes
    let coeffs: Vec<Complex64> = (0..=n)
        .map(|k| {
            let t = (k as f64 + 1.0) * 1.618 + salt as f64 * 0.7213;
            c(t.sin() + 1.2, (2.3 * t).cos())
        })
        .collect();
    FockStateN::normalized(coeffs).unwrap()
}

/// Loss as a beam splitter coupling each arm to an empty environment
/// mode, with the environment traced out.
fn dilated_loss(state: &FockStateN, p: LossParams) -> Vec<CMatrix> {
    let n_total = state.n_total();
    let angle = |eta: f64| 2.0 * eta.sqrt().acos();
    let mut blocks: Vec<CMatrix> = (0..=n_total).map(|k| CMatrix::zeros(k + 1, k + 1)).collect();
    for la in 0..=n_total {
        for lb in 0..=(n_total - la) {
            let kept = n_total - la - lb;
            let mut v = CVector::zeros(kept + 1);
            for n in la..=(n_total - lb) {
                let m = n_total - n;
                // |n>|0> -> sum_l U[n-l, n] |n-l>|l> on the arm and its environment
                let ua = beam_splitter_unitary(n, angle(p.eta_a))[(n - la, n)];
                let ub = beam_splitter_unitary(m, angle(p.eta_b))[(m - lb, m)];
                v[n - la] += state.coeffs()[n] * ua * ub;
            }
            blocks[kept] += &v * v.adjoint();
        }
    }
    blocks
}

#[test]
fn loss_matches_beam_splitter_dilation() {
    for (n, p) in [(3, (0.7, 0.4)), (5, (0.9, 0.9)), (4, (0.55, 0.8))] {
        let p = LossParams::new(p.0, p.1).unwrap();
        let s = sample_state(n, n as u64);
        let out = loss_output_state(&s, 0.0, p);
        let oracle = dilated_loss(&s, p);
        for b in &out.blocks {
            let lib = &b.rho * cr(b.weight);
            assert!(max_abs_diff(&lib, &oracle[b.n]) < 1e-12, "block {} differs", b.n);
        }
        let covered: f64 = out.blocks.iter().map(|b| b.weight).sum::<f64>() + out.dropped_weight;
        assert_relative_eq!(covered, 1.0, epsilon = 1e-12);
    }
}

#[test]
fn phase_average_matches_theta_integral() {
    let cutoff = 4;
    let side = cutoff + 1;
    let grid = TwoModeGrid::from_fn(cutoff, 0.0, |i, j| {
        let t = (i * 7 + j * 3) as f64;
        c(t.sin(), (0.5 * t).cos()) / 5.0
    });
    let norm = grid.norm_sqr().sqrt();
    let psi = CVector::from_iterator(side * side, grid.amps().iter().map(|z| z / norm));
    let rho = &psi * psi.adjoint();
    // total photon number reaches 2 * cutoff, so this many points integrate exactly
    let points = 4 * cutoff + 3;
    let mut avg = CMatrix::zeros(side * side, side * side);
    for k in 0..points {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
        let u = CMatrix::from_fn(side * side, side * side, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, -theta * (i / side + i % side) as f64)
            } else {
                cr(0.0)
            }
        });
        avg += &u * &rho * u.adjoint();
    }
    avg /= cr(points as f64);
    assert!(max_abs_diff(&avg, &phase_average_matrix(&rho, cutoff)) < 1e-14);
    let sectors = phase_average(&grid).unwrap();
    assert!(max_abs_diff(&avg, &embed_on_grid(&sectors, cutoff)) < 1e-14);
    assert_eq!(grid_index(cutoff, 2, 3), 2 * side + 3);
}

fn dense(state: &BlockDiagonalState, n_total: usize) -> CMatrix {
    let dim: usize = (0..=n_total).map(|k| k + 1).sum();
    let mut m = CMatrix::zeros(dim, dim);
    for b in &state.blocks {
        let off: usize = (0..b.n).map(|k| k + 1).sum();
        for i in 0..=b.n {
            for j in 0..=b.n {
                m[(off + i, off + j)] = b.rho[(i, j)] * b.weight;
            }
        }
    }
    m
}

#[test]
fn fidelity_expansion_gives_qfi() {
    // a little white noise keeps the rank fixed and full, where the
    // expansion 1 - F = F_Q dφ²/4 holds
    let p = LossParams::new(0.8, 0.7).unwrap();
    let s = sample_state(3, 11);
    let dim = 10;
    let family = |phi: f64| {
        dense(&loss_output_state(&s, phi, p), 3) * cr(0.95) + CMatrix::identity(dim, dim) * cr(0.05 / dim as f64)
    };
    let na = CMatrix::from_fn(dim, dim, |i, j| {
        // index within the block of its photon number
        let (mut k, mut off) = (0, 0);
        while off + k < i {
            off += k + 1;
            k += 1;
        }
        if i == j { cr((i - off) as f64) } else { cr(0.0) }
    });
    let f_q = qfi_unitary(&family(0.3), &na).unwrap();
    let delta = 1e-4;
    let infid = 1.0 - fidelity(&family(0.3), &family(0.3 + delta));
    assert_relative_eq!(4.0 * infid / (delta * delta), f_q, max_relative = 1e-4);
}

#[test]
fn qfi_is_monotone_under_loss_and_composes() {
    let s = sample_state(5, 3);
    let lossless = qfi_blocks(&loss_output_state(&s, 0.0, LossParams::equal(1.0).unwrap())).unwrap();
    let once = loss_output_state(&s, 0.0, LossParams::new(0.9, 0.8).unwrap());
    let twice = loss_on_blocks(&once, LossParams::new(0.7, 0.6).unwrap());
    let direct = loss_output_state(&s, 0.0, LossParams::new(0.63, 0.48).unwrap());
    let (f1, f2) = (qfi_blocks(&once).unwrap(), qfi_blocks(&twice).unwrap());
    assert!(f1 <= lossless + 1e-10 && f2 <= f1 + 1e-10);
    assert_relative_eq!(f2, qfi_blocks(&direct).unwrap(), max_relative = 1e-10);
}

#[test]
fn qfi_is_convex_and_additive() {
    let (a, b) = (sample_state(4, 1), sample_state(4, 2));
    let na = build_j_operators(4).number_a();
    let (fa, fb) = (qfi_unitary(&a.density_matrix(), &na).unwrap(), qfi_unitary(&b.density_matrix(), &na).unwrap());
    for p in [0.2, 0.5, 0.9] {
        let mix = a.density_matrix() * cr(p) + b.density_matrix() * cr(1.0 - p);
        assert!(qfi_unitary(&mix, &na).unwrap() <= p * fa + (1.0 - p) * fb + 1e-10);
    }
    // product state with the generator acting on both halves
    let psi = kron(&CMatrix::from_column_slice(5, 1, a.coeffs()), &CMatrix::from_column_slice(5, 1, b.coeffs()));
    let psi = CVector::from_column_slice(psi.as_slice());
    let id = CMatrix::identity(5, 5);
    let g = kron(&na, &id) + kron(&id, &na);
    let dpsi = (&g * &psi) * c(0.0, -1.0);
    assert_relative_eq!(qfi_pure(&psi, &dpsi).unwrap(), fa + fb, max_relative = 1e-12);
}

fn block_jz_moments(state: &BlockDiagonalState) -> (f64, f64) {
    let (mut m1, mut m2) = (0.0, 0.0);
    for b in &state.blocks {
        let half = b.n as f64 / 2.0;
        for i in 0..=b.n {
            let jz = i as f64 - half;
            let p = b.rho[(i, i)].re * b.weight;
            m1 += p * jz;
            m2 += p * jz * jz;
        }
    }
    (m1, m2 - m1 * m1)
}

#[test]
fn error_propagation_matches_simulated_loss() {
    let h = 1e-5;
    for n in 1..=6 {
        for salt in 0..3 {
            let s = sample_state(n, salt + 10 * n as u64);
            let moments = InputMoments::from_state(&s);
            for eta in [0.6, 0.9] {
                let p = LossParams::equal(eta).unwrap();
                let run = |phi: f64| {
                    let v = mz_unitary(n, phi) * s.to_vector();
                    let block = Block { n, weight: 1.0, rho: &v * v.adjoint() };
                    block_jz_moments(&loss_on_blocks(&BlockDiagonalState { blocks: vec![block], dropped_weight: 0.0 }, p))
                };
                for phi in [0.4, 1.1, 2.0] {
                    let (_, var) = run(phi);
                    let slope = (run(phi + h).0 - run(phi - h).0) / (2.0 * h);
                    if slope.abs() < 1e-3 {
                        continue;
                    }
                    let lib = precision(&moments, phi, DecoherencePenalty::Loss { eta }).unwrap();
                    assert_relative_eq!(lib, var.sqrt() / slope.abs(), max_relative = 1e-6);
                }
            }
        }
    }
}

#[test]
fn error_propagation_matches_particle_dephasing() {
    let caps = ParticleCaps::default();
    let sx = CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(0.5), cr(0.5), cr(0.0)]);
    let sz = CMatrix::from_row_slice(2, 2, &[cr(0.5), cr(0.0), cr(0.0), cr(-0.5)]);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let h = 1e-5;
    for n in 1..=4 {
        let s = sample_state(n, 40 + n as u64);
        let sym = symmetrize(&s, &caps).unwrap();
        let jz = qmetro_core::particle::collective_generator(&sz, n);
        let jz2 = &jz * &jz;
        let moments = InputMoments::from_state(&s);
        for eta in [0.5, 0.85] {
            let deph = dephasing_kraus(eta).unwrap();
            let run = |phi: f64| {
                let bi = expm_i_hermitian(&sx, half_pi);
                let bo = expm_i_hermitian(&sx, -half_pi);
                let ph = expm_i_hermitian(&sz, phi);
                let ops = deph.ops().iter().map(|k| &bo * k * &ph * &bi).collect();
                let ch = KrausChannel::new(ops).unwrap();
                let out = apply_iid_matrix(&ch, &sym.rho, n, &caps).unwrap();
                let m1 = (&out * &jz).trace().re;
                (m1, (&out * &jz2).trace().re - m1 * m1)
            };
            for phi in [0.5, 1.3, 2.2] {
                let (_, var) = run(phi);
                let slope = (run(phi + h).0 - run(phi - h).0) / (2.0 * h);
                if slope.abs() < 1e-3 {
                    continue;
                }
                let lib = precision(&moments, phi, DecoherencePenalty::Dephasing { eta }).unwrap();
                assert_relative_eq!(lib, var.sqrt() / slope.abs(), max_relative = 1e-6);
            }
        }
    }
}

#[test]
fn mixed_and_pure_qfi_agree() {
    let s = sample_state(6, 5);
    let na = build_j_operators(6).number_a();
    let psi = s.to_vector();
    let dpsi = (&na * &psi) * c(0.0, -1.0);
    let rho = s.density_matrix();
    let drho = (&na * &rho - &rho * &na) * c(0.0, -1.0);
    let fp = qfi_pure(&psi, &dpsi).unwrap();
    assert_relative_eq!(qfi_mixed(&rho, &drho).unwrap().value, fp, max_relative = 1e-10);
    assert_relative_eq!(qfi_unitary(&rho, &na).unwrap(), fp, max_relative = 1e-10);
}
