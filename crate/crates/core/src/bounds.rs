//! Fundamental precision bounds: closed-form asymptotic limits for loss,
//! dephasing and phase diffusion, the classical-simulation (Choi
//! positivity) and quantum-simulation (Kraus optimisation) engines, and the
//! particle-entanglement witness.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::{
    choi_derivative, choi_from_kraus, dephasing_kraus, loss_kraus_particle, qubit_phase_generator, LossParams,
    PhaseEncodedChannel, COMPLETENESS_TOL,
};
use crate::error::{domain, Error, Result};
use crate::linalg::{c, cr, identity, max_abs, max_abs_diff, CMatrix, HermitianEigen, I};
use crate::numerics::{nelder_mead_restarted, NelderMeadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMethod {
    AsymptoticLoss,
    AsymptoticDephasing,
    PhaseDiffusionExact,
    PhaseDiffusionPurification,
    ClassicalSimulation,
    QuantumSimulation,
}

impl BoundMethod {
    pub fn name(self) -> &'static str {
        match self {
            BoundMethod::AsymptoticLoss => "asymptotic_loss",
            BoundMethod::AsymptoticDephasing => "asymptotic_dephasing",
            BoundMethod::PhaseDiffusionExact => "phase_diffusion_exact",
            BoundMethod::PhaseDiffusionPurification => "phase_diffusion_purification",
            BoundMethod::ClassicalSimulation => "classical_simulation",
            BoundMethod::QuantumSimulation => "quantum_simulation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    Loss { eta_a: f64, eta_b: f64 },
    Dephasing { eta: f64 },
    PhaseDiffusion { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub method: BoundMethod,
    pub n: usize,
    pub noise: NoiseSpec,
    /// Lower bound on the phase uncertainty; infinite when the noise
    /// destroys all phase information.
    pub delta_phi: f64,
    /// `1 / delta_phi^2`.
    pub qfi_equivalent: f64,
}

impl BoundResult {
    fn new(method: BoundMethod, n: usize, noise: NoiseSpec, delta_phi: f64) -> Self {
        let qfi_equivalent = if delta_phi == 0.0 { f64::INFINITY } else { 1.0 / (delta_phi * delta_phi) };
        BoundResult { method, n, noise, delta_phi, qfi_equivalent }
    }

    pub fn is_infinite(&self) -> bool {
        self.delta_phi.is_infinite()
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(domain(alloc::format!("noise parameter {eta} outside [0, 1]")));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(domain("photon number must be at least 1"));
    }
    Ok(())
}

/// `sqrt((1-η)/η)`, infinite at `η = 0`.
fn loss_kappa(eta: f64) -> f64 {
    if eta == 0.0 { f64::INFINITY } else { ((1.0 - eta) / eta).sqrt() }
}

/// `½ (sqrt((1-η_a)/η_a) + sqrt((1-η_b)/η_b)) / sqrt(N)`.
pub fn asymptotic_loss_bound(n: usize, eta_a: f64, eta_b: f64) -> Result<BoundResult> {
    check_n(n)?;
    check_eta(eta_a)?;
    check_eta(eta_b)?;
    let d = 0.5 * (loss_kappa(eta_a) + loss_kappa(eta_b)) / (n as f64).sqrt();
    Ok(BoundResult::new(BoundMethod::AsymptoticLoss, n, NoiseSpec::Loss { eta_a, eta_b }, d))
}

/// `sqrt((1-η²)/η²) / sqrt(N)`.
pub fn asymptotic_dephasing_bound(n: usize, eta: f64) -> Result<BoundResult> {
    check_n(n)?;
    check_eta(eta)?;
    let d = if eta == 0.0 { f64::INFINITY } else { ((1.0 - eta * eta) / (eta * eta)).sqrt() / (n as f64).sqrt() };
    Ok(BoundResult::new(BoundMethod::AsymptoticDephasing, n, NoiseSpec::Dephasing { eta }, d))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDiffusionBounds {
    /// `sqrt(Γ + π²/N²)`.
    pub exact: BoundResult,
    /// `sqrt(Γ + 1/N²)`.
    pub purification: BoundResult,
}

pub fn phase_diffusion_bounds(n: usize, gamma: f64) -> Result<PhaseDiffusionBounds> {
    check_n(n)?;
    if !(gamma >= 0.0) {
        return Err(domain("phase variance must be nonnegative"));
    }
    let nf = n as f64;
    let noise = NoiseSpec::PhaseDiffusion { gamma };
    Ok(PhaseDiffusionBounds {
        exact: BoundResult::new(BoundMethod::PhaseDiffusionExact, n, noise, (gamma + PI * PI / (nf * nf)).sqrt()),
        purification: BoundResult::new(
            BoundMethod::PhaseDiffusionPurification,
            n,
            noise,
            (gamma + 1.0 / (nf * nf)).sqrt(),
        ),
    })
}

/// Tangent distances from a channel to the boundary of the set of
/// channels, along `±dΛ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsResult {
    pub eps_plus: f64,
    pub eps_minus: f64,
    /// Set when the bracket top was still feasible.
    pub unbounded_plus: bool,
    pub unbounded_minus: bool,
}

impl CsResult {
    /// Per-probe bound `1/(ε₊ε₋)` on the Fisher information.
    pub fn fi_bound(&self) -> f64 {
        let p = self.eps_plus * self.eps_minus;
        if p == 0.0 { f64::INFINITY } else { 1.0 / p }
    }

    /// Either distance vanishes, so the bound says nothing.
    pub fn is_trivial(&self) -> bool {
        self.eps_plus == 0.0 || self.eps_minus == 0.0
    }
}

pub const CS_BRACKET: f64 = 1e3;
pub const CS_TOL: f64 = 1e-10;

/// Positivity test for `Ω + tD` split along the support and kernel of Ω.
struct ChoiPencil {
    support: Vec<f64>,
    d_ss: DMatrix<num_complex::Complex64>,
    d_sk: DMatrix<num_complex::Complex64>,
    d_kk: DMatrix<num_complex::Complex64>,
    tol: f64,
}

impl ChoiPencil {
    fn new(omega: &CMatrix, d: &CMatrix) -> Self {
        let eig = HermitianEigen::new(omega);
        let top = eig.max().max(1.0);
        let cut = 1e-12 * top;
        let s_idx: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] > cut).collect();
        let k_idx: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] <= cut).collect();
        let dv = eig.vectors.adjoint() * d * &eig.vectors;
        let pick = |rows: &[usize], cols: &[usize]| CMatrix::from_fn(rows.len(), cols.len(), |i, j| dv[(rows[i], cols[j])]);
        ChoiPencil {
            support: s_idx.iter().map(|&i| eig.values[i]).collect(),
            d_ss: pick(&s_idx, &s_idx),
            d_sk: pick(&s_idx, &k_idx),
            d_kk: pick(&k_idx, &k_idx),
            tol: 1e-12 * top.max(max_abs(d)),
        }
    }

    fn feasible(&self, t: f64) -> bool {
        let ns = self.support.len();
        let mut a = self.d_ss.scale(t);
        for i in 0..ns {
            a[(i, i)] += cr(self.support[i]);
        }
        let eig = HermitianEigen::new(&a);
        if ns > 0 && eig.min() <= self.tol {
            return false;
        }
        if self.d_kk.nrows() == 0 {
            return true;
        }
        if t == 0.0 {
            return true;
        }
        let inv = eig.map(|v| cr(1.0 / v));
        let schur = &self.d_kk - self.d_sk.adjoint() * inv * &self.d_sk * cr(t);
        HermitianEigen::new(&schur).min() >= -self.tol
    }

    fn distance(&self) -> (f64, bool) {
        if self.feasible(CS_BRACKET) {
            return (CS_BRACKET, true);
        }
        if !self.feasible(CS_TOL) {
            return (0.0, false);
        }
        let (mut lo, mut hi) = (CS_TOL, CS_BRACKET);
        while hi - lo > CS_TOL * (1.0 + lo) {
            let mid = 0.5 * (lo + hi);
            if self.feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, false)
    }
}

/// Largest `t` with `Choi(Λ) ± t Choi(dΛ) ⪰ 0` for the Kraus family with
/// derivatives `dkraus`.
pub fn cs_epsilons(kraus: &[CMatrix], dkraus: &[CMatrix]) -> Result<CsResult> {
    if kraus.is_empty() || kraus.len() != dkraus.len() {
        return Err(Error::DimensionMismatch { expected: kraus.len(), found: dkraus.len() });
    }
    let omega = choi_from_kraus(kraus);
    let d = choi_derivative(kraus, dkraus);
    if max_abs(&d) < 1e-14 {
        return Err(Error::UndefinedDirection);
    }
    let (eps_plus, unbounded_plus) = ChoiPencil::new(&omega, &d).distance();
    let (eps_minus, unbounded_minus) = ChoiPencil::new(&omega, &(-d)).distance();
    Ok(CsResult { eps_plus, eps_minus, unbounded_plus, unbounded_minus })
}

pub fn cs_epsilons_phase(channel: &PhaseEncodedChannel, phi0: f64) -> Result<CsResult> {
    let (k, dk) = channel.kraus_at(phi0);
    cs_epsilons(&k, &dk)
}

/// Kraus operators and their derivatives at the working point.
#[derive(Debug, Clone, PartialEq)]
pub struct QsProblem {
    pub kraus: Vec<CMatrix>,
    pub dkraus: Vec<CMatrix>,
}

impl QsProblem {
    pub fn new(kraus: Vec<CMatrix>, dkraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() || kraus.len() != dkraus.len() {
            return Err(Error::DimensionMismatch { expected: kraus.len(), found: dkraus.len() });
        }
        let din = kraus[0].ncols();
        let sum = kraus.iter().fold(CMatrix::zeros(din, din), |acc, k| acc + k.adjoint() * k);
        if max_abs_diff(&sum, &identity(din)) > COMPLETENESS_TOL {
            return Err(domain("Kraus operators are not complete"));
        }
        Ok(QsProblem { kraus, dkraus })
    }

    pub fn from_phase_channel(channel: &PhaseEncodedChannel, phi0: f64) -> Result<Self> {
        let (k, dk) = channel.kraus_at(phi0);
        Self::new(k, dk)
    }

    pub fn count(&self) -> usize {
        self.kraus.len()
    }

    fn input_dim(&self) -> usize {
        self.kraus[0].ncols()
    }

    /// `dK_i + i sum_j h_ij K_j`.
    pub fn shifted_derivatives(&self, h: &CMatrix) -> Vec<CMatrix> {
        (0..self.count())
            .map(|i| {
                let mut m = self.dkraus[i].clone();
                for j in 0..self.count() {
                    m += &self.kraus[j] * (I * h[(i, j)]);
                }
                m
            })
            .collect()
    }

    /// `sum_i dK̃_i† dK̃_i`, whose operator norm times four is the bound.
    pub fn alpha(&self, h: &CMatrix) -> CMatrix {
        let d = self.input_dim();
        self.shifted_derivatives(h).iter().fold(CMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k)
    }

    /// `sum_i dK̃_i† K_i`, required to vanish.
    pub fn beta(&self, h: &CMatrix) -> CMatrix {
        let d = self.input_dim();
        self.shifted_derivatives(h)
            .iter()
            .zip(&self.kraus)
            .fold(CMatrix::zeros(d, d), |acc, (dk, k)| acc + dk.adjoint() * k)
    }
}

/// Single-photon lossy interferometer with phase generator `σ_z/2`.
pub fn loss_qs_problem(params: LossParams) -> Result<QsProblem> {
    let ch = PhaseEncodedChannel::new(loss_kraus_particle(params), qubit_phase_generator())?;
    QsProblem::from_phase_channel(&ch, 0.0)
}

pub fn dephasing_qs_problem(eta: f64) -> Result<QsProblem> {
    let ch = PhaseEncodedChannel::new(dephasing_kraus(eta)?, qubit_phase_generator())?;
    QsProblem::from_phase_channel(&ch, 0.0)
}

/// Hermitian `k x k` matrix from `k²` reals: diagonal first, then
/// (re, im) of each upper-triangle entry.
pub fn hermitian_from_params(k: usize, p: &[f64]) -> CMatrix {
    let mut h = CMatrix::zeros(k, k);
    for i in 0..k {
        h[(i, i)] = cr(p[i]);
    }
    let mut idx = k;
    for i in 0..k {
        for j in i + 1..k {
            let z = c(p[idx], p[idx + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            idx += 2;
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QsOptions {
    pub starts: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for QsOptions {
    fn default() -> Self {
        QsOptions { starts: 20, tolerance: 1e-10, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QsResult {
    pub f_qs: f64,
    pub h: CMatrix,
    pub constraint_residual: f64,
    /// False when the constraint could not be met to 1e-6.
    pub feasible: bool,
}

fn real_parts(m: &CMatrix) -> Vec<f64> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Minimise `4 ||sum dK̃†dK̃||` over Hermitian `h` subject to
/// `sum dK̃†K = 0`. The linear constraint is eliminated exactly when it is
/// consistent; otherwise a ramped quadratic penalty takes over.
pub fn qs_optimize(problem: &QsProblem, opts: QsOptions) -> Result<QsResult> {
    let k = problem.count();
    let np = k * k;
    let zero = CMatrix::zeros(k, k);
    let beta0 = real_parts(&problem.beta(&zero));
    let rows = beta0.len();
    let mut m = DMatrix::<f64>::zeros(rows.max(np), np);
    for p in 0..np {
        let mut e = alloc::vec![0.0; np];
        e[p] = 1.0;
        let col = real_parts(&problem.beta(&hermitian_from_params(k, &e)));
        for r in 0..rows {
            m[(r, p)] = col[r] - beta0[r];
        }
    }
    let svd = m.clone().svd(true, true);
    let (u, vt) = (svd.u.ok_or_else(|| Error::Numeric("svd failed".into()))?, svd.v_t.ok_or_else(|| Error::Numeric("svd failed".into()))?);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut rhs = DVector::<f64>::zeros(rows.max(np));
    for r in 0..rows {
        rhs[r] = -beta0[r];
    }
    let mut particular = DVector::<f64>::zeros(np);
    let mut null: Vec<DVector<f64>> = Vec::new();
    for (s_idx, &s) in svd.singular_values.iter().enumerate() {
        let v = vt.row(s_idx).transpose();
        if s > 1e-10 * smax.max(1e-300) {
            let coef = u.column(s_idx).dot(&rhs) / s;
            particular += v * coef;
        } else {
            null.push(v);
        }
    }
    let residual_of = |p: &[f64]| max_abs(&problem.beta(&hermitian_from_params(k, p)));
    let exact = residual_of(particular.as_slice()) < 1e-9;

    let norm_of = |p: &[f64]| HermitianEigen::new(&problem.alpha(&hermitian_from_params(k, p))).max();
    let nm = NelderMeadOptions { initial_step: 0.5, tolerance: opts.tolerance, max_evaluations: 40_000 };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(Vec<f64>, f64)> = None;

    for start in 0..opts.starts.max(1) {
        let params = if exact {
            let dim = null.len();
            let to_params = |z: &[f64]| -> Vec<f64> {
                let mut p = particular.clone();
                for (zi, v) in z.iter().zip(&null) {
                    p += v * *zi;
                }
                p.as_slice().to_vec()
            };
            let z0: Vec<f64> =
                (0..dim).map(|_| if start == 0 { 0.0 } else { rng.random_range(-2.0..2.0) }).collect();
            let (z, _) = nelder_mead_restarted(|z| norm_of(&to_params(z)), &z0, nm, 30);
            to_params(&z)
        } else {
            let mut p: Vec<f64> = (0..np).map(|_| if start == 0 { 0.0 } else { rng.random_range(-2.0..2.0) }).collect();
            let mut weight = 1e3;
            while weight <= 1e9 {
                let w = weight;
                let objective = |q: &[f64]| {
                    let r = residual_of(q);
                    norm_of(q) + w * r * r
                };
                p = nelder_mead_restarted(objective, &p, nm, 10).0;
                weight *= 10.0;
            }
            p
        };
        let value = norm_of(&params);
        let feasible_here = residual_of(&params) <= 1e-6;
        let better = match &best {
            None => true,
            Some((bp, bv)) => {
                let best_feasible = residual_of(bp) <= 1e-6;
                (feasible_here && !best_feasible) || (feasible_here == best_feasible && value < *bv)
            }
        };
        if better {
            best = Some((params, value));
        }
    }
    let (params, value) = best.ok_or_else(|| Error::Numeric("no optimisation start".into()))?;
    let residual = residual_of(&params);
    Ok(QsResult {
        f_qs: 4.0 * value,
        h: hermitian_from_params(k, &params),
        constraint_residual: residual,
        feasible: residual <= 1e-6,
    })
}

/// Closed-form optimum of the lossy quantum-simulation problem,
/// `4 / (sqrt((1-η_a)/η_a) + sqrt((1-η_b)/η_b))²`.
pub fn loss_f_qs(params: LossParams) -> f64 {
    let s = loss_kappa(params.eta_a) + loss_kappa(params.eta_b);
    4.0 / (s * s)
}

/// Optimal `h` for [`loss_qs_problem`] when both arms are lossy
/// (`0 < η < 1`):
/// `-(1/8) diag{χ, -(η_a/(1-η_a))(4/η_a + χ), (η_b/(1-η_b))(4/η_b - χ)}`
/// with `χ = F_QS (η_b - η_a)/(η_a η_b)`.
pub fn loss_analytic_h(params: LossParams) -> Result<CMatrix> {
    let (ea, eb) = (params.eta_a, params.eta_b);
    if !(ea > 0.0 && ea < 1.0 && eb > 0.0 && eb < 1.0) {
        return Err(domain("analytic h needs transmissions strictly inside (0, 1)"));
    }
    let chi = loss_f_qs(params) * (eb - ea) / (ea * eb);
    let d = [chi, -(ea / (1.0 - ea)) * (4.0 / ea + chi), (eb / (1.0 - eb)) * (4.0 / eb - chi)];
    Ok(crate::linalg::diag_real(&d.map(|x| -x / 8.0)))
}

/// `F_Q > N`: quantum Fisher information above the separable-state limit.
pub fn entanglement_witness(fq: f64, n: usize) -> bool {
    fq > n as f64 + 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_bound_arithmetic() {
        let b = asymptotic_loss_bound(900, 0.9, 0.9).unwrap();
        assert!((b.delta_phi - (0.1f64 / (0.9 * 900.0)).sqrt()).abs() < 1e-15);
        assert!((b.delta_phi - 1.0 / b.qfi_equivalent.sqrt()).abs() < 1e-12);
        assert_eq!(asymptotic_loss_bound(10, 1.0, 1.0).unwrap().delta_phi, 0.0);
        assert!(asymptotic_loss_bound(10, 0.0, 0.5).unwrap().is_infinite());
    }

    #[test]
    fn dephasing_bound_arithmetic() {
        let b = asymptotic_dephasing_bound(100, 0.9).unwrap();
        assert!((b.delta_phi - 0.048_432_210_483_785_2).abs() < 1e-12);
        assert_eq!(asymptotic_dephasing_bound(5, 1.0).unwrap().delta_phi, 0.0);
    }

    #[test]
    fn witness_is_strict() {
        assert!(entanglement_witness(16.0, 4));
        assert!(!entanglement_witness(4.0, 4));
    }

    #[test]
    fn unitary_channel_has_zero_epsilon() {
        let ch = PhaseEncodedChannel::new(
            crate::channels::KrausChannel::new(alloc::vec![identity(2)]).unwrap(),
            qubit_phase_generator(),
        )
        .unwrap();
        let cs = cs_epsilons_phase(&ch, 0.0).unwrap();
        assert_eq!(cs.eps_plus, 0.0);
        assert!(cs.is_trivial());
    }

    #[test]
    fn constant_family_has_no_direction() {
        let k = alloc::vec![identity(2)];
        let dk = alloc::vec![CMatrix::zeros(2, 2)];
        assert_eq!(cs_epsilons(&k, &dk), Err(Error::UndefinedDirection));
    }
}
