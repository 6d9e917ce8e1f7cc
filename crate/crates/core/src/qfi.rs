//! Quantum Fisher information: pure and mixed states, the symmetric
//! logarithmic derivative, fidelity, and the phase-diffusion purification
//! bound.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::BlockDiagonalState;
use crate::error::{domain, Error, Result};
use crate::fock::{IndefinitePhotonState, SectorPayload};
use crate::linalg::{cr, is_hermitian, max_abs, sqrtm_psd, trace, CMatrix, CVector, HermitianEigen};

/// Pairs of eigenvalues whose sum falls below this are left out of the SLD.
pub const RETAIN_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QfiResult {
    pub value: f64,
    pub sld: Option<CMatrix>,
    /// Smallest `λ_i + λ_j` that entered the sum.
    pub spectrum_condition: f64,
}

/// `4 (<dψ|dψ> - |<dψ|ψ>|^2)` for a normalised `ψ`.
pub fn qfi_pure(psi: &CVector, dpsi: &CVector) -> Result<f64> {
    if psi.len() != dpsi.len() {
        return Err(Error::DimensionMismatch { expected: psi.len(), found: dpsi.len() });
    }
    let norm = psi.norm_squared();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(domain(alloc::format!("state has squared norm {norm}")));
    }
    let overlap = psi.dotc(dpsi);
    if overlap.re.abs() > 1e-8 {
        return Err(Error::InconsistentDerivative { real_overlap: overlap.re });
    }
    Ok((4.0 * (dpsi.norm_squared() - overlap.norm_sqr())).max(0.0))
}

fn check_state_pair(rho: &CMatrix, drho: &CMatrix) -> Result<()> {
    if rho.shape() != drho.shape() || !rho.is_square() {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), found: drho.nrows() });
    }
    let scale = 1.0 + max_abs(rho);
    if !is_hermitian(rho, HERMITIAN_TOL * scale) || !is_hermitian(drho, HERMITIAN_TOL * (1.0 + max_abs(drho))) {
        return Err(domain("state and derivative must be Hermitian"));
    }
    Ok(())
}

/// QFI and SLD of `rho` along the direction `drho`.
pub fn qfi_mixed(rho: &CMatrix, drho: &CMatrix) -> Result<QfiResult> {
    check_state_pair(rho, drho)?;
    let eig = HermitianEigen::new(rho);
    let lambda: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let v = &eig.vectors;
    let d = v.adjoint() * drho * v;
    let n = lambda.len();
    let mut l = CMatrix::zeros(n, n);
    let mut value = 0.0;
    let mut condition = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            let s = lambda[i] + lambda[j];
            if s > RETAIN_TOL {
                l[(i, j)] = d[(i, j)] * (2.0 / s);
                value += 2.0 * d[(i, j)].norm_sqr() / s;
                condition = condition.min(s);
            }
        }
    }
    let sld = v * l * v.adjoint();
    Ok(QfiResult { value, sld: Some(sld), spectrum_condition: condition })
}

/// Largest violation of `dρ = (ρL + Lρ)/2` on the retained support.
pub fn sld_residual(rho: &CMatrix, drho: &CMatrix, sld: &CMatrix) -> f64 {
    let eig = HermitianEigen::new(rho);
    let r = drho - (rho * sld + sld * rho).scale(0.5);
    let r = eig.vectors.adjoint() * r * &eig.vectors;
    let mut worst: f64 = 0.0;
    for i in 0..r.nrows() {
        for j in 0..r.ncols() {
            if eig.values[i].max(0.0) + eig.values[j].max(0.0) > RETAIN_TOL {
                worst = worst.max(r[(i, j)].norm());
            }
        }
    }
    worst
}

/// QFI of `exp(-iφH) ρ exp(iφH)`.
pub fn qfi_unitary(rho: &CMatrix, h: &CMatrix) -> Result<f64> {
    check_state_pair(rho, h)?;
    let eig = HermitianEigen::new(rho);
    let lambda: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let hv = eig.vectors.adjoint() * h * &eig.vectors;
    let mut f = 0.0;
    for i in 0..lambda.len() {
        for j in 0..lambda.len() {
            let s = lambda[i] + lambda[j];
            if s > RETAIN_TOL {
                let diff = lambda[i] - lambda[j];
                f += 2.0 * hv[(i, j)].norm_sqr() * diff * diff / s;
            }
        }
    }
    Ok(f)
}

/// Uhlmann fidelity `(tr sqrt(sqrt ρ1 ρ2 sqrt ρ1))^2`.
pub fn fidelity(rho1: &CMatrix, rho2: &CMatrix) -> f64 {
    let s = sqrtm_psd(rho1);
    let inner = &s * rho2 * &s;
    let root = sqrtm_psd(&crate::linalg::hermitian_part(&inner));
    let t = trace(&root).re;
    (t * t).clamp(0.0, 1.0)
}

/// Central difference `(f(φ+h) - f(φ-h)) / 2h`, for cross-checks.
pub fn central_difference(f: impl Fn(f64) -> CMatrix, phi: f64, step: f64) -> CMatrix {
    (f(phi + step) - f(phi - step)) * cr(0.5 / step)
}

pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Sum of blockwise QFIs for a phase applied on mode `a` ahead of a
/// photon-number-diagonal channel.
pub fn qfi_blocks(state: &BlockDiagonalState) -> Result<f64> {
    let derivs = state.phase_derivative();
    let mut f = 0.0;
    for (b, d) in state.blocks.iter().zip(&derivs) {
        f += b.weight * qfi_mixed(&b.rho, d)?.value;
    }
    Ok(f)
}

fn number_variance(amps: &[num_complex::Complex64]) -> f64 {
    let (mut m1, mut m2) = (0.0, 0.0);
    for (n, z) in amps.iter().enumerate() {
        let p = z.norm_sqr();
        m1 += p * n as f64;
        m2 += p * (n * n) as f64;
    }
    m2 - m1 * m1
}

/// QFI of a phase-averaged state for a phase on mode `a`; sectors add
/// with their weights since they occupy orthogonal subspaces.
pub fn qfi_phase_averaged(state: &IndefinitePhotonState) -> Result<f64> {
    let mut f = 0.0;
    for s in &state.sectors {
        let fn_ = match &s.payload {
            SectorPayload::Pure(p) => 4.0 * number_variance(p.coeffs()),
            SectorPayload::Mixed(m) => {
                let h = CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if i == j { cr(i as f64) } else { cr(0.0) });
                qfi_unitary(m, &h)?
            }
        };
        f += s.weight * fn_;
    }
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PurificationLambda {
    Value(f64),
    Optimal,
}

pub fn optimal_purification_lambda(var_jz: f64, gamma: f64) -> f64 {
    2.0 * (2.0 * gamma).sqrt() * var_jz / (1.0 + 4.0 * gamma * var_jz)
}

/// Upper bound `2λ² + 4(1 - sqrt(2Γ)λ)² Δ²Jz` on the QFI under phase
/// diffusion; the optimal λ gives `4Δ²Jz / (1 + 4ΓΔ²Jz)`.
pub fn phase_diffusion_purification_bound(var_jz: f64, gamma: f64, lambda: PurificationLambda) -> Result<f64> {
    if !(var_jz >= 0.0) || !(gamma >= 0.0) {
        return Err(domain("variance and phase variance must be nonnegative"));
    }
    Ok(match lambda {
        PurificationLambda::Value(l) => {
            let t = 1.0 - (2.0 * gamma).sqrt() * l;
            2.0 * l * l + 4.0 * t * t * var_jz
        }
        PurificationLambda::Optimal => 4.0 * var_jz / (1.0 + 4.0 * gamma * var_jz),
    })
}
