//! Error propagation for a Mach–Zehnder interferometer read out by the
//! photon-number difference `J_z`, with and without decoherence, plus the
//! Fabry–Pérot and Michelson phase maps.

use alloc::format;
use core::f64::consts::FRAC_PI_2;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::fock::{build_j_operators, FockStateN};
use crate::linalg::CMatrix;
use crate::numerics::golden_section;

/// First and second moments of the input state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputMoments {
    pub jx: f64,
    pub jz: f64,
    pub var_jx: f64,
    pub var_jz: f64,
    /// Symmetrised covariance of `J_x` and `J_z`.
    pub cov: f64,
    pub n_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputKind {
    /// `|α>|0>`.
    CoherentVacuum { alpha: f64 },
    /// `|N, 0>`.
    Fock { n: usize },
    /// `|α>|r>`, α real, squeezing angle 0.
    CoherentSqueezed { alpha: f64, r: f64 },
    /// `(|j, 0> + |j, 1>)/√2` in the `J_z` basis, `j = N/2`, `N` even.
    HalfNoonLike { n: usize },
}

pub fn input_moments(kind: InputKind) -> Result<InputMoments> {
    Ok(match kind {
        InputKind::CoherentVacuum { alpha } => {
            let n = alpha * alpha;
            InputMoments { jx: 0.0, jz: n / 2.0, var_jx: n / 4.0, var_jz: n / 4.0, cov: 0.0, n_mean: n }
        }
        InputKind::Fock { n } => {
            let n = n as f64;
            InputMoments { jx: 0.0, jz: n / 2.0, var_jx: n / 4.0, var_jz: 0.0, cov: 0.0, n_mean: n }
        }
        InputKind::CoherentSqueezed { alpha, r } => {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(domain(format!("squeezing factor {r} must be finite and nonnegative")));
            }
            let (a2, s2) = (alpha * alpha, r.sinh().powi(2));
            let sh2 = (2.0 * r).sinh();
            InputMoments {
                jx: 0.0,
                jz: (a2 - s2) / 2.0,
                var_jx: (a2 * (2.0 * r).cosh() - a2 * sh2 + s2) / 4.0,
                var_jz: (a2 + sh2 * sh2 / 2.0) / 4.0,
                cov: 0.0,
                n_mean: a2 + s2,
            }
        }
        InputKind::HalfNoonLike { n } => {
            if n == 0 || n % 2 != 0 {
                return Err(domain(format!("half-NOON input needs an even positive N, got {n}")));
            }
            let j = n as f64 / 2.0;
            let jj = j * (j + 1.0);
            InputMoments { jx: jj.sqrt() / 2.0, jz: 0.5, var_jx: (jj - 1.0) / 4.0, var_jz: 0.25, cov: 0.0, n_mean: n as f64 }
        }
    })
}

fn expect(psi: &nalgebra::DVector<num_complex::Complex64>, op: &CMatrix) -> f64 {
    psi.dotc(&(op * psi)).re
}

impl InputMoments {
    /// Moments of a definite-photon-number input, computed from its
    /// angular-momentum representation.
    pub fn from_state(state: &FockStateN) -> Self {
        let rep = build_j_operators(state.n_total());
        let psi = state.to_vector();
        let (jx, jz) = (expect(&psi, &rep.jx), expect(&psi, &rep.jz));
        let sym = (&rep.jx * &rep.jz + &rep.jz * &rep.jx) * num_complex::Complex64::new(0.5, 0.0);
        InputMoments {
            jx,
            jz,
            var_jx: expect(&psi, &(&rep.jx * &rep.jx)) - jx * jx,
            var_jz: expect(&psi, &(&rep.jz * &rep.jz)) - jz * jz,
            cov: expect(&psi, &sym) - jx * jz,
            n_mean: state.n_total() as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecoherencePenalty {
    None,
    Loss { eta: f64 },
    Dephasing { eta: f64 },
}

impl DecoherencePenalty {
    pub fn validate(self) -> Result<Self> {
        match self {
            DecoherencePenalty::None => Ok(self),
            DecoherencePenalty::Loss { eta } | DecoherencePenalty::Dephasing { eta } => {
                if eta > 0.0 && eta <= 1.0 {
                    Ok(self)
                } else {
                    Err(domain(format!("η = {eta} outside (0, 1]")))
                }
            }
        }
    }

    pub fn eta(self) -> f64 {
        match self {
            DecoherencePenalty::None => 1.0,
            DecoherencePenalty::Loss { eta } | DecoherencePenalty::Dephasing { eta } => eta,
        }
    }

    /// Extra noise per photon, in units of the ideal signal.
    pub fn f(self) -> f64 {
        match self {
            DecoherencePenalty::None => 0.0,
            DecoherencePenalty::Loss { eta } => (1.0 - eta) / eta,
            DecoherencePenalty::Dephasing { eta } => (1.0 - eta * eta) / (eta * eta),
        }
    }
}

/// `ΔJ_z / |d<J_z>/dφ|` at the output.
pub fn precision(m: &InputMoments, phi: f64, penalty: DecoherencePenalty) -> Result<f64> {
    let penalty = penalty.validate()?;
    let (eta, f) = (penalty.eta(), penalty.f());
    let (s, c) = (phi.sin(), phi.cos());
    let slope = eta * (-s * m.jz - c * m.jx);
    let var = eta * eta * (f * m.n_mean / 4.0 + c * c * m.var_jz + s * s * m.var_jx - 2.0 * s * c * m.cov);
    let scale = eta * (m.jz.abs() + m.jx.abs()).max(f64::MIN_POSITIVE);
    if slope.abs() <= 1e-12 * scale {
        return Err(Error::DivergingPrecision);
    }
    Ok(var.max(0.0).sqrt() / slope.abs())
}

/// Closed form for `|α>|r>` with α real.
pub fn coherent_squeezed_precision(alpha: f64, r: f64, phi: f64, penalty: DecoherencePenalty) -> Result<f64> {
    let penalty = penalty.validate()?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(domain(format!("squeezing factor {r} must be finite and nonnegative")));
    }
    let (a2, s2) = (alpha * alpha, r.sinh().powi(2));
    let signal = (a2 - s2).abs();
    let (sn, cs) = (phi.sin(), phi.cos());
    if signal <= 1e-12 * (a2 + s2) || sn.abs() < 1e-300 {
        return Err(Error::DivergingPrecision);
    }
    let cot2 = (cs / sn).powi(2);
    let num = cot2 * (a2 + (2.0 * r).sinh().powi(2) / 2.0)
        + a2 * (-2.0 * r).exp()
        + s2
        + penalty.f() * (a2 + s2) / (sn * sn);
    Ok(num.sqrt() / signal)
}

/// Large-`N̄` limit at `φ = π/2`: `√(e^{-2r} + f) / √N̄`.
pub fn coherent_squeezed_asymptote(r: f64, n_mean: f64, penalty: DecoherencePenalty) -> Result<f64> {
    let penalty = penalty.validate()?;
    if !(n_mean > 0.0) {
        return Err(domain(format!("mean photon number {n_mean} must be positive")));
    }
    Ok(((-2.0 * r).exp() + penalty.f()).sqrt() / n_mean.sqrt())
}

/// Best split of `n_mean` between coherent and squeezed light for the
/// ideal scheme at `φ = π/2`; returns `(sinh²r, Δφ)`.
pub fn optimal_split_ideal(n_mean: f64) -> Result<(f64, f64)> {
    if !(n_mean > 0.0) || !n_mean.is_finite() {
        return Err(domain(format!("mean photon number {n_mean} must be positive")));
    }
    let cost = |s2: f64| {
        let r = s2.max(0.0).sqrt().asinh();
        let alpha = (n_mean - s2).max(0.0).sqrt();
        coherent_squeezed_precision(alpha, r, FRAC_PI_2, DecoherencePenalty::None).unwrap_or(f64::INFINITY)
    };
    // the optimum sits near √N̄/2, well below N̄/2 where the signal vanishes
    let guess = n_mean.sqrt() / 2.0;
    let hi = (4.0 * guess).min(n_mean / 2.0 * 0.999);
    let (s2, val) = golden_section(cost, 0.0, hi, 1e-12 * (1.0 + hi));
    Ok((s2, val))
}

/// Best split of `n_mean` under a decoherence penalty, at `φ = π/2`;
/// returns `(sinh²r, Δφ)`. A log-spaced scan locates the basin before the
/// golden-section refinement.
pub fn optimal_split(n_mean: f64, penalty: DecoherencePenalty) -> Result<(f64, f64)> {
    let penalty = penalty.validate()?;
    if !(n_mean > 0.0) || !n_mean.is_finite() {
        return Err(domain(format!("mean photon number {n_mean} must be positive")));
    }
    let cost = |s2: f64| {
        let r = s2.max(0.0).sqrt().asinh();
        let alpha = (n_mean - s2).max(0.0).sqrt();
        coherent_squeezed_precision(alpha, r, FRAC_PI_2, penalty).unwrap_or(f64::INFINITY)
    };
    let hi = n_mean / 2.0 * 0.999;
    let points = 400;
    let grid = |k: usize| if k == 0 { 0.0 } else { hi * (1e-9f64).powf(1.0 - k as f64 / points as f64) };
    let mut best = (0, cost(0.0));
    for k in 1..=points {
        let v = cost(grid(k));
        if v < best.1 {
            best = (k, v);
        }
    }
    let lo = grid(best.0.saturating_sub(1));
    let up = grid((best.0 + 1).min(points));
    let (s2, val) = golden_section(cost, lo, up, 1e-12 * (1.0 + up));
    Ok(if val <= best.1 { (s2, val) } else { (grid(best.0), best.1) })
}

/// Effective phase and conversion factor `Δθ/Δφ` of a Fabry–Pérot cavity
/// with mirror transmission `t` and one-way phase `theta`.
pub fn fabry_perot_map(t: f64, theta: f64) -> Result<(f64, f64)> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(domain(format!("mirror transmission {t} outside (0, 1]")));
    }
    let d = t * t + 4.0 * (1.0 - t) * theta.sin().powi(2);
    let phi = 2.0 * (t / d.sqrt()).min(1.0).asin();
    let denom = 4.0 * t * (1.0 - t).sqrt() * theta.cos();
    if denom.abs() < 1e-15 {
        return Err(Error::DivergingConversion);
    }
    Ok((phi, d / denom))
}

/// Light crosses each Michelson arm twice.
pub fn michelson_phase(phi_a: f64, phi_b: f64) -> f64 {
    2.0 * (phi_b - phi_a)
}
