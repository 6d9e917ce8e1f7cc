//! Gaussian states of a few optical modes: covariance matrices, symplectic
//! optics, the pure-state QFI, and Fock expansions of the standard
//! benchmark states.
//!
//! Quadratures are `x = a + a†`, `p = i(a† - a)`, so the vacuum has unit
//! covariance. Vectors are ordered `(x_1, p_1, x_2, p_2, ...)`.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::DVector;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::fock::{
    beam_splitter_unitary, phase_average, FockStateN, IndefinitePhotonState, Sector, SectorPayload, TwoModeGrid,
};
use crate::qfi::qfi_phase_averaged;
use crate::linalg::{c, cr, to_complex, HermitianEigen, RMatrix};
use crate::numerics::ln_factorial;

pub type RVector = DVector<f64>;

const PHYSICAL_TOL: f64 = 1e-10;
const PURITY_TOL: f64 = 1e-8;
/// Largest norm a Fock expansion may leave outside its cutoff.
pub const EXPANSION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: RVector,
    cov: RMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParams {
    pub r: f64,
    pub theta: f64,
    pub alpha: Complex64,
}

impl SqueezeParams {
    pub fn new(r: f64, theta: f64, alpha: Complex64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(domain(format!("squeezing factor {r} must be finite and nonnegative")));
        }
        Ok(SqueezeParams { r, theta, alpha })
    }
}

/// Linear optical elements. The beam splitter always couples modes 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optic {
    BeamSplitter { transmissivity: f64 },
    PhaseShift { phi: f64, mode: usize },
    Squeeze { r: f64, theta: f64, mode: usize },
    Displace { alpha: Complex64, mode: usize },
}

/// `Ω = ⊕ [[0, 1], [-1, 0]]`.
pub fn symplectic_form(modes: usize) -> RMatrix {
    let mut w = RMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    w
}

// real 2x2 block of the complex mode coefficient u + iv
fn complex_block(z: Complex64) -> [[f64; 2]; 2] {
    [[z.re, -z.im], [z.im, z.re]]
}

fn set_block(s: &mut RMatrix, i: usize, j: usize, b: [[f64; 2]; 2]) {
    for (p, row) in b.iter().enumerate() {
        for (q, &v) in row.iter().enumerate() {
            s[(2 * i + p, 2 * j + q)] = v;
        }
    }
}

fn check_mode(mode: usize, modes: usize) -> Result<()> {
    if mode >= modes {
        return Err(domain(format!("mode {mode} out of range for a {modes}-mode state")));
    }
    Ok(())
}

/// Symplectic matrix of a passive or squeezing element. Displacements
/// have none and return the identity.
pub fn optic_symplectic(optic: &Optic, modes: usize) -> Result<RMatrix> {
    let mut s = RMatrix::identity(2 * modes, 2 * modes);
    match *optic {
        Optic::BeamSplitter { transmissivity: t } => {
            if modes < 2 {
                return Err(domain("a beam splitter needs two modes"));
            }
            if !(0.0..=1.0).contains(&t) {
                return Err(domain(format!("transmissivity {t} outside [0, 1]")));
            }
            // a' = √T a - i√(1-T) b,  b' = -i√(1-T) a + √T b
            let (tt, rr) = (t.sqrt(), (1.0 - t).sqrt());
            set_block(&mut s, 0, 0, complex_block(cr(tt)));
            set_block(&mut s, 1, 1, complex_block(cr(tt)));
            set_block(&mut s, 0, 1, complex_block(c(0.0, -rr)));
            set_block(&mut s, 1, 0, complex_block(c(0.0, -rr)));
        }
        Optic::PhaseShift { phi, mode } => {
            check_mode(mode, modes)?;
            set_block(&mut s, mode, mode, complex_block(Complex64::from_polar(1.0, -phi)));
        }
        Optic::Squeeze { r, theta, mode } => {
            check_mode(mode, modes)?;
            if !(r >= 0.0) || !r.is_finite() {
                return Err(domain(format!("squeezing factor {r} must be finite and nonnegative")));
            }
            let (ch, sh) = (r.cosh(), r.sinh());
            let (ct, st) = (theta.cos(), theta.sin());
            set_block(&mut s, mode, mode, [[ch - sh * ct, -sh * st], [-sh * st, ch + sh * ct]]);
        }
        Optic::Displace { mode, .. } => check_mode(mode, modes)?,
    }
    Ok(s)
}

impl GaussianState {
    pub fn new(mean: RVector, cov: RMatrix) -> Result<Self> {
        let dim = cov.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || !cov.is_square() {
            return Err(domain("covariance must be square with even dimension"));
        }
        if mean.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: mean.len() });
        }
        let asym = (&cov - cov.transpose()).amax();
        if asym > PHYSICAL_TOL * (1.0 + cov.amax()) {
            return Err(domain("covariance matrix is not symmetric"));
        }
        let state = GaussianState { mean, cov };
        if !state.is_physical() {
            return Err(domain("covariance violates the uncertainty relation"));
        }
        Ok(state)
    }

    pub fn vacuum(modes: usize) -> Self {
        GaussianState { mean: RVector::zeros(2 * modes), cov: RMatrix::identity(2 * modes, 2 * modes) }
    }

    /// Product of coherent states, one amplitude per mode.
    pub fn coherent(alphas: &[Complex64]) -> Self {
        let mut s = Self::vacuum(alphas.len());
        for (k, a) in alphas.iter().enumerate() {
            s.mean[2 * k] = 2.0 * a.re;
            s.mean[2 * k + 1] = 2.0 * a.im;
        }
        s
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &RVector {
        &self.mean
    }

    pub fn cov(&self) -> &RMatrix {
        &self.cov
    }

    pub fn apply(&self, optic: &Optic) -> Result<Self> {
        apply_optic(self, optic)
    }

    /// `σ + iΩ ⪰ 0` up to round-off.
    pub fn is_physical(&self) -> bool {
        let m = to_complex(&self.cov) + to_complex(&symplectic_form(self.modes())) * c(0.0, 1.0);
        HermitianEigen::new(&m).min() >= -PHYSICAL_TOL * (1.0 + self.cov.amax())
    }

    /// Pure states satisfy `σ Ω σ = Ω`.
    pub fn is_pure(&self) -> bool {
        let w = symplectic_form(self.modes());
        let diff = (&self.cov * &w * &self.cov - &w).amax();
        diff <= PURITY_TOL * (1.0 + self.cov.amax()).powi(2)
    }
}

pub fn apply_optic(state: &GaussianState, optic: &Optic) -> Result<GaussianState> {
    let modes = state.modes();
    if let Optic::Displace { alpha, mode } = *optic {
        check_mode(mode, modes)?;
        let mut out = state.clone();
        out.mean[2 * mode] += 2.0 * alpha.re;
        out.mean[2 * mode + 1] += 2.0 * alpha.im;
        return Ok(out);
    }
    let s = optic_symplectic(optic, modes)?;
    Ok(GaussianState { mean: &s * &state.mean, cov: &s * &state.cov * s.transpose() })
}

pub fn mean_photon_number(state: &GaussianState) -> f64 {
    (0..state.modes())
        .map(|k| {
            let (x, p) = (state.mean[2 * k], state.mean[2 * k + 1]);
            let tr = state.cov[(2 * k, 2 * k)] + state.cov[(2 * k + 1, 2 * k + 1)];
            (x * x + p * p) / 4.0 + (tr - 2.0) / 4.0
        })
        .sum()
}

/// A state together with its derivative along a phase parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFamily {
    pub state: GaussianState,
    pub dmean: RVector,
    pub dcov: RMatrix,
}

/// Derivatives for the phase `exp(-iφ Σ w_k n_k)`.
pub fn phase_family(state: &GaussianState, weights: &[f64]) -> Result<PhaseFamily> {
    if weights.len() != state.modes() {
        return Err(Error::DimensionMismatch { expected: state.modes(), found: weights.len() });
    }
    let mut g = RMatrix::zeros(2 * weights.len(), 2 * weights.len());
    for (k, &w) in weights.iter().enumerate() {
        g[(2 * k, 2 * k + 1)] = w;
        g[(2 * k + 1, 2 * k)] = -w;
    }
    let dmean = &g * &state.mean;
    let gs = &g * &state.cov;
    let dcov = &gs + gs.transpose();
    Ok(PhaseFamily { state: state.clone(), dmean, dcov })
}

/// `dμᵀ σ⁻¹ dμ + ¼ tr((σ̇ σ⁻¹)²)` for a pure Gaussian family.
pub fn gaussian_pure_qfi(family: &PhaseFamily) -> Result<f64> {
    let st = &family.state;
    if !st.is_pure() {
        return Err(domain("Gaussian QFI formula needs a pure state"));
    }
    let inv = st
        .cov
        .clone()
        .cholesky()
        .ok_or_else(|| domain("covariance matrix is singular"))?
        .inverse();
    let lin = family.dmean.dot(&(&inv * &family.dmean));
    let m = &family.dcov * &inv;
    let quad = (&m * &m).trace() / 4.0;
    Ok(lin + quad)
}

/// `|α>|r>` (α real, squeezing angle 0) after a balanced beam splitter.
pub fn coherent_squeezed_state(alpha: f64, r: f64) -> Result<GaussianState> {
    GaussianState::coherent(&[cr(alpha), cr(0.0)])
        .apply(&Optic::Squeeze { r, theta: 0.0, mode: 1 })?
        .apply(&Optic::BeamSplitter { transmissivity: 0.5 })
}

/// Squeezed vacua in both modes with opposite squeezing angles, after a
/// balanced beam splitter.
pub fn twin_squeezed_state(r: f64) -> Result<GaussianState> {
    GaussianState::vacuum(2)
        .apply(&Optic::Squeeze { r, theta: 0.0, mode: 0 })?
        .apply(&Optic::Squeeze { r, theta: core::f64::consts::PI, mode: 1 })?
        .apply(&Optic::BeamSplitter { transmissivity: 0.5 })
}

/// Interferometer generator `(n_a - n_b)/2`.
pub const MZ_WEIGHTS: [f64; 2] = [0.5, -0.5];

pub fn coherent_squeezed_qfi(alpha: f64, r: f64) -> Result<f64> {
    gaussian_pure_qfi(&phase_family(&coherent_squeezed_state(alpha, r)?, &MZ_WEIGHTS)?)
}

pub fn coherent_squeezed_qfi_closed(alpha: f64, r: f64) -> f64 {
    alpha * alpha * (2.0 * r).exp() + r.sinh().powi(2)
}

/// Precision `1/√F` of the twin-squeezed scheme with total mean photon
/// number `n_mean`, from the covariance formalism.
pub fn twin_squeezed_precision(n_mean: f64) -> Result<f64> {
    if !(n_mean > 0.0) || !n_mean.is_finite() {
        return Err(domain(format!("mean photon number {n_mean} must be positive")));
    }
    let r = (n_mean / 2.0).sqrt().asinh();
    let f = gaussian_pure_qfi(&phase_family(&twin_squeezed_state(r)?, &MZ_WEIGHTS)?)?;
    Ok(1.0 / f.sqrt())
}

pub fn twin_squeezed_bound(n_mean: f64) -> f64 {
    1.0 / (n_mean * (n_mean + 2.0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FockKind {
    Coherent { alpha: Complex64 },
    SqueezedVacuum { r: f64, theta: f64 },
    /// Two-mode squeezed vacuum, amplitudes on `|n, n>` only.
    TwinBeam { xi: f64, theta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum FockExpansion {
    SingleMode { amps: Vec<Complex64>, discarded: f64 },
    TwoMode(TwoModeGrid),
}

impl FockExpansion {
    pub fn discarded(&self) -> f64 {
        match self {
            FockExpansion::SingleMode { discarded, .. } => *discarded,
            FockExpansion::TwoMode(g) => g.discarded_norm(),
        }
    }
}

fn single_mode_amps(kind: &FockKind, cutoff: usize) -> Result<Vec<Complex64>> {
    match *kind {
        FockKind::Coherent { alpha } => {
            let (mag, arg) = (alpha.norm(), alpha.arg());
            Ok((0..=cutoff)
                .map(|n| {
                    if mag == 0.0 {
                        return cr(if n == 0 { 1.0 } else { 0.0 });
                    }
                    let ln = -mag * mag / 2.0 + n as f64 * mag.ln() - ln_factorial(n) / 2.0;
                    Complex64::from_polar(ln.exp(), n as f64 * arg)
                })
                .collect())
        }
        FockKind::SqueezedVacuum { r, theta } => {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(domain(format!("squeezing factor {r} must be finite and nonnegative")));
            }
            let t = r.tanh();
            Ok((0..=cutoff)
                .map(|n| {
                    if n % 2 == 1 {
                        return cr(0.0);
                    }
                    let k = n / 2;
                    if t == 0.0 {
                        return cr(if k == 0 { 1.0 } else { 0.0 });
                    }
                    let ln = ln_factorial(n) / 2.0 - k as f64 * 2.0.ln() - ln_factorial(k) + k as f64 * t.ln()
                        - r.cosh().ln() / 2.0;
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    Complex64::from_polar(sign * ln.exp(), k as f64 * theta)
                })
                .collect())
        }
        FockKind::TwinBeam { .. } => Err(domain("twin beam is a two-mode state")),
    }
}

/// Truncated Fock amplitudes of a benchmark state on `0..=cutoff` photons
/// per mode.
pub fn fock_expansion(kind: &FockKind, cutoff: usize) -> Result<FockExpansion> {
    let expansion = match *kind {
        FockKind::TwinBeam { xi, theta } => {
            if !(xi >= 0.0) || !xi.is_finite() {
                return Err(domain(format!("squeezing factor {xi} must be finite and nonnegative")));
            }
            let (t, ch) = (xi.tanh(), xi.cosh());
            let diag: Vec<Complex64> = (0..=cutoff)
                .map(|n| {
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    Complex64::from_polar(sign * t.powi(n as i32) / ch, n as f64 * theta)
                })
                .collect();
            let kept: f64 = diag.iter().map(|z| z.norm_sqr()).sum();
            let grid = TwoModeGrid::from_fn(cutoff, (1.0 - kept).max(0.0), |i, j| if i == j { diag[i] } else { cr(0.0) });
            FockExpansion::TwoMode(grid)
        }
        _ => {
            let amps = single_mode_amps(kind, cutoff)?;
            let kept: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
            FockExpansion::SingleMode { amps, discarded: (1.0 - kept).max(0.0) }
        }
    };
    let discarded = expansion.discarded();
    if discarded >= EXPANSION_TOL {
        return Err(Error::Truncation { discarded, allowed: EXPANSION_TOL });
    }
    Ok(expansion)
}

/// Smallest cutoff whose expansion is accepted, searched up to `max`.
pub fn minimal_cutoff(kind: &FockKind, max: usize) -> Result<usize> {
    let mut last = Error::Numeric(format!("no cutoff up to {max} tried"));
    for cutoff in 0..=max {
        match fock_expansion(kind, cutoff) {
            Ok(_) => return Ok(cutoff),
            Err(e @ Error::Truncation { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Sectors lighter than this are left out of the Fock-side QFI.
const SECTOR_SKIP: f64 = 1e-13;

/// The coherent+squeezed benchmark QFI computed without Gaussian
/// machinery: truncate both inputs in Fock space, phase-average into
/// definite photon-number sectors, send each sector through the balanced
/// beam splitter and add the sector QFIs.
pub fn coherent_squeezed_fock_qfi(alpha: f64, r: f64) -> Result<f64> {
    let coh = FockKind::Coherent { alpha: cr(alpha) };
    let sq = FockKind::SqueezedVacuum { r, theta: 0.0 };
    let cutoff = minimal_cutoff(&coh, 600)?.max(minimal_cutoff(&sq, 600)?);
    let (FockExpansion::SingleMode { amps: a, discarded: da }, FockExpansion::SingleMode { amps: b, discarded: db }) =
        (fock_expansion(&coh, cutoff)?, fock_expansion(&sq, cutoff)?)
    else {
        return Err(Error::Numeric("single-mode expansion expected".into()));
    };
    let grid = TwoModeGrid::product(&a, da, &b, db)?;
    let averaged = phase_average(&grid)?;
    let mut sectors = Vec::new();
    for s in averaged.sectors.iter().filter(|s| s.weight > SECTOR_SKIP) {
        let SectorPayload::Pure(psi) = &s.payload else {
            return Err(Error::Numeric("phase averaging of a pure grid gave a mixed sector".into()));
        };
        let u = beam_splitter_unitary(s.n, core::f64::consts::FRAC_PI_2);
        let out = FockStateN::normalized((u * psi.to_vector()).iter().copied().collect())?;
        sectors.push(Sector { n: s.n, weight: s.weight, payload: SectorPayload::Pure(out) });
    }
    let split = IndefinitePhotonState { sectors, ..averaged };
    qfi_phase_averaged(&split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn squeezing_on_vacuum_gives_diagonal_covariance() {
        let r = 0.7;
        let s = GaussianState::vacuum(1).apply(&Optic::Squeeze { r, theta: 0.0, mode: 0 }).unwrap();
        assert_relative_eq!(s.cov()[(0, 0)], (-2.0 * r).exp(), epsilon = 1e-14);
        assert_relative_eq!(s.cov()[(1, 1)], (2.0 * r).exp(), epsilon = 1e-12);
        assert_relative_eq!(mean_photon_number(&s), r.sinh().powi(2), epsilon = 1e-12);
        assert!(s.is_pure());
    }

    #[test]
    fn coherent_photon_number() {
        let s = GaussianState::coherent(&[c(1.0, 2.0)]);
        assert_relative_eq!(mean_photon_number(&s), 5.0, epsilon = 1e-14);
    }

    #[test]
    fn balanced_splitter_on_equal_coherent_states() {
        let a = c(1.5, 0.0);
        let s = GaussianState::coherent(&[a, a]).apply(&Optic::BeamSplitter { transmissivity: 0.5 }).unwrap();
        // both outputs carry amplitude α(1 - i)/√2
        let out = a * c(1.0, -1.0) / 2.0.sqrt();
        for k in 0..2 {
            assert_relative_eq!(s.mean()[2 * k], 2.0 * out.re, epsilon = 1e-12);
            assert_relative_eq!(s.mean()[2 * k + 1], 2.0 * out.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn coherent_qfi_is_shot_noise() {
        let s = GaussianState::coherent(&[c(1.3, 0.4)]);
        let f = gaussian_pure_qfi(&phase_family(&s, &[1.0]).unwrap()).unwrap();
        assert_relative_eq!(f, 4.0 * c(1.3, 0.4).norm_sqr(), epsilon = 1e-12);
        assert_relative_eq!(coherent_squeezed_qfi(2.0, 0.0).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn benchmarks_match_closed_forms() {
        for &(a, r) in &[(1.0, 0.5), (2.0, 1.0), (0.3, 0.2)] {
            assert_relative_eq!(coherent_squeezed_qfi(a, r).unwrap(), coherent_squeezed_qfi_closed(a, r), epsilon = 1e-10);
        }
        for &n in &[0.5, 4.0, 30.0] {
            assert_relative_eq!(twin_squeezed_precision(n).unwrap(), twin_squeezed_bound(n), epsilon = 1e-12);
        }
    }

    #[test]
    fn fock_side_agrees() {
        let (a, r) = (1.2, 0.4);
        let f = coherent_squeezed_fock_qfi(a, r).unwrap();
        assert_relative_eq!(f, coherent_squeezed_qfi_closed(a, r), max_relative = 1e-8);
    }

    #[test]
    fn bad_mode_is_rejected() {
        let s = GaussianState::vacuum(1);
        assert!(s.apply(&Optic::PhaseShift { phi: 0.1, mode: 1 }).is_err());
        assert!(s.apply(&Optic::BeamSplitter { transmissivity: 0.5 }).is_err());
    }

    #[test]
    fn expansions() {
        let FockExpansion::SingleMode { amps, .. } = fock_expansion(&FockKind::Coherent { alpha: cr(1.0) }, 20).unwrap()
        else {
            panic!()
        };
        let mut fact = 1.0;
        for (n, z) in amps.iter().enumerate().take(8) {
            if n > 0 {
                fact *= n as f64;
            }
            assert_relative_eq!(z.re, (-0.5f64).exp() / fact.sqrt(), epsilon = 1e-14);
        }
        let FockExpansion::SingleMode { amps, .. } =
            fock_expansion(&FockKind::SqueezedVacuum { r: 0.5, theta: 0.0 }, 60).unwrap()
        else {
            panic!()
        };
        assert_eq!(amps[1], cr(0.0));
        assert_eq!(amps[3], cr(0.0));
        assert_relative_eq!(amps[2].re, -(0.5f64.tanh()) / 2.0.sqrt() / 0.5f64.cosh().sqrt(), epsilon = 1e-14);
        assert!(matches!(
            fock_expansion(&FockKind::Coherent { alpha: cr(3.0) }, 5),
            Err(Error::Truncation { .. })
        ));
        let FockExpansion::TwoMode(g) = fock_expansion(&FockKind::TwinBeam { xi: 0.4, theta: 0.0 }, 60).unwrap() else {
            panic!()
        };
        assert_relative_eq!(g.norm_sqr(), 1.0, epsilon = 1e-12);
    }
}
