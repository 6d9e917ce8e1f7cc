//! Two-mode Fock space with a fixed total photon number `N`.
//!
//! Basis vectors are `|n, N-n>` ordered by `n`, the photon count in mode
//! `a`, ascending. All matrices in the crate follow this ordering.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::linalg::{c, cr, expm_i_hermitian, CMatrix, CVector};
use crate::numerics::ln_binomial;

pub const NORM_TOL: f64 = 1e-12;

/// Pure state `sum_n c_n |n, N-n>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockStateN {
    coeffs: Vec<Complex64>,
}

impl FockStateN {
    /// Takes coefficients that are already normalised.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(domain("a Fock state needs at least one coefficient"));
        }
        let norm: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(domain(format!("coefficients have squared norm {norm}, expected 1")));
        }
        Ok(FockStateN { coeffs })
    }

    pub fn normalized(coeffs: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if coeffs.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(domain("cannot normalise a zero or non-finite vector"));
        }
        Ok(FockStateN { coeffs: coeffs.into_iter().map(|z| z / norm).collect() })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::normalized(coeffs.iter().map(|&x| cr(x)).collect())
    }

    /// `|n, N-n>`.
    pub fn basis(n_total: usize, n: usize) -> Result<Self> {
        if n > n_total {
            return Err(domain(format!("index {n} exceeds photon number {n_total}")));
        }
        let mut coeffs = alloc::vec![cr(0.0); n_total + 1];
        coeffs[n] = cr(1.0);
        Ok(FockStateN { coeffs })
    }

    pub fn n_total(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.coeffs.iter().map(|z| z.norm()).collect()
    }

    pub fn to_vector(&self) -> CVector {
        CVector::from_column_slice(&self.coeffs)
    }

    pub fn from_vector(v: &CVector) -> Result<Self> {
        Self::new(v.iter().copied().collect())
    }

    pub fn density_matrix(&self) -> CMatrix {
        let v = self.to_vector();
        &v * v.adjoint()
    }

    /// Phase picked up by mode `a`: `c_n -> c_n e^{-i n phi}`.
    pub fn phase_shifted(&self, phi: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, z)| z * Complex64::from_polar(1.0, -(n as f64) * phi))
            .collect();
        FockStateN { coeffs }
    }
}

/// Angular-momentum (Schwinger) representation on the `N`-photon space.
#[derive(Debug, Clone)]
pub struct AngularMomentumRep {
    pub n_total: usize,
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
}

impl AngularMomentumRep {
    pub fn dim(&self) -> usize {
        self.n_total + 1
    }

    /// `j (j + 1)` with `j = N/2`.
    pub fn casimir(&self) -> f64 {
        let j = self.n_total as f64 / 2.0;
        j * (j + 1.0)
    }

    pub fn j_squared(&self) -> CMatrix {
        &self.jx * &self.jx + &self.jy * &self.jy + &self.jz * &self.jz
    }

    pub fn number_a(&self) -> CMatrix {
        CMatrix::from_fn(self.dim(), self.dim(), |i, j| if i == j { cr(i as f64) } else { cr(0.0) })
    }
}

/// `a† b` on the `N`-photon space: `|n, N-n> -> sqrt((n+1)(N-n)) |n+1, N-n-1>`.
fn hop_a_from_b(n_total: usize) -> CMatrix {
    let d = n_total + 1;
    let mut m = CMatrix::zeros(d, d);
    for n in 0..n_total {
        m[(n + 1, n)] = cr((((n + 1) * (n_total - n)) as f64).sqrt());
    }
    m
}

pub fn build_j_operators(n_total: usize) -> AngularMomentumRep {
    let d = n_total + 1;
    let ab = hop_a_from_b(n_total);
    let ba = ab.adjoint();
    let jx = (&ab + &ba).scale(0.5);
    let jy = (&ba - &ab) * c(0.0, 0.5);
    let half = n_total as f64 / 2.0;
    let jz = CMatrix::from_fn(d, d, |i, j| if i == j { cr(i as f64 - half) } else { cr(0.0) });
    AngularMomentumRep { n_total, jx, jy, jz }
}

/// Balanced beam splitter `exp(-i theta Jx)`.
pub fn beam_splitter_unitary(n_total: usize, theta: f64) -> CMatrix {
    expm_i_hermitian(&build_j_operators(n_total).jx, theta)
}

/// `exp(-i phi Jz)`, diagonal.
pub fn phase_unitary(n_total: usize, phi: f64) -> CMatrix {
    let half = n_total as f64 / 2.0;
    CMatrix::from_fn(n_total + 1, n_total + 1, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, -(i as f64 - half) * phi)
        } else {
            cr(0.0)
        }
    })
}

/// Mach–Zehnder transformation: beam splitter, relative phase, inverse
/// beam splitter. Equals `exp(-i phi Jy)`.
pub fn mz_unitary(n_total: usize, phi: f64) -> CMatrix {
    let rep = build_j_operators(n_total);
    let bs_in = expm_i_hermitian(&rep.jx, core::f64::consts::FRAC_PI_2);
    let bs_out = expm_i_hermitian(&rep.jx, -core::f64::consts::FRAC_PI_2);
    bs_out * phase_unitary(n_total, phi) * bs_in
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedState {
    Noon,
    Sine,
    Balanced,
    TwinFock,
}

pub fn make_named_state(kind: NamedState, n_total: usize) -> Result<FockStateN> {
    let d = n_total + 1;
    let coeffs: Vec<f64> = match kind {
        NamedState::Noon => {
            if n_total == 0 {
                return FockStateN::basis(0, 0);
            }
            let mut v = alloc::vec![0.0; d];
            v[0] = core::f64::consts::FRAC_1_SQRT_2;
            v[n_total] = core::f64::consts::FRAC_1_SQRT_2;
            v
        }
        NamedState::Sine => {
            let norm = (2.0 / (n_total as f64 + 2.0)).sqrt();
            (0..d).map(|n| norm * ((n as f64 + 1.0) * PI / (n_total as f64 + 2.0)).sin()).collect()
        }
        NamedState::Balanced => {
            let ln2 = core::f64::consts::LN_2 * n_total as f64;
            (0..d).map(|n| (0.5 * (ln_binomial(n_total, n) - ln2)).exp()).collect()
        }
        NamedState::TwinFock => {
            if !n_total.is_multiple_of(2) {
                return Err(domain("twin Fock state needs an even photon number"));
            }
            return FockStateN::basis(n_total, n_total / 2);
        }
    };
    // closed forms are normalised up to round-off
    FockStateN::from_real(&coeffs)
}

/// Truncated two-mode amplitude grid over `|n_a>|n_b>` with
/// `n_a, n_b <= cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeGrid {
    cutoff: usize,
    amps: Vec<Complex64>,
    discarded_norm: f64,
    allowed_discard: f64,
}

pub const DEFAULT_ALLOWED_DISCARD: f64 = 1e-6;

impl TwoModeGrid {
    /// `amps[n_a * (cutoff + 1) + n_b]`; `discarded_norm` is the squared
    /// norm known to lie outside the grid.
    pub fn new(cutoff: usize, amps: Vec<Complex64>, discarded_norm: f64) -> Result<Self> {
        let side = cutoff + 1;
        if amps.len() != side * side {
            return Err(Error::DimensionMismatch { expected: side * side, found: amps.len() });
        }
        Ok(TwoModeGrid { cutoff, amps, discarded_norm, allowed_discard: DEFAULT_ALLOWED_DISCARD })
    }

    pub fn from_fn(cutoff: usize, discarded_norm: f64, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let side = cutoff + 1;
        let amps = (0..side * side).map(|k| f(k / side, k % side)).collect();
        TwoModeGrid { cutoff, amps, discarded_norm, allowed_discard: DEFAULT_ALLOWED_DISCARD }
    }

    /// Product of two single-mode amplitude lists of equal length.
    pub fn product(a: &[Complex64], discarded_a: f64, b: &[Complex64], discarded_b: f64) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        let discarded = 1.0 - (1.0 - discarded_a) * (1.0 - discarded_b);
        Ok(Self::from_fn(a.len() - 1, discarded, |i, j| a[i] * b[j]))
    }

    /// Accept grids discarding up to `allowed` of the norm.
    pub fn with_allowed_discard(mut self, allowed: f64) -> Self {
        self.allowed_discard = allowed;
        self
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn discarded_norm(&self) -> f64 {
        self.discarded_norm
    }

    pub fn amp(&self, na: usize, nb: usize) -> Complex64 {
        self.amps[na * (self.cutoff + 1) + nb]
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    fn check_truncation(&self) -> Result<()> {
        if self.discarded_norm > self.allowed_discard {
            return Err(Error::Truncation { discarded: self.discarded_norm, allowed: self.allowed_discard });
        }
        Ok(())
    }

    fn sector_amps(&self, n: usize) -> Vec<Complex64> {
        (0..=n)
            .map(|na| {
                let nb = n - na;
                if na <= self.cutoff && nb <= self.cutoff {
                    self.amp(na, nb)
                } else {
                    cr(0.0)
                }
            })
            .collect()
    }
}

/// Project onto total photon number `n`; returns the normalised sector
/// state and its unnormalised weight.
pub fn project_sector(grid: &TwoModeGrid, n: usize) -> Result<(FockStateN, f64)> {
    grid.check_truncation()?;
    if n > grid.cutoff {
        return Err(domain(format!("sector {n} is not fully covered by cutoff {}", grid.cutoff)));
    }
    let amps = grid.sector_amps(n);
    let weight: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    if weight <= f64::MIN_POSITIVE {
        return Err(Error::EmptySector { n });
    }
    Ok((FockStateN::normalized(amps)?, weight))
}

#[derive(Debug, Clone, PartialEq)]
pub enum SectorPayload {
    Pure(FockStateN),
    Mixed(CMatrix),
}

impl SectorPayload {
    pub fn density_matrix(&self) -> CMatrix {
        match self {
            SectorPayload::Pure(s) => s.density_matrix(),
            SectorPayload::Mixed(m) => m.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    pub n: usize,
    pub weight: f64,
    pub payload: SectorPayload,
}

/// Mixture `sum_N p_N rho_N` of states with definite photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct IndefinitePhotonState {
    pub sectors: Vec<Sector>,
    /// Weight of sectors above the cutoff, which the grid covers only in part.
    pub incomplete_weight: f64,
    /// Norm known to be missing from the source grid.
    pub discarded_norm: f64,
}

impl IndefinitePhotonState {
    pub fn total_weight(&self) -> f64 {
        self.sectors.iter().map(|s| s.weight).sum()
    }

    pub fn sector(&self, n: usize) -> Option<&Sector> {
        self.sectors.iter().find(|s| s.n == n)
    }
}

/// Average over a common phase shift of both modes, which removes all
/// coherences between different total photon numbers.
pub fn phase_average(grid: &TwoModeGrid) -> Result<IndefinitePhotonState> {
    grid.check_truncation()?;
    let total = grid.norm_sqr();
    if total <= 0.0 {
        return Err(domain("grid has zero norm"));
    }
    let mut sectors = Vec::new();
    let mut incomplete = 0.0;
    for n in 0..=2 * grid.cutoff {
        let amps = grid.sector_amps(n);
        let w: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>() / total;
        if w <= 0.0 {
            continue;
        }
        if n > grid.cutoff {
            incomplete += w;
        }
        sectors.push(Sector { n, weight: w, payload: SectorPayload::Pure(FockStateN::normalized(amps)?) });
    }
    Ok(IndefinitePhotonState { sectors, incomplete_weight: incomplete, discarded_norm: grid.discarded_norm })
}

/// Flattened grid index of `|n_a, n_b>`.
pub fn grid_index(cutoff: usize, na: usize, nb: usize) -> usize {
    na * (cutoff + 1) + nb
}

/// Phase averaging on a density matrix over the grid: zero every element
/// joining different total photon numbers.
pub fn phase_average_matrix(rho: &CMatrix, cutoff: usize) -> CMatrix {
    let side = cutoff + 1;
    CMatrix::from_fn(rho.nrows(), rho.ncols(), |i, j| {
        if i / side + i % side == j / side + j % side {
            rho[(i, j)]
        } else {
            cr(0.0)
        }
    })
}

/// Embed a phase-averaged state back onto the grid as a density matrix.
pub fn embed_on_grid(state: &IndefinitePhotonState, cutoff: usize) -> CMatrix {
    let side = cutoff + 1;
    let mut rho = CMatrix::zeros(side * side, side * side);
    for s in &state.sectors {
        let block = s.payload.density_matrix();
        for i in 0..=s.n {
            for j in 0..=s.n {
                let (ai, bi) = (i, s.n - i);
                let (aj, bj) = (j, s.n - j);
                if ai.max(bi) <= cutoff && aj.max(bj) <= cutoff {
                    rho[(grid_index(cutoff, ai, bi), grid_index(cutoff, aj, bj))] += block[(i, j)] * s.weight;
                }
            }
        }
    }
    rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, identity, max_abs_diff, phase_aligned_diff, I};

    #[test]
    fn spin_half_is_pauli() {
        let rep = build_j_operators(1);
        // reorder to {|1,0>, |0,1>}
        let p = CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
        let sx = CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(0.5), cr(0.5), cr(0.0)]);
        let sy = CMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.0, -0.5), c(0.0, 0.5), cr(0.0)]);
        let sz = CMatrix::from_row_slice(2, 2, &[cr(0.5), cr(0.0), cr(0.0), cr(-0.5)]);
        assert!(max_abs_diff(&(&p * &rep.jx * &p), &sx) < 1e-15);
        assert!(max_abs_diff(&(&p * &rep.jy * &p), &sy) < 1e-15);
        assert!(max_abs_diff(&(&p * &rep.jz * &p), &sz) < 1e-15);
    }

    #[test]
    fn casimir_n4() {
        let rep = build_j_operators(4);
        assert!(max_abs_diff(&rep.j_squared(), &(identity(5) * cr(6.0))) < 1e-12);
        assert_eq!(rep.casimir(), 6.0);
    }

    #[test]
    fn commutators_up_to_50() {
        for n in [0usize, 1, 2, 7, 20, 50] {
            let rep = build_j_operators(n);
            let tol = 1e-12 * (1.0 + (n * n) as f64);
            assert!(max_abs_diff(&commutator(&rep.jx, &rep.jy), &(&rep.jz * I)) < tol);
            assert!(max_abs_diff(&commutator(&rep.jy, &rep.jz), &(&rep.jx * I)) < tol);
            assert!(max_abs_diff(&commutator(&rep.jz, &rep.jx), &(&rep.jy * I)) < tol);
        }
    }

    #[test]
    fn mz_is_rotation_about_y() {
        for n in [1usize, 3, 6] {
            let rep = build_j_operators(n);
            let phi = 0.83;
            let u = mz_unitary(n, phi);
            let direct = expm_i_hermitian(&rep.jy, phi);
            assert!(phase_aligned_diff(&u, &direct) < 1e-10);
            let out = u.adjoint() * &rep.jz * &u;
            let expected = &rep.jz * cr(phi.cos()) - &rep.jx * cr(phi.sin());
            assert!(max_abs_diff(&out, &expected) < 1e-12);
            assert!(max_abs_diff(&(u.adjoint() * &u), &identity(n + 1)) < 1e-12);
        }
        assert!(max_abs_diff(&mz_unitary(4, 0.0), &identity(5)) < 1e-12);
    }

    #[test]
    fn named_states() {
        let s = make_named_state(NamedState::Sine, 2).unwrap();
        let expected = [0.5, core::f64::consts::FRAC_1_SQRT_2, 0.5];
        for (z, e) in s.coeffs().iter().zip(expected) {
            assert!((z.re - e).abs() < 1e-15 && z.im == 0.0);
        }
        let b = make_named_state(NamedState::Balanced, 2).unwrap();
        for (z, e) in b.coeffs().iter().zip(expected) {
            assert!((z.re - e).abs() < 1e-15);
        }
        assert_eq!(make_named_state(NamedState::Noon, 1).unwrap(), make_named_state(NamedState::Balanced, 1).unwrap());
        assert!(make_named_state(NamedState::TwinFock, 3).is_err());
        assert_eq!(make_named_state(NamedState::TwinFock, 4).unwrap().coeffs()[2], cr(1.0));
    }

    #[test]
    fn vacuum_sector() {
        let grid = TwoModeGrid::from_fn(3, 0.0, |a, b| if a == 0 && b == 0 { cr(1.0) } else { cr(0.0) });
        let (s, w) = project_sector(&grid, 0).unwrap();
        assert_eq!(w, 1.0);
        assert_eq!(s.coeffs(), &[cr(1.0)]);
        assert_eq!(project_sector(&grid, 2), Err(Error::EmptySector { n: 2 }));
    }

    #[test]
    fn truncation_guard() {
        let grid = TwoModeGrid::from_fn(2, 1e-3, |_, _| cr(1.0 / 3.0));
        assert!(matches!(project_sector(&grid, 1), Err(Error::Truncation { .. })));
        assert!(project_sector(&grid.with_allowed_discard(1e-2), 1).is_ok());
    }

    #[test]
    fn definite_number_input_averages_to_itself() {
        let s = make_named_state(NamedState::Sine, 3).unwrap();
        let grid = TwoModeGrid::from_fn(3, 0.0, |a, b| if a + b == 3 { s.coeffs()[a] } else { cr(0.0) });
        let avg = phase_average(&grid).unwrap();
        assert_eq!(avg.sectors.len(), 1);
        assert!((avg.sectors[0].weight - 1.0).abs() < 1e-15);
        match &avg.sectors[0].payload {
            SectorPayload::Pure(p) => assert!((p.to_vector() - s.to_vector()).camax() < 1e-15),
            _ => panic!("expected a pure sector"),
        }
    }
}
