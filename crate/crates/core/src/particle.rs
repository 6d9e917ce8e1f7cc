//! Distinguishable-particle picture: `N` photons as `N` qudits.
//!
//! Local basis `|a>, |b>` (and `|vac>` after loss). Particle 1 is the most
//! significant digit of the flat index. Everything here is dense and
//! exponential in `N`; it exists to cross-check the mode picture.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::KrausChannel;
use crate::error::{domain, Error, Result};
use crate::fock::FockStateN;
use crate::linalg::{cr, expm_i_hermitian, is_hermitian, max_abs, max_abs_diff, trace, CMatrix, CVector, I};
use crate::numerics::{ln_binomial, nelder_mead_restarted, NelderMeadOptions};
use crate::qfi::qfi_mixed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParticleCaps {
    pub qubit: usize,
    pub qutrit: usize,
}

impl Default for ParticleCaps {
    fn default() -> Self {
        ParticleCaps { qubit: 10, qutrit: 6 }
    }
}

impl ParticleCaps {
    pub fn cap(&self, d: usize) -> usize {
        if d <= 2 {
            self.qubit
        } else {
            self.qutrit
        }
    }

    fn check(&self, what: &'static str, n: usize, d: usize) -> Result<()> {
        let cap = self.cap(d);
        if n > cap {
            return Err(Error::ResourceLimit { what, requested: n, cap });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub n: usize,
    pub d: usize,
    pub rho: CMatrix,
}

const STATE_TOL: f64 = 1e-10;

impl ParticleState {
    pub fn new(n: usize, d: usize, rho: CMatrix) -> Result<Self> {
        let dim = d.pow(n as u32);
        if rho.nrows() != dim || !rho.is_square() {
            return Err(Error::DimensionMismatch { expected: dim, found: rho.nrows() });
        }
        if !is_hermitian(&rho, STATE_TOL) || (trace(&rho).re - 1.0).abs() > STATE_TOL {
            return Err(domain("particle state must be Hermitian with unit trace"));
        }
        Ok(ParticleState { n, d, rho })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    /// Largest deviation from invariance under the swap of particles `k`
    /// and `k + 1`, over all `k`.
    pub fn permutation_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.n.saturating_sub(1) {
            let perm = swap_permutation(self.n, self.d, k);
            let swapped = CMatrix::from_fn(self.dim(), self.dim(), |i, j| self.rho[(perm[i], perm[j])]);
            worst = worst.max(max_abs_diff(&swapped, &self.rho));
        }
        worst
    }

    pub fn is_permutation_symmetric(&self, tol: f64) -> bool {
        self.permutation_asymmetry() <= tol
    }
}

fn digits(mut idx: usize, n: usize, d: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = idx % d;
        idx /= d;
    }
    out
}

fn undigits(ds: &[usize], d: usize) -> usize {
    ds.iter().fold(0, |acc, &x| acc * d + x)
}

fn swap_permutation(n: usize, d: usize, k: usize) -> Vec<usize> {
    (0..d.pow(n as u32))
        .map(|idx| {
            let mut ds = digits(idx, n, d);
            ds.swap(k, k + 1);
            undigits(&ds, d)
        })
        .collect()
}

/// Symmetrised state vector: each `|n, N-n>` becomes the normalised sum of
/// all arrangements of `n` particles in `a` and `N - n` in `b`.
pub fn symmetrized_vector(state: &FockStateN, caps: &ParticleCaps) -> Result<CVector> {
    let n = state.n_total();
    caps.check("symmetrize", n, 2)?;
    let dim = 1usize << n;
    let mut v = CVector::zeros(dim);
    for idx in 0..dim {
        // bit 1 marks mode b
        let in_b = idx.count_ones() as usize;
        let in_a = n - in_b;
        let norm = (-0.5 * ln_binomial(n, in_a)).exp();
        v[idx] = state.coeffs()[in_a] * norm;
    }
    Ok(v)
}

pub fn symmetrize(state: &FockStateN, caps: &ParticleCaps) -> Result<ParticleState> {
    let v = symmetrized_vector(state, caps)?;
    Ok(ParticleState { n: state.n_total(), d: 2, rho: &v * v.adjoint() })
}

/// Maps each Kraus operator over one site of a matrix whose sites before
/// `site` already have dimension `d_out` and the rest `d_in`.
fn apply_site(ops: &[CMatrix], m: &CMatrix, n: usize, site: usize) -> CMatrix {
    let (d_out, d_in) = (ops[0].nrows(), ops[0].ncols());
    let left = d_out.pow(site as u32);
    let right = d_in.pow((n - site - 1) as u32);
    let dim_in = left * d_in * right;
    let dim_out = left * d_out * right;
    debug_assert_eq!(m.nrows(), dim_in);
    let idx_in = |l: usize, s: usize, r: usize| (l * d_in + s) * right + r;
    let idx_out = |l: usize, t: usize, r: usize| (l * d_out + t) * right + r;
    let mut out = CMatrix::zeros(dim_out, dim_out);
    for k in ops {
        // rows first: tmp = (I ⊗ K ⊗ I) m
        let mut tmp = CMatrix::zeros(dim_out, dim_in);
        for l in 0..left {
            for r in 0..right {
                for t in 0..d_out {
                    let row = idx_out(l, t, r);
                    for s in 0..d_in {
                        let kv = k[(t, s)];
                        if kv == cr(0.0) {
                            continue;
                        }
                        let src = idx_in(l, s, r);
                        for col in 0..dim_in {
                            tmp[(row, col)] += kv * m[(src, col)];
                        }
                    }
                }
            }
        }
        // then columns: out += tmp (I ⊗ K ⊗ I)†
        for l in 0..left {
            for r in 0..right {
                for t in 0..d_out {
                    let col = idx_out(l, t, r);
                    for s in 0..d_in {
                        let kv = k[(t, s)].conj();
                        if kv == cr(0.0) {
                            continue;
                        }
                        let src = idx_in(l, s, r);
                        for row in 0..dim_out {
                            out[(row, col)] += tmp[(row, src)] * kv;
                        }
                    }
                }
            }
        }
    }
    out
}

/// `Λ^{⊗N}(m)` for any operator `m` on the `N`-particle space.
pub fn apply_iid_matrix(channel: &KrausChannel, m: &CMatrix, n: usize, caps: &ParticleCaps) -> Result<CMatrix> {
    let (d_in, d_out) = (channel.input_dim(), channel.output_dim());
    caps.check("apply_iid", n, d_in.max(d_out))?;
    let dim = d_in.pow(n as u32);
    if m.nrows() != dim || !m.is_square() {
        return Err(Error::DimensionMismatch { expected: dim, found: m.nrows() });
    }
    let mut cur = m.clone();
    for site in 0..n {
        cur = apply_site(channel.ops(), &cur, n, site);
    }
    Ok(cur)
}

pub fn apply_iid(channel: &KrausChannel, state: &ParticleState, caps: &ParticleCaps) -> Result<ParticleState> {
    if channel.input_dim() != state.d {
        return Err(Error::DimensionMismatch { expected: state.d, found: channel.input_dim() });
    }
    let rho = apply_iid_matrix(channel, &state.rho, state.n, caps)?;
    Ok(ParticleState { n: state.n, d: channel.output_dim(), rho })
}

/// `Σ_k G_k` with `g` acting on site `k`.
pub fn collective_generator(g: &CMatrix, n: usize) -> CMatrix {
    let d = g.nrows();
    let dim = d.pow(n as u32);
    let mut out = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let ds = digits(idx, n, d);
        for k in 0..n {
            for t in 0..d {
                let v = g[(t, ds[k])];
                if v == cr(0.0) {
                    continue;
                }
                let mut es = ds.clone();
                es[k] = t;
                out[(undigits(&es, d), idx)] += v;
            }
        }
    }
    out
}

/// Output state and its phase derivative for `Λ^{⊗N}(U_φ^{⊗N} ρ U_φ^{⊗N†})`
/// with `U_φ = exp(-iφ g)`.
pub fn phase_family(
    input: &ParticleState,
    g: &CMatrix,
    channel: &KrausChannel,
    phi: f64,
    caps: &ParticleCaps,
) -> Result<(ParticleState, CMatrix)> {
    if g.nrows() != input.d {
        return Err(Error::DimensionMismatch { expected: input.d, found: g.nrows() });
    }
    let u = expm_i_hermitian(g, phi);
    let unitary = KrausChannel::new(vec![u])?;
    let rho_u = apply_iid_matrix(&unitary, &input.rho, input.n, caps)?;
    let big_g = collective_generator(g, input.n);
    let drho_u = (&big_g * &rho_u - &rho_u * &big_g) * (-I);
    let out = apply_iid_matrix(channel, &rho_u, input.n, caps)?;
    let dout = apply_iid_matrix(channel, &drho_u, input.n, caps)?;
    Ok((ParticleState { n: input.n, d: channel.output_dim(), rho: out }, dout))
}

pub fn oracle_qfi(state: &ParticleState, drho: &CMatrix, caps: &ParticleCaps) -> Result<f64> {
    caps.check("oracle_qfi", state.n, state.d)?;
    Ok(qfi_mixed(&state.rho, drho)?.value)
}

/// QFI of a mode-picture input sent through `channel` with phase
/// generator `g` on every particle.
pub fn particle_qfi(
    input: &FockStateN,
    g: &CMatrix,
    channel: &KrausChannel,
    caps: &ParticleCaps,
) -> Result<f64> {
    let sym = symmetrize(input, caps)?;
    let (out, dout) = phase_family(&sym, g, channel, 0.0, caps)?;
    oracle_qfi(&out, &dout, caps)
}

/// `|a><a|`: phase on mode `a` only.
pub fn mode_a_generator() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(0.0)])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexSearch {
    pub resolution: f64,
    pub refine: bool,
}

impl Default for SimplexSearch {
    fn default() -> Self {
        SimplexSearch { resolution: 0.02, refine: true }
    }
}

fn compositions(units: usize, parts: usize, prefix: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if parts == 1 {
        prefix.push(units);
        visit(prefix);
        prefix.pop();
        return;
    }
    for k in 0..=units {
        prefix.push(k);
        compositions(units - k, parts - 1, prefix, visit);
        prefix.pop();
    }
}

/// Maximise `objective` over real nonnegative `c_n` with `Σ c_n² = 1`:
/// exhaustive over `p_n = c_n²` on a simplex grid, then Nelder–Mead on
/// the amplitudes from the best grid point.
pub fn simplex_search(
    n_total: usize,
    search: SimplexSearch,
    mut objective: impl FnMut(&FockStateN) -> Result<f64>,
) -> Result<(FockStateN, f64)> {
    if !(search.resolution > 0.0 && search.resolution <= 1.0) {
        return Err(domain("grid resolution must lie in (0, 1]"));
    }
    let units = (1.0 / search.resolution).round() as usize;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut failure = None;
    compositions(units, n_total + 1, &mut Vec::new(), &mut |p| {
        let amps: Vec<f64> = p.iter().map(|&k| (k as f64 / units as f64).sqrt()).collect();
        let state = match FockStateN::from_real(&amps) {
            Ok(s) => s,
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        match objective(&state) {
            Ok(v) => {
                if best.as_ref().is_none_or(|b| v > b.1) {
                    best = Some((amps, v));
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    let (amps, mut value) = match (best, failure) {
        (Some(b), _) => b,
        (None, Some(e)) => return Err(e),
        (None, None) => return Err(Error::Numeric("empty search grid".into())),
    };
    let mut state = FockStateN::from_real(&amps)?;
    if search.refine {
        let opts = NelderMeadOptions { initial_step: search.resolution, tolerance: 1e-12, max_evaluations: 4000 };
        let (x, fx) = nelder_mead_restarted(
            |x: &[f64]| {
                let amps: Vec<f64> = x.iter().map(|v| v.abs()).collect();
                match FockStateN::from_real(&amps) {
                    Ok(s) => objective(&s).map(|v| -v).unwrap_or(f64::INFINITY),
                    Err(_) => f64::INFINITY,
                }
            },
            &amps,
            opts,
            3,
        );
        if -fx > value {
            value = -fx;
            let amps: Vec<f64> = x.iter().map(|v| v.abs()).collect();
            state = FockStateN::from_real(&amps)?;
        }
    }
    Ok((state, value))
}

/// Largest entry of `rho` not matching `target` up to a global phase, for
/// comparing pure outputs.
pub fn pure_overlap_defect(rho: &CMatrix, target: &CVector) -> f64 {
    let t = target * target.adjoint();
    max_abs(&(rho - t))
}
