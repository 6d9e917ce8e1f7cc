//! Decoherence channels: photon loss in the mode and particle pictures,
//! local dephasing, phase diffusion, and generic Kraus/Choi utilities.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::fock::FockStateN;
use crate::linalg::{cr, identity, max_abs_diff, CMatrix, CVector, I};
use crate::numerics::ln_binomial;

pub const COMPLETENESS_TOL: f64 = 1e-12;

/// Channel `rho -> sum_i K_i rho K_i†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| domain("a channel needs at least one Kraus operator"))?;
        let (dout, din) = first.shape();
        for k in &ops {
            if k.shape() != (dout, din) {
                return Err(domain("Kraus operators must share one shape"));
            }
        }
        let ch = KrausChannel { ops };
        let dev = max_abs_diff(&ch.completeness(), &identity(din));
        if dev > COMPLETENESS_TOL {
            return Err(domain(format!("Kraus operators violate completeness by {dev:e}")));
        }
        Ok(ch)
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn input_dim(&self) -> usize {
        self.ops[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn completeness(&self) -> CMatrix {
        let din = self.ops[0].ncols();
        self.ops.iter().fold(CMatrix::zeros(din, din), |acc, k| acc + k.adjoint() * k)
    }

    /// Acts linearly on any input-sized matrix, not only on states.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.output_dim();
        self.ops.iter().fold(CMatrix::zeros(d, d), |acc, k| acc + k * rho * k.adjoint())
    }

    /// `other` after `self`.
    pub fn then(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if other.input_dim() != self.output_dim() {
            return Err(Error::DimensionMismatch { expected: self.output_dim(), found: other.input_dim() });
        }
        let ops = other.ops.iter().flat_map(|b| self.ops.iter().map(move |a| b * a)).collect();
        KrausChannel::new(ops)
    }

    /// Every operator multiplied on the right by `u`.
    pub fn precompose(&self, u: &CMatrix) -> Result<KrausChannel> {
        KrausChannel::new(self.ops.iter().map(|k| k * u).collect())
    }

    pub fn choi(&self) -> CMatrix {
        choi_from_kraus(&self.ops)
    }
}

/// Vectorisation `sum_i K|i> ⊗ |i>`, output index major.
fn vectorize(k: &CMatrix) -> CVector {
    let (dout, din) = k.shape();
    CVector::from_fn(dout * din, |idx, _| k[(idx / din, idx % din)])
}

/// Choi matrix `sum_ij Λ(|i><j|) ⊗ |i><j|` with an unnormalised maximally
/// entangled vector, so its trace equals the input dimension.
pub fn choi_from_kraus(ops: &[CMatrix]) -> CMatrix {
    let (dout, din) = ops[0].shape();
    let mut omega = CMatrix::zeros(dout * din, dout * din);
    for k in ops {
        let v = vectorize(k);
        omega += &v * v.adjoint();
    }
    omega
}

/// Derivative of the Choi matrix along the Kraus family `K_i + t dK_i`.
pub fn choi_derivative(ops: &[CMatrix], dops: &[CMatrix]) -> CMatrix {
    let (dout, din) = ops[0].shape();
    let mut d = CMatrix::zeros(dout * din, dout * din);
    for (k, dk) in ops.iter().zip(dops) {
        let v = vectorize(k);
        let dv = vectorize(dk);
        d += &dv * v.adjoint() + &v * dv.adjoint();
    }
    d
}

pub fn choi_matrix(channel: &KrausChannel) -> CMatrix {
    channel.choi()
}

/// Phase-encoded family `K_i exp(-i phi G)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEncodedChannel {
    pub channel: KrausChannel,
    pub generator: CMatrix,
}

impl PhaseEncodedChannel {
    pub fn new(channel: KrausChannel, generator: CMatrix) -> Result<Self> {
        if generator.shape() != (channel.input_dim(), channel.input_dim()) {
            return Err(Error::DimensionMismatch { expected: channel.input_dim(), found: generator.nrows() });
        }
        Ok(PhaseEncodedChannel { channel, generator })
    }

    /// Kraus operators and their phase derivatives at `phi0`.
    pub fn kraus_at(&self, phi0: f64) -> (Vec<CMatrix>, Vec<CMatrix>) {
        let u = crate::linalg::expm_i_hermitian(&self.generator, phi0);
        let ks: Vec<CMatrix> = self.channel.ops().iter().map(|k| k * &u).collect();
        let dks = ks.iter().map(|k| k * &self.generator * (-I)).collect();
        (ks, dks)
    }
}

/// `sigma_z / 2` on the `{|a>, |b>}` qubit.
pub fn qubit_phase_generator() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(0.5), cr(0.0), cr(0.0), cr(-0.5)])
}

/// Power transmissions of the two interferometer arms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    pub eta_a: f64,
    pub eta_b: f64,
}

impl LossParams {
    pub fn new(eta_a: f64, eta_b: f64) -> Result<Self> {
        for eta in [eta_a, eta_b] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(domain(format!("transmission {eta} outside [0, 1]")));
            }
        }
        Ok(LossParams { eta_a, eta_b })
    }

    pub fn equal(eta: f64) -> Result<Self> {
        Self::new(eta, eta)
    }
}

/// Probability that `l` of `m` photons are lost at transmission `eta`.
pub fn loss_binomial(m: usize, l: usize, eta: f64) -> f64 {
    if l > m {
        return 0.0;
    }
    let kept = m - l;
    if eta == 1.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if eta == 0.0 {
        return if kept == 0 { 1.0 } else { 0.0 };
    }
    (ln_binomial(m, l) + kept as f64 * eta.ln() + l as f64 * (1.0 - eta).ln()).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    /// Surviving photon number.
    pub n: usize,
    pub weight: f64,
    /// Unit-trace state of dimension `n + 1`.
    pub rho: CMatrix,
}

/// Direct sum of states with different surviving photon numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonalState {
    pub blocks: Vec<Block>,
    /// Total weight of blocks discarded for being below `BLOCK_DROP`.
    pub dropped_weight: f64,
}

pub const BLOCK_DROP: f64 = 1e-14;

impl BlockDiagonalState {
    pub fn total_weight(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight).sum()
    }

    pub fn block(&self, n: usize) -> Option<&Block> {
        self.blocks.iter().find(|b| b.n == n)
    }

    /// Per-block derivative `-i [n_a, rho]` for a phase applied on mode
    /// `a` before a photon-number-diagonal channel such as loss.
    pub fn phase_derivative(&self) -> Vec<CMatrix> {
        self.blocks
            .iter()
            .map(|b| CMatrix::from_fn(b.n + 1, b.n + 1, |i, j| -I * (i as f64 - j as f64) * b.rho[(i, j)]))
            .collect()
    }

    fn from_unnormalized(mut raw: Vec<(usize, CMatrix)>) -> Self {
        raw.sort_by_key(|x| core::cmp::Reverse(x.0));
        let mut blocks = Vec::new();
        let mut dropped = 0.0;
        for (n, m) in raw {
            let w: f64 = m.diagonal().iter().map(|z| z.re).sum();
            if w < BLOCK_DROP {
                dropped += w.max(0.0);
                continue;
            }
            blocks.push(Block { n, weight: w, rho: m.unscale(w) });
        }
        BlockDiagonalState { blocks, dropped_weight: dropped }
    }
}

/// Loss acting on a photon-number density matrix `rho` of an `N`-photon
/// input; returns unnormalised blocks indexed by surviving photons.
fn loss_blocks(rho: &CMatrix, params: LossParams) -> Vec<(usize, CMatrix)> {
    let n_total = rho.nrows() - 1;
    let mut out = Vec::with_capacity(n_total + 1);
    for kept in (0..=n_total).rev() {
        let lost = n_total - kept;
        let mut block = CMatrix::zeros(kept + 1, kept + 1);
        for la in 0..=lost {
            let lb = lost - la;
            // amplitude factor for input index n = k + la
            let amp: Vec<f64> = (0..=kept)
                .map(|k| {
                    let n = k + la;
                    (loss_binomial(n, la, params.eta_a) * loss_binomial(n_total - n, lb, params.eta_b)).sqrt()
                })
                .collect();
            if amp.iter().all(|&x| x == 0.0) {
                continue;
            }
            for i in 0..=kept {
                if amp[i] == 0.0 {
                    continue;
                }
                for j in 0..=kept {
                    block[(i, j)] += rho[(i + la, j + la)] * (amp[i] * amp[j]);
                }
            }
        }
        out.push((kept, block));
    }
    out
}

/// Output of the lossy interferometer for input `state`, phase `phi` on
/// mode `a` and arm transmissions `params`.
pub fn loss_output_state(state: &FockStateN, phi: f64, params: LossParams) -> BlockDiagonalState {
    let rho = state.phase_shifted(phi).density_matrix();
    BlockDiagonalState::from_unnormalized(loss_blocks(&rho, params))
}

/// Loss applied blockwise to an already block-diagonal state.
pub fn loss_on_blocks(state: &BlockDiagonalState, params: LossParams) -> BlockDiagonalState {
    let top = state.blocks.iter().map(|b| b.n).max().unwrap_or(0);
    let mut acc: Vec<CMatrix> = (0..=top).map(|n| CMatrix::zeros(n + 1, n + 1)).collect();
    for b in &state.blocks {
        for (kept, m) in loss_blocks(&b.rho, params) {
            acc[kept] += m * cr(b.weight);
        }
    }
    BlockDiagonalState::from_unnormalized(acc.into_iter().enumerate().collect())
}

/// Single-photon loss, qubit `{|a>, |b>}` into qutrit `{|a>, |b>, |vac>}`.
pub fn loss_kraus_particle(params: LossParams) -> KrausChannel {
    let z = cr(0.0);
    let k0 = CMatrix::from_row_slice(3, 2, &[cr(params.eta_a.sqrt()), z, z, cr(params.eta_b.sqrt()), z, z]);
    let k1 = CMatrix::from_row_slice(3, 2, &[z, z, z, z, cr((1.0 - params.eta_a).sqrt()), z]);
    let k2 = CMatrix::from_row_slice(3, 2, &[z, z, z, z, z, cr((1.0 - params.eta_b).sqrt())]);
    let ops: Vec<CMatrix> = [k0, k1, k2].into_iter().filter(|k| k.iter().any(|x| x.norm() > 0.0)).collect();
    KrausChannel { ops }
}

pub fn dephasing_kraus(eta: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(domain(format!("visibility {eta} outside [0, 1]")));
    }
    let keep = cr(((1.0 + eta) / 2.0).sqrt());
    let flip = ((1.0 - eta) / 2.0).sqrt();
    let sz = CMatrix::from_row_slice(2, 2, &[cr(flip), cr(0.0), cr(0.0), cr(-flip)]);
    KrausChannel::new(alloc::vec![identity(2) * keep, sz])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDiffusionParams {
    pub gamma: f64,
    pub phi: f64,
}

impl PhaseDiffusionParams {
    pub fn new(gamma: f64, phi: f64) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(domain(format!("phase variance {gamma} is negative")));
        }
        Ok(PhaseDiffusionParams { gamma, phi })
    }
}

/// `rho_nm = c_n c_m* exp(-Γ (n-m)^2 / 2) exp(-i (n-m) phi)`.
pub fn phase_diffusion_apply(state: &FockStateN, params: PhaseDiffusionParams) -> CMatrix {
    let c = state.coeffs();
    let d = c.len();
    CMatrix::from_fn(d, d, |n, m| {
        let k = n as f64 - m as f64;
        c[n] * c[m].conj() * Complex64::from_polar((-params.gamma * k * k / 2.0).exp(), -k * params.phi)
    })
}
