//! Bayesian phase estimation with covariant measurements and the circular
//! cost: the tridiagonal cost matrix `A`, optimal states and minimal costs
//! for ideal, lossy and phase-diffused interferometers.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::{loss_output_state, phase_diffusion_apply, LossParams, PhaseDiffusionParams};
use crate::error::{domain, Error, Result};
use crate::fock::FockStateN;
use crate::linalg::{cr, CMatrix};
use crate::numerics::ln_factorial_table;
use crate::tridiag::SymTridiagonal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostModel {
    Ideal,
    Loss(LossParams),
    PhaseDiffusion { gamma: f64 },
}

/// Symmetric matrix with zero diagonal and entries `A_{n,n-1}` on the
/// first off-diagonals; the average cost of a state is `2 - cᵀAc`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariantCostMatrix {
    pub n_total: usize,
    /// `off[n-1] = A_{n,n-1}` for `n = 1..=N`.
    pub off: Vec<f64>,
    pub model: CostModel,
}

impl CovariantCostMatrix {
    pub fn dim(&self) -> usize {
        self.n_total + 1
    }

    pub fn max_entry(&self) -> f64 {
        self.off.iter().copied().fold(0.0, f64::max)
    }

    pub fn as_tridiagonal(&self) -> SymTridiagonal {
        SymTridiagonal::new(alloc::vec![0.0; self.dim()], self.off.clone())
    }

    pub fn to_dense(&self) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (k, &a) in self.off.iter().enumerate() {
            m[(k + 1, k)] = cr(a);
            m[(k, k + 1)] = cr(a);
        }
        m
    }
}

/// `sum_l sqrt(B(m, l) B(m - 1, l))` with `B(m, l) = C(m, l) η^{m-l} (1-η)^l`.
fn arm_overlap(m: usize, eta: f64, lnf: &[f64]) -> f64 {
    if m == 0 {
        return 0.0;
    }
    if eta >= 1.0 {
        return 1.0;
    }
    if eta <= 0.0 {
        return 0.0;
    }
    let (le, lq) = (eta.ln(), (1.0 - eta).ln());
    let mut sum = 0.0;
    for l in 0..m {
        let ln_c1 = lnf[m] - lnf[l] - lnf[m - l];
        let ln_c0 = lnf[m - 1] - lnf[l] - lnf[m - 1 - l];
        let ln_term = 0.5 * (ln_c1 + ln_c0) + (m - l) as f64 * le - 0.5 * le + l as f64 * lq;
        sum += ln_term.exp();
    }
    sum
}

pub fn build_cost_matrix(model: CostModel, n_total: usize) -> Result<CovariantCostMatrix> {
    if n_total == 0 {
        return Err(domain("the cost matrix needs N >= 1"));
    }
    let off = match model {
        CostModel::Ideal => alloc::vec![1.0; n_total],
        CostModel::PhaseDiffusion { gamma } => {
            if !(gamma >= 0.0) {
                return Err(domain("phase variance must be nonnegative"));
            }
            alloc::vec![(-gamma / 2.0).exp(); n_total]
        }
        CostModel::Loss(p) => {
            LossParams::new(p.eta_a, p.eta_b)?;
            let lnf = ln_factorial_table(n_total + 1);
            (1..=n_total)
                .map(|n| arm_overlap(n, p.eta_a, &lnf) * arm_overlap(n_total - n + 1, p.eta_b, &lnf))
                .collect()
        }
    };
    Ok(CovariantCostMatrix { n_total, off, model })
}

/// Top eigenvector of `A` (entries nonnegative) and the minimal cost
/// `2 - λ_max`.
pub fn optimal_state_and_cost(a: &CovariantCostMatrix) -> Result<(FockStateN, f64)> {
    let (lambda, v) = a.as_tridiagonal().top_eigenpair();
    let state = FockStateN::from_real(&v.iter().map(|x| x.abs()).collect::<Vec<_>>())?;
    Ok((state, 2.0 - lambda))
}

/// `2 - cᵀAc` evaluated on coefficient moduli, i.e. with the measurement
/// phases matched to the state.
pub fn cost_for_state(a: &CovariantCostMatrix, state: &FockStateN) -> Result<f64> {
    if state.n_total() != a.n_total {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: state.n_total() + 1 });
    }
    let m = state.moduli();
    let quad: f64 = a.off.iter().enumerate().map(|(k, &x)| 2.0 * x * m[k + 1] * m[k]).sum();
    Ok(2.0 - quad)
}

/// `2 [1 - A_max cos(π/(N+2))]`, a lower bound on the lossy minimal cost.
pub fn lossy_lower_bound(a: &CovariantCostMatrix) -> Result<f64> {
    match a.model {
        CostModel::Loss(_) => Ok(2.0 * (1.0 - a.max_entry() * (PI / (a.n_total as f64 + 2.0)).cos())),
        _ => Err(domain("lower bound applies to loss cost matrices only")),
    }
}

/// Average circular cost of the covariant measurement with seed
/// `|e><e|` (all-ones vector per photon-number block), integrated
/// numerically over the true phase. Coefficients enter through their
/// moduli.
pub fn direct_cost_integral(state: &FockStateN, model: CostModel) -> Result<f64> {
    let aligned = FockStateN::from_real(&state.moduli())?;
    let n = state.n_total();
    // trapezoid on a uniform periodic grid is exact for these trigonometric
    // polynomials of degree <= N + 1
    let points = 4 * (n + 2);
    let mut total = 0.0;
    for k in 0..points {
        let theta = 2.0 * PI * k as f64 / points as f64;
        let s = (theta / 2.0).sin();
        let cost = 4.0 * s * s;
        let overlap = match model {
            CostModel::Ideal => {
                let v = aligned.phase_shifted(theta).to_vector();
                v.iter().sum::<num_complex::Complex64>().norm_sqr()
            }
            CostModel::PhaseDiffusion { gamma } => {
                let rho = phase_diffusion_apply(&aligned, PhaseDiffusionParams::new(gamma, theta)?);
                rho.iter().sum::<num_complex::Complex64>().re
            }
            CostModel::Loss(p) => loss_output_state(&aligned, theta, p)
                .blocks
                .iter()
                .map(|b| b.weight * b.rho.iter().sum::<num_complex::Complex64>().re)
                .sum(),
        };
        total += cost * overlap;
    }
    Ok(total / points as f64)
}
