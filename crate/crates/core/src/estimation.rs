//! Classical estimation over finite-outcome models: Fisher information,
//! Cramér–Rao bounds, maximum likelihood, locally unbiased estimators and
//! Bayesian estimators with quadratic or circular cost.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::numerics::{golden_section, integrate, ln_binomial, ln_gamma};

/// Parametric family `p_theta(x)` over `outcomes()` discrete outcomes.
pub trait ProbModel {
    fn outcomes(&self) -> usize;
    fn probabilities(&self, theta: f64) -> Vec<f64>;
    fn derivatives(&self, theta: f64) -> Vec<f64>;
    /// Parameter range scanned by the maximum-likelihood search.
    fn domain(&self) -> (f64, f64);
}

impl<M: ProbModel + ?Sized> ProbModel for &M {
    fn outcomes(&self) -> usize {
        (**self).outcomes()
    }
    fn probabilities(&self, theta: f64) -> Vec<f64> {
        (**self).probabilities(theta)
    }
    fn derivatives(&self, theta: f64) -> Vec<f64> {
        (**self).derivatives(theta)
    }
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
}

impl<M: ProbModel + ?Sized> ProbModel for Box<M> {
    fn outcomes(&self) -> usize {
        (**self).outcomes()
    }
    fn probabilities(&self, theta: f64) -> Vec<f64> {
        (**self).probabilities(theta)
    }
    fn derivatives(&self, theta: f64) -> Vec<f64> {
        (**self).derivatives(theta)
    }
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
}

fn binomial_pmf(trials: usize, p: f64) -> Vec<f64> {
    (0..=trials)
        .map(|n| {
            let k = (trials - n) as i32;
            (ln_binomial(trials, n)).exp() * p.powi(n as i32) * (1.0 - p).powi(k)
        })
        .collect()
}

fn binomial_dpmf(trials: usize, p: f64) -> Vec<f64> {
    (0..=trials)
        .map(|n| {
            let k = trials - n;
            let coef = ln_binomial(trials, n).exp();
            let up = if n > 0 { n as f64 * p.powi(n as i32 - 1) * (1.0 - p).powi(k as i32) } else { 0.0 };
            let down = if k > 0 { k as f64 * p.powi(n as i32) * (1.0 - p).powi(k as i32 - 1) } else { 0.0 };
            coef * (up - down)
        })
        .collect()
}

/// Number of successes in `trials` Bernoulli trials with success rate `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinomialP {
    pub trials: usize,
}

impl ProbModel for BinomialP {
    fn outcomes(&self) -> usize {
        self.trials + 1
    }
    fn probabilities(&self, p: f64) -> Vec<f64> {
        binomial_pmf(self.trials, p)
    }
    fn derivatives(&self, p: f64) -> Vec<f64> {
        binomial_dpmf(self.trials, p)
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
}

/// Photon counts at one output port of an interferometer fed with single
/// photons: success probability `sin^2(phi/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinomialPhase {
    pub trials: usize,
}

impl ProbModel for BinomialPhase {
    fn outcomes(&self) -> usize {
        self.trials + 1
    }
    fn probabilities(&self, phi: f64) -> Vec<f64> {
        let s = (phi / 2.0).sin();
        binomial_pmf(self.trials, s * s)
    }
    fn derivatives(&self, phi: f64) -> Vec<f64> {
        let s = (phi / 2.0).sin();
        let dp = 0.5 * phi.sin();
        binomial_dpmf(self.trials, s * s).into_iter().map(|d| d * dp).collect()
    }
    fn domain(&self) -> (f64, f64) {
        (-PI, PI)
    }
}

/// Two independent experiments on the same parameter; outcome index is
/// `i * b.outcomes() + j`.
#[derive(Debug, Clone, Copy)]
pub struct ProductModel<A, B> {
    pub a: A,
    pub b: B,
}

impl<A: ProbModel, B: ProbModel> ProbModel for ProductModel<A, B> {
    fn outcomes(&self) -> usize {
        self.a.outcomes() * self.b.outcomes()
    }
    fn probabilities(&self, t: f64) -> Vec<f64> {
        let pa = self.a.probabilities(t);
        let pb = self.b.probabilities(t);
        pa.iter().flat_map(|x| pb.iter().map(move |y| x * y)).collect()
    }
    fn derivatives(&self, t: f64) -> Vec<f64> {
        let (pa, da) = (self.a.probabilities(t), self.a.derivatives(t));
        let (pb, db) = (self.b.probabilities(t), self.b.derivatives(t));
        let mut out = Vec::with_capacity(pa.len() * pb.len());
        for i in 0..pa.len() {
            for j in 0..pb.len() {
                out.push(da[i] * pb[j] + pa[i] * db[j]);
            }
        }
        out
    }
    fn domain(&self) -> (f64, f64) {
        let (a0, a1) = self.a.domain();
        let (b0, b1) = self.b.domain();
        (a0.max(b0), a1.min(b1))
    }
}

const SKIP: f64 = 1e-15;

pub fn fisher_information<M: ProbModel>(model: &M, theta: f64) -> Result<f64> {
    let p = model.probabilities(theta);
    let dp = model.derivatives(theta);
    let mut f = 0.0;
    for (x, (&px, &dx)) in p.iter().zip(&dp).enumerate() {
        if px < SKIP {
            if dx.abs() < SKIP {
                continue;
            }
            if px <= 0.0 {
                return Err(Error::SingularModel { outcome: x });
            }
        }
        f += dx * dx / px;
    }
    Ok(f)
}

/// Cramér–Rao bound `1 / (nu F)` on the variance of unbiased estimators.
pub fn crb<M: ProbModel>(model: &M, theta: f64, repetitions: f64) -> Result<f64> {
    let f = fisher_information(model, theta)?;
    if f <= 0.0 || repetitions <= 0.0 {
        return Err(Error::UnboundedVariance);
    }
    Ok(1.0 / (repetitions * f))
}

fn log_likelihood(p: &[f64], counts: &[u64]) -> f64 {
    let mut l = 0.0;
    for (&px, &k) in p.iter().zip(counts) {
        if k > 0 {
            if px <= 0.0 {
                return f64::NEG_INFINITY;
            }
            l += k as f64 * px.ln();
        }
    }
    l
}

fn check_counts<M: ProbModel>(model: &M, counts: &[u64]) -> Result<()> {
    if counts.len() != model.outcomes() {
        return Err(Error::DimensionMismatch { expected: model.outcomes(), found: counts.len() });
    }
    Ok(())
}

fn score<M: ProbModel>(model: &M, counts: &[u64], t: f64) -> f64 {
    let p = model.probabilities(t);
    let dp = model.derivatives(t);
    counts.iter().zip(p.iter().zip(&dp)).filter(|(&k, _)| k > 0).map(|(&k, (&px, &dx))| k as f64 * dx / px).sum()
}

// golden section stalls near sqrt(eps) on a flat maximum; the score
// changes sign at an interior maximiser, so bisect on it instead
fn polish_root<M: ProbModel>(model: &M, counts: &[u64], t: f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let (sa, sb) = (score(model, counts, a), score(model, counts, b));
    if !(sa.is_finite() && sb.is_finite() && sa > 0.0 && sb < 0.0) {
        return t;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if score(model, counts, m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

pub const ML_GRID_POINTS: usize = 2001;

/// All global maximisers of the log-likelihood on the model domain.
pub fn ml_estimate<M: ProbModel>(model: &M, counts: &[u64]) -> Result<Vec<f64>> {
    check_counts(model, counts)?;
    if counts.iter().all(|&k| k == 0) {
        return Err(domain("no data"));
    }
    let (a, b) = model.domain();
    let step = (b - a) / (ML_GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..ML_GRID_POINTS).map(|i| a + i as f64 * step).collect();
    let ll = |t: f64| log_likelihood(&model.probabilities(t), counts);
    let values: Vec<f64> = grid.iter().map(|&t| ll(t)).collect();
    if values.iter().all(|v| *v == f64::NEG_INFINITY) {
        return Err(Error::InfeasibleData);
    }

    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for i in 0..grid.len() {
        let left = if i > 0 { values[i - 1] } else { f64::NEG_INFINITY };
        let right = if i + 1 < grid.len() { values[i + 1] } else { f64::NEG_INFINITY };
        if values[i] == f64::NEG_INFINITY || values[i] < left || values[i] < right {
            continue;
        }
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid.len() - 1)];
        let (t, neg) = golden_section(|t| -ll(t), lo, hi, 1e-11);
        let t = polish_root(model, counts, t, lo, hi);
        candidates.push((t, -neg.min(-ll(t))));
    }
    let best = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * (1.0 + best.abs());
    let mut out: Vec<f64> = Vec::new();
    for (t, v) in candidates {
        if v >= best - tol && out.iter().all(|&u| (u - t).abs() > 1e-8) {
            out.push(t);
        }
    }
    Ok(out)
}

/// Estimator `theta0 + d ln p(x) / (F dtheta)`, unbiased to first order at
/// `theta0` and saturating the Cramér–Rao bound there.
pub fn locally_unbiased_estimator<M: ProbModel>(model: &M, theta0: f64) -> Result<Vec<f64>> {
    let f = fisher_information(model, theta0)?;
    if f <= 0.0 {
        return Err(Error::UnboundedVariance);
    }
    let p = model.probabilities(theta0);
    let dp = model.derivatives(theta0);
    Ok(p.iter().zip(&dp).map(|(&px, &dx)| if px > 0.0 { theta0 + dx / (px * f) } else { theta0 }).collect())
}

/// Prior density on `[a, b)`; flat unless a density is supplied.
#[derive(Debug, Clone, Copy)]
pub struct PriorSpec {
    pub a: f64,
    pub b: f64,
    pub density: Option<fn(f64) -> f64>,
}

impl PriorSpec {
    pub fn flat(a: f64, b: f64) -> Self {
        PriorSpec { a, b, density: None }
    }

    pub fn with_density(a: f64, b: f64, density: fn(f64) -> f64) -> Self {
        PriorSpec { a, b, density: Some(density) }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.density {
            None => 1.0 / (self.b - self.a),
            Some(f) => f(t),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > self.a) {
            return Err(domain("prior support must have b > a"));
        }
        let mass = integrate(|t| self.eval(t), self.a, self.b, QUAD_TOL);
        if (mass - 1.0).abs() > 1e-8 {
            return Err(domain(alloc::format!("prior integrates to {mass}, not 1")));
        }
        Ok(())
    }
}

pub const QUAD_TOL: f64 = 1e-13;

/// Posterior mean and variance for a flat or custom prior.
pub fn bayes_mmse<M: ProbModel>(model: &M, prior: &PriorSpec, counts: &[u64]) -> Result<(f64, f64)> {
    check_counts(model, counts)?;
    prior.validate()?;
    let ll = |t: f64| log_likelihood(&model.probabilities(t), counts);
    // shift by the grid maximum so the posterior neither under- nor overflows
    let shift = (0..=400)
        .map(|i| ll(prior.a + (prior.b - prior.a) * i as f64 / 400.0))
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Err(Error::InfeasibleData);
    }
    let w = |t: f64| {
        let l = ll(t);
        if l == f64::NEG_INFINITY { 0.0 } else { prior.eval(t) * (l - shift).exp() }
    };
    let tol = QUAD_TOL * (prior.b - prior.a);
    let m0 = integrate(w, prior.a, prior.b, tol);
    if !(m0 > 0.0) {
        return Err(Error::InfeasibleData);
    }
    let m1 = integrate(|t| t * w(t), prior.a, prior.b, tol);
    let m2 = integrate(|t| t * t * w(t), prior.a, prior.b, tol);
    let mean = m1 / m0;
    Ok((mean, (m2 / m0 - mean * mean).max(0.0)))
}

/// Prior-averaged mean squared error of the posterior-mean estimator for a
/// single observation of `model`.
pub fn prior_averaged_mse<M: ProbModel>(model: &M, prior: &PriorSpec) -> Result<f64> {
    prior.validate()?;
    let k = model.outcomes();
    let tol = QUAD_TOL * (prior.b - prior.a);
    let mut total = 0.0;
    for x in 0..k {
        let w = |t: f64| prior.eval(t) * model.probabilities(t)[x];
        let m0 = integrate(w, prior.a, prior.b, tol);
        if m0 <= 0.0 {
            continue;
        }
        let m1 = integrate(|t| t * w(t), prior.a, prior.b, tol);
        let m2 = integrate(|t| t * t * w(t), prior.a, prior.b, tol);
        total += m2 - m1 * m1 / m0;
    }
    Ok(total)
}

/// `4 sin^2((estimate - theta) / 2)`.
pub fn circular_cost(estimate: f64, theta: f64) -> f64 {
    let s = ((estimate - theta) / 2.0).sin();
    4.0 * s * s
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircularEstimate {
    /// Posterior circular mean per outcome, in `[a, a + 2 pi)`.
    pub estimates: Vec<f64>,
    /// Outcomes whose posterior has zero resultant (or zero mass); the
    /// estimate there is arbitrary and set to `a`.
    pub degenerate: Vec<bool>,
    /// Every posterior is symmetric about the 0/pi axis, so the estimator
    /// only ever returns points on that axis.
    pub axis_collapsed: bool,
    pub average_cost: f64,
}

/// Bayes-optimal estimator for the circular cost and its average cost.
pub fn bayes_circular<M: ProbModel>(model: &M, prior: &PriorSpec) -> Result<CircularEstimate> {
    prior.validate()?;
    if prior.b - prior.a > 2.0 * PI + 1e-12 {
        return Err(domain("prior support exceeds one period"));
    }
    let tol = QUAD_TOL * (prior.b - prior.a);
    let k = model.outcomes();
    let mut estimates = Vec::with_capacity(k);
    let mut degenerate = Vec::with_capacity(k);
    let mut collapsed = true;
    let mut cost = 0.0;
    for x in 0..k {
        let w = |t: f64| prior.eval(t) * model.probabilities(t)[x];
        let m0 = integrate(w, prior.a, prior.b, tol);
        let s = integrate(|t| t.sin() * w(t), prior.a, prior.b, tol);
        let c = integrate(|t| t.cos() * w(t), prior.a, prior.b, tol);
        let r = s.hypot(c);
        if m0 <= 0.0 || r <= 1e-12 * m0.max(f64::MIN_POSITIVE) {
            estimates.push(prior.a);
            degenerate.push(true);
            cost += 2.0 * m0.max(0.0);
            continue;
        }
        if s.abs() > 1e-10 * m0 {
            collapsed = false;
        }
        let mut est = s.atan2(c);
        while est < prior.a {
            est += 2.0 * PI;
        }
        while est >= prior.a + 2.0 * PI {
            est -= 2.0 * PI;
        }
        estimates.push(est);
        degenerate.push(false);
        cost += 2.0 * (m0 - r);
    }
    Ok(CircularEstimate { estimates, degenerate, axis_collapsed: collapsed, average_cost: cost })
}

/// `(N - 2n) Γ(n+1/2) Γ(N-n+1/2) / (n! (N-n)!)`.
pub fn binomial_phase_f(trials: usize, n: usize) -> f64 {
    let (nf, mf) = (n as f64, (trials - n) as f64);
    let ln = ln_gamma(nf + 0.5) + ln_gamma(mf + 0.5) - ln_gamma(nf + 1.0) - ln_gamma(mf + 1.0);
    (trials as f64 - 2.0 * nf) * ln.exp()
}

/// Closed-form circular estimator for the binomial phase model with a flat
/// prior on `[0, pi)`.
pub fn binomial_phase_circular_estimate(trials: usize, n: usize) -> f64 {
    let f = binomial_phase_f(trials, n);
    if f == 0.0 {
        PI / 2.0
    } else {
        let t = (2.0 / f).atan();
        if t < 0.0 { t + PI } else { t }
    }
}

/// Closed-form average circular cost of that estimator.
pub fn binomial_phase_circular_cost(trials: usize) -> f64 {
    let sum: f64 = (0..=trials)
        .map(|n| {
            let f = binomial_phase_f(trials, n);
            (4.0 + f * f).sqrt()
        })
        .sum();
    2.0 * (1.0 - sum / (PI * (trials as f64 + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_half() {
        let f = fisher_information(&BinomialP { trials: 1 }, 0.5).unwrap();
        assert!((f - 4.0).abs() < 1e-12);
    }

    #[test]
    fn crb_values() {
        let m = BinomialP { trials: 100 };
        assert!((crb(&m, 0.3, 1.0).unwrap() - 0.0021).abs() < 1e-15);
        let one = crb(&BinomialPhase { trials: 10 }, 0.7, 1.0).unwrap();
        let two = crb(&BinomialPhase { trials: 10 }, 0.7, 2.0).unwrap();
        assert!((one - 0.1).abs() < 1e-12);
        assert!((two - one / 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_information_is_unbounded() {
        // phi = 0: every derivative vanishes
        assert_eq!(crb(&BinomialPhase { trials: 3 }, 0.0, 1.0), Err(Error::UnboundedVariance));
    }

    #[test]
    fn singular_outcome() {
        struct Bad;
        impl ProbModel for Bad {
            fn outcomes(&self) -> usize {
                2
            }
            fn probabilities(&self, _: f64) -> Vec<f64> {
                alloc::vec![1.0, 0.0]
            }
            fn derivatives(&self, _: f64) -> Vec<f64> {
                alloc::vec![-1.0, 1.0]
            }
            fn domain(&self) -> (f64, f64) {
                (0.0, 1.0)
            }
        }
        assert_eq!(fisher_information(&Bad, 0.1), Err(Error::SingularModel { outcome: 1 }));
    }

    #[test]
    fn ml_boundary() {
        let m = BinomialP { trials: 5 };
        let est = ml_estimate(&m, &[1, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(est.len(), 1);
        assert!(est[0].abs() < 1e-10);
    }

    #[test]
    fn no_data_gives_prior_moments() {
        let (mean, var) = bayes_mmse(&BinomialP { trials: 0 }, &PriorSpec::flat(0.0, 1.0), &[0]).unwrap();
        assert!((mean - 0.5).abs() < 1e-12);
        assert!((var - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn circular_cost_shape() {
        assert_eq!(circular_cost(0.4, 0.4), 0.0);
        assert!((circular_cost(0.1, 0.5) - circular_cost(0.5, 0.1)).abs() < 1e-16);
        for d in [1e-3, 0.01, 0.05, 0.09] {
            let c = circular_cost(d, 0.0);
            assert!((c - d * d).abs() <= d.powi(4) / 12.0 + 1e-18);
        }
    }
}
