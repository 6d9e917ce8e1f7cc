//! Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for
//! eigenvalues and inverse iteration for the matching eigenvector.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Symmetric tridiagonal matrix given by its diagonal and first
/// off-diagonal (`off.len() + 1 == diag.len()`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1), "off-diagonal length must be n - 1");
        SymTridiagonal { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.dim() {
            let b2 = if i > 0 { self.off[i - 1] * self.off[i - 1] } else { 0.0 };
            q = self.diag[i] - x - if i > 0 { b2 / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::EPSILON * (1.0 + x.abs());
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based), by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * scale {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.eigenvalue(k)).collect()
    }

    /// Solve `(T - shift I) x = rhs` by Gaussian elimination with partial
    /// pivoting on the band.
    fn shifted_solve(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let tiny = f64::EPSILON * (1.0 + shift.abs());
        // rows carry (main, upper, upper2) after pivoting
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
        let mut du: Vec<f64> = self.off.clone();
        du.push(0.0);
        let mut dl: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n];
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let m = dl[i] / d[i];
                d[i + 1] -= m * du[i];
                b[i + 1] -= m * b[i];
                dl[i] = 0.0;
            } else {
                let m = d[i] / dl[i];
                d[i] = dl[i];
                let tmp = d[i + 1];
                d[i + 1] = du[i] - m * tmp;
                du[i] = tmp;
                du2[i] = du[i + 1];
                du[i + 1] = -m * du2[i];
                b.swap(i, i + 1);
                b[i + 1] -= m * b[i];
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= du[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= du2[i] * x[i + 2];
            }
            x[i] = s / d[i];
        }
        x
    }

    /// Eigenvector for eigenvalue `lambda` via inverse iteration, unit norm.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.dim();
        if n == 1 {
            return vec![1.0];
        }
        let shift = lambda + 4.0 * f64::EPSILON * (1.0 + lambda.abs());
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i * 7919) % 13) as f64).collect();
        normalize(&mut v);
        for _ in 0..8 {
            let mut w = self.shifted_solve(shift, &v);
            normalize(&mut w);
            let change: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let flipped: f64 = w.iter().zip(&v).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
            v = w;
            if change.min(flipped) < 1e-15 {
                break;
            }
        }
        v
    }

    /// Largest eigenvalue and its eigenvector, sign-fixed so the entry of
    /// largest magnitude is positive.
    pub fn top_eigenpair(&self) -> (f64, Vec<f64>) {
        let n = self.dim();
        let lambda = self.eigenvalue(n - 1);
        let mut v = self.eigenvector(lambda);
        let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        // Rayleigh quotient sharpens the bisection value
        let lambda = self.rayleigh(&v);
        (lambda, v)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn rayleigh(&self, v: &[f64]) -> f64 {
        let tv = self.mul_vec(v);
        let num: f64 = tv.iter().zip(v).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|x| x * x).sum();
        num / den
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn path(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![0.0; n], vec![1.0; n - 1])
    }

    #[test]
    fn path_graph_spectrum() {
        let n = 9;
        let t = path(n);
        for (k, ev) in t.eigenvalues().iter().enumerate() {
            let expected = 2.0 * ((n - k) as f64 * PI / (n as f64 + 1.0)).cos();
            assert!((ev - expected).abs() < 1e-13, "{k}: {ev} vs {expected}");
        }
    }

    #[test]
    fn top_vector_is_sine_profile() {
        let n = 7;
        let (lambda, v) = path(n).top_eigenpair();
        assert!((lambda - 2.0 * (PI / (n as f64 + 1.0)).cos()).abs() < 1e-14);
        let norm = (2.0 / (n as f64 + 1.0)).sqrt();
        for (i, x) in v.iter().enumerate() {
            let expected = norm * ((i + 1) as f64 * PI / (n as f64 + 1.0)).sin();
            assert!((x - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_is_small_for_general_matrix() {
        let t = SymTridiagonal::new(vec![1.0, -2.0, 0.5, 3.0, 0.0], vec![0.3, 1.2, -0.7, 0.05]);
        for k in 0..5 {
            let l = t.eigenvalue(k);
            let v = t.eigenvector(l);
            let r: f64 = t.mul_vec(&v).iter().zip(&v).map(|(a, b)| (a - l * b).abs()).fold(0.0, f64::max);
            assert!(r < 1e-12, "k={k} residual {r}");
        }
    }
}
