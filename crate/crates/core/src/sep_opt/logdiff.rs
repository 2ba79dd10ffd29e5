//! Divided differences of the logarithm and the cross-entropy `−Tr ρ ln σ`.

use crate::densmat::{eigh, CMat, C64};

/// `(ln a − ln b)/(a − b)`, continuous at `a = b`.
pub(crate) fn dd1(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d.abs() <= 1e-12 * a.max(b) {
        2.0 / (a + b)
    } else {
        (d / b).ln_1p() / d
    }
}

/// Second divided difference of `ln` (symmetric in its arguments).
pub(crate) fn dd2(a: f64, b: f64, c: f64) -> f64 {
    let mut v = [a, b, c];
    v.sort_by(|x, y| y.total_cmp(x));
    let [hi, mid, lo] = v;
    if hi - lo <= 1e-6 * hi {
        let m = (hi + mid + lo) / 3.0;
        return -0.5 / (m * m);
    }
    (dd1(hi, mid) - dd1(mid, lo)) / (hi - lo)
}

pub(crate) struct CrossEntropy {
    /// `−Tr ρ ln σ`.
    pub value: f64,
    pub vals: Vec<f64>,
    pub vecs: CMat,
    /// `ρ` in the eigenbasis of `σ`.
    pub r: CMat,
}

impl CrossEntropy {
    /// Returns `None` unless `σ` is positive definite.
    pub fn new(rho: &CMat, sigma: &CMat) -> Option<Self> {
        let e = eigh(sigma);
        if e.values[0] <= 0.0 || !e.values[0].is_finite() {
            return None;
        }
        let r = e.vectors.adjoint() * rho * &e.vectors;
        let value = -(0..e.values.len()).map(|i| r[(i, i)].re * e.values[i].ln()).sum::<f64>();
        Some(CrossEntropy { value, vals: e.values, vecs: e.vectors, r })
    }

    /// `Γ ∘ R` with `Γ_ij` the first divided difference of `ln`.
    pub fn gamma_r(&self) -> CMat {
        let n = self.vals.len();
        CMat::from_fn(n, n, |i, j| self.r[(i, j)] * dd1(self.vals[i], self.vals[j]))
    }

    /// Gradient matrix `G` of `−Tr ρ ln σ`, so that the differential is `Tr[G dσ]`.
    pub fn gradient(&self) -> CMat {
        -(&self.vecs * self.gamma_r() * self.vecs.adjoint())
    }

    /// Second divided differences `f2[i][j][k]` at the eigenvalues.
    pub fn dd2_table(&self) -> Vec<f64> {
        let n = self.vals.len();
        let mut t = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    t[(i * n + j) * n + k] = dd2(self.vals[i], self.vals[j], self.vals[k]);
                }
            }
        }
        t
    }

    /// Matrix `N` with `d²(Tr ρ ln σ)[X, Y] = Re Tr[N Y]`, for `X` given in the eigenbasis.
    pub fn hessian_action(&self, f2: &[f64], x: &CMat) -> CMat {
        let n = self.vals.len();
        let r = &self.r;
        let mut out = CMat::zeros(n, n);
        for k in 0..n {
            for j in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..n {
                    acc += r[(k, i)] * x[(i, j)] * f2[(i * n + j) * n + k];
                }
                out[(k, j)] += acc;
            }
        }
        for j in 0..n {
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += r[(k, i)] * x[(j, k)] * f2[(i * n + j) * n + k];
                }
                out[(j, i)] += acc;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divided_differences_match_finite_differences() {
        let (a, b, c) = (0.3, 0.7, 1.9);
        assert!((dd1(a, b) - (b.ln() - a.ln()) / (b - a)).abs() < 1e-14);
        assert!((dd1(0.5, 0.5) - 2.0).abs() < 1e-14);
        let h = 1e-4;
        let num = (dd1(a + h, b) - dd1(a - h, b)) / (2.0 * h);
        assert!((dd2(a, a, b) - num).abs() < 1e-6);
        let direct = (dd1(a, b) - dd1(b, c)) / (a - c);
        assert!((dd2(c, a, b) - direct).abs() < 1e-13);
        assert!((dd2(2.0, 2.0, 2.0) + 0.125).abs() < 1e-12);
    }
}
