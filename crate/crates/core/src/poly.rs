//! Dense real polynomials with exact differentiation.
//!
//! Coefficients are stored lowest degree first, so `[c0, c1, c2]` is
//! `c0 + c1 u + c2 u^2`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly::new(vec![0.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Exact mean of the derivative over `[a, b]`, i.e. `(p(b) - p(a)) / (b - a)`
    /// expanded as `sum_k c_k h_{k-1}(a, b)` with complete homogeneous
    /// symmetric sums, so no cancellation occurs as `b -> a`.
    pub fn mean_derivative(&self, a: f64, b: f64) -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        // h_m(a, b) = a h_{m-1} + b^m, h_0 = 1
        let mut h = 1.0;
        let mut b_pow = 1.0;
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            if k > 1 {
                b_pow *= b;
                h = a * h + b_pow;
            }
            acc += c * h;
        }
        acc
    }

    /// Real roots inside the closed interval `[lo, hi]`, ascending.
    ///
    /// Isolation recurses on the derivative: between consecutive critical
    /// points the polynomial is monotone and holds at most one root, which
    /// is then bracketed by bisection.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if lo > hi || self.is_zero() {
            return Vec::new();
        }
        match self.degree() {
            0 => Vec::new(),
            1 => {
                let r = -self.coeffs[0] / self.coeffs[1];
                if (lo..=hi).contains(&r) {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            _ => {
                let mut knots = vec![lo];
                knots.extend(self.derivative().roots_in(lo, hi));
                knots.push(hi);
                let mut roots: Vec<f64> = Vec::new();
                for pair in knots.windows(2) {
                    let (p, q) = (pair[0], pair[1]);
                    let (fp, fq) = (self.eval(p), self.eval(q));
                    if fp == 0.0 {
                        push_unique(&mut roots, p);
                    }
                    if fq == 0.0 {
                        push_unique(&mut roots, q);
                    }
                    if fp * fq < 0.0 {
                        push_unique(&mut roots, self.bisect(p, q, fp));
                    }
                }
                roots
            }
        }
    }

    fn bisect(&self, mut p: f64, mut q: f64, fp: f64) -> f64 {
        let sign_p = fp.signum();
        for _ in 0..200 {
            let m = 0.5 * (p + q);
            if m <= p || m >= q {
                break;
            }
            let fm = self.eval(m);
            if fm == 0.0 {
                return m;
            }
            if fm.signum() == sign_p {
                p = m;
            } else {
                q = m;
            }
        }
        0.5 * (p + q)
    }

    /// Minimum and maximum of the polynomial over `[lo, hi]`.
    pub fn range_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut min = self.eval(lo).min(self.eval(hi));
        let mut max = self.eval(lo).max(self.eval(hi));
        for r in self.derivative().roots_in(lo, hi) {
            let v = self.eval(r);
            min = min.min(v);
            max = max.max(v);
        }
        (min, max)
    }
}

fn push_unique(roots: &mut Vec<f64>, r: f64) {
    if roots.last().is_none_or(|&last| (r - last).abs() > 1e-14 * (1.0 + r.abs())) {
        roots.push(r);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_and_derivative() {
        let p = Poly::new(vec![1.0, -2.0, 0.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 24.0);
        assert_eq!(p.derivative().coeffs(), &[-2.0, 0.0, 9.0]);
        assert_eq!(p.derivative().derivative().derivative().coeffs(), &[18.0]);
        assert!(Poly::new(vec![5.0]).derivative().is_zero());
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        assert_eq!(Poly::new(vec![1.0, 2.0, 0.0, 0.0]).degree(), 1);
        assert_eq!(Poly::new(vec![]).degree(), 0);
    }

    #[test]
    fn mean_derivative_matches_divided_difference() {
        let p = Poly::new(vec![0.3, -1.0, 0.5, 0.25, -0.1]);
        for &(a, b) in &[(0.0, 1.0), (-2.0, 1.5), (1.25, -0.75)] {
            let dd = (p.eval(b) - p.eval(a)) / (b - a);
            assert!((p.mean_derivative(a, b) - dd).abs() < 1e-13);
        }
        let dp = p.derivative();
        assert!((p.mean_derivative(0.7, 0.7) - dp.eval(0.7)).abs() < 1e-14);
    }

    #[test]
    fn roots_of_cubic() {
        // (u - 1)(u + 0.5)(u - 2)
        let p = Poly::new(vec![1.0, 0.5, -2.5, 1.0]);
        let r = p.roots_in(-3.0, 3.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-0.5, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(p.roots_in(1.5, 1.9).len(), 0);
        assert_eq!(p.roots_in(0.0, 1.0), vec![1.0]);
    }

    #[test]
    fn range_on_interval() {
        let p = Poly::new(vec![0.0, 0.0, 0.5]);
        assert_eq!(p.range_on(-1.0, 1.0), (0.0, 0.5));
        assert_eq!(p.range_on(1.0, 2.0), (0.5, 2.0));
    }
}
