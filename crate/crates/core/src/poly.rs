//! Real polynomials and real-root isolation on a bounded interval.
//!
//! Roots are isolated by recursing on the derivative: between consecutive
//! critical points the polynomial is monotone, so every simple root sits in
//! exactly one sign-change bracket and is refined by bisection. A critical
//! point whose value is numerically zero is a tangent (even multiplicity)
//! root and is reported directly.

use serde::Serialize;

/// Values below this multiple of `sum |c_k| |x|^k` count as zero.
const ZERO_REL: f64 = 1e-13;
const MAX_BISECTIONS: usize = 200;

/// Polynomial with real coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealPolynomial {
    coeffs: Vec<f64>,
}

/// Result of [`real_roots`].
#[derive(Debug, Clone, PartialEq)]
pub enum Roots {
    /// Sorted, distinct roots in the requested interval.
    Finite(Vec<f64>),
    /// The polynomial is identically zero.
    IdenticallyZero,
}

impl Roots {
    pub fn finite(self) -> Option<Vec<f64>> {
        match self {
            Roots::Finite(r) => Some(r),
            Roots::IdenticallyZero => None,
        }
    }
}

impl RealPolynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        RealPolynomial { coeffs }
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

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// `sum |c_k| |x|^k`, the natural rounding scale of [`RealPolynomial::eval`].
    pub fn magnitude(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn derivative(&self) -> RealPolynomial {
        if self.coeffs.len() == 1 {
            return RealPolynomial::new(vec![0.0]);
        }
        RealPolynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> RealPolynomial {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        out.extend(self.coeffs.iter().enumerate().map(|(k, &c)| c / (k + 1) as f64));
        RealPolynomial::new(out)
    }

    /// `integral_a^b p(s) ds` via the exact antiderivative.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    fn sign_at(&self, x: f64) -> i8 {
        let v = self.eval(x);
        if v.abs() <= ZERO_REL * self.magnitude(x) {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    }
}

/// All real roots of `p` in `[lo, hi]`, each to absolute accuracy `tol`,
/// with clustered roots collapsed to one.
pub fn real_roots(p: &RealPolynomial, lo: f64, hi: f64, tol: f64) -> Roots {
    if p.is_zero() {
        return Roots::IdenticallyZero;
    }
    let tol = tol.max(f64::EPSILON * (1.0 + lo.abs().max(hi.abs())));
    let mut roots = isolate(p, lo, hi, tol);
    roots.sort_by(f64::total_cmp);
    Roots::Finite(collapse(roots, tol))
}

fn isolate(p: &RealPolynomial, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    match p.degree() {
        0 => Vec::new(),
        1 => {
            let r = -p.coeffs[0] / p.coeffs[1];
            if r >= lo && r <= hi {
                vec![r]
            } else {
                Vec::new()
            }
        }
        _ => {
            let mut crit = isolate(&p.derivative(), lo, hi, tol);
            crit.sort_by(f64::total_cmp);
            let mut points = Vec::with_capacity(crit.len() + 2);
            points.push(lo);
            points.extend(crit.into_iter().filter(|&c| c > lo && c < hi));
            points.push(hi);
            let signs: Vec<i8> = points.iter().map(|&x| p.sign_at(x)).collect();
            let mut roots: Vec<f64> = points
                .iter()
                .zip(&signs)
                .filter(|(_, &s)| s == 0)
                .map(|(&x, _)| x)
                .collect();
            for i in 0..points.len() - 1 {
                if signs[i] * signs[i + 1] < 0 {
                    roots.push(bisect(p, points[i], points[i + 1], signs[i], tol));
                }
            }
            roots
        }
    }
}

fn bisect(p: &RealPolynomial, mut a: f64, mut b: f64, sign_a: i8, tol: f64) -> f64 {
    for _ in 0..MAX_BISECTIONS {
        let m = 0.5 * (a + b);
        if b - a <= tol || m <= a || m >= b {
            return m;
        }
        match p.sign_at(m) {
            0 => return m,
            s if s == sign_a => a = m,
            _ => b = m,
        }
    }
    0.5 * (a + b)
}

fn collapse(sorted: Vec<f64>, tol: f64) -> Vec<f64> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for r in sorted {
        match out.last_mut() {
            Some(cluster) if r - cluster.last().unwrap() <= tol => cluster.push(r),
            _ => out.push(vec![r]),
        }
    }
    out.into_iter()
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roots(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
        real_roots(&RealPolynomial::new(c.to_vec()), lo, hi, 1e-13).finite().unwrap()
    }

    #[test]
    fn linear_root_at_endpoint() {
        assert_eq!(roots(&[2.0, 2.0], -1.0, 1.0), vec![-1.0]);
    }

    #[test]
    fn quadratic_pair() {
        let r = roots(&[-1.0, 0.0, 4.0], -2.0, 2.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 0.5).abs() < 1e-13 && (r[1] - 0.5).abs() < 1e-13);
    }

    #[test]
    fn double_root_collapsed() {
        assert_eq!(roots(&[0.0, 0.0, 1.0], -1.0, 1.0), vec![0.0]);
        let r = roots(&[1.0, 4.0, 4.0], -1.0, 1.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] + 0.5).abs() < 1e-7);
    }

    #[test]
    fn triple_root_collapsed() {
        // (s - 0.25)^3
        let r = roots(&[-0.015625, 0.1875, -0.75, 1.0], -1.0, 1.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.25).abs() < 1e-4);
    }

    #[test]
    fn identically_zero_marker() {
        assert_eq!(real_roots(&RealPolynomial::new(vec![0.0, 0.0]), -1.0, 1.0, 1e-12), Roots::IdenticallyZero);
    }

    #[test]
    fn roots_outside_interval_ignored() {
        assert!(roots(&[-9.0, 0.0, 1.0], -1.0, 1.0).is_empty());
        assert!(roots(&[3.0], -1.0, 1.0).is_empty());
    }

    #[test]
    fn wilkinson_like_cluster() {
        // (s-0.1)(s-0.2)(s-0.3)(s-0.4)
        let c = [0.0024, -0.05, 0.35, -1.0, 1.0];
        let r = roots(&c, -1.0, 1.0);
        assert_eq!(r.len(), 4);
        for (got, want) in r.iter().zip([0.1, 0.2, 0.3, 0.4]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn antiderivative_integral() {
        let p = RealPolynomial::new(vec![1.0, 0.0, -4.0]);
        assert!((p.integral(-0.5, 0.5) - 2.0 / 3.0).abs() < 1e-15);
    }
}
