//! The Hermitian pencil `A(s) = R + 2sL`: characteristic polynomial, roots,
//! constant-inertia chambers and exact chamber integrals of `|det A(s)|`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, Inertia};
use crate::poly::{real_roots, RealPolynomial, Roots};

/// Relative size below which every interpolated coefficient means `det A(s) == 0`.
const DEGENERATE_REL: f64 = 1e-12;
/// Interpolated coefficients below this relative size are rounding noise.
const COEFF_NOISE_REL: f64 = 1e-14;
/// Narrow chambers whose midpoint is singular are split root clusters.
const CLUSTER_REL: f64 = 1e-5;

/// An open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    /// Distance from `x` to the closure `[lo, hi]`.
    pub fn distance_to(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }
}

/// A maximal open interval of constant, nondegenerate inertia.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Chamber {
    pub lo: f64,
    pub hi: f64,
    pub inertia: Inertia,
    /// Sign of `det A(s)` on the chamber, `(-1)^neg`.
    pub det_sign: i8,
}

impl Chamber {
    pub fn interval(&self) -> Interval {
        Interval { lo: self.lo, hi: self.hi }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChamberDecomposition {
    pub delta: f64,
    pub roots: Vec<f64>,
    pub chambers: Vec<Chamber>,
    /// `det(R + 2sL)` as a polynomial in `s`.
    pub det_poly: RealPolynomial,
}

impl ChamberDecomposition {
    pub fn dim(&self) -> usize {
        self.chambers.first().map(|c| c.inertia.dim()).unwrap_or(0)
    }

    /// Chambers on which the pencil has exactly `q` negative and `d - q` positive eigenvalues.
    pub fn signature_set(&self, q: usize) -> Vec<Interval> {
        self.chambers
            .iter()
            .filter(|c| c.inertia.is_signature(q))
            .map(Chamber::interval)
            .collect()
    }

    /// `integral over the q-set of |det(R + 2sL)| ds`.
    pub fn integral(&self, q: usize) -> f64 {
        let anti = self.det_poly.antiderivative();
        self.signature_set(q)
            .iter()
            .map(|iv| (anti.eval(iv.hi) - anti.eval(iv.lo)).abs())
            .fold(0.0, |acc, v| acc + v)
    }

    /// `integral_{-delta}^{delta} det(R + 2sL) ds`, signed.
    pub fn signed_integral(&self) -> f64 {
        self.det_poly.integral(-self.delta, self.delta)
    }

    /// Sum over chambers of the absolute chamber integrals, all degrees together.
    pub fn total_abs_integral(&self) -> f64 {
        let anti = self.det_poly.antiderivative();
        self.chambers
            .iter()
            .map(|c| (anti.eval(c.hi) - anti.eval(c.lo)).abs())
            .sum()
    }
}

/// A pair `(R, L)` of equal-dimension Hermitian matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil {
    pub r: HermitianMatrix,
    pub l: HermitianMatrix,
}

impl Pencil {
    pub fn new(r: HermitianMatrix, l: HermitianMatrix) -> Result<Self> {
        if r.dim() != l.dim() {
            return Err(Error::DimensionMismatch(format!(
                "R is {}x{} but L is {}x{}",
                r.dim(),
                r.dim(),
                l.dim(),
                l.dim()
            )));
        }
        Ok(Pencil { r, l })
    }

    pub fn dim(&self) -> usize {
        self.r.dim()
    }

    /// `R + 2sL`.
    pub fn at(&self, s: f64) -> HermitianMatrix {
        self.r.add_scaled(&self.l, 2.0 * s).expect("dimensions checked at construction")
    }

    /// Coefficients of `det(R + 2sL)` recovered from `d + 1` determinant
    /// evaluations at scaled Chebyshev nodes (Vandermonde solve).
    pub fn char_poly(&self) -> RealPolynomial {
        let d = self.dim();
        let nr = self.r.frobenius_norm();
        let nl = self.l.frobenius_norm();
        let sigma = if nr > 0.0 && nl > 0.0 { nr / (2.0 * nl) } else { 1.0 };

        let nodes: Vec<f64> = (0..=d)
            .map(|j| (PI * (2 * j + 1) as f64 / (2 * (d + 1)) as f64).cos())
            .collect();
        let mut scale: f64 = 0.0;
        let values: Vec<f64> = nodes
            .iter()
            .map(|&t| {
                let a = self.at(sigma * t);
                scale = scale.max(a.hadamard_bound());
                a.determinant()
            })
            .collect();

        let scaled = solve_vandermonde(&nodes, &values);
        if scaled.iter().all(|c| c.abs() <= DEGENERATE_REL * scale) {
            return RealPolynomial::new(vec![0.0]);
        }
        let coeffs = scaled
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                if c.abs() <= COEFF_NOISE_REL * scale {
                    0.0
                } else {
                    c / sigma.powi(k as i32)
                }
            })
            .collect();
        RealPolynomial::new(coeffs)
    }

    /// Chamber decomposition of `[-delta, delta]`.
    ///
    /// `tol` is the inertia tolerance; `None` uses the per-matrix default.
    pub fn chambers(&self, delta: f64, tol: Option<f64>) -> Result<ChamberDecomposition> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!("delta must be positive and finite, got {delta}")));
        }
        let det_poly = self.char_poly();
        let root_tol = 1e-14 * (1.0 + delta);
        let mut roots = match real_roots(&det_poly, -delta, delta, root_tol) {
            Roots::Finite(r) => r,
            Roots::IdenticallyZero => {
                return Err(Error::degenerate(
                    "pencil",
                    "det(R + 2sL) vanishes identically (R and L share a kernel direction)",
                ))
            }
        };

        'rebuild: loop {
            let mut breaks = Vec::with_capacity(roots.len() + 2);
            breaks.push(-delta);
            breaks.extend(roots.iter().copied().filter(|&r| r > -delta && r < delta));
            breaks.push(delta);

            let mut chambers = Vec::with_capacity(breaks.len() - 1);
            for w in breaks.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                if hi <= lo {
                    continue;
                }
                let mid = 0.5 * (lo + hi);
                let a = self.at(mid);
                let inertia = a.inertia(tol.unwrap_or_else(|| a.default_tol()));
                if inertia.zero > 0 {
                    if hi - lo <= CLUSTER_REL * (1.0 + delta) {
                        // A multiple root split by rounding; fuse it back.
                        let fused = if lo == -delta {
                            -delta
                        } else if hi == delta {
                            delta
                        } else {
                            mid
                        };
                        roots.retain(|&r| r != lo && r != hi);
                        roots.push(fused);
                        roots.sort_by(f64::total_cmp);
                        continue 'rebuild;
                    }
                    return Err(Error::degenerate(
                        format!("s = {mid}"),
                        format!("inertia {inertia} has a zero eigenvalue on the chamber ({lo}, {hi})"),
                    ));
                }
                let det = a.determinant();
                let parity = if inertia.neg.is_multiple_of(2) { 1 } else { -1 };
                let det_sign = if det > 0.0 {
                    1
                } else if det < 0.0 {
                    -1
                } else {
                    parity
                };
                chambers.push(Chamber { lo, hi, inertia, det_sign });
            }
            return Ok(ChamberDecomposition { delta, roots, chambers, det_poly });
        }
    }
}

/// Solves `sum_k c_k t_j^k = y_j` by Gaussian elimination with partial pivoting.
fn solve_vandermonde(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut m: Vec<Vec<f64>> = nodes
        .iter()
        .zip(values)
        .map(|(&t, &y)| {
            let mut row: Vec<f64> = (0..n).map(|k| t.powi(k as i32)).collect();
            row.push(y);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for k in col..=n {
                m[r][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

/// `det(R + 2sL)` as a real polynomial in `s`.
pub fn pencil_char_poly(r: &HermitianMatrix, l: &HermitianMatrix) -> Result<RealPolynomial> {
    Ok(Pencil::new(r.clone(), l.clone())?.char_poly())
}

pub fn chambers(r: &HermitianMatrix, l: &HermitianMatrix, delta: f64, tol: Option<f64>) -> Result<ChamberDecomposition> {
    Pencil::new(r.clone(), l.clone())?.chambers(delta, tol)
}

pub fn signature_set(dec: &ChamberDecomposition, q: usize) -> Vec<Interval> {
    dec.signature_set(q)
}

/// `integral over R_q cap [-delta, delta] of |det(R + 2sL)| ds`.
pub fn chamber_integral(r: &HermitianMatrix, l: &HermitianMatrix, q: usize, delta: f64) -> Result<f64> {
    Ok(chambers(r, l, delta, None)?.integral(q))
}
