//! Small dense complex Hermitian matrices.
//!
//! Eigenvalues and eigenvectors come from a cyclic complex Jacobi iteration,
//! determinants from LU with partial pivoting. Both are adequate for the
//! dimensions the pencil machinery targets (d <= 16).

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance used when checking Hermitian symmetry at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;

/// A d x d complex Hermitian matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

/// Eigenvalue counts below, inside and above `[-tol, tol]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct Inertia {
    pub neg: usize,
    pub zero: usize,
    pub pos: usize,
}

impl Inertia {
    pub fn dim(&self) -> usize {
        self.neg + self.zero + self.pos
    }

    /// True when the counts are `(q, 0, d - q)`.
    pub fn is_signature(&self, q: usize) -> bool {
        self.zero == 0 && self.neg == q
    }
}

impl fmt::Display for Inertia {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.neg, self.zero, self.pos)
    }
}

/// Ascending eigenvalues with the matching unitary `U` (columns are eigenvectors).
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    dim: usize,
    vectors: Vec<Complex64>,
}

impl Eigen {
    /// Component `i` of eigenvector `j`.
    pub fn vector(&self, i: usize, j: usize) -> Complex64 {
        self.vectors[i * self.dim + j]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl HermitianMatrix {
    /// Builds a Hermitian matrix from row-major entries, rejecting conjugate
    /// mismatches larger than [`HERMITIAN_TOL`] relative to the largest entry.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerance(dim, entries, HERMITIAN_TOL)
    }

    /// Like [`HermitianMatrix::new`] with a caller-chosen relative tolerance.
    /// The stored matrix is the Hermitian part `(A + A^H) / 2`.
    pub fn with_tolerance(dim: usize, entries: Vec<Complex64>, tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("matrix dimension must be at least 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        let scale = 1.0 + entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut sym = entries.clone();
        for j in 0..dim {
            for t in j..dim {
                let a = entries[j * dim + t];
                let b = entries[t * dim + j];
                let residual = (a - b.conj()).norm();
                if residual > tol * scale {
                    return Err(Error::NotHermitian(format!(
                        "entry ({j},{t}) = {a} is not the conjugate of entry ({t},{j}) = {b}"
                    )));
                }
                let avg = (a + b.conj()) * 0.5;
                sym[j * dim + t] = avg;
                sym[t * dim + j] = avg.conj();
            }
            sym[j * dim + j].im = 0.0;
        }
        Ok(HermitianMatrix { dim, entries: sym })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("matrix rows must all have length equal to the row count".into()));
        }
        Self::new(dim, rows.iter().flatten().copied().collect())
    }

    /// Real symmetric matrix from rows.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch("matrix rows must all have length equal to the row count".into()));
            }
            entries.extend(r.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self::new(dim, entries)
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let d = values.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for (i, &v) in values.iter().enumerate() {
            entries[i * d + i] = Complex64::new(v, 0.0);
        }
        Self::new(d, entries)
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1.0; dim]).expect("identity has positive dimension")
    }

    pub fn zeros(dim: usize) -> Self {
        Self::diag(&vec![0.0; dim]).expect("zero matrix has positive dimension")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &HermitianMatrix, c: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot combine {}x{} with {}x{}",
                self.dim, self.dim, other.dim, other.dim
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b * c)
            .collect();
        Ok(HermitianMatrix { dim: self.dim, entries })
    }

    pub fn scale(&self, c: f64) -> Self {
        HermitianMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    /// `U^H A U` for a square `U` given row-major.
    pub fn congruence(&self, u: &[Complex64]) -> Result<Self> {
        let d = self.dim;
        if u.len() != d * d {
            return Err(Error::DimensionMismatch("congruence matrix has the wrong size".into()));
        }
        let mut au = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                au[i * d + j] = (0..d).map(|k| self.get(i, k) * u[k * d + j]).sum();
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = (0..d).map(|k| u[k * d + i].conj() * au[k * d + j]).sum();
            }
        }
        HermitianMatrix::with_tolerance(d, out, 1e-9)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// `z^H A z`, real for Hermitian `A`.
    pub fn quadratic_form(&self, z: &[Complex64]) -> f64 {
        let d = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..d {
            for t in 0..d {
                acc += z[j].conj() * self.get(j, t) * z[t];
            }
        }
        acc.re
    }

    /// Determinant by LU with partial pivoting. Real for Hermitian input.
    pub fn determinant(&self) -> f64 {
        let d = self.dim;
        let mut a = self.entries.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..d {
            let pivot = (col..d)
                .max_by(|&x, &y| a[x * d + col].norm().total_cmp(&a[y * d + col].norm()))
                .unwrap();
            let p = a[pivot * d + col];
            if p.norm() == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for k in 0..d {
                    a.swap(pivot * d + k, col * d + k);
                }
                det = -det;
            }
            det *= p;
            for r in col + 1..d {
                let f = a[r * d + col] / p;
                if f.norm() == 0.0 {
                    continue;
                }
                for k in col..d {
                    let v = a[col * d + k];
                    a[r * d + k] -= f * v;
                }
            }
        }
        det.re
    }

    /// Hadamard bound on `|det|`: the product of row norms.
    pub fn hadamard_bound(&self) -> f64 {
        self.entries
            .chunks(self.dim)
            .map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .product()
    }

    /// Full eigendecomposition by cyclic complex Jacobi rotations.
    ///
    /// Eigenvalues are sorted ascending; each eigenvector is phase-fixed so
    /// that its first component of modulus above 1e-10 is real positive.
    pub fn eigen(&self) -> Eigen {
        let d = self.dim;
        let mut a = self.entries.clone();
        let mut v = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            v[i * d + i] = Complex64::new(1.0, 0.0);
        }
        let norm2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        for _ in 0..JACOBI_MAX_SWEEPS {
            let off: f64 = (0..d)
                .flat_map(|p| (p + 1..d).map(move |q| (p, q)))
                .map(|(p, q)| a[p * d + q].norm_sqr())
                .sum();
            if off <= 1e-32 * norm2 || off == 0.0 {
                break;
            }
            for p in 0..d {
                for q in p + 1..d {
                    rotate(&mut a, &mut v, d, p, q);
                }
            }
        }

        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&x, &y| a[x * d + x].re.total_cmp(&a[y * d + y].re));
        let values = order.iter().map(|&k| a[k * d + k].re).collect();
        let mut vectors = vec![Complex64::new(0.0, 0.0); d * d];
        for (j, &k) in order.iter().enumerate() {
            let lead = (0..d).map(|i| v[i * d + k]).find(|z| z.norm() > 1e-10);
            let phase = lead.map(|z| z.conj() / z.norm()).unwrap_or(Complex64::new(1.0, 0.0));
            for i in 0..d {
                vectors[i * d + j] = v[i * d + k] * phase;
            }
        }
        Eigen { values, dim: d, vectors }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().values
    }

    /// Default inertia tolerance: `1e-9 * (1 + ||A||_F)`.
    pub fn default_tol(&self) -> f64 {
        1e-9 * (1.0 + self.frobenius_norm())
    }

    pub fn inertia(&self, tol: f64) -> Inertia {
        let tol = tol.max(0.0);
        let mut out = Inertia { neg: 0, zero: 0, pos: 0 };
        for ev in self.eigenvalues() {
            if ev < -tol {
                out.neg += 1;
            } else if ev > tol {
                out.pos += 1;
            } else {
                out.zero += 1;
            }
        }
        out
    }
}

/// One complex Jacobi rotation annihilating entry `(p, q)`.
fn rotate(a: &mut [Complex64], v: &mut [Complex64], d: usize, p: usize, q: usize) {
    let apq = a[p * d + q];
    let abs = apq.norm();
    if abs == 0.0 {
        return;
    }
    let phase = apq / abs;
    let app = a[p * d + p].re;
    let aqq = a[q * d + q].re;
    let theta = (aqq - app) / (2.0 * abs);
    let t = if theta == 0.0 {
        1.0
    } else if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // G = diag(1, conj(phase)) * [[c, s], [-s, c]]
    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = phase.conj() * (-s);
    let g_qq = phase.conj() * c;

    for r in 0..d {
        let x = a[r * d + p];
        let y = a[r * d + q];
        a[r * d + p] = x * g_pp + y * g_qp;
        a[r * d + q] = x * g_pq + y * g_qq;
    }
    for r in 0..d {
        let x = a[p * d + r];
        let y = a[q * d + r];
        a[p * d + r] = g_pp.conj() * x + g_qp.conj() * y;
        a[q * d + r] = g_pq.conj() * x + g_qq.conj() * y;
    }
    a[p * d + q] = Complex64::new(0.0, 0.0);
    a[q * d + p] = Complex64::new(0.0, 0.0);
    a[p * d + p].im = 0.0;
    a[q * d + q].im = 0.0;
    for r in 0..d {
        let x = v[r * d + p];
        let y = v[r * d + q];
        v[r * d + p] = x * g_pp + y * g_qp;
        v[r * d + q] = x * g_pq + y * g_qq;
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.chunks(self.dim)).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inertia_identity() {
        let i3 = HermitianMatrix::identity(3);
        assert_eq!(i3.inertia(1e-9), Inertia { neg: 0, zero: 0, pos: 3 });
    }

    #[test]
    fn inertia_diagonal() {
        let a = HermitianMatrix::diag(&[-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(a.inertia(1e-9), Inertia { neg: 1, zero: 1, pos: 1 });
    }

    #[test]
    fn inertia_off_diagonal_imaginary() {
        let a = HermitianMatrix::from_rows(&[vec![c(0., 0.), c(0., 1.)], vec![c(0., -1.), c(0., 0.)]]).unwrap();
        assert_eq!(a.inertia(1e-9), Inertia { neg: 1, zero: 0, pos: 1 });
        let ev = a.eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let err = HermitianMatrix::from_rows(&[vec![c(1., 0.), c(0., 1.)], vec![c(0., 1.), c(1., 0.)]]);
        assert!(matches!(err, Err(Error::NotHermitian(_))));
    }

    #[test]
    fn forces_real_diagonal() {
        let a = HermitianMatrix::new(1, vec![c(2.0, 1e-14)]).unwrap();
        assert_eq!(a.get(0, 0).im, 0.0);
    }

    #[test]
    fn eigen_reconstructs() {
        let a = HermitianMatrix::from_rows(&[
            vec![c(2., 0.), c(1., -1.), c(0., 0.5)],
            vec![c(1., 1.), c(-3., 0.), c(2., 0.)],
            vec![c(0., -0.5), c(2., 0.), c(1., 0.)],
        ])
        .unwrap();
        let e = a.eigen();
        let d = 3;
        for i in 0..d {
            for j in 0..d {
                let r: Complex64 = (0..d).map(|k| e.vector(i, k) * e.values[k] * e.vector(j, k).conj()).sum();
                assert!((r - a.get(i, j)).norm() < 1e-12, "({i},{j}) {r} vs {}", a.get(i, j));
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let prod: f64 = e.values.iter().product();
        assert!((prod - a.determinant()).abs() < 1e-11 * (1.0 + prod.abs()));
    }

    #[test]
    fn determinant_of_diagonal() {
        let a = HermitianMatrix::diag(&[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(a.determinant(), -6.0);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(HermitianMatrix::new(0, vec![]).is_err());
    }
}
