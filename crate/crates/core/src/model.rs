//! The Heisenberg-group model at a point: the weight
//! `Φ_η(z) = -2η Σ λ_j |z_j|² + Σ μ_{jt} z̄_j z_t`, its Hessian
//! `M_η = μ - 2η diag(λ)`, the model Bergman density, the Szegő density and
//! an explicit extremal `(0, q)`-form.
//!
//! All `z`-integrals use the measure `2^d dx_1 … dx_{2d}`. The Levi form is
//! taken diagonal; a general Hermitian Levi matrix must be diagonalized by
//! the caller first.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, Inertia};
use crate::pencil::{ChamberDecomposition, Interval, Pencil};
use crate::quadrature::GaussLegendre;

/// Default Gauss-Legendre nodes per η-chamber for [`extremal_form`].
pub const DEFAULT_ETA_QUAD_POINTS: usize = 64;
pub const MIN_ETA_QUAD_POINTS: usize = 16;
/// Largest monomial degree accepted by [`bergman_bruteforce`].
pub const MAX_BRUTEFORCE_DEGREE: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelData {
    lambda: Vec<f64>,
    mu: HermitianMatrix,
    delta: f64,
}

impl ModelData {
    pub fn new(lambda: Vec<f64>, mu: HermitianMatrix, delta: f64) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidInput("lambda must have at least one entry".into()));
        }
        if lambda.len() != mu.dim() {
            return Err(Error::DimensionMismatch(format!(
                "lambda has {} entries but mu is {}x{}",
                lambda.len(),
                mu.dim(),
                mu.dim()
            )));
        }
        if lambda.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("lambda entries must be finite".into()));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
        }
        Ok(ModelData { lambda, mu, delta })
    }

    pub fn d(&self) -> usize {
        self.lambda.len()
    }

    pub fn n(&self) -> usize {
        self.d() + 1
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mu(&self) -> &HermitianMatrix {
        &self.mu
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `M_η = μ - 2η diag(λ)`.
    pub fn m_phi_eta(&self, eta: f64) -> HermitianMatrix {
        self.eta_pencil().at(eta)
    }

    /// The pencil `μ + 2η(-diag λ)`, whose parameter is η itself.
    pub fn eta_pencil(&self) -> Pencil {
        let neg_lambda: Vec<f64> = self.lambda.iter().map(|x| -x).collect();
        Pencil {
            r: self.mu.clone(),
            l: HermitianMatrix::diag(&neg_lambda).expect("finite diagonal"),
        }
    }

    /// `Φ_η(z) = z^H M_η z`.
    pub fn phi(&self, eta: f64, z: &[Complex64]) -> f64 {
        self.m_phi_eta(eta).quadratic_form(z)
    }

    fn check_degree(&self, q: usize) -> Result<()> {
        if q > self.d() {
            return Err(Error::InvalidInput(format!("degree q = {q} exceeds d = {}", self.d())));
        }
        Ok(())
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.d() {
            return Err(Error::DimensionMismatch(format!("z has {} entries, expected {}", z.len(), self.d())));
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("z must be finite".into()));
        }
        Ok(())
    }
}

pub fn m_phi_eta(data: &ModelData, eta: f64) -> HermitianMatrix {
    data.m_phi_eta(eta)
}

/// The sets `{η ∈ (-δ, δ) : M_η has inertia (q, 0, d-q)}` for each q.
#[derive(Debug, Clone)]
pub struct EtaChamberSet {
    pub delta: f64,
    pub sets: Vec<Vec<Interval>>,
    pub decomposition: ChamberDecomposition,
}

impl EtaChamberSet {
    pub fn set(&self, q: usize) -> &[Interval] {
        &self.sets[q]
    }

    /// `∫_{R_q ∩ [-δ, δ]} |det M_η| dη`.
    pub fn mass(&self, q: usize) -> f64 {
        self.decomposition.integral(q)
    }
}

pub fn eta_chambers(data: &ModelData) -> Result<EtaChamberSet> {
    let decomposition = data
        .eta_pencil()
        .chambers(data.delta, None)
        .map_err(|e| e.at("model eta-pencil"))?;
    let sets = (0..=data.d()).map(|q| decomposition.signature_set(q)).collect();
    Ok(EtaChamberSet { delta: data.delta, sets, decomposition })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BergmanValue {
    pub value: f64,
    /// `M_η` is singular, so η sits on a chamber boundary and the value is 0.
    pub on_boundary: bool,
}

/// `e^{Φ_η(z)} (2π)^{-d} |det M_η| 1_{R_q}(η)`.
pub fn bergman_diag(data: &ModelData, eta: f64, q: usize, z: &[Complex64]) -> Result<BergmanValue> {
    data.check_degree(q)?;
    data.check_point(z)?;
    if !eta.is_finite() {
        return Err(Error::InvalidInput("eta must be finite".into()));
    }
    let m = data.m_phi_eta(eta);
    let inertia = m.inertia(m.default_tol());
    if inertia.zero > 0 {
        return Ok(BergmanValue { value: 0.0, on_boundary: true });
    }
    if inertia.neg != q {
        return Ok(BergmanValue { value: 0.0, on_boundary: false });
    }
    let d = data.d() as i32;
    let value = m.quadratic_form(z).exp() * (2.0 * PI).powi(-d) * m.determinant().abs();
    Ok(BergmanValue { value, on_boundary: false })
}

/// Reproducing kernel at the origin of the monomials `z^α`, `|α| ≤ max_degree`,
/// under `⟨f, g⟩ = ∫ f ḡ e^{-Φ_η} 2^d dx`.
///
/// Gram entries are Gaussian moments: with `C = M_η^{-1}` and
/// `Z = (2π)^d / det M_η`, `⟨z^α, z^β⟩ = Z · perm(C[a_i, b_j])` where `a`, `b`
/// list the indices of `α`, `β` with multiplicity (zero unless `|α| = |β|`).
pub fn bergman_bruteforce(data: &ModelData, eta: f64, max_degree: usize) -> Result<f64> {
    if max_degree > MAX_BRUTEFORCE_DEGREE {
        return Err(Error::InvalidInput(format!(
            "max degree {max_degree} exceeds the supported {MAX_BRUTEFORCE_DEGREE}"
        )));
    }
    let m = data.m_phi_eta(eta);
    let d = data.d();
    let eig = m.eigen();
    let tol = m.default_tol();
    if eig.values.iter().any(|&v| v <= tol) {
        return Err(Error::Precondition(format!(
            "the monomial Gram oracle needs M_eta positive definite; eigenvalues at eta = {eta}: {:?}",
            eig.values
        )));
    }
    // C = U diag(1/v) U^H
    let mut cov = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            cov[i * d + j] = (0..d)
                .map(|k| eig.vector(i, k) * eig.vector(j, k).conj() / eig.values[k])
                .sum();
        }
    }
    let det: f64 = eig.values.iter().product();
    let z_norm = (2.0 * PI).powi(d as i32) / det;

    let monomials = monomials_up_to(d, max_degree);
    let size = monomials.len();
    let mut gram = vec![Complex64::new(0.0, 0.0); size * size];
    for (r, a) in monomials.iter().enumerate() {
        for (c, b) in monomials.iter().enumerate() {
            if a.len() == b.len() {
                let block: Vec<Complex64> = a
                    .iter()
                    .flat_map(|&i| b.iter().map(move |&j| (i, j)))
                    .map(|(i, j)| cov[i * d + j])
                    .collect();
                gram[r * size + c] = permanent(&block, a.len()) * z_norm;
            }
        }
    }
    // Only the constant monomial is nonzero at the origin, so K(0,0) = (G^{-1})_{00}.
    let mut rhs = vec![Complex64::new(0.0, 0.0); size];
    rhs[0] = Complex64::new(1.0, 0.0);
    let x = solve(gram, rhs, size)
        .ok_or_else(|| Error::Precondition("monomial Gram matrix is numerically singular".into()))?;
    Ok(x[0].re)
}

/// Multi-indices as sorted index lists, constant monomial first, grouped by degree.
fn monomials_up_to(d: usize, max_degree: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_degree {
        let mut next = Vec::new();
        for m in &layer {
            let start = m.last().copied().unwrap_or(0);
            for i in start..d {
                let mut e = m.clone();
                e.push(i);
                next.push(e);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Ryser's formula.
fn permanent(a: &[Complex64], m: usize) -> Complex64 {
    if m == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for mask in 1u32..(1u32 << m) {
        let mut prod = Complex64::new(1.0, 0.0);
        for i in 0..m {
            let row: Complex64 = (0..m).filter(|j| mask & (1 << j) != 0).map(|j| a[i * m + j]).sum();
            prod *= row;
        }
        let sign = if (m - mask.count_ones() as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += prod * sign;
    }
    total
}

/// Gaussian elimination with partial pivoting; `None` on a zero pivot.
fn solve(mut a: Vec<Complex64>, mut b: Vec<Complex64>, n: usize) -> Option<Vec<Complex64>> {
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))?;
        if a[piv * n + col].norm() <= 1e-14 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            if f.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[r * n + k] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: Complex64 = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    Some(x)
}

fn complex_det(mut a: Vec<Complex64>, n: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
            .unwrap();
        if a[piv * n + col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            det = -det;
        }
        det *= a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            for k in col..n {
                let v = a[col * n + k];
                a[r * n + k] -= f * v;
            }
        }
    }
    det
}

/// `(2π)^{-n} ∫_{R_q ∩ [-δ, δ]} |det M_η| dη`.
pub fn szego_density(data: &ModelData, q: usize) -> Result<f64> {
    data.check_degree(q)?;
    let chambers = eta_chambers(data)?;
    Ok((2.0 * PI).powi(-(data.n() as i32)) * chambers.mass(q))
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalForm {
    /// Increasing multi-indices `J` (0-based), one per coefficient.
    pub indices: Vec<Vec<usize>>,
    /// Coefficients of `u(z, θ)` on `dz̄^J`.
    pub value: Vec<Complex64>,
    /// `‖u‖²` with respect to `e^{-Φ_0}`, by Parseval in θ and closed-form
    /// Gaussian integrals in z at each η-node.
    pub norm_check: f64,
    /// `|u(0, 0)|²` divided by the Szegő density.
    pub peak_check: f64,
}

struct EtaNode {
    eta: f64,
    weight: f64,
    abs_det: f64,
    values: Vec<f64>,
    /// Columns `0..q` of the eigenvector matrix, row-major `d x q`.
    frame: Vec<Complex64>,
    /// Phase-aligned coefficients of `dw̄_1 ∧ … ∧ dw̄_q` on `dz̄^J`.
    coeffs: Vec<Complex64>,
}

/// The extremal form
/// `u(z, θ) = (1/2π) ∫ e^{iθη + η Σ λ_j |z_j|²} α(z, η) dη` with
/// `α = C_0 |det M_η| 1_{R_q}(η) exp(Σ_{j≤q} v_j |w_j|²) dw̄_1 ∧ … ∧ dw̄_q`,
/// `w = U^H z` for `M_η = U diag(v) U^H` (ascending), and
/// `C_0 = (2π)^{1-n/2} (∫_{R_q} |det M_η| dη)^{-1/2}`.
///
/// The q-frame's phase is a free choice at each η; it is fixed by making the
/// largest coefficient at the first node real positive and aligning every
/// later node to its predecessor. When the negative eigenspace of `M_η`
/// rotates with η the peak ratio falls below 1.
pub fn extremal_form(
    data: &ModelData,
    q: usize,
    z: &[Complex64],
    theta: f64,
    eta_quad_points: usize,
) -> Result<ExtremalForm> {
    data.check_degree(q)?;
    data.check_point(z)?;
    if eta_quad_points < MIN_ETA_QUAD_POINTS {
        return Err(Error::InvalidInput(format!(
            "etaQuadPoints must be at least {MIN_ETA_QUAD_POINTS}, got {eta_quad_points}"
        )));
    }
    let chambers = eta_chambers(data)?;
    let mass = chambers.mass(q);
    if chambers.set(q).is_empty() || mass <= 0.0 {
        return Err(Error::ZeroExtremalMass { q, delta: data.delta });
    }
    let n = data.n() as f64;
    let c0 = (2.0 * PI).powf(1.0 - n / 2.0) / mass.sqrt();
    let indices = subsets(data.d(), q);
    let nodes = eta_nodes(data, q, chambers.set(q), eta_quad_points, &indices)?;

    let value = evaluate(data, &nodes, &indices, c0, z, theta);
    let origin = vec![Complex64::new(0.0, 0.0); data.d()];
    let peak: f64 = evaluate(data, &nodes, &indices, c0, &origin, 0.0).iter().map(|c| c.norm_sqr()).sum();
    let szego = (2.0 * PI).powi(-(data.n() as i32)) * mass;

    let norm_check = nodes
        .iter()
        .map(|nd| {
            let gauss: f64 = nd.values.iter().map(|v| 2.0 * PI / v.abs()).product();
            nd.weight * c0 * c0 * nd.abs_det * nd.abs_det * gauss
        })
        .sum::<f64>()
        / (2.0 * PI);

    Ok(ExtremalForm { indices, value, norm_check, peak_check: peak / szego })
}

fn eta_nodes(
    data: &ModelData,
    q: usize,
    intervals: &[Interval],
    points: usize,
    indices: &[Vec<usize>],
) -> Result<Vec<EtaNode>> {
    let d = data.d();
    let rule = GaussLegendre::new(points);
    let mut nodes: Vec<EtaNode> = Vec::new();
    for iv in intervals {
        for (eta, weight) in rule.mapped(iv.lo, iv.hi) {
            let m = data.m_phi_eta(eta);
            let eig = m.eigen();
            let v = &eig.values;
            let below = q == 0 || v[q - 1] < 0.0;
            let above = q == d || v[q] > 0.0;
            if !(below && above) {
                return Err(Error::ChamberBoundaryTouched { eta });
            }
            let frame: Vec<Complex64> = (0..d)
                .flat_map(|i| (0..q).map(move |j| (i, j)))
                .map(|(i, j)| eig.vector(i, j))
                .collect();
            let mut coeffs: Vec<Complex64> = indices
                .iter()
                .map(|rows| {
                    let minor: Vec<Complex64> = rows
                        .iter()
                        .flat_map(|&i| (0..q).map(move |j| (i, j)))
                        .map(|(i, j)| frame[i * q + j])
                        .collect();
                    complex_det(minor, q)
                })
                .collect();
            let reference = match nodes.last() {
                Some(prev) => prev.coeffs.iter().zip(&coeffs).map(|(a, b)| a.conj() * b).sum::<Complex64>(),
                None => coeffs.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap(),
            };
            if reference.norm() > 0.0 {
                let phase = reference.conj() / reference.norm();
                coeffs.iter_mut().for_each(|c| *c *= phase);
            }
            nodes.push(EtaNode {
                eta,
                weight,
                abs_det: v.iter().product::<f64>().abs(),
                values: v.clone(),
                frame,
                coeffs,
            });
        }
    }
    Ok(nodes)
}

fn evaluate(
    data: &ModelData,
    nodes: &[EtaNode],
    indices: &[Vec<usize>],
    c0: f64,
    z: &[Complex64],
    theta: f64,
) -> Vec<Complex64> {
    let d = data.d();
    let levi: f64 = data.lambda.iter().zip(z).map(|(l, c)| l * c.norm_sqr()).sum();
    let mut out = vec![Complex64::new(0.0, 0.0); indices.len()];
    for nd in nodes {
        let q = nd.frame.len() / d.max(1);
        let neg: f64 = (0..q)
            .map(|j| {
                let w: Complex64 = (0..d).map(|i| nd.frame[i * q + j].conj() * z[i]).sum();
                nd.values[j] * w.norm_sqr()
            })
            .sum();
        let scalar = Complex64::from_polar((nd.eta * levi + neg).exp(), theta * nd.eta) * (nd.weight * c0 * nd.abs_det);
        for (o, c) in out.iter_mut().zip(&nd.coeffs) {
            *o += scalar * c;
        }
    }
    out.iter_mut().for_each(|o| *o /= 2.0 * PI);
    out
}

/// Increasing `q`-subsets of `0..d` in lexicographic order.
pub fn subsets(d: usize, q: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, q: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == q {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, q, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, q, &mut Vec::new(), &mut out);
    out
}

/// Inertia of `M_η`, with the default tolerance.
pub fn model_inertia(data: &ModelData, eta: f64) -> Inertia {
    let m = data.m_phi_eta(eta);
    m.inertia(m.default_tol())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pencil::chamber_integral;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(mu: f64, lambda: f64, delta: f64) -> ModelData {
        ModelData::new(vec![lambda], HermitianMatrix::diag(&[mu]).unwrap(), delta).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn hessian_examples() {
        let m = scalar(3.0, 1.0, 1.0);
        assert_eq!(m.m_phi_eta(0.0), HermitianMatrix::diag(&[3.0]).unwrap());
        assert_eq!(m.m_phi_eta(0.5).get(0, 0).re, 2.0);
        let two = ModelData::new(vec![1.0, 2.0], HermitianMatrix::identity(2), 1.0).unwrap();
        assert_eq!(two.m_phi_eta(1.0), HermitianMatrix::diag(&[-1.0, -3.0]).unwrap());
    }

    #[test]
    fn eta_chamber_examples() {
        let a = eta_chambers(&scalar(3.0, 1.0, 1.0)).unwrap();
        assert_eq!(a.set(0), &[Interval { lo: -1.0, hi: 1.0 }]);
        assert!(a.set(1).is_empty());
        let b = eta_chambers(&scalar(3.0, 1.0, 2.0)).unwrap();
        assert!((b.set(0)[0].hi - 1.5).abs() < 1e-12 && b.set(0)[0].lo == -2.0);
        assert!((b.set(1)[0].lo - 1.5).abs() < 1e-12 && b.set(1)[0].hi == 2.0);
        let flat = ModelData::new(vec![0.0, 0.0], HermitianMatrix::identity(2), 0.5).unwrap();
        let f = eta_chambers(&flat).unwrap();
        assert_eq!(f.decomposition.chambers.len(), 1);
    }

    #[test]
    fn bergman_closed_form_examples() {
        let m = scalar(3.0, 1.0, 1.0);
        let b = bergman_diag(&m, 0.5, 0, &[c(0.0, 0.0)]).unwrap();
        assert!(rel(b.value, 1.0 / PI) < 1e-14);
        assert_eq!(bergman_diag(&m, 2.0, 0, &[c(0.0, 0.0)]).unwrap().value, 0.0);
        let b1 = bergman_diag(&m, 2.0, 1, &[c(0.0, 0.0)]).unwrap();
        assert!(rel(b1.value, 1.0 / (2.0 * PI)) < 1e-14);
        let edge = bergman_diag(&m, 1.5, 0, &[c(0.0, 0.0)]).unwrap();
        assert!(edge.on_boundary && edge.value == 0.0);
    }

    #[test]
    fn bergman_z_factorization() {
        let m = ModelData::new(vec![1.0, -0.5], HermitianMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.3, 0.4)],
            vec![c(0.3, -0.4), c(1.5, 0.0)],
        ]).unwrap(), 1.0).unwrap();
        let z = [c(0.3, -0.2), c(-0.1, 0.5)];
        let at0 = bergman_diag(&m, 0.2, 0, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap().value;
        let atz = bergman_diag(&m, 0.2, 0, &z).unwrap().value;
        assert!(rel(atz / at0, m.phi(0.2, &z).exp()) < 1e-14);
    }

    #[test]
    fn gram_oracle_matches() {
        let m = scalar(3.0, 1.0, 1.0);
        for deg in [0, 1, 4] {
            assert!(rel(bergman_bruteforce(&m, 0.5, deg).unwrap(), 1.0 / PI) < 1e-12);
        }
        let diag = ModelData::new(vec![0.0, 0.0], HermitianMatrix::diag(&[2.0, 5.0]).unwrap(), 1.0).unwrap();
        assert!(rel(bergman_bruteforce(&diag, 0.0, 3).unwrap(), 10.0 / (4.0 * PI * PI)) < 1e-12);
        assert!(matches!(bergman_bruteforce(&m, 2.0, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn permanent_small() {
        let a = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        assert_eq!(permanent(&a, 2), c(10.0, 0.0));
        let ones = vec![c(1.0, 0.0); 9];
        assert_eq!(permanent(&ones, 3), c(6.0, 0.0));
    }

    #[test]
    fn szego_examples() {
        let m = scalar(3.0, 1.0, 1.0);
        assert!(rel(szego_density(&m, 0).unwrap(), 6.0 / (4.0 * PI * PI)) < 1e-13);
        assert_eq!(szego_density(&m, 1).unwrap(), 0.0);
        let flat = ModelData::new(vec![0.0, 0.0], HermitianMatrix::identity(2), 0.5).unwrap();
        assert!(rel(szego_density(&flat, 0).unwrap(), (2.0 * PI).powi(-3)) < 1e-13);
    }

    #[test]
    fn szego_matches_s_pencil() {
        let mu = HermitianMatrix::from_real_rows(&[[1.0, 0.5], [0.5, -2.0]]).unwrap();
        let lambda = vec![1.0, 3.0];
        let m = ModelData::new(lambda.clone(), mu.clone(), 1.2).unwrap();
        for q in 0..=2 {
            let direct = szego_density(&m, q).unwrap();
            let via_s = (2.0 * PI).powi(-3) * chamber_integral(&mu, &HermitianMatrix::diag(&lambda).unwrap(), q, 1.2).unwrap();
            assert!((direct - via_s).abs() <= 1e-10 * via_s.abs().max(1e-300), "q = {q}");
        }
    }

    #[test]
    fn extremal_scalar_peak() {
        let m = scalar(3.0, 1.0, 1.0);
        let u = extremal_form(&m, 0, &[c(0.0, 0.0)], 0.0, 64).unwrap();
        assert_eq!(u.indices, vec![Vec::<usize>::new()]);
        assert!(rel(u.value[0].re, 6f64.sqrt() / (2.0 * PI)) < 1e-12);
        assert!(u.value[0].im.abs() < 1e-15);
        assert!((u.peak_check - 1.0).abs() < 1e-10);
        assert!((u.norm_check - 1.0).abs() < 1e-10);
    }

    #[test]
    fn extremal_theta_maximal_at_zero() {
        let m = scalar(3.0, 1.0, 1.0);
        let peak = extremal_form(&m, 0, &[c(0.0, 0.0)], 0.0, 32).unwrap().value[0].norm();
        for k in 1..40 {
            let theta = -10.0 + 0.5 * k as f64;
            let v = extremal_form(&m, 0, &[c(0.0, 0.0)], theta, 32).unwrap().value[0].norm();
            assert!(v <= peak * (1.0 + 1e-12));
        }
    }

    #[test]
    fn extremal_mixed_diagonal() {
        let m = ModelData::new(vec![1.0, 1.0], HermitianMatrix::diag(&[1.0, -1.0]).unwrap(), 0.25).unwrap();
        let u = extremal_form(&m, 1, &[c(0.1, 0.2), c(-0.3, 0.0)], 0.7, 64).unwrap();
        assert_eq!(u.indices, vec![vec![0], vec![1]]);
        assert!((u.peak_check - 1.0).abs() < 1e-10);
        assert!((u.norm_check - 1.0).abs() < 1e-10);
    }

    #[test]
    fn extremal_rotating_frame_below_one() {
        // μ and diag(λ) do not commute, so the negative eigenvector turns with η.
        let mu = HermitianMatrix::from_real_rows(&[[1.0, 1.0], [1.0, -1.0]]).unwrap();
        let m = ModelData::new(vec![1.0, -1.0], mu, 1.0).unwrap();
        let u = extremal_form(&m, 1, &[c(0.0, 0.0), c(0.0, 0.0)], 0.0, 64).unwrap();
        assert!((u.norm_check - 1.0).abs() < 1e-8);
        assert!(u.peak_check < 1.0 && u.peak_check > 0.5);
    }

    #[test]
    fn extremal_empty_chamber() {
        let m = scalar(3.0, 1.0, 1.0);
        assert!(matches!(extremal_form(&m, 1, &[c(0.0, 0.0)], 0.0, 64), Err(Error::ZeroExtremalMass { .. })));
        assert!(extremal_form(&m, 0, &[c(0.0, 0.0)], 0.0, 8).is_err());
    }

    #[test]
    fn subsets_lexicographic() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(2, 0), vec![Vec::<usize>::new()]);
    }
}
