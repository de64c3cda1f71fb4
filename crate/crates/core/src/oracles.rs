//! Example generators and exact dimension oracles on flat tori.
//!
//! The oracle side counts holomorphic sections by hand. A line bundle on
//! `T = C^d / (√(2π)Z^d + i√(2π)Z^d)` with constant curvature `A` is described
//! by its automorphy factors; in one variable, gauging away the real-period
//! factor turns sections into Fourier series along the real direction, and the
//! imaginary period becomes a recursion on the Fourier coefficients. Counting
//! the coefficient orbits that decay fast enough to give an entire function is
//! the section count. Two lattice constants fall out of that count (the
//! dimension per unit of curvature and the coupling of a Fourier mode to the
//! Levi curvature on the circle bundle); they are derived once and frozen in a
//! calibration record.
//!
//! Identifying the mode spaces of the circle bundle with section spaces on the
//! torus, and the index rule that puts all cohomology of a nondegenerate
//! bundle in the degree equal to its number of negative eigenvalues, are
//! classical inputs the oracle relies on.

use std::f64::consts::PI;
use std::path::Path;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::morse::{densities, rrh_total, PencilField};

/// Symmetric integer matrix (real entries only).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidInput("matrix must be at least 1x1".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch(format!("row {i} has {} entries, expected {dim}", r.len())));
            }
            entries.extend_from_slice(r);
        }
        for i in 0..dim {
            for j in 0..i {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(Error::NotHermitian(format!("integer matrix entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(IntMatrix { dim, entries })
    }

    pub fn diag(values: &[i64]) -> Result<Self> {
        let d = values.len();
        let rows: Vec<Vec<i64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { values[i] } else { 0 }).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(d: usize) -> Self {
        Self::diag(&vec![1; d]).expect("identity is symmetric")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// `a * self + b * other`, with overflow reported.
    pub fn combine(&self, a: i64, other: &IntMatrix, b: i64) -> Result<IntMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!("{}x{} vs {}x{}", self.dim, self.dim, other.dim, other.dim)));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&x, &y)| {
                x.checked_mul(a)
                    .and_then(|p| y.checked_mul(b).and_then(|r| p.checked_add(r)))
                    .ok_or_else(|| Error::InvalidInput("integer overflow in curvature matrix".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IntMatrix { dim: self.dim, entries })
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> i128 {
        let n = self.dim;
        let mut a: Vec<i128> = self.entries.iter().map(|&x| x as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if a[k * n + k] == 0 {
                match (k + 1..n).find(|&r| a[r * n + k] != 0) {
                    Some(r) => {
                        for c in 0..n {
                            a.swap(k * n + c, r * n + c);
                        }
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
                }
            }
            prev = a[k * n + k];
        }
        sign * a[n * n - 1]
    }

    pub fn to_hermitian(&self) -> HermitianMatrix {
        let rows: Vec<Vec<f64>> = self.rows().iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
        HermitianMatrix::from_real_rows(&rows).expect("symmetric by construction")
    }
}

/// Compact Heisenberg-type example: Levi form `diag(λ)`, curvature `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergSpec {
    pub lambda: Vec<i64>,
    pub mu: IntMatrix,
    pub delta: f64,
}

/// Circle bundle of `L_λ^*` over a flat torus, with `L_μ` pulled back.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusBundleSpec {
    pub lambda: IntMatrix,
    pub mu: IntMatrix,
    pub delta: f64,
}

impl TorusBundleSpec {
    pub fn new(lambda: IntMatrix, mu: IntMatrix, delta: f64) -> Result<Self> {
        if lambda.dim() != mu.dim() {
            return Err(Error::DimensionMismatch(format!(
                "lambda is {}x{} but mu is {}x{}",
                lambda.dim(),
                lambda.dim(),
                mu.dim(),
                mu.dim()
            )));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
        }
        Ok(TorusBundleSpec { lambda, mu, delta })
    }

    pub fn d(&self) -> usize {
        self.mu.dim()
    }

    /// `d = 1`, `μ = [2]`, `λ = [1]`, `δ = 0.5`.
    pub fn example_d1() -> Self {
        Self::new(IntMatrix::diag(&[1]).unwrap(), IntMatrix::diag(&[2]).unwrap(), 0.5).unwrap()
    }

    /// `d = 2`, `μ = diag(1, -1)`, `λ = I`, `δ = 0.25`: every mode sits in degree 1.
    pub fn example_d2_indefinite() -> Self {
        Self::new(IntMatrix::identity(2), IntMatrix::diag(&[1, -1]).unwrap(), 0.25).unwrap()
    }
}

pub fn heisenberg_field(spec: &HeisenbergSpec) -> Result<PencilField> {
    if spec.lambda.len() != spec.mu.dim() {
        return Err(Error::DimensionMismatch(format!(
            "lambda has {} entries but mu is {}x{}",
            spec.lambda.len(),
            spec.mu.dim(),
            spec.mu.dim()
        )));
    }
    if let Some(j) = spec.lambda.iter().position(|&x| x == 0) {
        return Err(Error::InvalidInput(format!("lambda[{j}] is zero; Levi eigenvalues must be nonzero")));
    }
    let l = IntMatrix::diag(&spec.lambda)?.to_hermitian();
    PencilField::single(spec.mu.dim() + 1, spec.delta, "heisenberg", 1.0, spec.mu.to_hermitian(), l)
}

pub fn torus_bundle_field(spec: &TorusBundleSpec) -> Result<PencilField> {
    PencilField::single(spec.d() + 1, spec.delta, "torus", 1.0, spec.mu.to_hermitian(), spec.lambda.to_hermitian())
}

/// `M × S¹` with the flat (Levi-flat) CR structure: `L = 0`, `R = μ`.
///
/// With `δ = 1` the s-integral of the constant pencil has length 2, which is
/// the factor relating `c_q` to the curvature integral over `M`.
pub fn levi_flat_field(mu: &HermitianMatrix, delta: f64) -> Result<PencilField> {
    PencilField::single(mu.dim() + 1, delta, "levi-flat", 1.0, mu.clone(), HermitianMatrix::zeros(mu.dim()))
}

// ---------------------------------------------------------------------------
// First-principles counts in one variable.

/// `c = √(2π)`, the lattice spacing in both directions.
fn lattice_spacing_sq() -> f64 {
    2.0 * PI
}

/// Number of linearly independent holomorphic `f` on `C` with
/// `f(z + α) = exp(a (z ᾱ + |α|²/2)) f(z)` for `α ∈ √(2π)Z + i√(2π)Z`.
///
/// With `g = f · exp(-a z²/2)`, `g` has real period `c`, so
/// `g = Σ_m b_m e^{2πimz/c}`; the imaginary period gives
/// `b_m e^{-2πm} = e^{a c²} b_{m+s}` with `s = a c²/π`. Each residue class of
/// `m` mod `s` is one free coefficient; it contributes a section iff the
/// resulting two-sided sequence decays faster than any exponential.
pub fn theta_section_count(a: i64) -> Result<u64> {
    let c2 = lattice_spacing_sq();
    let s_real = a as f64 * c2 / PI;
    let s = s_real.round();
    if (s_real - s).abs() > 1e-9 {
        return Err(Error::Calibration(format!("Fourier shift {s_real} for curvature {a} is not an integer")));
    }
    let s = s as i64;
    let ac2 = a as f64 * c2;
    if s == 0 {
        // b_m (e^{-2πm} - e^{ac²}) = 0: a coefficient survives only where the bracket vanishes.
        let survivors = (-64i64..=64)
            .filter(|&m| ((-2.0 * PI * m as f64).exp() - ac2.exp()).abs() <= 1e-12)
            .count();
        return Ok(survivors as u64);
    }
    let mut count = 0u64;
    for r in 0..s.abs() {
        if orbit_decays(r, s, ac2) {
            count += 1;
        }
    }
    Ok(count)
}

/// Walks `log|b_{r + ts}|` from `b_r = 1` in both directions and checks that
/// it drops below any linear envelope `K|m|`.
fn orbit_decays(r: i64, s: i64, ac2: f64) -> bool {
    const STEPS: i64 = 64;
    const ENVELOPE: f64 = 20.0 * PI;
    let step = |j: i64| -2.0 * PI * j as f64 - ac2;
    let mut up = 0.0;
    let mut j = r;
    for _ in 0..STEPS {
        up += step(j);
        j += s;
    }
    let up_ok = up + ENVELOPE * (j.abs() as f64) < -50.0;
    let mut down = 0.0;
    let mut j = r;
    for _ in 0..STEPS {
        j -= s;
        down -= step(j);
    }
    let down_ok = down + ENVELOPE * (j.abs() as f64) < -50.0;
    up_ok && down_ok
}

/// Section count for curvature `[a]` on the one-dimensional torus, `a ≥ 1`.
pub fn d1_fourier_bruteforce(a: u64) -> Result<u64> {
    if a == 0 {
        return Err(Error::InvalidInput("curvature must be at least 1".into()));
    }
    let a = i64::try_from(a).map_err(|_| Error::InvalidInput("curvature too large".into()))?;
    theta_section_count(a)
}

/// Exponent of a factor `exp(p z ᾱ + r z̄ α + c |α|²)` attached to a lattice
/// translation by `α` (one complex variable).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Automorphy {
    p: f64,
    r: f64,
    c: f64,
}

impl Automorphy {
    fn add(self, o: Automorphy) -> Automorphy {
        Automorphy { p: self.p + o.p, r: self.r + o.r, c: self.c + o.c }
    }
}

/// Dimension of the Fourier-mode-`m` CR sections of `L^k` on the compact
/// Heisenberg quotient over the one-dimensional torus, with bundle
/// curvature `μ` and Levi eigenvalue `λ`.
///
/// A mode-`m` function `g(z) e^{imt}` is CR for `Z̄ = ∂_z̄ - iλz∂_t` iff
/// `∂_z̄ g + mλ z g = 0`, i.e. `g = h e^{-mλ|z|²}` with `h` holomorphic. The
/// lattice acts by `(z, t) ↦ (z + α, t + iλ(ᾱz - αz̄))`, which preserves
/// `Z̄`. Collecting the three automorphy contributions on `h` (the bundle,
/// the `t`-shift on `e^{imt}`, and the gauge `e^{mλ|z|²}`) gives a holomorphic
/// factor of the form `exp(A(zᾱ + |α|²/2))`, whose sections are then counted
/// by [`theta_section_count`].
pub fn circle_mode_count(k: i64, mu: i64, m: i64, lambda: i64) -> Result<u64> {
    let (k, mu, m, lambda) = (k as f64, mu as f64, m as f64, lambda as f64);
    let bundle = Automorphy { p: k * mu, r: 0.0, c: k * mu / 2.0 };
    // e^{-im f(z)} with f = iλ(ᾱz - αz̄)
    let t_shift = Automorphy { p: m * lambda, r: -m * lambda, c: 0.0 };
    // |z + α|² - |z|² = zᾱ + z̄α + |α|²
    let gauge = Automorphy { p: m * lambda, r: m * lambda, c: m * lambda };
    let total = bundle.add(t_shift).add(gauge);
    if total.r.abs() > 1e-9 {
        return Err(Error::Calibration(format!("mode factor keeps an antiholomorphic part {}", total.r)));
    }
    if (total.c - total.p / 2.0).abs() > 1e-9 {
        return Err(Error::Calibration("mode factor is not a cocycle of theta type".into()));
    }
    let a = total.p.round();
    if (total.p - a).abs() > 1e-9 {
        return Err(Error::Calibration(format!("mode curvature {} is not an integer", total.p)));
    }
    theta_section_count(a as i64)
}

// ---------------------------------------------------------------------------
// Calibration record.

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeCalibration {
    /// Mode `m` of the circle bundle carries curvature `kμ + c_mode·m·λ`.
    #[serde(with = "ratio_string")]
    pub c_mode: Ratio<i64>,
    /// `dim H^q = c_dim^d |det A|` for nondegenerate integer curvature `A`.
    #[serde(with = "ratio_string")]
    pub c_dim: Ratio<i64>,
    pub provenance: String,
}

mod ratio_string {
    use num_rational::Ratio;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<i64>, D::Error> {
        let text = String::deserialize(d)?;
        let (p, q) = text.split_once('/').unwrap_or((text.as_str(), "1"));
        let p: i64 = p.trim().parse().map_err(D::Error::custom)?;
        let q: i64 = q.trim().parse().map_err(D::Error::custom)?;
        if q == 0 {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Ratio::new(p, q))
    }
}

pub const CALIBRATION_FILE: &str = "calibration.json";
const MODE_CANDIDATES: [i64; 2] = [1, 2];

/// Sample tuples `(k, μ, m, λ)` used to pin `c_mode`.
fn mode_samples() -> Vec<(i64, i64, i64, i64)> {
    let mut out = Vec::new();
    for k in 1..=3 {
        for mu in [1, 2, 3] {
            for lambda in [-2, -1, 1, 2] {
                for m in -3..=3 {
                    out.push((k, mu, m, lambda));
                }
            }
        }
    }
    out
}

fn expected_d1(a: i64, c_dim: Ratio<i64>) -> Option<u64> {
    match a {
        a if a > 0 => {
            let v = c_dim * Ratio::from_integer(a);
            v.is_integer().then(|| *v.numer() as u64)
        }
        0 => Some(1),
        _ => Some(0),
    }
}

/// Derives `c_dim` from the unit-curvature count and `c_mode` from the
/// circle-bundle mode counts, rejecting unless exactly one candidate fits.
pub fn calibrate() -> Result<LatticeCalibration> {
    let n1 = d1_fourier_bruteforce(1)?;
    if n1 == 0 {
        return Err(Error::Calibration("unit curvature has no sections".into()));
    }
    let c_dim = Ratio::from_integer(n1 as i64);
    let samples = mode_samples();
    let counts = samples
        .iter()
        .map(|&(k, mu, m, l)| circle_mode_count(k, mu, m, l))
        .collect::<Result<Vec<_>>>()?;
    let fitting: Vec<i64> = MODE_CANDIDATES
        .iter()
        .copied()
        .filter(|&c| {
            samples
                .iter()
                .zip(&counts)
                .all(|(&(k, mu, m, l), &n)| expected_d1(k * mu + c * m * l, c_dim) == Some(n))
        })
        .collect();
    let c_mode = match fitting.as_slice() {
        [c] => Ratio::from_integer(*c),
        [] => return Err(Error::Calibration("no mode coupling candidate matches the direct counts".into())),
        _ => return Err(Error::Calibration("several mode coupling candidates match; samples do not separate them".into())),
    };
    Ok(LatticeCalibration {
        c_mode,
        c_dim,
        provenance: format!(
            "c_dim: Fourier count of sections for curvature 1 on C/(sqrt(2pi)Z + i sqrt(2pi)Z); \
             c_mode: circle-bundle mode counts over {} tuples (k in 1..3, mu in 1..3, lambda in +-1,+-2, m in -3..3), \
             candidates {:?}",
            samples.len(),
            MODE_CANDIDATES
        ),
    })
}

impl LatticeCalibration {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain record");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Calibration(format!("unreadable calibration record: {e}")))
    }

    /// Re-checks the frozen constants against the direct counts: the
    /// one-variable theta count for curvatures `1..=20` and every mode sample.
    pub fn verify(&self) -> Result<()> {
        for a in 1..=20u64 {
            let direct = d1_fourier_bruteforce(a)?;
            let frozen = torus_mode_dim(0, &IntMatrix::diag(&[a as i64])?, self)?;
            if direct != frozen {
                return Err(Error::Calibration(format!(
                    "curvature {a}: direct count {direct}, calibrated count {frozen}"
                )));
            }
        }
        for (k, mu, m, l) in mode_samples() {
            let direct = circle_mode_count(k, mu, m, l)?;
            let a = mode_curvature_scalar(k * mu, m * l, self)?;
            if a != 0 {
                let frozen = torus_mode_dim(0, &IntMatrix::diag(&[a])?, self)?;
                if direct != frozen {
                    return Err(Error::Calibration(format!(
                        "mode (k={k}, mu={mu}, m={m}, lambda={l}): direct count {direct}, calibrated count {frozen}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Reads the record at `path`, or derives and writes it when absent; the
    /// result is verified either way.
    pub fn load_or_create(path: &Path) -> Result<Self> {
        let cal = if path.exists() {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Calibration(format!("cannot read {}: {e}", path.display())))?;
            Self::from_json(&text)?
        } else {
            let cal = calibrate()?;
            std::fs::write(path, cal.to_json())
                .map_err(|e| Error::Calibration(format!("cannot write {}: {e}", path.display())))?;
            cal
        };
        cal.verify()?;
        Ok(cal)
    }
}

fn mode_curvature_scalar(base: i64, coupling: i64, cal: &LatticeCalibration) -> Result<i64> {
    let v = Ratio::from_integer(base) + cal.c_mode * Ratio::from_integer(coupling);
    if !v.is_integer() {
        return Err(Error::Calibration(format!("mode curvature {v} is not an integer")));
    }
    Ok(*v.numer())
}

/// `c_dim^d |det A|` when `A` is nondegenerate with exactly `q` negative
/// eigenvalues, else 0.
pub fn torus_mode_dim(q: usize, a: &IntMatrix, cal: &LatticeCalibration) -> Result<u64> {
    let d = a.dim();
    if q > d {
        return Err(Error::InvalidInput(format!("degree q = {q} exceeds d = {d}")));
    }
    let det = a.determinant();
    if det == 0 {
        return Ok(0);
    }
    let h = a.to_hermitian();
    let inertia = h.inertia(h.default_tol());
    if !inertia.is_signature(q) {
        return Ok(0);
    }
    let c: Ratio<i128> = Ratio::new(*cal.c_dim.numer() as i128, *cal.c_dim.denom() as i128);
    let v = c.pow(d as i32) * Ratio::from_integer(det.abs());
    if !v.is_integer() || *v.numer() < 0 {
        return Err(Error::Calibration(format!("normalized dimension {v} is not a nonnegative integer")));
    }
    u64::try_from(*v.numer()).map_err(|_| Error::Calibration("dimension overflows u64".into()))
}

/// Curvature of mode `m` at tensor power `k`: `kμ + c_mode·m·λ`.
pub fn mode_curvature(spec: &TorusBundleSpec, k: i64, m: i64, cal: &LatticeCalibration) -> Result<IntMatrix> {
    let scaled = cal.c_mode * Ratio::from_integer(m);
    if !scaled.is_integer() {
        return Err(Error::Calibration(format!("c_mode * m = {scaled} is not an integer")));
    }
    spec.mu.combine(k, &spec.lambda, *scaled.numer())
}

/// Largest mode index `⌊kδ⌋` (with a small guard against representation error).
pub fn mode_cutoff(k: u64, delta: f64) -> i64 {
    (k as f64 * delta + 1e-9).floor() as i64
}

/// `Σ_{|m| ≤ kδ} torus_mode_dim(q, kμ + c_mode·m·λ)`.
pub fn fourier_dimension_sum(spec: &TorusBundleSpec, q: usize, k: u64, cal: &LatticeCalibration) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let top = mode_cutoff(k, spec.delta);
    let k = i64::try_from(k).map_err(|_| Error::InvalidInput("k too large".into()))?;
    let dims = (-top..=top)
        .into_par_iter()
        .map(|m| torus_mode_dim(q, &mode_curvature(spec, k, m, cal)?, cal))
        .collect::<Result<Vec<u64>>>()?;
    Ok(dims.iter().sum())
}

/// `Σ_q (-1)^q fourier_dimension_sum(q, k)`.
pub fn alternating_dimension_sum(spec: &TorusBundleSpec, k: u64, cal: &LatticeCalibration) -> Result<i128> {
    let mut total = 0i128;
    for q in 0..=spec.d() {
        let v = fourier_dimension_sum(spec, q, k, cal)? as i128;
        total += if q % 2 == 0 { v } else { -v };
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Oracle-versus-bound convergence.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `fourier_dimension_sum(q, k)` against `k^n c_q(δ)`.
    Weak { q: usize },
    /// The alternating oracle sum against `k^n` times the signed total.
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub k: u64,
    pub oracle_sum: i128,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub comparison: Comparison,
    pub k_ref: u64,
    /// Field weight fixed so oracle and bound agree at `k_ref`.
    pub weight: f64,
    /// The compared density of the unit-weight field.
    pub unit_density: f64,
    pub rows: Vec<ConvergenceRow>,
}

fn oracle_value(spec: &TorusBundleSpec, cmp: Comparison, k: u64, cal: &LatticeCalibration) -> Result<i128> {
    match cmp {
        Comparison::Weak { q } => Ok(fourier_dimension_sum(spec, q, k, cal)? as i128),
        Comparison::Alternating => alternating_dimension_sum(spec, k, cal),
    }
}

/// Calibrates the single field weight at `k_ref`, then compares oracle and
/// bound at every `k` in `ks`.
pub fn convergence(
    spec: &TorusBundleSpec,
    cmp: Comparison,
    k_ref: u64,
    ks: &[u64],
    cal: &LatticeCalibration,
) -> Result<ConvergenceTable> {
    let field = torus_bundle_field(spec)?;
    let unit_density = match cmp {
        Comparison::Weak { q } => {
            if q > spec.d() {
                return Err(Error::InvalidInput(format!("degree q = {q} exceeds d = {}", spec.d())));
            }
            densities(&field, spec.delta)?[q]
        }
        Comparison::Alternating => rrh_total(&field, spec.delta)?,
    };
    let n = field.n() as i32;
    let reference = oracle_value(spec, cmp, k_ref, cal)?;
    if reference == 0 || unit_density == 0.0 {
        return Err(Error::Calibration(format!(
            "cannot fix the weight at k = {k_ref}: oracle {reference}, unit density {unit_density}"
        )));
    }
    let weight = reference as f64 / ((k_ref as f64).powi(n) * unit_density);
    let rows = ks
        .iter()
        .map(|&k| {
            let oracle_sum = oracle_value(spec, cmp, k, cal)?;
            let bound = (k as f64).powi(n) * weight * unit_density;
            Ok(ConvergenceRow { k, oracle_sum, bound, ratio: oracle_sum as f64 / bound })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable { comparison: cmp, k_ref, weight, unit_density, rows })
}

/// `kmin, 1-2-5 steps in between, kmax`.
pub fn k_sequence(kmin: u64, kmax: u64) -> Vec<u64> {
    let mut out = vec![kmin];
    let mut decade = 1u64;
    while decade <= kmax {
        for f in [1, 2, 5] {
            let k = f * decade;
            if k > kmin && k < kmax {
                out.push(k);
            }
        }
        decade = decade.saturating_mul(10);
    }
    if kmax > kmin {
        out.push(kmax);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morse::{bigness_verdict, classify_bundle, BignessReason};

    fn cal() -> LatticeCalibration {
        calibrate().unwrap()
    }

    #[test]
    fn theta_counts_linear() {
        let n1 = d1_fourier_bruteforce(1).unwrap();
        assert_eq!(n1, 2);
        for a in 2..=12 {
            assert_eq!(d1_fourier_bruteforce(a).unwrap(), a * n1);
        }
        assert_eq!(theta_section_count(0).unwrap(), 1);
        assert_eq!(theta_section_count(-3).unwrap(), 0);
        assert!(d1_fourier_bruteforce(0).is_err());
    }

    #[test]
    fn calibration_constants() {
        let c = cal();
        assert_eq!(c.c_dim, Ratio::from_integer(2));
        assert_eq!(c.c_mode, Ratio::from_integer(2));
        c.verify().unwrap();
    }

    #[test]
    fn calibration_idempotent_and_round_trips() {
        let a = cal().to_json();
        let b = cal().to_json();
        assert_eq!(a, b);
        assert!(a.contains("\"c_mode\": \"2/1\""));
        assert_eq!(LatticeCalibration::from_json(&a).unwrap(), cal());
    }

    #[test]
    fn tampered_calibration_rejected() {
        let mut c = cal();
        c.c_dim = Ratio::from_integer(1);
        assert!(matches!(c.verify(), Err(Error::Calibration(_))));
        let mut c = cal();
        c.c_mode = Ratio::from_integer(1);
        assert!(matches!(c.verify(), Err(Error::Calibration(_))));
    }

    #[test]
    fn bareiss_determinants() {
        assert_eq!(IntMatrix::from_rows(&[[3, 1], [1, 3]]).unwrap().determinant(), 8);
        assert_eq!(IntMatrix::from_rows(&[[0, 2], [2, 0]]).unwrap().determinant(), -4);
        assert_eq!(IntMatrix::from_rows(&[[2, 1, 0], [1, 2, 1], [0, 1, 2]]).unwrap().determinant(), 4);
        assert_eq!(IntMatrix::from_rows(&[[1, 2], [2, 4]]).unwrap().determinant(), 0);
        assert!(IntMatrix::from_rows(&[[1, 2], [3, 4]]).is_err());
    }

    #[test]
    fn mode_dims() {
        let c = cal();
        assert_eq!(torus_mode_dim(0, &IntMatrix::from_rows(&[[1, 2], [2, 4]]).unwrap(), &c).unwrap(), 0);
        assert_eq!(torus_mode_dim(1, &IntMatrix::identity(2), &c).unwrap(), 0);
        assert_eq!(torus_mode_dim(0, &IntMatrix::identity(2), &c).unwrap(), 4);
        assert_eq!(torus_mode_dim(1, &IntMatrix::diag(&[3, -2]).unwrap(), &c).unwrap(), 24);
        assert_eq!(torus_mode_dim(0, &IntMatrix::diag(&[7]).unwrap(), &c).unwrap(), d1_fourier_bruteforce(7).unwrap());
    }

    #[test]
    fn symmetric_mode_sum() {
        let c = cal();
        let spec = TorusBundleSpec::example_d1();
        assert_eq!(fourier_dimension_sum(&spec, 0, 4, &c).unwrap(), 5 * 8 * 2);
        assert_eq!(fourier_dimension_sum(&spec, 1, 4, &c).unwrap(), 0);
        let a = fourier_dimension_sum(&spec, 0, 200, &c).unwrap() as f64;
        let b = fourier_dimension_sum(&spec, 0, 400, &c).unwrap() as f64;
        assert!((b / a - 4.0).abs() < 0.05);
    }

    #[test]
    fn indefinite_modes_all_in_degree_one() {
        let c = cal();
        let spec = TorusBundleSpec::example_d2_indefinite();
        assert_eq!(fourier_dimension_sum(&spec, 0, 40, &c).unwrap(), 0);
        assert_eq!(fourier_dimension_sum(&spec, 2, 40, &c).unwrap(), 0);
        assert!(fourier_dimension_sum(&spec, 1, 40, &c).unwrap() > 0);
    }

    #[test]
    fn generated_fields() {
        let h = HeisenbergSpec { lambda: vec![1, 2], mu: IntMatrix::from_rows(&[[3, 1], [1, 3]]).unwrap(), delta: 0.5 };
        let p = classify_bundle(&heisenberg_field(&h).unwrap()).unwrap();
        assert!(p.positive_everywhere);
        assert_eq!(bigness_verdict(&p).reason, BignessReason::PositiveBundle);
        let zero = HeisenbergSpec { lambda: vec![1], mu: IntMatrix::diag(&[0]).unwrap(), delta: 0.5 };
        let p = classify_bundle(&heisenberg_field(&zero).unwrap()).unwrap();
        assert!(!bigness_verdict(&p).big);
        let bad = HeisenbergSpec { lambda: vec![0], mu: IntMatrix::diag(&[1]).unwrap(), delta: 0.5 };
        assert!(heisenberg_field(&bad).is_err());

        let t = torus_bundle_field(&TorusBundleSpec::example_d1()).unwrap();
        assert_eq!(t.points()[0].pencil.char_poly().coeffs(), &[2.0, 2.0]);

        let flat = levi_flat_field(&HermitianMatrix::identity(2), 1.0).unwrap();
        let c = densities(&flat, 1.0).unwrap();
        assert!((c[0] - 2.0 / (2.0 * PI).powi(3)).abs() < 1e-15);
        assert_eq!(&c[1..], &[0.0, 0.0]);
    }

    #[test]
    fn k_sequence_steps() {
        assert_eq!(k_sequence(10, 1000), vec![10, 20, 50, 100, 200, 500, 1000]);
        assert_eq!(k_sequence(7, 30), vec![7, 10, 20, 30]);
    }

    #[test]
    fn convergence_calibrated_at_reference() {
        let c = cal();
        let t = convergence(&TorusBundleSpec::example_d1(), Comparison::Weak { q: 0 }, 50, &[50, 100], &c).unwrap();
        assert!((t.rows[0].ratio - 1.0).abs() < 1e-12);
        // oracle(k) = 4k(k+1) for even k
        assert_eq!(t.rows[1].oracle_sum, 4 * 100 * 101);
    }
}
