//! Morse-inequality quantities over a sampled pencil field.
//!
//! A [`PencilField`] stands in for the integral over the manifold: each
//! sample carries a volume mass `weight` and the pair `(R, L)` at that
//! point, with the top-degree form `(R + 2sL)^{n-1} ∧ (-ω₀) / (n-1)!`
//! already reduced to `det(R + 2sL)` times the weight. Per-sample work runs
//! in parallel; every reduction over samples is summed in input order so
//! results are bit-reproducible.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::pencil::{ChamberDecomposition, Pencil};

#[derive(Debug, Clone, PartialEq)]
pub struct PencilPoint {
    pub label: String,
    pub weight: f64,
    pub pencil: Pencil,
}

impl PencilPoint {
    pub fn new(label: impl Into<String>, weight: f64, r: HermitianMatrix, l: HermitianMatrix) -> Result<Self> {
        let label = label.into();
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidInput(format!("sample '{label}': weight must be positive, got {weight}")));
        }
        let pencil = Pencil::new(r, l).map_err(|e| Error::InvalidInput(format!("sample '{label}': {e}")))?;
        Ok(PencilPoint { label, weight, pencil })
    }

    pub fn r(&self) -> &HermitianMatrix {
        &self.pencil.r
    }

    pub fn l(&self) -> &HermitianMatrix {
        &self.pencil.l
    }
}

/// Samples of `(weight, R, L)` over a CR manifold of dimension `2n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilField {
    n: usize,
    delta: f64,
    points: Vec<PencilPoint>,
}

impl PencilField {
    pub fn new(n: usize, delta: f64, points: Vec<PencilPoint>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("n must be at least 2, got {n}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
        }
        if points.is_empty() {
            return Err(Error::InvalidInput("a field needs at least one sample".into()));
        }
        for p in &points {
            if p.pencil.dim() != n - 1 {
                return Err(Error::DimensionMismatch(format!(
                    "sample '{}' has {}x{} matrices but n = {n} requires {}x{}",
                    p.label,
                    p.pencil.dim(),
                    p.pencil.dim(),
                    n - 1,
                    n - 1
                )));
            }
        }
        Ok(PencilField { n, delta, points })
    }

    /// A single constant sample, the homogeneous-manifold case.
    pub fn single(n: usize, delta: f64, label: &str, weight: f64, r: HermitianMatrix, l: HermitianMatrix) -> Result<Self> {
        Self::new(n, delta, vec![PencilPoint::new(label, weight, r, l)?])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Matrix dimension `d = n - 1`.
    pub fn d(&self) -> usize {
        self.n - 1
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn points(&self) -> &[PencilPoint] {
        &self.points
    }

    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }

    /// The same field with every weight multiplied by `factor`.
    pub fn with_weight_scale(&self, factor: f64) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| PencilPoint::new(p.label.clone(), p.weight * factor, p.r().clone(), p.l().clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.n, self.delta, points)
    }

    /// `(2π)^{-n}`.
    pub fn prefactor(&self) -> f64 {
        (2.0 * PI).powi(-(self.n as i32))
    }

    /// Per-sample chamber decompositions on `[-delta, delta]`, in input order.
    pub fn decompose(&self, delta: f64) -> Result<Vec<ChamberDecomposition>> {
        self.points
            .par_iter()
            .map(|p| p.pencil.chambers(delta, None).map_err(|e| e.at(format!("sample '{}'", p.label))))
            .collect()
    }

    fn check_delta(&self, delta: f64) -> Result<()> {
        if !(delta > 0.0) || delta > self.delta * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "delta = {delta} must lie in (0, {}] (the field's delta)",
                self.delta
            )));
        }
        Ok(())
    }

    fn check_degree(&self, q: usize) -> Result<()> {
        if q > self.d() {
            return Err(Error::InvalidInput(format!("degree q = {q} exceeds d = {}", self.d())));
        }
        Ok(())
    }
}

/// `c_q(delta) = (2π)^{-n} Σ_i w_i ∫_{R_{x_i,q} ∩ [-δ,δ]} |det(R_i + 2sL_i)| ds`.
pub fn density_q(field: &PencilField, q: usize, delta: f64) -> Result<f64> {
    field.check_degree(q)?;
    Ok(densities(field, delta)?[q])
}

/// All densities `c_0 .. c_d` at once.
pub fn densities(field: &PencilField, delta: f64) -> Result<Vec<f64>> {
    field.check_delta(delta)?;
    let decs = field.decompose(delta)?;
    Ok(densities_from(field, &decs))
}

fn densities_from(field: &PencilField, decs: &[ChamberDecomposition]) -> Vec<f64> {
    let pre = field.prefactor();
    (0..=field.d())
        .map(|q| {
            let mut acc = 0.0;
            for (p, dec) in field.points.iter().zip(decs) {
                acc += p.weight * dec.integral(q);
            }
            pre * acc
        })
        .collect()
}

/// Leading-order weak Morse bound `k^n c_q(delta)`.
pub fn weak_bound(field: &PencilField, q: usize, delta: f64, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    Ok((k as f64).powi(field.n as i32) * density_q(field, q, delta)?)
}

/// Entry `q < d` is `Σ_{j≤q} (-1)^{q-j} c_j`; entry `d` is [`rrh_total`].
pub fn strong_sums(field: &PencilField, delta: f64) -> Result<Vec<f64>> {
    field.check_delta(delta)?;
    let decs = field.decompose(delta)?;
    let c = densities_from(field, &decs);
    Ok(strong_from(&c, rrh_from(field, &decs)))
}

fn strong_from(c: &[f64], rrh: f64) -> Vec<f64> {
    let d = c.len() - 1;
    let mut out: Vec<f64> = (0..d)
        .map(|q| {
            (0..=q)
                .map(|j| if (q - j) % 2 == 0 { c[j] } else { -c[j] })
                .sum()
        })
        .collect();
    out.push(rrh);
    out
}

/// `Σ_j (-1)^j c_j`, evaluated as the signed integral
/// `(2π)^{-n} Σ_i w_i ∫_{-δ}^{δ} det(R_i + 2sL_i) ds`.
pub fn rrh_total(field: &PencilField, delta: f64) -> Result<f64> {
    field.check_delta(delta)?;
    Ok(rrh_from(field, &field.decompose(delta)?))
}

fn rrh_from(field: &PencilField, decs: &[ChamberDecomposition]) -> f64 {
    let mut acc = 0.0;
    for (p, dec) in field.points.iter().zip(decs) {
        acc += p.weight * dec.signed_integral();
    }
    field.prefactor() * acc
}

/// Sampled X(q) certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XqStatus {
    pub holds: bool,
    /// Largest δ for which no sample meets the q-chamber set inside `[-δ, δ]`,
    /// capped at the field's delta. Certifies the sample set only.
    pub max_delta: f64,
}

pub fn check_xq(field: &PencilField, q: usize) -> Result<XqStatus> {
    field.check_degree(q)?;
    let decs = field.decompose(field.delta)?;
    Ok(xq_from(field, &decs, q))
}

fn xq_from(field: &PencilField, decs: &[ChamberDecomposition], q: usize) -> XqStatus {
    let max_delta = decs
        .iter()
        .map(|dec| {
            dec.signature_set(q)
                .iter()
                .map(|iv| iv.distance_to(0.0))
                .fold(field.delta, f64::min)
        })
        .fold(field.delta, f64::min);
    XqStatus { holds: max_delta > 0.0, max_delta }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Positivity {
    /// Every `R_i` is positive definite.
    pub positive_everywhere: bool,
    /// Largest `δ' ≤ delta` with `R_i + 2sL_i ≥ 0` for all samples and `|s| ≤ δ'`.
    pub semi_positive_delta: Option<f64>,
    /// Some `R_i` is positive definite.
    pub positive_somewhere: bool,
}

pub fn classify_bundle(field: &PencilField) -> Result<Positivity> {
    let decs = field.decompose(field.delta)?;
    Ok(positivity_from(field, &decs))
}

fn positivity_from(field: &PencilField, decs: &[ChamberDecomposition]) -> Positivity {
    let d = field.d();
    let mut positive_everywhere = true;
    let mut positive_somewhere = false;
    let mut semi: Option<f64> = Some(field.delta);
    for (p, dec) in field.points.iter().zip(decs) {
        let inertia = p.r().inertia(p.r().default_tol());
        let pd = inertia.pos == d;
        positive_everywhere &= pd;
        positive_somewhere |= pd;
        if inertia.neg > 0 {
            semi = None;
            continue;
        }
        // PSD fails exactly on chambers carrying a negative eigenvalue.
        let reach = dec
            .chambers
            .iter()
            .filter(|c| c.inertia.neg > 0)
            .map(|c| c.interval().distance_to(0.0))
            .fold(field.delta, f64::min);
        semi = match semi {
            Some(s) if reach > 0.0 => Some(s.min(reach)),
            _ => None,
        };
    }
    Positivity { positive_everywhere, semi_positive_delta: semi, positive_somewhere }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BignessReason {
    /// The bundle is positive, so every higher chamber set is empty near `s = 0`.
    PositiveBundle,
    /// Semi-positive and positive at some sample.
    GrauertRiemenschneider,
    /// Neither criterion applies; this is not a proof that the bundle is not big.
    Inconclusive,
}

impl fmt::Display for BignessReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BignessReason::PositiveBundle => "positive CR line bundle",
            BignessReason::GrauertRiemenschneider => "Grauert-Riemenschneider criterion",
            BignessReason::Inconclusive => "criteria inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bigness {
    pub big: bool,
    pub reason: BignessReason,
}

pub fn bigness_verdict(positivity: &Positivity) -> Bigness {
    if positivity.positive_everywhere {
        Bigness { big: true, reason: BignessReason::PositiveBundle }
    } else if positivity.semi_positive_delta.is_some() && positivity.positive_somewhere {
        Bigness { big: true, reason: BignessReason::GrauertRiemenschneider }
    } else {
        Bigness { big: false, reason: BignessReason::Inconclusive }
    }
}

/// Everything the `morse` command reports for one field and one δ.
#[derive(Debug, Clone, Serialize)]
pub struct MorseReport {
    pub n: usize,
    pub d: usize,
    pub delta: f64,
    pub k: Option<u64>,
    pub densities: Vec<f64>,
    pub weak_bounds: Option<Vec<f64>>,
    pub strong_sums: Vec<f64>,
    pub rrh_total: f64,
    pub xq: Vec<XqStatus>,
    pub positivity: Positivity,
    pub bigness: Bigness,
}

pub fn morse_report(field: &PencilField, delta: f64, k: Option<u64>) -> Result<MorseReport> {
    field.check_delta(delta)?;
    if k == Some(0) {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let decs = field.decompose(delta)?;
    let densities = densities_from(field, &decs);
    let rrh_total = rrh_from(field, &decs);
    let strong_sums = strong_from(&densities, rrh_total);
    let full = if delta == field.delta { decs } else { field.decompose(field.delta)? };
    let xq = (0..=field.d()).map(|q| xq_from(field, &full, q)).collect();
    let positivity = positivity_from(field, &full);
    let weak_bounds = k.map(|k| {
        let kn = (k as f64).powi(field.n as i32);
        densities.iter().map(|c| kn * c).collect()
    });
    Ok(MorseReport {
        n: field.n,
        d: field.d(),
        delta,
        k,
        densities,
        weak_bounds,
        strong_sums,
        rrh_total,
        xq,
        positivity,
        bigness: bigness_verdict(&positivity),
    })
}
