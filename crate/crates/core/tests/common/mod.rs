//! Shared test oracles. Everything here goes through nalgebra and plain
//! adaptive Gauss-Kronrod quadrature, never through the crate's own polynomial or
//! eigenvalue code.
#![allow(dead_code)]

use crmorse::linalg::HermitianMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hermitian matrix with integer real and imaginary parts in `-range..=range`.
pub fn int_hermitian(rng: &mut ChaCha8Rng, d: usize, range: i32) -> HermitianMatrix {
    let mut e = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        e[i * d + i] = Complex64::new(rng.gen_range(-range..=range) as f64, 0.0);
        for j in i + 1..d {
            let z = Complex64::new(rng.gen_range(-range..=range) as f64, rng.gen_range(-range..=range) as f64);
            e[i * d + j] = z;
            e[j * d + i] = z.conj();
        }
    }
    HermitianMatrix::new(d, e).unwrap()
}

/// Hermitian matrix with uniform entries in `[-scale, scale]`.
pub fn real_hermitian(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> HermitianMatrix {
    let mut e = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        e[i * d + i] = Complex64::new(rng.gen_range(-scale..=scale), 0.0);
        for j in i + 1..d {
            let z = Complex64::new(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale));
            e[i * d + j] = z;
            e[j * d + i] = z.conj();
        }
    }
    HermitianMatrix::new(d, e).unwrap()
}

/// Haar-ish unitary from the QR factor of a Gaussian-like matrix, row-major.
pub fn unitary(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
    let m = DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let q = m.qr().q();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(q[(i, j)]);
        }
    }
    out
}

pub fn to_na(m: &HermitianMatrix) -> DMatrix<Complex64> {
    let d = m.dim();
    DMatrix::from_fn(d, d, |i, j| m.get(i, j))
}

/// `det(R + 2sL)` by nalgebra LU.
pub fn na_det(r: &DMatrix<Complex64>, l: &DMatrix<Complex64>, s: f64) -> f64 {
    (r + l * Complex64::new(2.0 * s, 0.0)).determinant().re
}

/// Number of negative eigenvalues of `R + 2sL`, or `None` if one is within `tol` of zero.
pub fn na_negatives(r: &DMatrix<Complex64>, l: &DMatrix<Complex64>, s: f64, tol: f64) -> Option<usize> {
    let m = r + l * Complex64::new(2.0 * s, 0.0);
    let ev = m.symmetric_eigenvalues();
    if ev.iter().any(|v| v.abs() <= tol) {
        return None;
    }
    Some(ev.iter().filter(|v| **v < 0.0).count())
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 7/15 panel: (Kronrod estimate, |Kronrod - Gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, &x) in GK_NODES.iter().enumerate() {
        let pair = if x == 0.0 { f(c) } else { f(c - h * x) + f(c + h * x) };
        kronrod += K15_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

/// Globally adaptive Gauss-Kronrod: bisects the worst panel until the summed
/// error estimate drops below `eps` or panels reach rounding width.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    adaptive_gk_classed(f, &|_| 0, a, b, eps)
}

/// As [`adaptive_gk`], but a panel whose endpoints and midpoint disagree under
/// `class` is always refined, so piecewise integrands with thin pieces next to a
/// panel edge cannot slip between the outermost nodes. Starts from 64 panels.
pub fn adaptive_gk_classed<F, C>(f: &F, class: &C, a: f64, b: f64, eps: f64) -> f64
where
    F: Fn(f64) -> f64,
    C: Fn(f64) -> usize,
{
    let min_width = 1e-13 * (b - a);
    let panel = |lo: f64, hi: f64| {
        let (val, err) = gk15(f, lo, hi);
        let mixed = class(lo) != class(hi) || class(lo) != class(0.5 * (lo + hi));
        let err = if mixed && hi - lo > min_width { err.max(f64::MAX / 1e6) } else { err };
        (lo, hi, (val, err))
    };
    let start = 64;
    let step = (b - a) / start as f64;
    let mut panels: Vec<_> = (0..start)
        .map(|i| {
            let lo = a + step * i as f64;
            let hi = if i + 1 == start { b } else { a + step * (i + 1) as f64 };
            panel(lo, hi)
        })
        .collect();
    for _ in 0..20_000 {
        let err: f64 = panels.iter().map(|p| p.2 .1).sum();
        if err <= eps {
            break;
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.1 - p.0 > min_width)
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(i, _)| i);
        let Some(idx) = worst else { break };
        let (lo, hi, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        panels.push(panel(lo, mid));
        panels.push(panel(mid, hi));
    }
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    panels.iter().map(|p| p.2 .0).sum()
}

/// `∫_{-δ}^{δ} 1_q(s) |det(R + 2sL)| ds` with the indicator read from
/// nalgebra eigenvalues. At (numerically) singular points the integrand is
/// within rounding of zero, so it is taken as zero there.
pub fn quadrature_chamber_integral(r: &HermitianMatrix, l: &HermitianMatrix, q: usize, delta: f64, eps: f64) -> f64 {
    let (rn, ln) = (to_na(r), to_na(l));
    let f = |s: f64| match na_negatives(&rn, &ln, s, 0.0) {
        Some(neg) if neg == q => na_det(&rn, &ln, s).abs(),
        _ => 0.0,
    };
    let class = |s: f64| na_negatives(&rn, &ln, s, 0.0).unwrap_or(usize::MAX);
    adaptive_gk_classed(&f, &class, -delta, delta, eps)
}

/// `∫_{-δ}^{δ} |det(R + 2sL)| ds`.
pub fn quadrature_abs_det(r: &HermitianMatrix, l: &HermitianMatrix, delta: f64, eps: f64) -> f64 {
    let (rn, ln) = (to_na(r), to_na(l));
    adaptive_gk(&|s: f64| na_det(&rn, &ln, s).abs(), -delta, delta, eps)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if got == want {
        0.0
    } else {
        (got - want).abs() / want.abs()
    }
}
