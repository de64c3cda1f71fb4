//! Command-line front end for the `crmorse` binary.
//!
//! Exit codes: 0 success, 2 input error, 3 degenerate pencil, 4 calibration
//! failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::io::{parse_field, parse_model, sha256_hex, to_json_string, Report, Table};
use crate::linalg::HermitianMatrix;
use crate::model::{bergman_bruteforce, bergman_diag, eta_chambers, extremal_form, szego_density, DEFAULT_ETA_QUAD_POINTS};
use crate::morse::{bigness_verdict, classify_bundle, morse_report, PencilField};
use crate::oracles::{
    convergence, fourier_dimension_sum, heisenberg_field, k_sequence, levi_flat_field, torus_bundle_field, Comparison,
    HeisenbergSpec, IntMatrix, LatticeCalibration, TorusBundleSpec, CALIBRATION_FILE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_CALIBRATION: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::DegeneratePencil { .. } => EXIT_DEGENERATE,
        Error::Calibration(_) => EXIT_CALIBRATION,
        _ => EXIT_INPUT,
    }
}

#[derive(Debug, Parser)]
#[command(name = "crmorse", version, about = "Chamber integrals and Morse-inequality densities for Hermitian pencils R + 2sL")]
pub struct Cli {
    /// Worker threads for per-sample and per-mode work (default: all cores).
    #[arg(long, global = true, env = "CRMORSE_THREADS")]
    threads: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Chamber table of one sample (or all samples) of a field.
    Chambers {
        #[command(flatten)]
        field: FieldArgs,
        /// Sample index; all samples when omitted.
        #[arg(long)]
        point: Option<usize>,
        /// Root-isolation tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Densities, strong sums, X(q), positivity and bigness. With --out, writes both .json and .csv.
    Morse {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: Option<u64>,
    },
    /// Positivity classification and bigness verdict.
    Classify {
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Model Szego density per degree.
    SzegoDensity {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        q: Option<usize>,
    },
    /// Extremal form with its norm and peak checks.
    ExtremalCheck {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        q: usize,
        /// Gauss-Legendre nodes per eta-chamber.
        #[arg(long, default_value_t = DEFAULT_ETA_QUAD_POINTS)]
        eta_points: usize,
        /// Evaluation point as re,im pairs: "x1,y1;x2,y2" (default origin).
        #[arg(long)]
        z: Option<String>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta: f64,
    },
    /// Closed-form model Bergman density against the monomial Gram oracle.
    BergmanCheck {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        eta: f64,
        #[arg(long, default_value_t = 0)]
        q: usize,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
    },
    /// Torus circle-bundle example: field report and oracle mode sums.
    TorusDemo {
        #[arg(long, value_enum, default_value_t = Example::TorusD1)]
        example: Example,
        #[arg(long, default_value_t = 100)]
        k: u64,
        #[command(flatten)]
        calibration: CalibrationArgs,
    },
    /// Compact Heisenberg example from integer Levi eigenvalues and curvature.
    HeisenbergDemo {
        /// Levi eigenvalues, comma separated nonzero integers.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,2")]
        lambda: Vec<i64>,
        /// Integer curvature matrix, rows separated by ';'.
        #[arg(long, allow_hyphen_values = true, default_value = "3,1;1,3")]
        mu: String,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long)]
        k: Option<u64>,
    },
    /// Levi-flat product M x S^1 and the matching curvature-integral coefficient.
    LeviFlatDemo {
        /// Real symmetric curvature matrix, rows separated by ';'.
        #[arg(long, allow_hyphen_values = true, default_value = "1,0;0,1")]
        mu: String,
        /// Volume of M; the sample weight is 2*pi*volume.
        #[arg(long, default_value_t = 1.0)]
        volume: f64,
    },
    /// Derive (or check) the lattice calibration record.
    Calibrate {
        #[command(flatten)]
        calibration: CalibrationArgs,
        /// Re-derive and overwrite an existing record.
        #[arg(long)]
        force: bool,
    },
    /// Oracle mode sums against calibrated Morse bounds over a range of k.
    Convergence {
        #[arg(long, value_enum, default_value_t = Example::TorusD1)]
        example: Example,
        #[arg(long, default_value_t = 0)]
        q: usize,
        #[arg(long, default_value_t = 10)]
        kmin: u64,
        #[arg(long, default_value_t = 1000)]
        kmax: u64,
        /// Reference k at which the field weight is fixed.
        #[arg(long, default_value_t = 50)]
        kref: u64,
        /// Compare the alternating sum over q against the signed total instead.
        #[arg(long)]
        rrh: bool,
        #[command(flatten)]
        calibration: CalibrationArgs,
    },
}

#[derive(Debug, Args)]
struct FieldArgs {
    /// Field document (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Integration half-width; defaults to the document's delta.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Model document (JSON).
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct CalibrationArgs {
    /// Calibration record path.
    #[arg(long, default_value = CALIBRATION_FILE)]
    calibration: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Example {
    TorusD1,
    TorusD2Indefinite,
}

impl Example {
    fn spec(self) -> TorusBundleSpec {
        match self {
            Example::TorusD1 => TorusBundleSpec::example_d1(),
            Example::TorusD2Indefinite => TorusBundleSpec::example_d2_indefinite(),
        }
    }
}

struct Output {
    input: Option<Vec<u8>>,
    results: serde_json::Value,
    table: Table,
    default_format: Format,
    /// Write both formats when `--out` is given.
    both: bool,
}

/// Parses `args`, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.threads {
        // Ignored if a pool already exists (repeated in-process calls).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let start = Instant::now();
    let result = dispatch(&cli.command).and_then(|out| emit(&cli, echo, out, start));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(cli: &Cli, command: Vec<String>, out: Output, start: Instant) -> Result<()> {
    let report = Report {
        tool: format!("crmorse {}", env!("CARGO_PKG_VERSION")),
        command,
        input_sha256: out.input.as_deref().map(sha256_hex),
        results: out.results,
        table: Some(out.table.clone()),
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let format = cli.format.unwrap_or(out.default_format);
    let render = |f: Format| match f {
        Format::Json => to_json_string(&report),
        Format::Csv => out.table.to_csv(),
    };
    match &cli.out {
        Some(path) if out.both => {
            write_file(&path.with_extension("json"), &render(Format::Json)?)?;
            write_file(&path.with_extension("csv"), &render(Format::Csv)?)
        }
        Some(path) => write_file(path, &render(format)?),
        None => {
            print!("{}", render(format)?);
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn load_field(args: &FieldArgs) -> Result<(Vec<u8>, PencilField, f64)> {
    let bytes = read_input(&args.input)?;
    let field = parse_field(&bytes)?;
    let delta = args.delta.unwrap_or(field.delta());
    Ok((bytes, field, delta))
}

fn to_value<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn dispatch(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Chambers { field, point, tol } => cmd_chambers(field, *point, *tol),
        Command::Morse { field, k } => {
            let (bytes, f, delta) = load_field(field)?;
            let mut out = morse_output(&f, delta, *k)?;
            out.input = Some(bytes);
            Ok(out)
        }
        Command::Classify { field } => {
            let (bytes, f, _) = load_field(field)?;
            let positivity = classify_bundle(&f)?;
            let bigness = bigness_verdict(&positivity);
            let mut table = Table::new(&["positive_everywhere", "semi_positive_delta", "positive_somewhere", "big", "reason"]);
            table.push(vec![
                positivity.positive_everywhere.into(),
                positivity.semi_positive_delta.into(),
                positivity.positive_somewhere.into(),
                bigness.big.into(),
                bigness.reason.to_string().into(),
            ]);
            Ok(Output {
                input: Some(bytes),
                results: json!({ "positivity": to_value(&positivity), "bigness": { "big": bigness.big, "reason": bigness.reason.to_string() } }),
                table,
                default_format: Format::Json,
                both: false,
            })
        }
        Command::SzegoDensity { model, q } => {
            let bytes = read_input(&model.input)?;
            let data = parse_model(&bytes)?;
            let qs: Vec<usize> = match q {
                Some(q) => vec![*q],
                None => (0..=data.d()).collect(),
            };
            let mut table = Table::new(&["q", "szego_density"]);
            let mut values = Vec::new();
            for &q in &qs {
                let v = szego_density(&data, q)?;
                table.push(vec![q.into(), v.into()]);
                values.push(json!({ "q": q, "szego_density": v }));
            }
            let chambers = eta_chambers(&data)?;
            Ok(Output {
                input: Some(bytes),
                results: json!({ "densities": values, "eta_chambers": to_value(&chambers.decomposition.chambers) }),
                table,
                default_format: Format::Json,
                both: false,
            })
        }
        Command::ExtremalCheck { model, q, eta_points, z, theta } => {
            let bytes = read_input(&model.input)?;
            let data = parse_model(&bytes)?;
            let z = match z {
                Some(s) => parse_complex_vector(s, data.d())?,
                None => vec![Complex64::new(0.0, 0.0); data.d()],
            };
            let u = extremal_form(&data, *q, &z, *theta, *eta_points)?;
            let mut table = Table::new(&["J", "re", "im", "norm_check", "peak_check"]);
            for (j, c) in u.indices.iter().zip(&u.value) {
                let label = j.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ");
                table.push(vec![label.into(), c.re.into(), c.im.into(), u.norm_check.into(), u.peak_check.into()]);
            }
            Ok(Output { input: Some(bytes), results: to_value(&u), table, default_format: Format::Json, both: false })
        }
        Command::BergmanCheck { model, eta, q, max_degree } => {
            let bytes = read_input(&model.input)?;
            let data = parse_model(&bytes)?;
            let origin = vec![Complex64::new(0.0, 0.0); data.d()];
            let closed = bergman_diag(&data, *eta, *q, &origin)?;
            let brute = if *q == 0 && !closed.on_boundary && closed.value > 0.0 {
                Some(bergman_bruteforce(&data, *eta, *max_degree)?)
            } else {
                None
            };
            let rel = brute.map(|b| (closed.value - b).abs() / b.abs());
            let mut table = Table::new(&["eta", "q", "closed_form", "on_boundary", "gram_oracle", "relative_difference"]);
            table.push(vec![(*eta).into(), (*q).into(), closed.value.into(), closed.on_boundary.into(), brute.into(), rel.into()]);
            Ok(Output {
                input: Some(bytes),
                results: json!({
                    "eta": eta, "q": q, "max_degree": max_degree,
                    "closed_form": closed.value, "on_boundary": closed.on_boundary,
                    "gram_oracle": brute, "relative_difference": rel,
                }),
                table,
                default_format: Format::Json,
                both: false,
            })
        }
        Command::TorusDemo { example, k, calibration } => {
            let cal = LatticeCalibration::load_or_create(&calibration.calibration)?;
            let spec = example.spec();
            let field = torus_bundle_field(&spec)?;
            let report = morse_report(&field, spec.delta, Some(*k))?;
            let mut table = Table::new(&["q", "density", "weak_bound_unit_weight", "oracle_sum"]);
            let mut sums = Vec::new();
            for q in 0..=spec.d() {
                let s = fourier_dimension_sum(&spec, q, *k, &cal)?;
                sums.push(s);
                let bound = report.weak_bounds.as_ref().map(|w| w[q]);
                table.push(vec![q.into(), report.densities[q].into(), bound.into(), s.into()]);
            }
            Ok(Output {
                input: None,
                results: json!({
                    "lambda": spec.lambda.rows(), "mu": spec.mu.rows(), "delta": spec.delta, "k": k,
                    "calibration": to_value(&cal), "morse": to_value(&report), "oracle_sums": sums,
                }),
                table,
                default_format: Format::Json,
                both: false,
            })
        }
        Command::HeisenbergDemo { lambda, mu, delta, k } => {
            let spec = HeisenbergSpec { lambda: lambda.clone(), mu: IntMatrix::from_rows(&parse_int_rows(mu)?)?, delta: *delta };
            let field = heisenberg_field(&spec)?;
            let mut out = morse_output(&field, *delta, *k)?;
            out.results["lambda"] = json!(spec.lambda);
            out.results["mu"] = json!(spec.mu.rows());
            out.both = false;
            Ok(out)
        }
        Command::LeviFlatDemo { mu, volume } => {
            if !(*volume > 0.0 && volume.is_finite()) {
                return Err(Error::InvalidInput(format!("volume must be positive, got {volume}")));
            }
            let mu = HermitianMatrix::from_real_rows(&parse_real_rows(mu)?)?;
            let field = levi_flat_field(&mu, 1.0)?.with_weight_scale(2.0 * std::f64::consts::PI * volume)?;
            let report = morse_report(&field, 1.0, None)?;
            let mut table = Table::new(&["q", "density", "curvature_coefficient"]);
            for (q, c) in report.densities.iter().enumerate() {
                table.push(vec![q.into(), (*c).into(), (c / 2.0).into()]);
            }
            let coefficients: Vec<f64> = report.densities.iter().map(|c| c / 2.0).collect();
            Ok(Output {
                input: None,
                results: json!({ "volume": volume, "morse": to_value(&report), "curvature_coefficients": coefficients }),
                table,
                default_format: Format::Json,
                both: false,
            })
        }
        Command::Calibrate { calibration, force } => {
            let path = &calibration.calibration;
            if *force && path.exists() {
                std::fs::remove_file(path).map_err(|e| Error::Calibration(format!("cannot replace {}: {e}", path.display())))?;
            }
            let cal = LatticeCalibration::load_or_create(path)?;
            let mut table = Table::new(&["c_mode", "c_dim", "path"]);
            table.push(vec![
                format!("{}/{}", cal.c_mode.numer(), cal.c_mode.denom()).into(),
                format!("{}/{}", cal.c_dim.numer(), cal.c_dim.denom()).into(),
                path.display().to_string().into(),
            ]);
            Ok(Output {
                input: None,
                results: json!({ "calibration": to_value(&cal), "path": path.display().to_string(), "verified": true }),
                table,
                default_format: Format::Json,
                both: false,
            })
        }
        Command::Convergence { example, q, kmin, kmax, kref, rrh, calibration } => {
            if *kmin == 0 || kmax < kmin {
                return Err(Error::InvalidInput(format!("need 1 <= kmin <= kmax, got {kmin}..{kmax}")));
            }
            let cal = LatticeCalibration::load_or_create(&calibration.calibration)?;
            let cmp = if *rrh { Comparison::Alternating } else { Comparison::Weak { q: *q } };
            let ks = k_sequence(*kmin, *kmax);
            let t = convergence(&example.spec(), cmp, *kref, &ks, &cal)?;
            let mut table = Table::new(&["k", "oracle_sum", "bound", "ratio"]);
            for r in &t.rows {
                table.push(vec![r.k.into(), r.oracle_sum.into(), r.bound.into(), r.ratio.into()]);
            }
            let rows: Vec<serde_json::Value> = t
                .rows
                .iter()
                .map(|r| json!({ "k": r.k, "oracle_sum": r.oracle_sum.to_string(), "bound": r.bound, "ratio": r.ratio }))
                .collect();
            Ok(Output {
                input: None,
                results: json!({
                    "comparison": to_value(&t.comparison), "k_ref": t.k_ref, "weight": t.weight,
                    "unit_density": t.unit_density, "rows": rows,
                }),
                table,
                default_format: Format::Csv,
                both: false,
            })
        }
    }
}

fn cmd_chambers(args: &FieldArgs, point: Option<usize>, tol: Option<f64>) -> Result<Output> {
    let (bytes, field, delta) = load_field(args)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
    }
    let indices: Vec<usize> = match point {
        Some(i) if i >= field.points().len() => {
            return Err(Error::InvalidInput(format!(
                "--point {i} is out of range; the field has {} samples",
                field.points().len()
            )))
        }
        Some(i) => vec![i],
        None => (0..field.points().len()).collect(),
    };
    let mut table = Table::new(&["point", "label", "lo", "hi", "neg", "zero", "pos", "det_sign", "abs_integral"]);
    let mut samples = Vec::new();
    for i in indices {
        let p = &field.points()[i];
        let dec = p.pencil.chambers(delta, tol).map_err(|e| e.at(format!("sample '{}'", p.label)))?;
        for c in &dec.chambers {
            table.push(vec![
                i.into(),
                p.label.as_str().into(),
                c.lo.into(),
                c.hi.into(),
                c.inertia.neg.into(),
                c.inertia.zero.into(),
                c.inertia.pos.into(),
                c.det_sign.into(),
                dec.det_poly.integral(c.lo, c.hi).abs().into(),
            ]);
        }
        samples.push(json!({
            "point": i, "label": p.label, "roots": dec.roots,
            "det_coefficients": dec.det_poly.coeffs(), "chambers": to_value(&dec.chambers),
        }));
    }
    Ok(Output {
        input: Some(bytes),
        results: json!({ "delta": delta, "samples": samples }),
        table,
        default_format: Format::Csv,
        both: false,
    })
}

fn morse_output(field: &PencilField, delta: f64, k: Option<u64>) -> Result<Output> {
    let report = morse_report(field, delta, k)?;
    let mut table = Table::new(&["q", "density", "weak_bound", "strong_sum", "xq_holds", "xq_max_delta"]);
    for q in 0..=report.d {
        table.push(vec![
            q.into(),
            report.densities[q].into(),
            report.weak_bounds.as_ref().map(|w| w[q]).into(),
            report.strong_sums[q].into(),
            report.xq[q].holds.into(),
            report.xq[q].max_delta.into(),
        ]);
    }
    let mut results = to_value(&report);
    results["bigness"]["reason"] = json!(report.bigness.reason.to_string());
    Ok(Output { input: None, results, table, default_format: Format::Json, both: true })
}

fn parse_rows<T: std::str::FromStr>(text: &str) -> Result<Vec<Vec<T>>>
where
    T::Err: std::fmt::Display,
{
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<T>()
                        .map_err(|e| Error::InvalidInput(format!("matrix entry '{}': {e}", x.trim())))
                })
                .collect()
        })
        .collect()
}

fn parse_int_rows(text: &str) -> Result<Vec<Vec<i64>>> {
    parse_rows(text)
}

fn parse_real_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    parse_rows(text)
}

fn parse_complex_vector(text: &str, d: usize) -> Result<Vec<Complex64>> {
    let rows: Vec<Vec<f64>> = parse_rows(text)?;
    if rows.len() != d || rows.iter().any(|r| r.len() != 2) {
        return Err(Error::InvalidInput(format!("--z needs {d} entries of the form re,im separated by ';'")));
    }
    Ok(rows.iter().map(|r| Complex64::new(r[0], r[1])).collect())
}
