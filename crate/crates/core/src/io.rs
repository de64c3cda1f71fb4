//! Input documents, float formatting and report emission.
//!
//! Complex matrices are JSON arrays of rows whose entries are `[re, im]`
//! pairs. Every float written by this module carries 17 significant digits.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::model::ModelData;
use crate::morse::{PencilField, PencilPoint};

pub const SCHEMA_VERSION: u32 = 1;
/// Largest `|a_ij - conj(a_ji)|` accepted before symmetrization.
pub const HERMITIAN_RESIDUAL: f64 = 1e-9;

pub type ComplexRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDocument {
    pub label: String,
    pub weight: f64,
    #[serde(rename = "R")]
    pub r: ComplexRows,
    #[serde(rename = "L")]
    pub l: ComplexRows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDocument {
    pub schema: u32,
    pub n: usize,
    pub delta: f64,
    pub points: Vec<PointDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub schema: u32,
    pub lambda: Vec<f64>,
    pub mu: ComplexRows,
    pub delta: f64,
}

fn from_json<'de, T: Deserialize<'de>>(bytes: &'de [u8]) -> Result<T> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::InvalidInput(format!("at {path}: {inner}"))
    })
}

fn check_schema(schema: u32) -> Result<()> {
    if schema != SCHEMA_VERSION {
        return Err(Error::InvalidInput(format!(
            "at schema: unsupported version {schema}, expected {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

/// Square, Hermitian up to [`HERMITIAN_RESIDUAL`]; errors name `path`.
pub fn matrix_from_rows(rows: &ComplexRows, dim: usize, path: &str) -> Result<HermitianMatrix> {
    if rows.len() != dim {
        return Err(Error::DimensionMismatch(format!("at {path}: expected {dim} rows, got {}", rows.len())));
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "at {path}[{i}]: expected {dim} entries, got {}",
                row.len()
            )));
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::InvalidInput(format!("at {path}[{i}][{j}]: entry is not finite")));
            }
            entries.push(Complex64::new(re, im));
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let a = entries[i * dim + j];
            let b = entries[j * dim + i];
            let residual = (a - b.conj()).norm();
            if residual > HERMITIAN_RESIDUAL {
                return Err(Error::NotHermitian(format!(
                    "at {path}[{i}][{j}]: {a} is not the conjugate of {path}[{j}][{i}] = {b} (residual {residual:e})"
                )));
            }
        }
    }
    HermitianMatrix::with_tolerance(dim, entries, f64::INFINITY)
}

pub fn matrix_to_rows(m: &HermitianMatrix) -> ComplexRows {
    m.rows()
        .iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Parses and validates a field document.
pub fn parse_field(bytes: &[u8]) -> Result<PencilField> {
    let doc: FieldDocument = from_json(bytes)?;
    field_from_document(&doc)
}

pub fn field_from_document(doc: &FieldDocument) -> Result<PencilField> {
    check_schema(doc.schema)?;
    if doc.n < 2 {
        return Err(Error::InvalidInput(format!("at n: must be at least 2, got {}", doc.n)));
    }
    if doc.points.is_empty() {
        return Err(Error::InvalidInput("at points: at least one sample is required".into()));
    }
    let d = doc.n - 1;
    let points = doc
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if !(p.weight > 0.0 && p.weight.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "at points[{i}].weight: must be positive, got {}",
                    p.weight
                )));
            }
            let r = matrix_from_rows(&p.r, d, &format!("points[{i}].R"))?;
            let l = matrix_from_rows(&p.l, d, &format!("points[{i}].L"))?;
            PencilPoint::new(p.label.clone(), p.weight, r, l)
        })
        .collect::<Result<Vec<_>>>()?;
    PencilField::new(doc.n, doc.delta, points).map_err(|e| match e {
        Error::InvalidInput(m) if m.starts_with("delta") => Error::InvalidInput(format!("at delta: {m}")),
        other => other,
    })
}

pub fn field_to_document(field: &PencilField) -> FieldDocument {
    FieldDocument {
        schema: SCHEMA_VERSION,
        n: field.n(),
        delta: field.delta(),
        points: field
            .points()
            .iter()
            .map(|p| PointDocument {
                label: p.label.clone(),
                weight: p.weight,
                r: matrix_to_rows(p.r()),
                l: matrix_to_rows(p.l()),
            })
            .collect(),
    }
}

pub fn parse_model(bytes: &[u8]) -> Result<ModelData> {
    let doc: ModelDocument = from_json(bytes)?;
    check_schema(doc.schema)?;
    let mu = matrix_from_rows(&doc.mu, doc.lambda.len(), "mu")?;
    ModelData::new(doc.lambda, mu, doc.delta)
}

pub fn model_to_document(data: &ModelData) -> ModelDocument {
    ModelDocument {
        schema: SCHEMA_VERSION,
        lambda: data.lambda().to_vec(),
        mu: matrix_to_rows(data.mu()),
        delta: data.delta(),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Pretty JSON whose floats all carry 17 significant digits.
struct Sig17Formatter(PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(writer $(, $arg)*)
        })*
    };
}

impl Formatter for Sig17Formatter {
    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );

    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize report: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_f64(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<i128> for Cell {
    fn from(v: i128) -> Self {
        Cell::Int(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<i8> for Cell {
    fn from(v: i8) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map(Into::into).unwrap_or(Cell::Empty)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io_err = |e: csv::Error| Error::InvalidInput(format!("cannot write CSV: {e}"));
        w.write_record(&self.columns).map_err(io_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("cannot write CSV: {e}")))?;
        Ok(String::from_utf8(bytes).expect("CSV of UTF-8 cells"))
    }
}

/// Envelope around every command's output.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: String,
    pub command: Vec<String>,
    pub input_sha256: Option<String>,
    pub results: serde_json::Value,
    pub table: Option<Table>,
    pub timing_ms: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"schema":1,"n":2,"delta":1.0,"points":[{"label":"p","weight":1.0,"R":[[[2,0]]],"L":[[[1,0]]]}]}"#;

    #[test]
    fn minimal_document() {
        let f = parse_field(MINIMAL.as_bytes()).unwrap();
        assert_eq!(f.d(), 1);
        assert_eq!(f.points()[0].label, "p");
    }

    #[test]
    fn conjugate_mismatch_named() {
        let doc = r#"{"schema":1,"n":3,"delta":1.0,"points":[{"label":"p","weight":1.0,
            "R":[[[1,0],[0,1]],[[0,1],[1,0]]],"L":[[[0,0],[0,0]],[[0,0],[0,0]]]}]}"#;
        match parse_field(doc.as_bytes()) {
            Err(Error::NotHermitian(m)) => assert!(m.contains("points[0].R[0][1]"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_weight_named() {
        let doc = MINIMAL.replace("\"weight\":1.0", "\"weight\":0");
        match parse_field(doc.as_bytes()) {
            Err(Error::InvalidInput(m)) => assert!(m.contains("points[0].weight"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_path() {
        let doc = MINIMAL.replace("\"R\":[[[2,0]]]", "\"R\":[[[2,0,7]]]");
        match parse_field(doc.as_bytes()) {
            Err(Error::InvalidInput(m)) => assert!(m.contains("points[0].R"), "{m}"),
            other => panic!("{other:?}"),
        }
        let doc = MINIMAL.replace("\"delta\":1.0", "\"delta\":\"x\"");
        assert!(matches!(parse_field(doc.as_bytes()), Err(Error::InvalidInput(m)) if m.contains("delta")));
    }

    #[test]
    fn dimension_mismatch_named() {
        let doc = MINIMAL.replace("\"n\":2", "\"n\":3");
        assert!(matches!(parse_field(doc.as_bytes()), Err(Error::DimensionMismatch(m)) if m.contains("points[0].R")));
    }

    #[test]
    fn round_trip() {
        let f = parse_field(MINIMAL.as_bytes()).unwrap();
        let text = to_json_string(&field_to_document(&f)).unwrap();
        assert_eq!(parse_field(text.as_bytes()).unwrap(), f);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
        let json = to_json_string(&vec![0.5, 2.0]).unwrap();
        assert!(json.contains("5.0000000000000000e-1"));
        let back: Vec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![0.5, 2.0]);
    }

    #[test]
    fn csv_cells() {
        let mut t = Table::new(&["k", "x", "label"]);
        t.push(vec![Cell::from(3u64), Cell::from(0.25), Cell::from("a,b")]);
        assert_eq!(t.to_csv().unwrap(), "k,x,label\n3,2.5000000000000000e-1,\"a,b\"\n");
    }
}
