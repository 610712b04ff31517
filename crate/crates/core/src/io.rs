//! JSON file formats.
//!
//! * channel: `{"dim": n, "kraus": [op, ...]}`, each op an `n x n` row-major
//!   array of `[re, im]` pairs;
//! * certificate: `{"u": m, "g": m, "w": m, "antiunitary": bool}`;
//! * classical matrix: `{"n": n, "rows": [[...], ...]}`.
//!
//! Floating point numbers are written in scientific notation with 17
//! significant digits. Readers reject non-finite values.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Map, Number, Value};

use crate::birkhoff::{DsMatrix, PermutationDecomposition};
use crate::channel::{Channel, KrausFamily};
use crate::conjugacy::ConjugacyCertificate;
use crate::error::{Error, Result};
use crate::extremality::{DependencyCertificate, ExtremalDecomposition, ExtremalityKind, ExtremalityVerdict};
use crate::numerics::{c64, CMatrix, Tolerance};
use crate::spectral::{CyclicFamily, SpectralClassification};

/// JSON number with 17 significant digits; non-finite values become `null`.
pub fn number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(Number::from_string_unchecked(format!("{x:.16e}")))
}

pub fn complex_value(z: Complex64) -> Value {
    Value::Array(vec![number(z.re), number(z.im)])
}

pub fn complex_list(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().map(|z| complex_value(*z)).collect())
}

pub fn real_list(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| number(*x)).collect())
}

/// Row-major array of `[re, im]` pairs.
pub fn matrix_value(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_value(m[(i, j)])).collect()))
            .collect(),
    )
}

fn finite(v: &Value, what: &str) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| Error::InvalidInput(format!("{what}: expected a number, got {v}")))?;
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("{what}: non-finite number {v}")));
    }
    Ok(x)
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::InvalidInput(format!("{what}: expected an array")))
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::InvalidInput(format!("missing field \"{key}\"")))
}

fn parse_complex(v: &Value, what: &str) -> Result<Complex64> {
    let pair = array(v, what)?;
    if pair.len() != 2 {
        return Err(Error::InvalidInput(format!("{what}: expected [re, im]")));
    }
    Ok(c64(finite(&pair[0], what)?, finite(&pair[1], what)?))
}

/// Parses a row-major array of `[re, im]` pairs; `expect` fixes the size.
pub fn parse_matrix(v: &Value, expect: Option<(usize, usize)>, what: &str) -> Result<CMatrix> {
    let rows = array(v, what)?;
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Dimension(format!("{what}: empty matrix")));
    }
    let ncols = array(&rows[0], what)?.len();
    if let Some((r, c)) = expect {
        if (r, c) != (nrows, ncols) {
            return Err(Error::Dimension(format!(
                "{what}: expected {r}x{c}, got {nrows}x{ncols}"
            )));
        }
    }
    let mut m = CMatrix::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        let row = array(row, what)?;
        if row.len() != ncols {
            return Err(Error::Dimension(format!("{what}: ragged row {i}")));
        }
        for (j, z) in row.iter().enumerate() {
            m[(i, j)] = parse_complex(z, what)?;
        }
    }
    Ok(m)
}

fn parse_dim(v: &Value, key: &str) -> Result<usize> {
    let n = field(v, key)?
        .as_u64()
        .ok_or_else(|| Error::InvalidInput(format!("\"{key}\" must be a positive integer")))?;
    if n == 0 {
        return Err(Error::InvalidInput(format!("\"{key}\" must be positive")));
    }
    Ok(n as usize)
}

pub fn family_value(family: &KrausFamily) -> Value {
    json!({
        "dim": family.dim(),
        "kraus": Value::Array(family.ops().iter().map(matrix_value).collect()),
    })
}

pub fn parse_family(v: &Value) -> Result<KrausFamily> {
    let n = parse_dim(v, "dim")?;
    let ops = array(field(v, "kraus")?, "kraus")?
        .iter()
        .enumerate()
        .map(|(k, op)| parse_matrix(op, Some((n, n)), &format!("kraus[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    KrausFamily::new(ops)
}

pub fn read_family(text: &str) -> Result<KrausFamily> {
    parse_family(&serde_json::from_str(text)?)
}

pub fn write_family(family: &KrausFamily) -> String {
    to_pretty(&family_value(family))
}

/// Reads a channel file and canonicalizes it (the map must be unital).
pub fn read_channel(text: &str, tol: &Tolerance) -> Result<Channel> {
    Channel::from_family(&read_family(text)?, tol)
}

pub fn write_channel(ch: &Channel) -> String {
    write_family(ch.kraus())
}

pub fn certificate_value(cert: &ConjugacyCertificate) -> Value {
    json!({
        "u": matrix_value(&cert.u),
        "g": matrix_value(&cert.g),
        "w": matrix_value(&cert.w),
        "antiunitary": cert.antiunitary,
    })
}

pub fn read_certificate(text: &str) -> Result<ConjugacyCertificate> {
    let v: Value = serde_json::from_str(text)?;
    let antiunitary = field(&v, "antiunitary")?
        .as_bool()
        .ok_or_else(|| Error::InvalidInput("\"antiunitary\" must be a boolean".into()))?;
    Ok(ConjugacyCertificate {
        u: parse_matrix(field(&v, "u")?, None, "u")?,
        g: parse_matrix(field(&v, "g")?, None, "g")?,
        w: parse_matrix(field(&v, "w")?, None, "w")?,
        antiunitary,
    })
}

pub fn write_certificate(cert: &ConjugacyCertificate) -> String {
    to_pretty(&certificate_value(cert))
}

pub fn ds_matrix_value(s: &DMatrix<f64>) -> Value {
    json!({
        "n": s.nrows(),
        "rows": Value::Array(
            (0..s.nrows())
                .map(|i| Value::Array((0..s.ncols()).map(|j| number(s[(i, j)])).collect()))
                .collect()
        ),
    })
}

/// Reads `{"n": n, "rows": [...]}` without checking double stochasticity.
pub fn read_real_matrix(text: &str) -> Result<DMatrix<f64>> {
    let v: Value = serde_json::from_str(text)?;
    let n = parse_dim(&v, "n")?;
    let rows = array(field(&v, "rows")?, "rows")?;
    if rows.len() != n {
        return Err(Error::Dimension(format!("expected {n} rows, got {}", rows.len())));
    }
    let mut s = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = array(row, "rows")?;
        if row.len() != n {
            return Err(Error::Dimension(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        for (j, x) in row.iter().enumerate() {
            s[(i, j)] = finite(x, "rows")?;
        }
    }
    Ok(s)
}

pub fn read_ds_matrix(text: &str, tol: &Tolerance) -> Result<DsMatrix> {
    DsMatrix::new(read_real_matrix(text)?, tol)
}

/// `[{"weight": w, "permutation": [...]}, ...]` with 0-based permutations.
pub fn permutation_decomposition_value(dec: &PermutationDecomposition) -> Value {
    Value::Array(
        dec.terms
            .iter()
            .map(|(w, perm)| json!({ "weight": number(*w), "permutation": perm }))
            .collect(),
    )
}

/// `[{"weight": w, "channel": {...}}, ...]`.
pub fn decomposition_value(dec: &ExtremalDecomposition) -> Value {
    Value::Array(
        dec.terms
            .iter()
            .map(|t| json!({ "weight": number(t.weight), "channel": family_value(t.channel.kraus()) }))
            .collect(),
    )
}

/// Reads a decomposition report back into `(weight, family)` pairs.
pub fn read_decomposition(text: &str) -> Result<Vec<(f64, KrausFamily)>> {
    let v: Value = serde_json::from_str(text)?;
    array(&v, "decomposition")?
        .iter()
        .map(|t| Ok((finite(field(t, "weight")?, "weight")?, parse_family(field(t, "channel")?)?)))
        .collect()
}

pub fn kind_name(kind: ExtremalityKind) -> &'static str {
    match kind {
        ExtremalityKind::Cp => "cp",
        ExtremalityKind::CpPhi => "cp_phi",
    }
}

pub fn dependency_certificate_value(cert: &DependencyCertificate) -> Value {
    json!({ "kind": kind_name(cert.kind), "lambda": matrix_value(&cert.lambda) })
}

pub fn verdict_value(v: &ExtremalityVerdict) -> Value {
    json!({
        "extremal": v.extremal,
        "rank": v.rank,
        "certificate": v.certificate.as_ref().map(dependency_certificate_value),
    })
}

pub fn classification_value(c: &SpectralClassification, cyclic: Option<&CyclicFamily>) -> Value {
    let mut m = Map::new();
    m.insert("eigenvalues".into(), complex_list(&c.eigenvalues));
    m.insert("fixed_dim".into(), json!(c.fixed_dim));
    m.insert("ergodic".into(), json!(c.ergodic));
    m.insert("peripheral".into(), complex_list(&c.peripheral));
    m.insert("period".into(), json!(c.period));
    m.insert("aperiodic".into(), json!(c.aperiodic));
    m.insert("strongly_mixing".into(), json!(c.strongly_mixing));
    if let Some(f) = cyclic {
        m.insert(
            "projections".into(),
            Value::Array(f.projections.iter().map(matrix_value).collect()),
        );
    }
    Value::Object(m)
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are serializable");
    s.push('\n');
    s
}
