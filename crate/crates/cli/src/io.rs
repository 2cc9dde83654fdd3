//! JSON input and output of vectors, matrices, frames, framings and
//! measures.
//!
//! Entries are either a bare number or a `[re, im]` pair. Matrices are
//! row-major lists of rows.

use std::path::Path;

use anyhow::{anyhow, Context};
use dilationkit::{Frame, Framing, Matrix, Ovm, Scalar, Vector};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::report::Failure;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Entry> for Scalar {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Real(re) => Scalar::new(re, 0.0),
            Entry::Complex([re, im]) => Scalar::new(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameFile {
    dim: usize,
    vectors: Vec<Vec<Entry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairFile {
    x: Vec<Entry>,
    y: Vec<Entry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FramingFile {
    dim: usize,
    pairs: Vec<PairFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OvmFile {
    dim_in: usize,
    dim_out: usize,
    atoms: Vec<Vec<Vec<Entry>>>,
}

/// Raw bytes of an input file.
pub fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Usage)
}

fn parse<T: for<'de> Deserialize<'de>>(bytes: &[u8], what: &str) -> Result<T, Failure> {
    serde_json::from_slice(bytes)
        .with_context(|| format!("parsing {what} JSON"))
        .map_err(Failure::Usage)
}

fn vector(entries: Vec<Entry>, dim: usize, what: &str) -> Result<Vector, Failure> {
    if entries.len() != dim {
        return Err(Failure::Usage(anyhow!(
            "{what} has {} entries, expected {dim}",
            entries.len()
        )));
    }
    Ok(Vector::from_iterator(dim, entries.into_iter().map(Scalar::from)))
}

fn matrix(rows: Vec<Vec<Entry>>, nrows: usize, ncols: usize, what: &str) -> Result<Matrix, Failure> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Failure::Usage(anyhow!("{what} is not {nrows}x{ncols}")));
    }
    Ok(Matrix::from_row_iterator(
        nrows,
        ncols,
        rows.into_iter().flatten().map(Scalar::from),
    ))
}

/// Shape and finiteness problems are input errors.
fn shape_error(e: dilationkit::Error) -> Failure {
    match e {
        dilationkit::Error::DimensionMismatch(_)
        | dilationkit::Error::NonFinite(_)
        | dilationkit::Error::InvalidArgument(_) => Failure::Usage(e.into()),
        other => other.into(),
    }
}

pub fn parse_frame(bytes: &[u8]) -> Result<Frame, Failure> {
    let f: FrameFile = parse(bytes, "frame")?;
    let vectors = f
        .vectors
        .into_iter()
        .enumerate()
        .map(|(i, v)| vector(v, f.dim, &format!("vector {i}")))
        .collect::<Result<Vec<_>, _>>()?;
    Frame::new(f.dim, vectors).map_err(shape_error)
}

pub fn parse_framing(bytes: &[u8]) -> Result<Framing, Failure> {
    let f: FramingFile = parse(bytes, "framing")?;
    let pairs = f
        .pairs
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            Ok((
                vector(p.x, f.dim, &format!("pair {i} x"))?,
                vector(p.y, f.dim, &format!("pair {i} y"))?,
            ))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Framing::new(f.dim, pairs).map_err(shape_error)
}

pub fn parse_ovm(bytes: &[u8]) -> Result<Ovm, Failure> {
    let f: OvmFile = parse(bytes, "measure")?;
    let atoms = f
        .atoms
        .into_iter()
        .enumerate()
        .map(|(i, a)| matrix(a, f.dim_out, f.dim_in, &format!("atom {i}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ovm::new(f.dim_in, f.dim_out, atoms).map_err(shape_error)
}

pub fn scalar_json(z: Scalar) -> Value {
    json!([z.re, z.im])
}

/// Bare numbers when every entry is real, `[re, im]` pairs otherwise.
pub fn scalars_json<'a>(zs: impl Iterator<Item = &'a Scalar> + Clone) -> Value {
    if zs.clone().all(|z| z.im == 0.0) {
        Value::Array(zs.map(|z| json!(z.re)).collect())
    } else {
        Value::Array(zs.map(|z| scalar_json(*z)).collect())
    }
}

pub fn vector_json(v: &Vector) -> Value {
    scalars_json(v.iter())
}

pub fn matrix_json(a: &Matrix) -> Value {
    let real = a.iter().all(|z| z.im == 0.0);
    Value::Array(
        a.row_iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|z| if real { json!(z.re) } else { scalar_json(*z) })
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn frame_json(f: &Frame) -> Value {
    json!({
        "dim": f.dim(),
        "vectors": f.vectors().iter().map(vector_json).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_may_be_real_or_complex() {
        let f = parse_frame(br#"{"dim": 2, "vectors": [[1, [0, 2]], [0.5, 0]]}"#).unwrap();
        assert_eq!(f.vectors()[0][1], Scalar::new(0.0, 2.0));
        assert_eq!(f.vectors()[1][0], Scalar::new(0.5, 0.0));
    }

    #[test]
    fn malformed_inputs_are_usage_errors() {
        for bad in [
            &br#"{"dim": 2, "vectors": [[1]]}"#[..],
            br#"{"dim": 2}"#,
            br#"not json"#,
            br#"{"dim": 1, "vectors": [[1]], "extra": 0}"#,
        ] {
            assert!(matches!(parse_frame(bad), Err(Failure::Usage(_))));
        }
        assert!(matches!(
            parse_ovm(br#"{"dim_in": 2, "dim_out": 1, "atoms": [[[1]]]}"#),
            Err(Failure::Usage(_))
        ));
    }

    #[test]
    fn invalid_framing_is_a_domain_error() {
        let bad = br#"{"dim": 1, "pairs": [{"x": [1], "y": [2]}]}"#;
        assert!(matches!(parse_framing(bad), Err(Failure::Domain(_))));
    }

    #[test]
    fn matrices_round_trip_through_json() {
        let m = parse_ovm(br#"{"dim_in": 2, "dim_out": 1, "atoms": [[[1, [2, -1]]]]}"#).unwrap();
        assert_eq!(matrix_json(&m.atoms()[0]), json!([[[1.0, 0.0], [2.0, -1.0]]]));
        let real = Matrix::identity(2, 2);
        assert_eq!(matrix_json(&real), json!([[1.0, 0.0], [0.0, 1.0]]));
    }
}
