//! JSON file formats for matrices and relations.
//!
//! Matrix: `{"rows": n, "cols": m, "data": [[...], ...]}` (row-major).
//! Relation: `{"dim": n, "generators": [{"f": [...], "fp": [...]}, ...]}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relations::LinearRelation;
use crate::spectral::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationFile {
    pub dim: usize,
    pub generators: Vec<Generator>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Entries beyond this size would overflow when squared.
pub const MAX_ENTRY: f64 = 1e150;

/// Largest accepted dimension; every operation is dense and cubic.
pub const MAX_DIM: usize = 2048;

fn check_dim(what: &str, n: usize) -> Result<()> {
    if n > MAX_DIM {
        return Err(invalid(format!("{what} = {n} exceeds {MAX_DIM}")));
    }
    Ok(())
}

fn check_entries<'a>(values: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    for &x in values {
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        if x.abs() > MAX_ENTRY {
            return Err(invalid(format!("entry {x:e} exceeds {MAX_ENTRY:e} in magnitude")));
        }
    }
    Ok(())
}

impl MatrixFile {
    pub fn from_matrix(m: &DenseMatrix) -> Self {
        MatrixFile {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<DenseMatrix> {
        check_dim("rows", self.rows)?;
        check_dim("cols", self.cols)?;
        if self.data.len() != self.rows {
            return Err(invalid(format!(
                "\"rows\" is {} but data has {} rows",
                self.rows,
                self.data.len()
            )));
        }
        if let Some((i, r)) = self.data.iter().enumerate().find(|(_, r)| r.len() != self.cols) {
            return Err(invalid(format!(
                "row {i} has {} entries, expected {}",
                r.len(),
                self.cols
            )));
        }
        check_entries(self.data.iter().flatten())?;
        Ok(DMatrix::from_fn(self.rows, self.cols, |i, j| self.data[i][j]))
    }
}

impl RelationFile {
    pub fn from_relation(a: &LinearRelation) -> Self {
        let (f, fp) = (a.f_part(), a.fp_part());
        RelationFile {
            dim: a.space_dim(),
            generators: (0..a.graph_dim())
                .map(|j| Generator {
                    f: f.column(j).iter().copied().collect(),
                    fp: fp.column(j).iter().copied().collect(),
                })
                .collect(),
        }
    }

    pub fn to_relation(&self) -> Result<LinearRelation> {
        let n = self.dim;
        check_dim("dim", n)?;
        check_dim("generator count", self.generators.len())?;
        for (i, g) in self.generators.iter().enumerate() {
            if g.f.len() != n || g.fp.len() != n {
                return Err(invalid(format!(
                    "generator {i} has lengths ({}, {}), expected {n}",
                    g.f.len(),
                    g.fp.len()
                )));
            }
            check_entries(g.f.iter().chain(&g.fp))?;
        }
        let k = self.generators.len();
        let f = DMatrix::from_fn(n, k, |i, j| self.generators[j].f[i]);
        let fp = DMatrix::from_fn(n, k, |i, j| self.generators[j].fp[i]);
        LinearRelation::from_generators(&f, &fp)
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(bytes: &[u8], what: &str) -> Result<T> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(invalid(format!("empty {what} file")));
    }
    serde_json::from_slice(bytes).map_err(|e| invalid(format!("malformed {what} file: {e}")))
}

pub fn parse_matrix(bytes: &[u8]) -> Result<DenseMatrix> {
    parse_json::<MatrixFile>(bytes, "matrix")?.to_matrix()
}

pub fn parse_relation(bytes: &[u8]) -> Result<LinearRelation> {
    parse_json::<RelationFile>(bytes, "relation")?.to_relation()
}

/// Either file kind, told apart by its keys.
#[derive(Debug, Clone)]
pub enum AnyFile {
    Matrix(DenseMatrix),
    Relation(LinearRelation),
}

pub fn parse_any(bytes: &[u8]) -> Result<AnyFile> {
    let value: serde_json::Value = parse_json(bytes, "input")?;
    if value.get("generators").is_some() {
        let file: RelationFile =
            serde_json::from_value(value).map_err(|e| invalid(format!("malformed relation file: {e}")))?;
        Ok(AnyFile::Relation(file.to_relation()?))
    } else {
        let file: MatrixFile =
            serde_json::from_value(value).map_err(|e| invalid(format!("malformed matrix file: {e}")))?;
        Ok(AnyFile::Matrix(file.to_matrix()?))
    }
}

/// Floats are written in the shortest form that parses back to the same value.
pub fn emit_matrix(m: &DenseMatrix) -> String {
    serde_json::to_string(&MatrixFile::from_matrix(m)).expect("matrix serializes")
}

pub fn emit_relation(a: &LinearRelation) -> String {
    serde_json::to_string(&RelationFile::from_relation(a)).expect("relation serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ToleranceProfile;

    #[test]
    fn matrix_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, -0.1, 1e-300, 2.0 / 3.0, 0.0, 5e17]);
        let text = emit_matrix(&m);
        assert_eq!(parse_matrix(text.as_bytes()).unwrap(), m);
        let empty = DMatrix::<f64>::zeros(0, 0);
        assert_eq!(parse_matrix(emit_matrix(&empty).as_bytes()).unwrap(), empty);
    }

    #[test]
    fn matrix_rejects_bad_input() {
        for bad in [
            "",
            "  \n",
            "{",
            r#"{"rows": 2, "cols": 1, "data": [[1.0]]}"#,
            r#"{"rows": 1, "cols": 2, "data": [[1.0]]}"#,
            r#"{"rows": 1, "cols": 1, "data": [[1.0]], "extra": 1}"#,
            r#"{"rows": -1, "cols": 1, "data": []}"#,
            r#"[1, 2]"#,
            r#"{"rows": 1, "cols": 1, "data": [[1e200]]}"#,
        ] {
            assert!(matches!(parse_matrix(bad.as_bytes()), Err(Error::InvalidInput(_))), "{bad:?}");
        }
    }

    #[test]
    fn relation_round_trip() {
        let text = r#"{"dim": 2, "generators": [{"f": [1, 0], "fp": [1, 0]}, {"f": [2, 0], "fp": [2, 0]}]}"#;
        let a = parse_relation(text.as_bytes()).unwrap();
        assert_eq!(a.graph_dim(), 1);
        let b = parse_relation(emit_relation(&a).as_bytes()).unwrap();
        assert!(a.approx_eq(&b, &ToleranceProfile::DEFAULT));
        assert!(parse_relation(br#"{"dim": 2, "generators": [{"f": [1], "fp": [1, 0]}]}"#).is_err());
    }

    #[test]
    fn any_file_dispatch() {
        assert!(matches!(parse_any(br#"{"rows":1,"cols":1,"data":[[2]]}"#).unwrap(), AnyFile::Matrix(_)));
        assert!(matches!(
            parse_any(br#"{"dim":1,"generators":[{"f":[0],"fp":[1]}]}"#).unwrap(),
            AnyFile::Relation(_)
        ));
    }
}
