//! JSON encodings shared by reports and the command line.
//!
//! A complex number is `[re, im]`, a vector is a list of complex numbers and
//! a matrix is a row-major list of rows. A model file is
//! `{"dim": n, "H": matrix, "L": [matrix, ...], "tol": {...}}` where `dim`
//! and `tol` are optional.

use num_complex::Complex64;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{QmsError, Result};
use crate::gksl::{build_model, GkslModel};
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::operator::{Density, OrthProjection, Subspace};
use crate::tolerance::{ToleranceOverrides, Tolerances};

pub type ComplexJson = [f64; 2];
pub type VectorJson = Vec<ComplexJson>;
pub type MatrixJson = Vec<Vec<ComplexJson>>;

pub fn complex_to_json(z: Complex64) -> ComplexJson {
    [z.re, z.im]
}

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if let Some(i) = rows.iter().position(|row| row.len() != c) {
        return Err(QmsError::Parse(format!(
            "row {i} has {} entries, expected {c}",
            rows[i].len()
        )));
    }
    Ok(ComplexMatrix::from_fn(r, c, |i, j| {
        let [re, im] = rows[i][j];
        Complex64::new(re, im)
    }))
}

pub fn vector_to_json(v: &ComplexVector) -> VectorJson {
    v.iter().map(|&z| complex_to_json(z)).collect()
}

pub fn vector_from_json(v: &VectorJson) -> ComplexVector {
    ComplexVector::from_iterator(v.len(), v.iter().map(|&[re, im]| Complex64::new(re, im)))
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    matrix_from_json(&serde_json::from_str(text)?)
}

pub fn parse_vector(text: &str) -> Result<ComplexVector> {
    Ok(vector_from_json(&serde_json::from_str(text)?))
}

/// Reads a square matrix and validates it as a density.
pub fn parse_density(text: &str, tol: &Tolerances) -> Result<Density> {
    Density::new(parse_matrix(text)?, tol)
}

pub fn parse_projection(text: &str, tol: &Tolerances) -> Result<OrthProjection> {
    OrthProjection::new(parse_matrix(text)?, tol)
}

/// Borrowed matrix that serializes in the shared schema.
pub struct MatrixRef<'a>(pub &'a ComplexMatrix);

impl Serialize for MatrixRef<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_json(self.0).serialize(s)
    }
}

pub fn serialize_matrix<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixRef(m).serialize(s)
}

pub fn serialize_density<S: Serializer>(d: &Density, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixRef(d.matrix()).serialize(s)
}

pub fn serialize_complex_list<S: Serializer>(
    v: &[Complex64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let out: VectorJson = v.iter().map(|&z| complex_to_json(z)).collect();
    out.serialize(s)
}

pub fn serialize_subspace<S: Serializer>(sub: &Subspace, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(2))?;
    map.serialize_entry("dim", &sub.dim())?;
    let columns: Vec<VectorJson> = (0..sub.dim())
        .map(|j| vector_to_json(&sub.frame().column(j).into_owned()))
        .collect();
    map.serialize_entry("basis", &columns)?;
    map.end()
}

/// On-disk model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(rename = "H")]
    pub hamiltonian: MatrixJson,
    #[serde(rename = "L", default)]
    pub jumps: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<ToleranceOverrides>,
}

impl ModelFile {
    pub fn from_model(m: &GkslModel) -> Self {
        ModelFile {
            dim: Some(m.dim()),
            hamiltonian: matrix_to_json(m.hamiltonian()),
            jumps: m.jumps().iter().map(matrix_to_json).collect(),
            tol: None,
        }
    }

    /// Validated model; tolerance overrides embedded in the file are applied
    /// on top of `base`.
    pub fn build(&self, base: &Tolerances) -> Result<(GkslModel, Tolerances)> {
        let tol = match &self.tol {
            Some(o) => base.with_overrides(o)?,
            None => *base,
        };
        let h = matrix_from_json(&self.hamiltonian)?;
        if let Some(n) = self.dim {
            if h.nrows() != n {
                return Err(QmsError::Dimension(format!(
                    "declared dim {n} but H has {} rows",
                    h.nrows()
                )));
            }
        }
        let jumps = self
            .jumps
            .iter()
            .map(matrix_from_json)
            .collect::<Result<Vec<_>>>()?;
        Ok((build_model(h, jumps, &tol)?, tol))
    }
}

pub fn parse_model(text: &str, base: &Tolerances) -> Result<(GkslModel, Tolerances)> {
    let file: ModelFile = serde_json::from_str(text)?;
    file.build(base)
}

pub fn model_to_json(m: &GkslModel) -> String {
    serde_json::to_string_pretty(&ModelFile::from_model(m)).expect("model serializes")
}
