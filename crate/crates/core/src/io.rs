//! JSON files: instances (integers or `"p/q"` strings, 1-based basis
//! indices) and solve traces.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::SolveTrace;
use crate::generators::{DmdpInstance, GeneratedLp};
use crate::linalg::Matrix;
use crate::lp::{Basis, LpError, StandardFormLp};
use crate::rational::{Rational, Scalar};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Where a DMDP instance came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DmdpProvenance {
    pub m: usize,
    pub k: usize,
    pub theta: Rational,
    pub p: Matrix,
    pub e: Matrix,
    pub costs: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub lp: StandardFormLp,
    pub initial_basis: Option<Basis>,
    pub dmdp: Option<DmdpProvenance>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    name: String,
    m: usize,
    n: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<Scalar>>,
    b: Vec<Scalar>,
    c: Vec<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial_basis: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dmdp: Option<DmdpFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DmdpFile {
    m: usize,
    k: usize,
    theta: Scalar,
    #[serde(rename = "P")]
    p: Vec<Vec<Scalar>>,
    #[serde(rename = "E")]
    e: Vec<Vec<Scalar>>,
    costs: Vec<Scalar>,
}

fn scalars(v: &[Rational]) -> Vec<Scalar> {
    v.iter().cloned().map(Scalar).collect()
}

fn matrix_scalars(a: &Matrix) -> Vec<Vec<Scalar>> {
    a.to_rows().iter().map(|r| scalars(r)).collect()
}

fn rationals(v: Vec<Scalar>) -> Vec<Rational> {
    v.into_iter().map(|s| s.0).collect()
}

fn matrix(rows: Vec<Vec<Scalar>>, what: &str) -> Result<Matrix, IoError> {
    Matrix::from_rows(rows.into_iter().map(rationals).collect())
        .ok_or_else(|| IoError::Invalid(format!("rows of {what} have different lengths")))
}

impl Instance {
    pub fn new(lp: StandardFormLp) -> Self {
        Self { lp, initial_basis: None, dmdp: None }
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.a.len() != file.m || file.a.iter().any(|row| row.len() != file.n) {
            return Err(IoError::Invalid(format!("A is not {}x{}", file.m, file.n)));
        }
        let lp = StandardFormLp::new(file.name, file.a.into_iter().map(rationals).collect(), rationals(file.b), rationals(file.c))?;
        let initial_basis = match file.initial_basis {
            Some(one_based) => {
                if one_based.contains(&0) {
                    return Err(IoError::Invalid("initial_basis indices are 1-based".into()));
                }
                Some(Basis::new(&lp, one_based.into_iter().map(|j| j - 1))?)
            }
            None => None,
        };
        let dmdp = match file.dmdp {
            Some(d) => Some(DmdpProvenance {
                m: d.m,
                k: d.k,
                theta: d.theta.0,
                p: matrix(d.p, "P")?,
                e: matrix(d.e, "E")?,
                costs: rationals(d.costs),
            }),
            None => None,
        };
        Ok(Self { lp, initial_basis, dmdp })
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            name: self.lp.name().to_string(),
            m: self.lp.m(),
            n: self.lp.n(),
            a: matrix_scalars(self.lp.a()),
            b: scalars(self.lp.b()),
            c: scalars(self.lp.c()),
            initial_basis: self.initial_basis.as_ref().map(Basis::one_based),
            dmdp: self.dmdp.as_ref().map(|d| DmdpFile {
                m: d.m,
                k: d.k,
                theta: Scalar(d.theta.clone()),
                p: matrix_scalars(&d.p),
                e: matrix_scalars(&d.e),
                costs: scalars(&d.costs),
            }),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("instance serializes");
        text.push('\n');
        text
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, IoError> {
        Self::from_json(&read(path.as_ref())?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), IoError> {
        write(path.as_ref(), &self.to_json())
    }
}

impl From<GeneratedLp> for Instance {
    fn from(g: GeneratedLp) -> Self {
        Self { lp: g.lp, initial_basis: Some(g.initial_basis), dmdp: None }
    }
}

impl From<&DmdpInstance> for Instance {
    fn from(d: &DmdpInstance) -> Self {
        Self {
            lp: d.lp.clone(),
            initial_basis: Some(d.initial_basis.clone()),
            dmdp: Some(DmdpProvenance {
                m: d.m,
                k: d.k,
                theta: d.theta.clone(),
                p: d.p.clone(),
                e: d.e.clone(),
                costs: d.costs.clone(),
            }),
        }
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })
}

fn write(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Write { path: path.display().to_string(), source })
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<SolveTrace, IoError> {
    Ok(serde_json::from_str(&read(path.as_ref())?)?)
}

pub fn write_trace(path: impl AsRef<Path>, trace: &SolveTrace) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(trace)?;
    text.push('\n');
    write(path.as_ref(), &text)
}
