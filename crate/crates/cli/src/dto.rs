//! JSON shapes for scalars, vectors and operator specs.
//!
//! Complex numbers are `[re, im]` pairs; plain numbers are accepted on input
//! and always written back as pairs.

use std::fs;
use std::path::Path;

use convexcyclic_core::operator::OperatorSpec;
use convexcyclic_core::{Complex64, Vector};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "CplxRepr", into = "[f64; 2]")]
pub struct Cplx(pub Complex64);

#[derive(Deserialize)]
#[serde(untagged)]
enum CplxRepr {
    Pair([f64; 2]),
    Real(f64),
}

impl From<CplxRepr> for Cplx {
    fn from(r: CplxRepr) -> Self {
        match r {
            CplxRepr::Pair([re, im]) => Cplx(Complex64::new(re, im)),
            CplxRepr::Real(re) => Cplx(Complex64::new(re, 0.0)),
        }
    }
}

impl From<Cplx> for [f64; 2] {
    fn from(c: Cplx) -> Self {
        [c.0.re, c.0.im]
    }
}

impl From<Complex64> for Cplx {
    fn from(z: Complex64) -> Self {
        Cplx(z)
    }
}

pub fn to_cplx(entries: &[Complex64]) -> Vec<Cplx> {
    entries.iter().copied().map(Cplx).collect()
}

pub fn from_cplx(entries: &[Cplx]) -> Vec<Complex64> {
    entries.iter().map(|c| c.0).collect()
}

pub fn to_vector(entries: &[Cplx], field: &str) -> Result<Vector, CliError> {
    Vector::new(from_cplx(entries)).map_err(|e| CliError::config(field, e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SpecDto {
    Diagonal { entries: Vec<Cplx> },
    Dense { rows: Vec<Vec<Cplx>> },
    BackwardShift { weights: Vec<f64>, dim: usize },
    ForwardShift { weights: Vec<f64>, dim: usize },
    Identity { dim: usize },
    Sum { terms: Vec<TermDto> },
    DirectSum { parts: Vec<SpecDto> },
    Scale { factor: Cplx, spec: Box<SpecDto> },
    Negate { spec: Box<SpecDto> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDto {
    pub coeff: Cplx,
    pub spec: SpecDto,
}

impl From<&OperatorSpec> for SpecDto {
    fn from(spec: &OperatorSpec) -> Self {
        match spec {
            OperatorSpec::Diagonal(e) => SpecDto::Diagonal {
                entries: to_cplx(e),
            },
            OperatorSpec::Dense(rows) => SpecDto::Dense {
                rows: rows.iter().map(|r| to_cplx(r)).collect(),
            },
            OperatorSpec::BackwardShift { weights, dim } => SpecDto::BackwardShift {
                weights: weights.clone(),
                dim: *dim,
            },
            OperatorSpec::ForwardShift { weights, dim } => SpecDto::ForwardShift {
                weights: weights.clone(),
                dim: *dim,
            },
            OperatorSpec::Identity(dim) => SpecDto::Identity { dim: *dim },
            OperatorSpec::Sum(terms) => SpecDto::Sum {
                terms: terms
                    .iter()
                    .map(|(c, s)| TermDto {
                        coeff: Cplx(*c),
                        spec: s.into(),
                    })
                    .collect(),
            },
            OperatorSpec::DirectSum(parts) => SpecDto::DirectSum {
                parts: parts.iter().map(SpecDto::from).collect(),
            },
            OperatorSpec::Scale { factor, inner } => SpecDto::Scale {
                factor: Cplx(*factor),
                spec: Box::new(inner.as_ref().into()),
            },
            OperatorSpec::Negate(inner) => SpecDto::Negate {
                spec: Box::new(inner.as_ref().into()),
            },
        }
    }
}

impl From<&SpecDto> for OperatorSpec {
    fn from(dto: &SpecDto) -> Self {
        match dto {
            SpecDto::Diagonal { entries } => OperatorSpec::Diagonal(from_cplx(entries)),
            SpecDto::Dense { rows } => {
                OperatorSpec::Dense(rows.iter().map(|r| from_cplx(r)).collect())
            }
            SpecDto::BackwardShift { weights, dim } => OperatorSpec::BackwardShift {
                weights: weights.clone(),
                dim: *dim,
            },
            SpecDto::ForwardShift { weights, dim } => OperatorSpec::ForwardShift {
                weights: weights.clone(),
                dim: *dim,
            },
            SpecDto::Identity { dim } => OperatorSpec::Identity(*dim),
            SpecDto::Sum { terms } => OperatorSpec::Sum(
                terms
                    .iter()
                    .map(|t| (t.coeff.0, OperatorSpec::from(&t.spec)))
                    .collect(),
            ),
            SpecDto::DirectSum { parts } => {
                OperatorSpec::DirectSum(parts.iter().map(OperatorSpec::from).collect())
            }
            SpecDto::Scale { factor, spec } => OperatorSpec::Scale {
                factor: factor.0,
                inner: Box::new(spec.as_ref().into()),
            },
            SpecDto::Negate { spec } => OperatorSpec::Negate(Box::new(spec.as_ref().into())),
        }
    }
}

/// Reads `arg` as inline JSON if it starts with `{` or `[`, otherwise as a
/// path to a JSON file.
pub fn load_json<T: serde::de::DeserializeOwned>(arg: &str, field: &str) -> Result<T, CliError> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_owned()
    } else {
        fs::read_to_string(Path::new(arg)).map_err(|source| CliError::Io {
            path: arg.into(),
            source,
        })?
    };
    serde_json::from_str(&text).map_err(|e| CliError::config(field, e.to_string()))
}
