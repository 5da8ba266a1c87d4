//! Named operators that reproduce standard examples.

use std::f64::consts::PI;

use convexcyclic_core::operator::OperatorSpec;
use convexcyclic_core::{c64, Complex64, Vector};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_PRESET_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetInfo {
    pub name: String,
    pub dim: usize,
    pub description: String,
    /// Where the operator comes from and what it is expected to show.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub info: PresetInfo,
    pub spec: OperatorSpec,
    pub seed: Vector,
}

/// Preset names, without the `:d` dimension suffix.
pub const PRESET_NAMES: [&str; 5] = [
    "diag-2i-minus-2i",
    "2I-plus-B",
    "twice-backward-shift",
    "unimodular-diagonal",
    "dirichlet-shift",
];

pub fn all_presets() -> Vec<PresetInfo> {
    PRESET_NAMES
        .iter()
        .map(|n| preset(n).expect("built-in preset").info)
        .collect()
}

/// Resolves `name` or `name:d`.
pub fn preset(name: &str) -> Result<Preset, CliError> {
    let (base, dim) = match name.split_once(':') {
        Some((b, d)) => {
            let dim: usize = d
                .parse()
                .map_err(|_| CliError::config("preset", format!("bad dimension in `{name}`")))?;
            if dim == 0 {
                return Err(CliError::config("preset", "dimension must be positive"));
            }
            (b, Some(dim))
        }
        None => (name, None),
    };
    let d = dim.unwrap_or(DEFAULT_PRESET_DIM);
    let ones = |n: usize| Vector::from_real(&vec![1.0; n]).expect("nonempty");
    let (spec, seed, description, source) = match base {
        "diag-2i-minus-2i" => {
            if dim.is_some_and(|d| d != 2) {
                return Err(CliError::config(
                    "preset",
                    "diag-2i-minus-2i has dimension 2",
                ));
            }
            (
                OperatorSpec::Diagonal(vec![c64(0.0, 2.0), c64(0.0, -2.0)]),
                ones(2),
                "diag(2i, −2i) = T ⊕ −T with T = 2i on ℂ",
                "Standard example of a direct sum T ⊕ −T with eigenvalues 2i and −2i. \
                 The spectral criterion holds, but the conjugate pair confines every \
                 orbit hull to {(x₁w, x₂w̄)}.",
            )
        }
        "2I-plus-B" => (
            OperatorSpec::Sum(vec![
                (c64(2.0, 0.0), OperatorSpec::Identity(d)),
                (c64(1.0, 0.0), OperatorSpec::backward_shift(d)),
            ]),
            ones(d),
            "2I + B, B the unweighted backward shift",
            "Truncation of the adjoint multiplier M*_{2+z} = 2I + B on a space of \
             analytic functions. Its adjoint spectrum is {2} ⊂ ℝ, so the spectral gate fails.",
        ),
        "twice-backward-shift" => (
            OperatorSpec::backward_shift(d).scaled(c64(2.0, 0.0)),
            ones(d),
            "2B, B the unweighted backward shift",
            "Rolewicz operator 2B, hypercyclic on ℓ². Every truncation is \
             nilpotent, so the adjoint spectrum {0} fails the spectral gate.",
        ),
        "unimodular-diagonal" => (
            OperatorSpec::Diagonal(
                (0..d)
                    .map(|k| Complex64::from_polar(1.0, 0.5 + 2.0 * PI * k as f64 / d as f64))
                    .collect(),
            ),
            ones(d),
            "diag(e^{iθ_k}), θ_k = 0.5 + 2πk/d",
            "Unitary diagonal: an isometry, hence an m-isometry for every m, \
             which is never convex-cyclic.",
        ),
        "dirichlet-shift" => (
            OperatorSpec::dirichlet_shift(d),
            Vector::basis(d, 0),
            "forward shift with weights √((n+1)/n)",
            "Dirichlet-type shift with ‖T^k e₁‖² = k + 1. The untruncated shift is a \
             2-isometry and so not convex-cyclic; truncation keeps the identity on \
             the first d − 2 coordinates.",
        ),
        _ => {
            return Err(CliError::config(
                "preset",
                format!(
                    "unknown preset `{base}`; known: {}",
                    PRESET_NAMES.join(", ")
                ),
            ))
        }
    };
    let dim = spec.dim().expect("preset specs are valid");
    let full_name = if base == "diag-2i-minus-2i" {
        base.to_owned()
    } else {
        format!("{base}:{dim}")
    };
    Ok(Preset {
        info: PresetInfo {
            name: full_name,
            dim,
            description: description.to_owned(),
            source: source.to_owned(),
        },
        spec,
        seed,
    })
}
