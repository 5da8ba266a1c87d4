use convexcyclic_core::hull::Family;
use convexcyclic_core::poly::ConvexPolynomial;
use serde::{Deserialize, Serialize};

use crate::dto::{Cplx, SpecDto};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Classify,
    Probe,
    Approx,
    Epsilon,
    Defect,
    Orbit,
    Preset,
}

pub const DEFAULT_HORIZON: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_RNG_SEED: u64 = 0x5eed;
pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_ISOMETRY_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_K: usize = 64;

/// Command-specific knobs. Unused fields are ignored by commands that do not
/// read them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Parameters {
    /// Orbit horizon for probe, approx, orbit, and the seminorm estimate.
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// `cesaro`, `pkc:<c>` or `monomial-average:<terms>`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<Cplx>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<Vec<Cplx>>>,
    /// Inner-product representative of the probe functional.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional: Option<Vec<Cplx>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    /// Exponent search range of the ε-greedy orbit oracle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mock: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_guard: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<SpecDto>,
    /// Named operator, e.g. `dirichlet-shift:64`; exclusive with `operator`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_vector: Option<Vec<Cplx>>,
    #[serde(default)]
    pub parameters: Parameters,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            operator: None,
            preset: None,
            seed_vector: None,
            parameters: Parameters::default(),
        }
    }

    pub fn rng_seed(&self) -> u64 {
        self.parameters.rng_seed.unwrap_or(DEFAULT_RNG_SEED)
    }

    /// Checks that do not need the operator.
    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.parameters;
        if self.operator.is_some() && self.preset.is_some() {
            return Err(CliError::config(
                "preset",
                "give either an operator or a preset, not both",
            ));
        }
        if self.operator.is_none() && self.preset.is_none() && self.command != Command::Preset {
            return Err(CliError::config(
                "operator",
                "an operator spec or a preset is required",
            ));
        }
        if let Some(tol) = p.tol {
            positive("tol", tol)?;
        }
        if let Some(pe) = p.p {
            positive("p", pe)?;
        }
        if p.m == Some(0) {
            return Err(CliError::config("m", "must be at least 1"));
        }
        if p.samples == Some(0) {
            return Err(CliError::config("samples", "must be at least 1"));
        }
        if let Some(f) = &p.family {
            parse_family(f)?;
        }
        match self.command {
            Command::Epsilon => {
                let eps = p
                    .eps
                    .ok_or_else(|| CliError::config("eps", "required by epsilon"))?;
                if !(eps > 0.0 && eps < 1.0) {
                    return Err(CliError::config("eps", "must lie in (0, 1)"));
                }
                positive(
                    "delta",
                    p.delta
                        .ok_or_else(|| CliError::config("delta", "required by epsilon"))?,
                )?;
                if p.target.is_none() {
                    return Err(CliError::config("target", "required by epsilon"));
                }
            }
            Command::Defect if p.m.is_none() => {
                return Err(CliError::config("m", "required by defect"));
            }
            Command::Approx if p.target.is_none() && p.targets.is_none() => {
                return Err(CliError::config(
                    "target",
                    "approx needs `target` or `targets`",
                ));
            }
            Command::Approx if p.family.is_some() && p.target.is_none() => {
                return Err(CliError::config(
                    "target",
                    "a family probe needs a single `target`",
                ));
            }
            _ => {}
        }
        Ok(())
    }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(
            field,
            format!("must be positive, got {v}"),
        ))
    }
}

/// What `--family` names: a family searched over its index, or one fixed
/// convex polynomial.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyArg {
    Search(Family),
    Fixed(ConvexPolynomial),
}

/// Accepts `cesaro`, `pkc:<c>` and `monomial-average:<terms>` (searched up to
/// `max_k`), or `cesaro:<n>`, `pkc:<k>:<c>` and a coefficient list `[a0, a1, ...]`
/// (fixed polynomials).
pub fn parse_family(s: &str) -> Result<FamilyArg, CliError> {
    let bad = |msg: &str| CliError::config("family", format!("{msg} in `{s}`"));
    let fixed = |p: convexcyclic_core::Result<ConvexPolynomial>| {
        p.map(FamilyArg::Fixed).map_err(|e| bad(&e.to_string()))
    };
    if s.trim_start().starts_with('[') {
        let raw: Vec<f64> =
            serde_json::from_str(s).map_err(|_| bad("unparsable coefficient list"))?;
        return fixed(ConvexPolynomial::new(&raw));
    }
    let parts: Vec<&str> = s.split(':').collect();
    let int = |t: &str| t.parse::<usize>().map_err(|_| bad("unparsable integer"));
    let real = |t: &str| t.parse::<f64>().map_err(|_| bad("unparsable c"));
    match parts.as_slice() {
        ["cesaro"] => Ok(FamilyArg::Search(Family::Cesaro)),
        ["cesaro", n] => fixed(ConvexPolynomial::cesaro_mean(int(n)?)),
        ["pkc", c] => {
            let c = real(c)?;
            if !(c >= 1.0) || !c.is_finite() {
                return Err(bad("c must be at least 1"));
            }
            Ok(FamilyArg::Search(Family::Pkc(c)))
        }
        ["pkc", k, c] => fixed(ConvexPolynomial::pkc(int(k)?, real(c)?)),
        ["monomial-average", t] => {
            let t = int(t)?;
            if t == 0 {
                return Err(bad("term count must be positive"));
            }
            Ok(FamilyArg::Search(Family::MonomialAverage(t)))
        }
        _ => Err(bad(
            "expected cesaro[:n], pkc:<c>, pkc:<k>:<c>, monomial-average:<terms> or [a0, a1, ...]",
        )),
    }
}
