//! Report records and their JSON/CSV emission.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::dto::{Cplx, SpecDto};
use crate::error::CliError;
use crate::presets::PresetInfo;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub rng_seed: u64,
    pub wall_time_s: f64,
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetInfo>,
    pub results: Payload,
}

impl Report {
    /// Copy with the wall time zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Report {
        Report {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Classify(ClassifyPayload),
    Probe(ProbePayload),
    Approx(ApproxPayload),
    Density(DensityPayload),
    Family(FamilyPayload),
    Epsilon(EpsilonPayload),
    Defect(DefectPayload),
    Orbit(OrbitPayload),
    Preset(PresetPayload),
    PresetList(PresetListPayload),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasonDto {
    pub criterion: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CaveatDto {
    ConjugatePair { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatesDto {
    pub norm: f64,
    pub norm_converged: bool,
    pub norm_gt_one: bool,
    pub range_defect: usize,
    pub dense_range: bool,
    pub adjoint_spectrum: Vec<Cplx>,
    pub adjoint_spectrum_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryDto {
    pub m: usize,
    pub p_exponent: f64,
    pub is_m_isometry: bool,
    pub max_abs_defect: f64,
    pub threshold: f64,
    pub support: usize,
    pub vectors_tested: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyPayload {
    pub verdict: String,
    pub reasons: Vec<ReasonDto>,
    pub caveats: Vec<CaveatDto>,
    pub gates: GatesDto,
    pub isometry: Vec<IsometryDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal_verdict: Option<String>,
    /// Functional whose probe vanishes identically on the seed's orbit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Cplx>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbePayload {
    pub functional: Vec<Cplx>,
    pub values: Vec<f64>,
    pub running_max: Vec<f64>,
    pub classification: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxPayload {
    pub target: Vec<Cplx>,
    pub coefficients: Vec<f64>,
    pub distance: f64,
    pub gap: f64,
    pub lower_bound: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub n: usize,
    pub residual: f64,
    pub gap: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityPayload {
    pub tol: f64,
    pub score: f64,
    pub rows: Vec<DensityRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyPayload {
    pub family: String,
    /// Best index for a searched family; the degree for a fixed polynomial.
    pub best_k: usize,
    pub distance: f64,
    pub exponents: Vec<usize>,
    /// Coefficients of a fixed polynomial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonPayload {
    pub oracle: String,
    pub terms: usize,
    pub exponents: Vec<usize>,
    pub polynomial: Vec<f64>,
    pub achieved_error: f64,
    pub bound: f64,
    pub steps: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_residual_step: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormDto {
    pub horizon: usize,
    pub estimate: f64,
    pub spread: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectPayload {
    pub m: usize,
    pub p_exponent: f64,
    /// Defect at the seed vector, when one was given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_defect: Option<f64>,
    pub is_m_isometry: bool,
    pub threshold: f64,
    pub support: usize,
    pub defects: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seminorm: Option<SeminormDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitPayload {
    pub rows: Vec<Vec<Cplx>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetPayload {
    pub operator: SpecDto,
    pub seed_vector: Vec<Cplx>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetListPayload {
    pub presets: Vec<PresetInfo>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Writes the report to `path`, or stdout when absent. JSON carries the full
/// report; CSV only the command's table.
pub fn emit_report(report: &Report, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let io_err = |source: io::Error| CliError::Io {
        path: path.map_or_else(|| "<stdout>".into(), Path::to_path_buf),
        source,
    };
    let mut sink: Box<dyn Write> = match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p).map_err(io_err)?)),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, report)?;
            writeln!(sink).map_err(io_err)?;
        }
        Format::Csv => write_csv(&report.results, &mut sink)?,
    }
    sink.flush().map_err(io_err)
}

fn write_csv(payload: &Payload, sink: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(sink);
    match payload {
        Payload::Probe(p) => {
            w.write_record(["n", "value", "running_max"])?;
            for (n, (v, m)) in p.values.iter().zip(&p.running_max).enumerate() {
                w.write_record([n.to_string(), v.to_string(), m.to_string()])?;
            }
        }
        Payload::Approx(a) => {
            w.write_record(["index", "coefficient"])?;
            for (i, c) in a.coefficients.iter().enumerate() {
                w.write_record([i.to_string(), c.to_string()])?;
            }
            w.write_record(["distance", "gap"])?;
            w.write_record([a.distance.to_string(), a.gap.to_string()])?;
        }
        Payload::Density(d) => {
            w.write_record(["n", "residual", "gap", "iterations"])?;
            for r in &d.rows {
                w.write_record([
                    r.n.to_string(),
                    r.residual.to_string(),
                    r.gap.to_string(),
                    r.iterations.to_string(),
                ])?;
            }
        }
        Payload::Family(f) => {
            w.write_record(["family", "best_k", "distance"])?;
            w.write_record([
                f.family.clone(),
                f.best_k.to_string(),
                f.distance.to_string(),
            ])?;
        }
        Payload::Epsilon(e) => {
            w.write_record(["step", "residual", "exponent"])?;
            for (j, r) in e.steps.iter().enumerate() {
                let k = e
                    .exponents
                    .get(j)
                    .map_or_else(String::new, usize::to_string);
                w.write_record([(j + 1).to_string(), r.to_string(), k])?;
            }
        }
        Payload::Defect(d) => {
            w.write_record(["sample", "defect"])?;
            for (i, v) in d.defects.iter().enumerate() {
                w.write_record([i.to_string(), v.to_string()])?;
            }
        }
        Payload::Orbit(o) => {
            let dim = o.rows.first().map_or(0, Vec::len);
            let mut header = vec!["n".to_owned()];
            for j in 0..dim {
                header.push(format!("re_{j}"));
                header.push(format!("im_{j}"));
            }
            w.write_record(&header)?;
            for (n, row) in o.rows.iter().enumerate() {
                let mut rec = vec![n.to_string()];
                for c in row {
                    rec.push(c.0.re.to_string());
                    rec.push(c.0.im.to_string());
                }
                w.write_record(&rec)?;
            }
        }
        Payload::Classify(c) => {
            w.write_record(["criterion", "detail"])?;
            for r in &c.reasons {
                w.write_record([&r.criterion, &r.detail])?;
            }
        }
        Payload::Preset(_) | Payload::PresetList(_) => {
            return Err(CliError::config(
                "format",
                "presets have no table; use json",
            ));
        }
    }
    w.flush().map_err(|e| CliError::Csv(e.into()))
}
