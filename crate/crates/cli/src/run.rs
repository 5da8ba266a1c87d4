use std::time::Instant;

use convexcyclic_core::constructions::{
    epsilon_greedy_approximation, EpsilonGreedyResult, MockOracle, OrbitOracle,
};
use convexcyclic_core::criteria::{
    classify_operator, hahn_banach_probe, is_m_isometry, m_isometry_defect,
    misometry_seminorm_estimate, Caveat, ClassifyOptions, Growth, IsometryOptions, Verdict,
};
use convexcyclic_core::hull::{
    best_convex_approximation, compute_orbit, family_probe, summarize_density, DEFAULT_MAX_ITER,
};
use convexcyclic_core::operator::{LinearOperator, OperatorSpec};
use convexcyclic_core::Vector;
use rayon::prelude::*;

use crate::config::{
    parse_family, Command, ExperimentConfig, FamilyArg, DEFAULT_HORIZON, DEFAULT_ISOMETRY_TOL,
    DEFAULT_MAX_K, DEFAULT_SAMPLES, DEFAULT_TOL,
};
use crate::dto::{to_cplx, to_vector, SpecDto};
use crate::error::{CliError, Context};
use crate::presets::{all_presets, preset, PresetInfo};
use crate::report::*;

struct Resolved {
    op: LinearOperator,
    seed: Vector,
    preset: Option<PresetInfo>,
}

fn resolve(config: &ExperimentConfig) -> Result<Resolved, CliError> {
    let (spec, default_seed, info) = match (&config.operator, &config.preset) {
        (Some(dto), None) => (OperatorSpec::from(dto), None, None),
        (None, Some(name)) => {
            let p = preset(name)?;
            (p.spec, Some(p.seed), Some(p.info))
        }
        _ => unreachable!("validated"),
    };
    let op =
        LinearOperator::build(spec).map_err(|e| CliError::config("operator", e.to_string()))?;
    let seed = match (&config.seed_vector, default_seed) {
        (Some(v), _) => to_vector(v, "seed_vector")?,
        (None, Some(s)) => s,
        (None, None) => Vector::from_real(&vec![1.0; op.dim()]).expect("dim ≥ 1"),
    };
    check_dim(&seed, op.dim(), "seed_vector")?;
    Ok(Resolved {
        op,
        seed,
        preset: info,
    })
}

fn check_dim(v: &Vector, dim: usize, field: &str) -> Result<(), CliError> {
    if v.dim() == dim {
        Ok(())
    } else {
        Err(CliError::config(
            field,
            format!(
                "dimension {} does not match operator dimension {dim}",
                v.dim()
            ),
        ))
    }
}

fn verdict_name(v: Verdict) -> String {
    format!("{v:?}")
}

fn growth_name(g: Growth) -> String {
    format!("{g:?}")
}

/// Runs one experiment. Deterministic in `config` apart from `wall_time_s`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, CliError> {
    let start = Instant::now();
    config.validate()?;
    let (results, preset_info) = if config.command == Command::Preset && config.preset.is_none() {
        (
            Payload::PresetList(PresetListPayload {
                presets: all_presets(),
            }),
            None,
        )
    } else {
        let r = resolve(config)?;
        (dispatch(config, &r)?, r.preset)
    };
    Ok(Report {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        rng_seed: config.rng_seed(),
        wall_time_s: start.elapsed().as_secs_f64(),
        config: config.clone(),
        preset: preset_info,
        results,
    })
}

fn dispatch(config: &ExperimentConfig, r: &Resolved) -> Result<Payload, CliError> {
    let p = &config.parameters;
    let dim = r.op.dim();
    let horizon = p.n.unwrap_or(DEFAULT_HORIZON);
    let isometry_options = IsometryOptions {
        samples: p.samples.unwrap_or(DEFAULT_SAMPLES),
        tol: p.tol.unwrap_or(DEFAULT_ISOMETRY_TOL),
        seed: config.rng_seed(),
        edge_guard: p.edge_guard.unwrap_or(true),
    };
    match config.command {
        Command::Classify => {
            let options = ClassifyOptions {
                seed_vector: Some(r.seed.clone()),
                isometry: isometry_options,
                max_m: p.m.unwrap_or(3),
                p_exponent: p.p.unwrap_or(2.0),
            };
            let c = classify_operator(&r.op, &options).context("classify")?;
            Ok(Payload::Classify(ClassifyPayload {
                verdict: verdict_name(c.report.verdict),
                reasons: c
                    .report
                    .reasons
                    .iter()
                    .map(|x| ReasonDto {
                        criterion: x.criterion.id().to_owned(),
                        detail: x.detail.clone(),
                    })
                    .collect(),
                caveats: c
                    .report
                    .caveats
                    .iter()
                    .map(
                        |&Caveat::ConjugatePair { first, second }| CaveatDto::ConjugatePair {
                            first,
                            second,
                        },
                    )
                    .collect(),
                gates: GatesDto {
                    norm: c.gates.norm,
                    norm_converged: c.gates.norm_converged,
                    norm_gt_one: c.gates.norm_gt_one,
                    range_defect: c.gates.range_defect,
                    dense_range: c.gates.dense_range,
                    adjoint_spectrum: to_cplx(&c.gates.adjoint_spectrum),
                    adjoint_spectrum_ok: c.gates.adjoint_spectrum_ok,
                },
                isometry: c
                    .isometry
                    .iter()
                    .map(|i| IsometryDto {
                        m: i.m,
                        p_exponent: i.p_exponent,
                        is_m_isometry: i.is_m_isometry,
                        max_abs_defect: i.defects.iter().fold(0.0, |a, d| a.max(d.abs())),
                        threshold: i.threshold,
                        support: i.support,
                        vectors_tested: i.defects.len(),
                    })
                    .collect(),
                diagonal_verdict: c.diagonal.map(|d| verdict_name(d.verdict)),
                witness: c.witness.map(|w| to_cplx(w.entries())),
            }))
        }
        Command::Probe => {
            let f = match &p.functional {
                Some(f) => to_vector(f, "functional")?,
                None => Vector::basis(dim, 0),
            };
            check_dim(&f, dim, "functional")?;
            let t = hahn_banach_probe(&r.op, &r.seed, &f, horizon).context("probe")?;
            Ok(Payload::Probe(ProbePayload {
                functional: to_cplx(f.entries()),
                values: t.values,
                running_max: t.running_max,
                classification: growth_name(t.classification),
            }))
        }
        Command::Approx => approx(config, r, horizon),
        Command::Epsilon => {
            let y = to_vector(p.target.as_deref().expect("validated"), "target")?;
            check_dim(&y, dim, "target")?;
            let eps = p.eps.expect("validated");
            let delta = p.delta.expect("validated");
            let (oracle, result) = if p.mock.unwrap_or(false) {
                let mut o = MockOracle::new(eps, config.rng_seed());
                ("mock", epsilon_greedy_approximation(&y, eps, delta, &mut o))
            } else {
                let oracle_horizon = p.horizon.unwrap_or(horizon);
                let mut o =
                    OrbitOracle::new(&r.op, &r.seed, oracle_horizon).context("orbit oracle")?;
                (
                    "orbit",
                    epsilon_greedy_approximation(&y, eps, delta, &mut o),
                )
            };
            let res: EpsilonGreedyResult = result.context("epsilon-greedy")?;
            Ok(Payload::Epsilon(EpsilonPayload {
                oracle: oracle.to_owned(),
                terms: res.terms,
                exponents: res.exponents,
                polynomial: res.polynomial.coeffs().to_vec(),
                achieved_error: res.achieved_error,
                bound: res.bound,
                steps: res.steps,
                zero_residual_step: res.zero_residual_step,
            }))
        }
        Command::Defect => {
            let m = p.m.expect("validated");
            let pe = p.p.unwrap_or(2.0);
            let report = is_m_isometry(&r.op, m, pe, &isometry_options).context("m-isometry")?;
            let explicit_seed = config.seed_vector.is_some() || config.preset.is_some();
            let seed_defect = if explicit_seed {
                Some(m_isometry_defect(&r.op, &r.seed, m, pe).context("defect")?)
            } else {
                None
            };
            let seminorm = match p.n {
                Some(n) => {
                    let s = misometry_seminorm_estimate(&r.op, &r.seed, m, pe, n)
                        .context("seminorm")?;
                    Some(SeminormDto {
                        horizon: n,
                        estimate: s.estimate,
                        spread: s.spread,
                        diverged: s.diverged,
                    })
                }
                None => None,
            };
            Ok(Payload::Defect(DefectPayload {
                m,
                p_exponent: pe,
                seed_defect,
                is_m_isometry: report.is_m_isometry,
                threshold: report.threshold,
                support: report.support,
                defects: report.defects,
                seminorm,
            }))
        }
        Command::Orbit => {
            let orbit = compute_orbit(&r.op, &r.seed, horizon).context("orbit")?;
            Ok(Payload::Orbit(OrbitPayload {
                rows: orbit.rows().iter().map(|v| to_cplx(v.entries())).collect(),
            }))
        }
        Command::Preset => Ok(Payload::Preset(PresetPayload {
            operator: SpecDto::from(r.op.spec()),
            seed_vector: to_cplx(r.seed.entries()),
        })),
    }
}

fn approx(config: &ExperimentConfig, r: &Resolved, horizon: usize) -> Result<Payload, CliError> {
    let p = &config.parameters;
    let dim = r.op.dim();
    let tol = p.tol.unwrap_or(DEFAULT_TOL);
    let max_iter = p.max_iter.unwrap_or(DEFAULT_MAX_ITER);

    if let Some(name) = &p.family {
        let y = to_vector(p.target.as_deref().expect("validated"), "target")?;
        check_dim(&y, dim, "target")?;
        let payload = match parse_family(name)? {
            FamilyArg::Search(family) => {
                let f = family_probe(&r.op, &r.seed, &y, family, p.max_k.unwrap_or(DEFAULT_MAX_K))
                    .context("family probe")?;
                FamilyPayload {
                    family: name.clone(),
                    best_k: f.best_k,
                    distance: f.distance,
                    exponents: f.exponents,
                    polynomial: None,
                }
            }
            FamilyArg::Fixed(poly) => {
                let v = poly.apply(&r.op, &r.seed).context("polynomial")?;
                FamilyPayload {
                    family: name.clone(),
                    best_k: poly.degree(),
                    distance: v.distance(&y),
                    exponents: Vec::new(),
                    polynomial: Some(poly.coeffs().to_vec()),
                }
            }
        };
        return Ok(Payload::Family(payload));
    }

    let orbit = compute_orbit(&r.op, &r.seed, horizon).context("orbit")?;
    if let Some(target) = &p.target {
        let y = to_vector(target, "target")?;
        check_dim(&y, dim, "target")?;
        let a = best_convex_approximation(&orbit, &y, tol, max_iter).context("hull distance")?;
        return Ok(Payload::Approx(ApproxPayload {
            target: to_cplx(y.entries()),
            lower_bound: a.lower_bound(),
            coefficients: a.coefficients,
            distance: a.distance,
            gap: a.gap,
            iterations: a.iterations,
        }));
    }

    let targets = p
        .targets
        .as_ref()
        .expect("validated")
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let field = format!("targets[{i}]");
            let y = to_vector(t, &field)?;
            check_dim(&y, dim, &field)?;
            Ok(y)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    // Order-preserving fan-out; each solve is independent.
    let approximations = targets
        .par_iter()
        .map(|y| best_convex_approximation(&orbit, y, tol, max_iter))
        .collect::<Result<Vec<_>, _>>()
        .context("hull distance")?;
    let probe = summarize_density(approximations, tol);
    Ok(Payload::Density(DensityPayload {
        tol,
        score: probe.score,
        rows: probe
            .approximations
            .iter()
            .enumerate()
            .map(|(n, a)| DensityRow {
                n,
                residual: a.distance,
                gap: a.gap,
                iterations: a.iterations,
            })
            .collect(),
    }))
}
