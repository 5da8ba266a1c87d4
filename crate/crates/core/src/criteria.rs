//! Decision procedures: the sup-probe along a functional, spectral tests for
//! diagonal operators, necessary-condition gates and the (m, p)-isometry
//! defect.
//!
//! Every negative answer here is rigorous for the finite-dimensional operator
//! in hand. Positive answers are only as strong as the criterion they cite,
//! and the operator-level classifier says `Inconclusive` when no criterion
//! applies.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hull::{compute_orbit, OVERFLOW_GUARD};
use crate::operator::{LinearOperator, OperatorSpec};
use crate::{Error, Result, Vector};

/// Default factor in the `Growing` rule of [`classify_growth`].
pub const GROWTH_FACTOR: f64 = 1e6;
/// Eigenvalues closer than `DISTINCT_TOL·max(1, |λ|)` count as equal.
pub const DISTINCT_TOL: f64 = 1e-9;
/// `|Im λ|` at or below this counts as real.
pub const REAL_TOL: f64 = 1e-12;
/// `|λ_i − conj(λ_j)| ≤ CONJUGATE_TOL·max(1, |λ_i|)` flags a conjugate pair.
pub const CONJUGATE_TOL: f64 = 1e-9;
/// `‖T‖` must exceed `1 + NORM_MARGIN` to pass the norm gate.
pub const NORM_MARGIN: f64 = 1e-8;
/// Horizon of the witness verification loop.
pub const WITNESS_HORIZON: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    Bounded,
    Growing,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTrace {
    /// `Re⟨T^n x, f⟩` for `n = 0..=N`.
    pub values: Vec<f64>,
    pub running_max: Vec<f64>,
    pub classification: Growth,
}

/// Finite-horizon reading of `sup = ∞`:
/// `Growing` if the final running max exceeds `growth_factor·max(1, |values[0]|)`,
/// `Bounded` if the second half sets no new maximum, otherwise `Inconclusive`.
pub fn classify_growth(values: &[f64], running_max: &[f64], growth_factor: f64) -> Growth {
    let (Some(&first), Some(&last)) = (values.first(), running_max.last()) else {
        return Growth::Inconclusive;
    };
    let n = running_max.len() - 1;
    if last > growth_factor * first.abs().max(1.0) {
        Growth::Growing
    } else if last == running_max[n / 2] {
        Growth::Bounded
    } else {
        Growth::Inconclusive
    }
}

/// Traces `Re⟨T^n x, f⟩` for `n ≤ N` with the default growth rule.
pub fn hahn_banach_probe(
    op: &LinearOperator,
    x: &Vector,
    f: &Vector,
    horizon: usize,
) -> Result<ProbeTrace> {
    hahn_banach_probe_with(op, x, f, horizon, GROWTH_FACTOR)
}

pub fn hahn_banach_probe_with(
    op: &LinearOperator,
    x: &Vector,
    f: &Vector,
    horizon: usize,
    growth_factor: f64,
) -> Result<ProbeTrace> {
    f.check_dim(op.dim())?;
    if f.norm() == 0.0 {
        return Err(Error::ZeroFunctional);
    }
    let orbit = compute_orbit(op, x, horizon)?;
    let values: Vec<f64> = orbit.rows().iter().map(|v| v.inner(f).re).collect();
    let mut running_max = Vec::with_capacity(values.len());
    let mut best = f64::NEG_INFINITY;
    for &v in &values {
        best = best.max(v);
        running_max.push(best);
    }
    let classification = classify_growth(&values, &running_max, growth_factor);
    Ok(ProbeTrace {
        values,
        running_max,
        classification,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Complex,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ConvexCyclic,
    NotConvexCyclic,
    /// The spectral criterion holds but a conjugate eigenvalue pair confines
    /// the hull of every orbit to a proper real subspace.
    CriterionPassesWithCaveat,
    /// No implemented criterion decides this operator.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    ModulusAtMostOne,
    RealEigenvalue,
    RepeatedEigenvalue,
    NotBelowMinusOne,
    NormAtMostOne,
    RangeNotDense,
    AdjointSpectrumOutsideRegion,
    MIsometry,
}

impl Criterion {
    pub fn id(self) -> &'static str {
        match self {
            Criterion::ModulusAtMostOne => "eigenvalue-outside-closed-disk",
            Criterion::RealEigenvalue => "eigenvalue-not-real",
            Criterion::RepeatedEigenvalue => "eigenvalues-distinct",
            Criterion::NotBelowMinusOne => "real-eigenvalue-below-minus-one",
            Criterion::NormAtMostOne => "norm-gate",
            Criterion::RangeNotDense => "dense-range-gate",
            Criterion::AdjointSpectrumOutsideRegion => "adjoint-spectrum-gate",
            Criterion::MIsometry => "m-isometry-gate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reason {
    pub criterion: Criterion,
    pub detail: String,
}

impl Reason {
    fn new(criterion: Criterion, detail: String) -> Self {
        Reason { criterion, detail }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Caveat {
    /// `λ_first ≈ conj(λ_second)`, indices into the eigenvalue list.
    ConjugatePair { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierReport {
    pub verdict: Verdict,
    pub reasons: Vec<Reason>,
    pub caveats: Vec<Caveat>,
}

/// `λ ∈ ℂ ∖ (D̄ ∪ ℝ)`.
pub fn set_s_membership(lambda: Complex64) -> bool {
    lambda.norm() > 1.0 && lambda.im.abs() > REAL_TOL
}

fn coincide(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(1.0)
}

fn conjugate_pairs(eigs: &[Complex64]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..eigs.len() {
        for j in i + 1..eigs.len() {
            let (a, b) = (eigs[i], eigs[j]);
            if a.im.abs() > REAL_TOL
                && b.im.abs() > REAL_TOL
                && coincide(a, b.conj(), CONJUGATE_TOL)
            {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

fn fmt_c(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

/// Spectral test for a diagonal operator with the given eigenvalues.
pub fn diagonal_classifier(eigs: &[Complex64], field: Field) -> Result<ClassifierReport> {
    if eigs.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let mut reasons = Vec::new();
    for i in 0..eigs.len() {
        for j in i + 1..eigs.len() {
            if coincide(eigs[i], eigs[j], DISTINCT_TOL) {
                reasons.push(Reason::new(
                    Criterion::RepeatedEigenvalue,
                    format!("λ{} ≈ λ{} = {}", i + 1, j + 1, fmt_c(eigs[j])),
                ));
            }
        }
    }
    match field {
        Field::Real => {
            if eigs.iter().any(|l| l.im.abs() > REAL_TOL) {
                return Err(Error::InvalidArgument(
                    "real field requires real eigenvalues",
                ));
            }
            for (i, l) in eigs.iter().enumerate() {
                if !(l.re < -1.0) {
                    reasons.push(Reason::new(
                        Criterion::NotBelowMinusOne,
                        format!("λ{} = {} ≥ −1", i + 1, l.re),
                    ));
                }
            }
            let verdict = if reasons.is_empty() {
                Verdict::ConvexCyclic
            } else {
                Verdict::NotConvexCyclic
            };
            Ok(ClassifierReport {
                verdict,
                reasons,
                caveats: Vec::new(),
            })
        }
        Field::Complex => {
            for (i, &l) in eigs.iter().enumerate() {
                if l.norm() <= 1.0 {
                    reasons.push(Reason::new(
                        Criterion::ModulusAtMostOne,
                        format!("|λ{}| = {} ≤ 1", i + 1, l.norm()),
                    ));
                }
                if l.im.abs() <= REAL_TOL {
                    reasons.push(Reason::new(
                        Criterion::RealEigenvalue,
                        format!("λ{} = {} is real", i + 1, l.re),
                    ));
                }
            }
            let caveats: Vec<Caveat> = conjugate_pairs(eigs)
                .into_iter()
                .map(|(first, second)| Caveat::ConjugatePair { first, second })
                .collect();
            let verdict = if !reasons.is_empty() {
                Verdict::NotConvexCyclic
            } else if !caveats.is_empty() {
                Verdict::CriterionPassesWithCaveat
            } else {
                Verdict::ConvexCyclic
            };
            Ok(ClassifierReport {
                verdict,
                reasons,
                caveats,
            })
        }
    }
}

/// Outcome of the three necessary conditions. Any failed gate rules the
/// operator out; passing all three proves nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct NecessaryConditions {
    pub norm: f64,
    pub norm_converged: bool,
    pub norm_gt_one: bool,
    pub range_defect: usize,
    pub dense_range: bool,
    pub adjoint_spectrum: Vec<Complex64>,
    pub adjoint_spectrum_ok: bool,
}

impl NecessaryConditions {
    pub fn all_pass(&self) -> bool {
        self.norm_gt_one && self.dense_range && self.adjoint_spectrum_ok
    }

    pub fn reasons(&self) -> Vec<Reason> {
        let mut out = Vec::new();
        if !self.norm_gt_one {
            let shown = (self.norm * 1e9).round() / 1e9;
            out.push(Reason::new(
                Criterion::NormAtMostOne,
                format!("‖T‖ = {shown}"),
            ));
        }
        if !self.dense_range {
            out.push(Reason::new(
                Criterion::RangeNotDense,
                format!("range has codimension {}", self.range_defect),
            ));
        }
        for &l in &self.adjoint_spectrum {
            if !set_s_membership(l) {
                out.push(Reason::new(
                    Criterion::AdjointSpectrumOutsideRegion,
                    format!(
                        "eigenvalue {} of T* lies in the closed disk or on ℝ",
                        fmt_c(l)
                    ),
                ));
            }
        }
        out
    }
}

pub fn necessary_conditions_report(op: &LinearOperator) -> Result<NecessaryConditions> {
    let estimate = op.operator_norm_estimate();
    let range_defect = op.range_density_defect();
    let adjoint_spectrum = op.adjoint_point_spectrum()?;
    let adjoint_spectrum_ok = adjoint_spectrum.iter().all(|&l| set_s_membership(l));
    Ok(NecessaryConditions {
        norm: estimate.value,
        norm_converged: estimate.converged,
        norm_gt_one: estimate.value > 1.0 + NORM_MARGIN,
        range_defect,
        dense_range: range_defect == 0,
        adjoint_spectrum,
        adjoint_spectrum_ok,
    })
}

fn binomial(m: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

fn check_mp(m: usize, p: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1"));
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidArgument("p must be positive"));
    }
    Ok(())
}

/// `Σ_{k=0}^m (−1)^{m−k} C(m,k) ‖T^k x‖^p`.
pub fn m_isometry_defect(op: &LinearOperator, x: &Vector, m: usize, p: f64) -> Result<f64> {
    check_mp(m, p)?;
    x.check_dim(op.dim())?;
    Ok(defect_unchecked(op, x, m, p))
}

fn defect_unchecked(op: &LinearOperator, x: &Vector, m: usize, p: f64) -> f64 {
    let mut v = x.clone();
    let mut sum = 0.0;
    for k in 0..=m {
        if k > 0 {
            v = op.apply_unchecked(&v);
        }
        let sign = if (m - k).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += sign * binomial(m, k) * v.norm().powf(p);
    }
    sum
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsometryOptions {
    /// Random unit vectors, in addition to the basis vectors.
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    /// Restrict truncated shifts to the first `dim − m` coordinates.
    pub edge_guard: bool,
}

impl Default for IsometryOptions {
    fn default() -> Self {
        IsometryOptions {
            samples: 100,
            tol: 1e-9,
            seed: 0x5eed,
            edge_guard: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MIsometryReport {
    pub m: usize,
    pub p_exponent: f64,
    /// Basis vectors first, then the random samples.
    pub defects: Vec<f64>,
    /// `tol·max(1, ‖T‖)^{m·p}`.
    pub threshold: f64,
    /// Number of leading coordinates the samples were drawn from.
    pub support: usize,
    pub is_m_isometry: bool,
    pub seminorm_estimates: Option<Vec<f64>>,
}

pub fn is_m_isometry(
    op: &LinearOperator,
    m: usize,
    p: f64,
    options: &IsometryOptions,
) -> Result<MIsometryReport> {
    check_mp(m, p)?;
    if options.samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required"));
    }
    let dim = op.dim();
    let support = if options.edge_guard && op.spec().is_truncated_shift() && dim > m {
        dim - m
    } else {
        dim
    };
    let threshold = options.tol * op.operator_norm().max(1.0).powf(m as f64 * p);

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut defects = Vec::with_capacity(support + options.samples);
    for j in 0..support {
        defects.push(defect_unchecked(op, &Vector::basis(dim, j), m, p));
    }
    for _ in 0..options.samples {
        let x = random_unit(&mut rng, dim, support);
        defects.push(defect_unchecked(op, &x, m, p));
    }
    let is_m_isometry = defects.iter().all(|d| d.abs() <= threshold);
    Ok(MIsometryReport {
        m,
        p_exponent: p,
        defects,
        threshold,
        support,
        is_m_isometry,
        seminorm_estimates: None,
    })
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize, support: usize) -> Vector {
    loop {
        let mut entries = alloc::vec![Complex64::new(0.0, 0.0); dim];
        for e in entries.iter_mut().take(support) {
            *e = Complex64::new(
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            );
        }
        let norm: f64 = entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            for e in &mut entries {
                *e /= norm;
            }
            return Vector::new(entries).expect("finite nonempty");
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeminormEstimate {
    /// `‖T^N x‖ / N^{(m−1)/p}`.
    pub estimate: f64,
    /// `(max − min)/estimate` over the last 10 terms.
    pub spread: f64,
    /// Every ratio between consecutive terms among the last 10 is at least 1.5.
    pub diverged: bool,
}

const SEMINORM_WINDOW: usize = 10;
const DIVERGENCE_RATIO: f64 = 1.5;

pub fn misometry_seminorm_estimate(
    op: &LinearOperator,
    x: &Vector,
    m: usize,
    p: f64,
    horizon: usize,
) -> Result<SeminormEstimate> {
    check_mp(m, p)?;
    x.check_dim(op.dim())?;
    if horizon < SEMINORM_WINDOW {
        return Err(Error::InvalidArgument("N must be at least 10"));
    }
    let exponent = (m as f64 - 1.0) / p;
    let mut v = x.clone();
    let mut terms = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        if n > 0 {
            v = op.apply_unchecked(&v);
        }
        let norm = v.norm();
        if !norm.is_finite() || norm > OVERFLOW_GUARD {
            return Err(Error::NumericalOverflow {
                last_safe: n.saturating_sub(1),
            });
        }
        terms.push(norm / (n as f64).powf(exponent));
    }
    let window = &terms[horizon + 1 - SEMINORM_WINDOW..];
    let estimate = terms[horizon];
    let max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = window.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if estimate > 0.0 {
        (max - min) / estimate
    } else {
        0.0
    };
    let diverged = window
        .windows(2)
        .all(|w| w[0] > 0.0 && w[1] / w[0] >= DIVERGENCE_RATIO);
    Ok(SeminormEstimate {
        estimate,
        spread,
        diverged,
    })
}

/// For the first conjugate pair `(j, k)` in `eigs`, the functional with
/// `f_j = −i/conj(x_j)`, `f_k = −i/conj(x_k)` and zeros elsewhere. Then
/// `⟨T^n x, f⟩ = i(λ_j^n + λ_k^n)` is purely imaginary along the orbit of
/// `diag(eigs)`, which is checked for `n ≤ 100`.
pub fn conjugate_confinement_witness(eigs: &[Complex64], x: &Vector) -> Result<Option<Vector>> {
    x.check_dim(eigs.len())?;
    let Some(&(j, k)) = conjugate_pairs(eigs).first() else {
        return Ok(None);
    };
    let (xj, xk) = (x[j], x[k]);
    if xj == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroCoordinateAtPair { index: j });
    }
    if xk == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroCoordinateAtPair { index: k });
    }
    let minus_i = Complex64::new(0.0, -1.0);
    let fj = minus_i / xj.conj();
    let fk = minus_i / xk.conj();

    // First-order drift when the pair is conjugate only within tolerance.
    let mismatch = (eigs[j] - eigs[k].conj()).norm() / eigs[j].norm();
    let (mut vj, mut vk) = (xj, xk);
    for n in 0..=WITNESS_HORIZON {
        if n > 0 {
            vj *= eigs[j];
            vk *= eigs[k];
        }
        if !vj.is_finite() || !vk.is_finite() || vj.norm().max(vk.norm()) > OVERFLOW_GUARD {
            break;
        }
        let value = (vj * fj.conj() + vk * fk.conj()).re;
        let scale = vj.norm() * fj.norm() + vk.norm() * fk.norm();
        let allowed = scale * (1e-12 * (n + 1) as f64 + 2.0 * n as f64 * mismatch);
        if value.abs() > allowed {
            return Err(Error::WitnessVerification { n });
        }
    }
    let mut f = alloc::vec![Complex64::new(0.0, 0.0); eigs.len()];
    f[j] = fj;
    f[k] = fk;
    Ok(Some(Vector::new(f)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    /// Seed for the confinement witness; all ones when absent.
    pub seed_vector: Option<Vector>,
    pub isometry: IsometryOptions,
    /// The isometry gate tries `m = 1..=max_m`.
    pub max_m: usize,
    pub p_exponent: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            seed_vector: None,
            isometry: IsometryOptions::default(),
            max_m: 3,
            p_exponent: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorClassification {
    pub report: ClassifierReport,
    pub gates: NecessaryConditions,
    pub isometry: Vec<MIsometryReport>,
    /// Present for operators with a diagonal spec.
    pub diagonal: Option<ClassifierReport>,
    /// Functional whose probe vanishes on the seed's orbit, when a
    /// conjugate pair was found.
    pub witness: Option<Vector>,
}

/// Runs the gates, the isometry test and, for diagonal specs, the spectral
/// classifier. Any failure gives `NotConvexCyclic`.
pub fn classify_operator(
    op: &LinearOperator,
    options: &ClassifyOptions,
) -> Result<OperatorClassification> {
    let gates = necessary_conditions_report(op)?;
    let mut reasons = gates.reasons();

    let mut isometry = Vec::with_capacity(options.max_m);
    for m in 1..=options.max_m {
        let report = is_m_isometry(op, m, options.p_exponent, &options.isometry)?;
        if report.is_m_isometry {
            reasons.push(Reason::new(
                Criterion::MIsometry,
                format!("T is an ({m}, {})-isometry", options.p_exponent),
            ));
        }
        isometry.push(report);
    }

    let mut caveats = Vec::new();
    let mut witness = None;
    let diagonal = match op.spec().diagonal_entries() {
        Some(eigs) => {
            let report = diagonal_classifier(&eigs, Field::Complex)?;
            reasons.extend(report.reasons.iter().cloned());
            caveats.extend(report.caveats.iter().copied());
            let seed = match &options.seed_vector {
                Some(x) => x.clone(),
                None => Vector::from_real(&alloc::vec![1.0; eigs.len()])?,
            };
            witness = match conjugate_confinement_witness(&eigs, &seed) {
                Ok(w) => w,
                Err(Error::ZeroCoordinateAtPair { .. }) => None,
                Err(e) => return Err(e),
            };
            Some(report)
        }
        None => None,
    };

    let verdict = if !reasons.is_empty() {
        Verdict::NotConvexCyclic
    } else if let Some(d) = &diagonal {
        d.verdict
    } else {
        Verdict::Inconclusive
    };
    Ok(OperatorClassification {
        report: ClassifierReport {
            verdict,
            reasons,
            caveats,
        },
        gates,
        isometry,
        diagonal,
        witness,
    })
}

/// Diagonal operator with the given entries; convenience for callers that
/// start from a spectrum.
pub fn diagonal_operator(eigs: &[Complex64]) -> Result<LinearOperator> {
    LinearOperator::build(OperatorSpec::Diagonal(eigs.to_vec()))
}
