//! Constructive procedures: `T ⊕ ±T`, `cT`, the ε-greedy support-N average
//! and the convex polynomial that carries a point outside the disk onto the
//! unit circle.

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hull::{compute_orbit, nearest_row, OrbitTable};
use crate::operator::{block_diagonal, LinearOperator, OperatorSpec};
use crate::poly::{ConvexPolynomial, DEGREE_CAP};
use crate::{Error, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `T ⊕ T` or `T ⊕ −T`.
pub fn direct_sum_pm(op: &LinearOperator, sign: Sign) -> LinearOperator {
    let second = match sign {
        Sign::Plus => op.spec().clone(),
        Sign::Minus => op.spec().clone().negated(),
    };
    let lower = match sign {
        Sign::Plus => op.matrix().clone(),
        Sign::Minus => -op.matrix().clone(),
    };
    let matrix = block_diagonal(&[op.matrix().clone(), lower]);
    LinearOperator::from_parts(
        matrix,
        OperatorSpec::DirectSum(alloc::vec![op.spec().clone(), second]),
    )
}

/// `cT` for real `c > 1`.
pub fn scale_operator(op: &LinearOperator, c: f64) -> Result<LinearOperator> {
    if !c.is_finite() || !(c > 1.0) {
        return Err(Error::InvalidScale(c));
    }
    let factor = Complex64::new(c, 0.0);
    Ok(LinearOperator::from_parts(
        op.matrix() * factor,
        op.spec().clone().scaled(factor),
    ))
}

/// A candidate orbit point `T^n x` returned by an oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleHit {
    pub exponent: usize,
    pub vector: Vector,
}

/// Source of orbit points approximating a requested target.
pub trait ApproximationOracle {
    fn nearest(&mut self, target: &Vector) -> Option<OracleHit>;
}

/// Exhaustive search over `T^n x`, `n ≤ horizon`.
#[derive(Debug, Clone)]
pub struct OrbitOracle {
    orbit: OrbitTable,
}

impl OrbitOracle {
    pub fn new(op: &LinearOperator, x: &Vector, horizon: usize) -> Result<Self> {
        Ok(OrbitOracle {
            orbit: compute_orbit(op, x, horizon)?,
        })
    }

    pub fn from_orbit(orbit: OrbitTable) -> Self {
        OrbitOracle { orbit }
    }
}

impl ApproximationOracle for OrbitOracle {
    fn nearest(&mut self, target: &Vector) -> Option<OracleHit> {
        let (n, _) = nearest_row(self.orbit.rows(), target);
        Some(OracleHit {
            exponent: n,
            vector: self.orbit.rows()[n].clone(),
        })
    }
}

/// Test seam: answers every query with a point inside the ε-ball around the
/// target, so the constructive argument can be exercised without an operator
/// that is actually ε-hypercyclic. Exponents are the query count.
#[derive(Debug, Clone)]
pub struct MockOracle {
    eps: f64,
    rng: ChaCha8Rng,
    calls: usize,
    exact_first: bool,
}

impl MockOracle {
    pub fn new(eps: f64, seed: u64) -> Self {
        MockOracle {
            eps,
            rng: ChaCha8Rng::seed_from_u64(seed),
            calls: 0,
            exact_first: false,
        }
    }

    /// The first query is answered with the target itself.
    pub fn exact_first(mut self) -> Self {
        self.exact_first = true;
        self
    }
}

impl ApproximationOracle for MockOracle {
    fn nearest(&mut self, target: &Vector) -> Option<OracleHit> {
        let exponent = self.calls;
        self.calls += 1;
        if self.exact_first && exponent == 0 {
            return Some(OracleHit {
                exponent,
                vector: target.clone(),
            });
        }
        let dir: Vec<Complex64> = (0..target.dim())
            .map(|_| {
                Complex64::new(
                    self.rng.random::<f64>() * 2.0 - 1.0,
                    self.rng.random::<f64>() * 2.0 - 1.0,
                )
            })
            .collect();
        let dir = Vector::new(dir).ok()?;
        let norm = dir.norm();
        let radius = self.eps * target.norm() * 0.999 * self.rng.random::<f64>();
        let offset = if norm > 0.0 {
            dir.scale_real(radius / norm)
        } else {
            Vector::zeros(target.dim())
        };
        Some(OracleHit {
            exponent,
            vector: target.add(&offset),
        })
    }
}

/// Steps completed before an oracle miss.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonGreedyPartial {
    pub terms: usize,
    pub exponents: Vec<usize>,
    pub steps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonGreedyResult {
    /// Number of terms `N` in the average.
    pub terms: usize,
    /// `k_1, …, k_N`, repeated exponents allowed.
    pub exponents: Vec<usize>,
    /// `(z^{k_1} + ⋯ + z^{k_N}) / N`.
    pub polynomial: ConvexPolynomial,
    /// `‖(1/N)Σ T^{k_j}x − y‖`, recomputed from the oracle vectors.
    pub achieved_error: f64,
    /// `ε^N‖y‖`, doubled when the zero-residual branch was taken.
    pub bound: f64,
    /// Residual norms `‖r_1‖, ‖r_2‖, …`.
    pub steps: Vec<f64>,
    /// Step after which the residual vanished, if it did before step `N`.
    pub zero_residual_step: Option<usize>,
}

/// Largest `N` the greedy construction will attempt.
pub const MAX_TERMS: usize = 10_000;
const ZERO_RESIDUAL: f64 = 1e-12;

/// Smallest `N ≥ 1` with `2ε^N‖y‖ < δ`.
pub fn terms_for(eps: f64, y_norm: f64, delta: f64) -> Result<usize> {
    let mut n = 1usize;
    let mut power = eps;
    while 2.0 * power * y_norm >= delta {
        n += 1;
        power *= eps;
        if n > MAX_TERMS {
            return Err(Error::InvalidArgument("δ too small: more than 10000 terms"));
        }
    }
    Ok(n)
}

/// Builds a support-N average `(1/N)Σ T^{k_j}x` within `δ` of `y`, asking
/// `oracle` for an orbit point within relative error `ε` of each residual.
pub fn epsilon_greedy_approximation<O: ApproximationOracle>(
    y: &Vector,
    eps: f64,
    delta: f64,
    oracle: &mut O,
) -> Result<EpsilonGreedyResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument("ε must lie in (0, 1)"));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument("δ must be positive"));
    }
    let y_norm = y.norm();
    if y_norm == 0.0 {
        return Err(Error::InvalidArgument("target must be nonzero"));
    }
    let terms = terms_for(eps, y_norm, delta)?;
    let n_f = terms as f64;

    let mut residual = y.scale_real(n_f);
    let mut steps = alloc::vec![residual.norm()];
    let mut exponents = Vec::with_capacity(terms);
    let mut total = Vector::zeros(y.dim());
    let mut zero_residual_step = None;

    let miss = |step: usize, best_ratio: f64, exponents: &Vec<usize>, steps: &Vec<f64>| {
        Error::OracleMiss {
            step,
            best_ratio,
            partial: Box::new(EpsilonGreedyPartial {
                terms,
                exponents: exponents.clone(),
                steps: steps.clone(),
            }),
        }
    };

    for step in 1..=terms {
        let r_norm = residual.norm();
        let hit = oracle
            .nearest(&residual)
            .ok_or_else(|| miss(step, f64::INFINITY, &exponents, &steps))?;
        hit.vector.check_dim(y.dim())?;
        let ratio = hit.vector.distance(&residual) / r_norm;
        if !(ratio <= eps) {
            return Err(miss(step, ratio, &exponents, &steps));
        }
        residual = residual.sub(&hit.vector);
        total = total.add(&hit.vector);
        exponents.push(hit.exponent);
        steps.push(residual.norm());

        if step < terms && residual.norm() <= ZERO_RESIDUAL * n_f * y_norm {
            // Exact hit: fill the remaining weight (N − j)/N with one orbit
            // point near the rescaled target (N/(N − j))·ε^N·y.
            let remaining = terms - step;
            let target = y.scale_real(n_f / remaining as f64 * eps.powi(terms as i32));
            let hit = oracle
                .nearest(&target)
                .ok_or_else(|| miss(step + 1, f64::INFINITY, &exponents, &steps))?;
            hit.vector.check_dim(y.dim())?;
            let ratio = hit.vector.distance(&target) / target.norm();
            if !(ratio <= eps) {
                return Err(miss(step + 1, ratio, &exponents, &steps));
            }
            for _ in 0..remaining {
                exponents.push(hit.exponent);
            }
            total = total.add(&hit.vector.scale_real(remaining as f64));
            zero_residual_step = Some(step);
            break;
        }
    }

    let achieved_error = total.scale_real(1.0 / n_f).distance(y);
    let mut bound = eps.powi(terms as i32) * y_norm;
    if zero_residual_step.is_some() {
        bound *= 2.0;
    }
    let polynomial = average_of_monomials(&exponents)?;
    Ok(EpsilonGreedyResult {
        terms,
        exponents,
        polynomial,
        achieved_error,
        bound,
        steps,
        zero_residual_step,
    })
}

fn average_of_monomials(exponents: &[usize]) -> Result<ConvexPolynomial> {
    let degree = exponents.iter().copied().max().unwrap_or(0);
    if degree > DEGREE_CAP {
        return Err(Error::DegreeTooLarge {
            degree,
            cap: DEGREE_CAP,
        });
    }
    let mut coeffs = alloc::vec![0.0; degree + 1];
    let w = 1.0 / exponents.len() as f64;
    for &k in exponents {
        coeffs[k] += w;
    }
    ConvexPolynomial::new(&coeffs)
}

pub const DEFAULT_MAX_EXPONENT: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct DiskTouching {
    pub n: usize,
    pub a: f64,
    /// `a·z^n + (1 − a)`
    pub polynomial: ConvexPolynomial,
}

/// For `|z0| > 1`, finds the least `n` with `Re(z0^n) < 1` and the weight
/// `a ∈ (0, 1]` making `|a·z0^n + (1 − a)| = 1`, i.e. the disk through 1
/// centred on the negative axis whose boundary passes through `z0^n`.
pub fn disk_touching_polynomial(z0: Complex64, max_n: usize) -> Result<DiskTouching> {
    let modulus = z0.norm();
    if !(modulus > 1.0) || !z0.is_finite() {
        return Err(Error::NotOutsideDisk { modulus });
    }
    let mut zeta = Complex64::new(1.0, 0.0);
    for n in 1..=max_n {
        zeta *= z0;
        if !zeta.is_finite() {
            break;
        }
        if zeta.re < 1.0 {
            let a = 2.0 * (1.0 - zeta.re) / (zeta - 1.0).norm_sqr();
            let base = ConvexPolynomial::new(&[1.0 - a, a])?;
            return Ok(DiskTouching {
                n,
                a,
                polynomial: base.substitute_monomial(n)?,
            });
        }
    }
    Err(Error::NoExponentFound { max_n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::criteria::hahn_banach_probe;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn diag(entries: &[Complex64]) -> LinearOperator {
        LinearOperator::build(OperatorSpec::Diagonal(entries.to_vec())).unwrap()
    }

    #[test]
    fn direct_sum_examples() {
        let t = diag(&[c64(0.0, 2.0)]);
        let s = direct_sum_pm(&t, Sign::Minus);
        assert_eq!(s.matrix(), diag(&[c64(0.0, 2.0), c64(0.0, -2.0)]).matrix());
        assert_eq!(s.spec().dim().unwrap(), 2);

        let id = LinearOperator::build(OperatorSpec::Identity(2)).unwrap();
        assert_eq!(
            direct_sum_pm(&id, Sign::Plus).matrix(),
            LinearOperator::build(OperatorSpec::Identity(4))
                .unwrap()
                .matrix()
        );
    }

    #[test]
    fn scale_examples() {
        let t = diag(&[c64(0.0, 2.0)]);
        assert_eq!(
            scale_operator(&t, 1.5).unwrap().matrix(),
            diag(&[c64(0.0, 3.0)]).matrix()
        );
        let id = LinearOperator::build(OperatorSpec::Identity(3)).unwrap();
        let two = scale_operator(&id, 2.0).unwrap();
        assert_abs_diff_eq!(two.operator_norm(), 2.0, epsilon = 1e-12);
        assert_eq!(scale_operator(&id, 1.0), Err(Error::InvalidScale(1.0)));
        assert!(scale_operator(&id, f64::INFINITY).is_err());
    }

    #[test]
    fn scaled_probe_values_scale_by_powers() {
        let t = LinearOperator::build(OperatorSpec::Dense(alloc::vec![
            alloc::vec![c64(0.4, 0.3), c64(-0.2, 0.9)],
            alloc::vec![c64(0.7, -0.1), c64(0.1, 0.5)],
        ]))
        .unwrap();
        let x = Vector::new(alloc::vec![c64(1.0, 0.5), c64(-0.3, 0.2)]).unwrap();
        let f = Vector::new(alloc::vec![c64(0.2, -1.0), c64(0.8, 0.1)]).unwrap();
        let c = 1.5;
        let base = hahn_banach_probe(&t, &x, &f, 50).unwrap();
        let scaled = hahn_banach_probe(&scale_operator(&t, c).unwrap(), &x, &f, 50).unwrap();
        for (n, (a, b)) in base.values.iter().zip(&scaled.values).enumerate() {
            let expected = c.powi(n as i32) * a;
            assert!((b - expected).abs() <= 1e-12 * expected.abs().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn terms_example() {
        assert_eq!(terms_for(0.5, 1.0, 0.01).unwrap(), 8);
        assert_eq!(terms_for(0.5, 1.0, 10.0).unwrap(), 1);
    }

    #[test]
    fn mock_oracle_meets_bound() {
        let y = Vector::from_real(&[0.6, 0.8]).unwrap();
        let mut oracle = MockOracle::new(0.5, 3);
        let r = epsilon_greedy_approximation(&y, 0.5, 0.01, &mut oracle).unwrap();
        assert_eq!(r.terms, 8);
        assert_eq!(r.exponents.len(), 8);
        assert!(r.achieved_error <= 0.5f64.powi(8));
        assert_abs_diff_eq!(r.bound, 1.0 / 256.0, epsilon = 1e-15);
        for w in r.steps.windows(2) {
            assert!(w[1] <= 0.5 * w[0]);
        }
        assert_eq!(r.zero_residual_step, None);
    }

    #[test]
    fn zero_residual_branch() {
        let y = Vector::from_real(&[1.0, 0.0, 0.0]).unwrap();
        let mut oracle = MockOracle::new(0.5, 11).exact_first();
        let r = epsilon_greedy_approximation(&y, 0.5, 0.01, &mut oracle).unwrap();
        assert_eq!(r.zero_residual_step, Some(1));
        assert_eq!(r.exponents.len(), r.terms);
        assert!(r.exponents[1..].iter().all(|&k| k == r.exponents[1]));
        assert!(r.achieved_error <= 2.0 * 0.5f64.powi(8));
        assert_abs_diff_eq!(r.bound, 2.0 / 256.0, epsilon = 1e-15);
        let p = r.polynomial.coeffs();
        assert_abs_diff_eq!(p[0], 1.0 / 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 7.0 / 8.0, epsilon = 1e-15);
    }

    #[test]
    fn identity_orbit_misses() {
        let id = LinearOperator::build(OperatorSpec::Identity(2)).unwrap();
        let x = Vector::from_real(&[1.0, 0.0]).unwrap();
        let y = Vector::from_real(&[0.0, 1.0]).unwrap();
        let mut oracle = OrbitOracle::new(&id, &x, 64).unwrap();
        match epsilon_greedy_approximation(&y, 0.5, 0.01, &mut oracle) {
            Err(Error::OracleMiss {
                step,
                best_ratio,
                partial,
            }) => {
                assert_eq!(step, 1);
                assert!(best_ratio > 0.5);
                assert!(partial.exponents.is_empty());
                assert_eq!(partial.steps.len(), 1);
            }
            other => panic!("expected OracleMiss, got {other:?}"),
        }
    }

    #[test]
    fn greedy_rejects_bad_parameters() {
        let y = Vector::from_real(&[1.0]).unwrap();
        let mut o = MockOracle::new(0.5, 0);
        assert!(epsilon_greedy_approximation(&y, 1.0, 0.1, &mut o).is_err());
        assert!(epsilon_greedy_approximation(&y, 0.5, 0.0, &mut o).is_err());
        assert!(epsilon_greedy_approximation(&Vector::zeros(1), 0.5, 0.1, &mut o).is_err());
    }

    #[test]
    fn disk_touching_examples() {
        let r = disk_touching_polynomial(c64(0.0, 2.0), DEFAULT_MAX_EXPONENT).unwrap();
        assert_eq!(r.n, 1);
        assert_abs_diff_eq!(r.a, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(r.polynomial.coeffs()[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(
            r.polynomial.eval(c64(0.0, 2.0)).norm(),
            1.0,
            epsilon = 1e-10
        );

        let r = disk_touching_polynomial(c64(-2.0, 0.0), DEFAULT_MAX_EXPONENT).unwrap();
        assert_eq!(r.n, 1);
        assert_abs_diff_eq!(r.a, 2.0 / 3.0, epsilon = 1e-15);
        let v = r.polynomial.eval(c64(-2.0, 0.0));
        assert_abs_diff_eq!(v.re, -1.0, epsilon = 1e-12);

        assert_eq!(
            disk_touching_polynomial(c64(2.0, 0.0), DEFAULT_MAX_EXPONENT),
            Err(Error::NoExponentFound { max_n: 512 })
        );
        assert!(matches!(
            disk_touching_polynomial(c64(0.5, 0.5), 10),
            Err(Error::NotOutsideDisk { .. })
        ));
    }

    #[test]
    fn disk_touching_needs_higher_power_near_positive_axis() {
        let z0 = Complex64::from_polar(1.5, 0.3);
        let r = disk_touching_polynomial(z0, DEFAULT_MAX_EXPONENT).unwrap();
        assert!(r.n > 1);
        assert!(z0.powu(r.n as u32 - 1).re >= 1.0);
    }

    proptest! {
        #[test]
        fn disk_touching_lands_on_circle(r in 1.01..4.0f64, theta in 0.05..6.2f64) {
            let z0 = Complex64::from_polar(r, theta);
            let out = disk_touching_polynomial(z0, 4096).unwrap();
            prop_assert!((out.polynomial.eval(z0).norm() - 1.0).abs() <= 1e-10 * r.powi(out.n as i32).max(1.0));
            prop_assert_eq!(out.polynomial.coeffs().iter().filter(|&&a| a > 0.0).count(), 2);
            prop_assert!(out.a > 0.0 && out.a <= 1.0);
        }

        #[test]
        fn mock_greedy_certificates(eps in 0.1..0.9f64, dim in 1usize..=8, seed in 0u64..1000, delta in 1e-4..0.5f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw: Vec<Complex64> = (0..dim).map(|_| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
            let y0 = Vector::new(raw).unwrap();
            let y = y0.scale_real(1.0 / y0.norm());
            let mut oracle = MockOracle::new(eps, seed);
            let r = epsilon_greedy_approximation(&y, eps, delta, &mut oracle).unwrap();
            for w in r.steps.windows(2) {
                prop_assert!(w[1] <= eps * w[0]);
            }
            prop_assert!(r.achieved_error <= r.bound);
            prop_assert!(r.achieved_error < delta);
            prop_assert!(ConvexPolynomial::new(r.polynomial.coeffs()).is_ok());
        }

        #[test]
        fn squares_of_pm_sums_agree(rows in proptest::collection::vec(proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3), 3)) {
            let rows: Vec<Vec<Complex64>> = rows.into_iter().map(|r| r.into_iter().map(|(a, b)| c64(a, b)).collect()).collect();
            let t = LinearOperator::build(OperatorSpec::Dense(rows)).unwrap();
            let minus = direct_sum_pm(&t, Sign::Minus).power(2);
            let plus = direct_sum_pm(&t, Sign::Plus).power(2);
            prop_assert_eq!(minus, plus);
        }
    }
}
