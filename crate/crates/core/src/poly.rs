//! Convex polynomials: nonnegative real coefficients summing to one.
//!
//! Applying every convex polynomial in `T` to `x` sweeps out the convex hull
//! of the orbit of `x`, so these are the natural coordinates for hull points.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;

use crate::operator::LinearOperator;
use crate::{Error, Result, Vector};

/// Largest accepted degree; convolution cost grows quadratically.
pub const DEGREE_CAP: usize = 10_000;
/// Input sums within this distance of one are renormalized.
pub const INPUT_SUM_TOLERANCE: f64 = 1e-9;
/// Stored coefficients sum to one within this tolerance.
pub const STORED_SUM_TOLERANCE: f64 = 1e-12;

/// `p(z) = Σ a_k z^k` with `a_k ≥ 0` and `Σ a_k = 1`, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolynomial {
    coeffs: Vec<f64>,
}

/// Validates `raw` as convex coefficients `a_0, a_1, ...`.
pub fn make_convex(raw: &[f64]) -> Result<ConvexPolynomial> {
    ConvexPolynomial::new(raw)
}

impl ConvexPolynomial {
    pub fn new(raw: &[f64]) -> Result<Self> {
        if raw.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite"));
        }
        if let Some((index, &value)) = raw.iter().enumerate().find(|(_, &a)| a < 0.0) {
            return Err(Error::NegativeCoefficient { index, value });
        }
        let sum: f64 = raw.iter().sum();
        if raw.is_empty() || (sum - 1.0).abs() > INPUT_SUM_TOLERANCE {
            return Err(Error::SumNotOne { sum });
        }
        let mut coeffs: Vec<f64> = raw.to_vec();
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        let degree = coeffs.len() - 1;
        if degree > DEGREE_CAP {
            return Err(Error::DegreeTooLarge {
                degree,
                cap: DEGREE_CAP,
            });
        }
        if (sum - 1.0).abs() > STORED_SUM_TOLERANCE {
            for a in &mut coeffs {
                *a /= sum;
            }
            // Push the remaining rounding into the largest coefficient.
            let drift = 1.0 - coeffs.iter().sum::<f64>();
            let largest = coeffs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            coeffs[largest] = (coeffs[largest] + drift).max(0.0);
        }
        Ok(ConvexPolynomial { coeffs })
    }

    /// The constant polynomial 1, i.e. `p(T) = I`.
    pub fn one() -> Self {
        ConvexPolynomial {
            coeffs: alloc::vec![1.0],
        }
    }

    /// `z^n`
    pub fn monomial(n: usize) -> Result<Self> {
        let mut coeffs = alloc::vec![0.0; n + 1];
        coeffs[n] = 1.0;
        Self::new(&coeffs)
    }

    /// `M_n(z) = (1 + z + ⋯ + z^{n−1}) / n`.
    pub fn cesaro_mean(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("Cesàro mean needs n >= 1"));
        }
        Self::new(&alloc::vec![1.0 / n as f64; n])
    }

    /// Geometric-weight family: `a_j = (c−1)·c^{k−1−j}/(c^k − 1)` for
    /// `j < k`, reducing to the Cesàro mean at `c = 1`.
    pub fn pkc(k: usize, c: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("p_k^c needs k >= 1"));
        }
        if !(c >= 1.0) || !c.is_finite() {
            return Err(Error::InvalidArgument("p_k^c needs finite c >= 1"));
        }
        if c == 1.0 {
            return Self::cesaro_mean(k);
        }
        // Rewritten as (1 − 1/c)·c^{−j}/(1 − c^{−k}) so large k does not overflow.
        let inv = 1.0 / c;
        let head = (1.0 - inv) / (1.0 - inv.powi(k as i32));
        let coeffs: Vec<f64> = (0..k).map(|j| head * inv.powi(j as i32)).collect();
        Self::new(&coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    /// `p(T)x = Σ a_k T^k x` in one orbit sweep.
    pub fn apply(&self, op: &LinearOperator, x: &Vector) -> Result<Vector> {
        x.check_dim(op.dim())?;
        let mut power = x.clone();
        let mut acc = Vector::zeros(x.dim());
        for (k, &a) in self.coeffs.iter().enumerate() {
            if k > 0 {
                power = op.apply_unchecked(&power);
            }
            if a != 0.0 {
                acc.axpy(Complex64::new(a, 0.0), &power);
            }
        }
        Ok(acc)
    }

    /// `p^m` by repeated coefficient convolution.
    pub fn power(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("power needs m >= 1"));
        }
        let degree = self.degree() * m;
        if degree > DEGREE_CAP {
            return Err(Error::DegreeTooLarge {
                degree,
                cap: DEGREE_CAP,
            });
        }
        let mut acc = self.coeffs.clone();
        for _ in 1..m {
            acc = convolve(&acc, &self.coeffs);
        }
        Self::new(&acc)
    }

    /// `q(z) = p(z^n)`: coefficient `a_k` moves to position `k·n`.
    pub fn substitute_monomial(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("substitution needs n >= 1"));
        }
        let degree = self.degree() * n;
        if degree > DEGREE_CAP {
            return Err(Error::DegreeTooLarge {
                degree,
                cap: DEGREE_CAP,
            });
        }
        let mut coeffs = alloc::vec![0.0; degree + 1];
        for (k, &a) in self.coeffs.iter().enumerate() {
            coeffs[k * n] = a;
        }
        Self::new(&coeffs)
    }
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Residual of the telescoping identity
/// `p_k^c(T)(cI − T)x = (c−1)·c^k/(c^k − 1)·(x − (T/c)^k x)`, which holds exactly
/// in exact arithmetic for every `c > 1`.
pub fn pkc_identity_residual(op: &LinearOperator, x: &Vector, c: f64, k: usize) -> Result<f64> {
    x.check_dim(op.dim())?;
    if !(c > 1.0) || !c.is_finite() {
        return Err(Error::InvalidArgument(
            "identity residual needs finite c > 1",
        ));
    }
    let p = ConvexPolynomial::pkc(k, c)?;
    let cx = x.scale_real(c);
    let shifted = cx.sub(&op.apply_unchecked(x));
    let lhs = p.apply(op, &shifted)?;

    let mut scaled_power = x.clone();
    for _ in 0..k {
        scaled_power = op.apply_unchecked(&scaled_power).scale_real(1.0 / c);
    }
    let factor = (c - 1.0) / (1.0 - c.powi(-(k as i32)));
    let rhs = x.sub(&scaled_power).scale_real(factor);
    Ok(lhs.distance(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::operator::OperatorSpec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn make_convex_examples() {
        let p = make_convex(&[0.2, 0.8]).unwrap();
        assert_eq!(p.coeffs(), &[0.2, 0.8]);
        assert_eq!(make_convex(&[1.0]).unwrap(), ConvexPolynomial::one());
        assert!(matches!(
            make_convex(&[0.5, 0.6]),
            Err(Error::SumNotOne { .. })
        ));
        assert_eq!(
            make_convex(&[0.5, -0.1, 0.6]),
            Err(Error::NegativeCoefficient {
                index: 1,
                value: -0.1
            })
        );
        assert!(matches!(make_convex(&[]), Err(Error::SumNotOne { .. })));
    }

    #[test]
    fn renormalizes_within_input_tolerance() {
        let p = make_convex(&[0.3333333333, 0.3333333333, 0.3333333333]).unwrap();
        assert!((p.coeffs().iter().sum::<f64>() - 1.0).abs() <= STORED_SUM_TOLERANCE);
        assert!(matches!(
            make_convex(&[0.333, 0.333, 0.333]),
            Err(Error::SumNotOne { .. })
        ));
    }

    #[test]
    fn trims_trailing_zeros() {
        let p = make_convex(&[0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn degree_cap_is_enforced() {
        let mut raw = alloc::vec![0.0; DEGREE_CAP + 2];
        raw[DEGREE_CAP + 1] = 1.0;
        assert!(matches!(
            make_convex(&raw),
            Err(Error::DegreeTooLarge { .. })
        ));
        let p = make_convex(&[0.5, 0.5]).unwrap();
        assert!(matches!(
            p.power(DEGREE_CAP + 1),
            Err(Error::DegreeTooLarge { .. })
        ));
    }

    #[test]
    fn eval_examples() {
        let p = make_convex(&[0.25, 0.25, 0.5]).unwrap();
        assert_abs_diff_eq!(p.eval(c64(1.0, 0.0)).re, 1.0, epsilon = 1e-15);
        let z = ConvexPolynomial::monomial(1).unwrap();
        assert_eq!(z.eval(c64(0.0, 2.0)), c64(0.0, 2.0));
        let p = make_convex(&[4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]).unwrap();
        let v = p.eval(c64(2.0, 0.0));
        assert_abs_diff_eq!(v.re, 12.0 / 7.0, epsilon = 1e-14);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn apply_examples() {
        let d = LinearOperator::build(OperatorSpec::Diagonal(alloc::vec![
            c64(0.0, 2.0),
            c64(0.0, -2.0)
        ]))
        .unwrap();
        let x = Vector::from_real(&[1.0, 1.0]).unwrap();
        assert_eq!(ConvexPolynomial::one().apply(&d, &x).unwrap(), x);
        let half = make_convex(&[0.5, 0.5]).unwrap();
        assert_eq!(
            half.apply(&d, &x).unwrap(),
            Vector::new(alloc::vec![c64(0.5, 1.0), c64(0.5, -1.0)]).unwrap()
        );
        let id = LinearOperator::build(OperatorSpec::Identity(2)).unwrap();
        let m3 = ConvexPolynomial::cesaro_mean(3).unwrap();
        let y = m3.apply(&id, &x).unwrap();
        assert!(y.distance(&x) < 1e-15);
        assert!(matches!(
            half.apply(&d, &Vector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cesaro_examples() {
        assert_eq!(
            ConvexPolynomial::cesaro_mean(3).unwrap().coeffs(),
            &[1.0 / 3.0; 3]
        );
        assert_eq!(ConvexPolynomial::cesaro_mean(1).unwrap().coeffs(), &[1.0]);
        assert_eq!(
            ConvexPolynomial::cesaro_mean(2).unwrap().coeffs(),
            &[0.5, 0.5]
        );
        assert!(matches!(
            ConvexPolynomial::cesaro_mean(0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn pkc_examples() {
        // (c−1)/(c^k−1)·(c^{k−1} + c^{k−2} t + ⋯) at k = 3, c = 2: (1/7)·(4 + 2t + t²)
        let p = ConvexPolynomial::pkc(3, 2.0).unwrap();
        for (got, want) in p.coeffs().iter().zip([4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert_eq!(ConvexPolynomial::pkc(1, 3.5).unwrap().coeffs(), &[1.0]);
        assert_eq!(ConvexPolynomial::pkc(2, 1.0).unwrap().coeffs(), &[0.5, 0.5]);
        assert!(ConvexPolynomial::pkc(0, 2.0).is_err());
        assert!(ConvexPolynomial::pkc(3, 0.5).is_err());
        assert!(ConvexPolynomial::pkc(3, f64::NAN).is_err());
    }

    #[test]
    fn pkc_large_k_does_not_overflow() {
        let p = ConvexPolynomial::pkc(5000, 3.0).unwrap();
        assert!(p.coeffs().iter().all(|a| a.is_finite()));
        assert_abs_diff_eq!(p.coeffs()[0], 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn power_and_substitution_examples() {
        let half = make_convex(&[0.5, 0.5]).unwrap();
        assert_eq!(half.power(2).unwrap().coeffs(), &[0.25, 0.5, 0.25]);
        assert_eq!(
            ConvexPolynomial::one().power(5).unwrap(),
            ConvexPolynomial::one()
        );
        assert_eq!(half.power(1).unwrap(), half);

        let p = make_convex(&[0.6, 0.4]).unwrap();
        assert_eq!(p.substitute_monomial(2).unwrap().coeffs(), &[0.6, 0.0, 0.4]);
        assert_eq!(
            ConvexPolynomial::one().substitute_monomial(7).unwrap(),
            ConvexPolynomial::one()
        );
        let third = ConvexPolynomial::cesaro_mean(3).unwrap();
        let t = 1.0 / 3.0;
        assert_eq!(
            third.substitute_monomial(3).unwrap().coeffs(),
            &[t, 0.0, 0.0, t, 0.0, 0.0, t]
        );
    }

    #[test]
    fn identity_residual_examples() {
        let d = LinearOperator::build(OperatorSpec::Dense(alloc::vec![
            alloc::vec![c64(0.3, 0.1), c64(-0.7, 0.2)],
            alloc::vec![c64(0.5, -0.4), c64(0.9, 0.0)],
        ]))
        .unwrap();
        let x = Vector::new(alloc::vec![c64(1.0, -1.0), c64(0.25, 2.0)]).unwrap();
        assert!(pkc_identity_residual(&d, &x, 2.0, 1).unwrap() < 1e-14);

        let id = LinearOperator::build(OperatorSpec::Identity(2)).unwrap();
        for k in 1..10 {
            assert!(pkc_identity_residual(&id, &x, 1.7, k).unwrap() < 1e-13);
        }
        assert!(pkc_identity_residual(&id, &x, 1.0, 3).is_err());
    }

    fn arb_convex() -> impl Strategy<Value = ConvexPolynomial> {
        proptest::collection::vec(0.0..1.0f64, 1..12).prop_filter_map("nonzero", |raw| {
            let s: f64 = raw.iter().sum();
            if s <= 1e-6 {
                return None;
            }
            let scaled: Vec<f64> = raw.iter().map(|a| a / s).collect();
            ConvexPolynomial::new(&scaled).ok()
        })
    }

    fn assert_convex(p: &ConvexPolynomial) {
        assert!(p.coeffs().iter().all(|&a| a >= 0.0));
        assert!((p.coeffs().iter().sum::<f64>() - 1.0).abs() <= STORED_SUM_TOLERANCE);
    }

    proptest! {
        #[test]
        fn constructors_are_convex(k in 1usize..60, c in 1.0..5.0f64, m in 1usize..4, n in 1usize..5, p in arb_convex()) {
            assert_convex(&ConvexPolynomial::pkc(k, c).unwrap());
            assert_convex(&ConvexPolynomial::cesaro_mean(k).unwrap());
            let pm = p.power(m).unwrap();
            assert_convex(&pm);
            prop_assert!(make_convex(pm.coeffs()).is_ok());
            let sub = p.substitute_monomial(n).unwrap();
            assert_convex(&sub);
            prop_assert!(make_convex(sub.coeffs()).is_ok());
        }

        #[test]
        fn eval_at_one_is_one(p in arb_convex()) {
            prop_assert!((p.eval(c64(1.0, 0.0)) - c64(1.0, 0.0)).norm() <= 1e-12);
        }

        #[test]
        fn pkc_strictly_decreasing(k in 2usize..200, c in 1.001..4.0f64) {
            let p = ConvexPolynomial::pkc(k, c).unwrap();
            for w in p.coeffs().windows(2) {
                prop_assert!(w[1] < w[0]);
            }
        }

        #[test]
        fn substitution_commutes_with_evaluation(p in arb_convex(), n in 1usize..5, re in -1.5..1.5f64, im in -1.5..1.5f64) {
            let z = c64(re, im);
            let lhs = p.substitute_monomial(n).unwrap().eval(z);
            let rhs = p.eval(z.powu(n as u32));
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }
    }
}
