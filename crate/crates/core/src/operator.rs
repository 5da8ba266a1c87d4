//! Operator specifications and their dense realization.
//!
//! Every operator is materialized as a dense `dim × dim` complex matrix.
//! Shifts are finite sections of the ℓ² shifts: the backward shift sends
//! `e_1 ↦ 0` and the forward shift sends `e_d ↦ 0`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use nalgebra::linalg::SVD;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;

use crate::{eigen, Error, Result, Vector};

/// Relative cutoff used by [`LinearOperator::range_density_defect`].
pub const DEFAULT_RANK_CUTOFF: f64 = 1e-12;

const NORM_MAX_ITER: usize = 10_000;

/// Declarative description of a finite-dimensional operator.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    Diagonal(Vec<Complex64>),
    /// Row-major matrix entries.
    Dense(Vec<Vec<Complex64>>),
    /// `e_{k+1} ↦ w_k e_k`, `e_1 ↦ 0`; `weights.len() == dim - 1`.
    BackwardShift {
        weights: Vec<f64>,
        dim: usize,
    },
    /// `e_k ↦ w_k e_{k+1}`, `e_d ↦ 0`; `weights.len() == dim - 1`.
    ForwardShift {
        weights: Vec<f64>,
        dim: usize,
    },
    Identity(usize),
    /// `Σ coeff_i · spec_i`, all terms of equal dimension.
    Sum(Vec<(Complex64, OperatorSpec)>),
    /// Block-diagonal direct sum.
    DirectSum(Vec<OperatorSpec>),
    Scale {
        factor: Complex64,
        inner: Box<OperatorSpec>,
    },
    Negate(Box<OperatorSpec>),
}

impl OperatorSpec {
    pub fn backward_shift(dim: usize) -> Self {
        OperatorSpec::BackwardShift {
            weights: alloc::vec![1.0; dim.saturating_sub(1)],
            dim,
        }
    }

    pub fn forward_shift(dim: usize) -> Self {
        OperatorSpec::ForwardShift {
            weights: alloc::vec![1.0; dim.saturating_sub(1)],
            dim,
        }
    }

    /// Forward shift with weights `√((n+1)/n)`, so `‖T^k e_1‖² = k + 1`.
    pub fn dirichlet_shift(dim: usize) -> Self {
        let weights = (1..dim)
            .map(|n| ((n as f64 + 1.0) / n as f64).sqrt())
            .collect();
        OperatorSpec::ForwardShift { weights, dim }
    }

    pub fn scaled(self, factor: Complex64) -> Self {
        OperatorSpec::Scale {
            factor,
            inner: Box::new(self),
        }
    }

    pub fn negated(self) -> Self {
        OperatorSpec::Negate(Box::new(self))
    }

    /// Dimension of the realized operator, validating the whole tree.
    pub fn dim(&self) -> Result<usize> {
        match self {
            OperatorSpec::Diagonal(entries) => {
                nonzero_dim(entries.len())?;
                check_finite(entries.iter().copied())?;
                Ok(entries.len())
            }
            OperatorSpec::Dense(rows) => {
                let n = nonzero_dim(rows.len())?;
                for row in rows {
                    if row.len() != n {
                        return Err(Error::dims(n, row.len()));
                    }
                    check_finite(row.iter().copied())?;
                }
                Ok(n)
            }
            OperatorSpec::BackwardShift { weights, dim }
            | OperatorSpec::ForwardShift { weights, dim } => {
                nonzero_dim(*dim)?;
                if weights.len() != dim - 1 {
                    return Err(Error::InvalidSpec("shift weights must have length dim - 1"));
                }
                if weights.iter().any(|w| !w.is_finite()) {
                    return Err(Error::InvalidSpec("nonfinite shift weight"));
                }
                Ok(*dim)
            }
            OperatorSpec::Identity(dim) => nonzero_dim(*dim),
            OperatorSpec::Sum(terms) => {
                let first = terms
                    .first()
                    .ok_or(Error::InvalidSpec("sum needs at least one term"))?;
                let n = first.1.dim()?;
                for (coeff, spec) in terms {
                    check_finite(core::iter::once(*coeff))?;
                    let d = spec.dim()?;
                    if d != n {
                        return Err(Error::dims(n, d));
                    }
                }
                Ok(n)
            }
            OperatorSpec::DirectSum(parts) => {
                if parts.is_empty() {
                    return Err(Error::InvalidSpec("direct sum needs at least one part"));
                }
                parts.iter().map(OperatorSpec::dim).sum()
            }
            OperatorSpec::Scale { factor, inner } => {
                check_finite(core::iter::once(*factor))?;
                inner.dim()
            }
            OperatorSpec::Negate(inner) => inner.dim(),
        }
    }

    /// True for the truncated shift variants, whose last (or first) basis
    /// vector is an artifact of the finite section.
    pub fn is_truncated_shift(&self) -> bool {
        matches!(
            self,
            OperatorSpec::BackwardShift { .. } | OperatorSpec::ForwardShift { .. }
        )
    }

    /// Diagonal entries when the spec is structurally diagonal.
    pub fn diagonal_entries(&self) -> Option<Vec<Complex64>> {
        match self {
            OperatorSpec::Diagonal(entries) => Some(entries.clone()),
            OperatorSpec::Identity(dim) => Some(alloc::vec![Complex64::new(1.0, 0.0); *dim]),
            OperatorSpec::Scale { factor, inner } => inner
                .diagonal_entries()
                .map(|d| d.into_iter().map(|z| z * factor).collect()),
            OperatorSpec::Negate(inner) => inner
                .diagonal_entries()
                .map(|d| d.into_iter().map(|z| -z).collect()),
            OperatorSpec::DirectSum(parts) => {
                let mut out = Vec::new();
                for part in parts {
                    out.extend(part.diagonal_entries()?);
                }
                Some(out)
            }
            _ => None,
        }
    }

    fn materialize(&self) -> DMatrix<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            OperatorSpec::Diagonal(entries) => {
                DMatrix::from_diagonal(&DVector::from_column_slice(entries))
            }
            OperatorSpec::Dense(rows) => {
                let n = rows.len();
                DMatrix::from_fn(n, n, |i, j| rows[i][j])
            }
            OperatorSpec::BackwardShift { weights, dim } => {
                let mut m = DMatrix::from_element(*dim, *dim, zero);
                for (k, &w) in weights.iter().enumerate() {
                    m[(k, k + 1)] = Complex64::new(w, 0.0);
                }
                m
            }
            OperatorSpec::ForwardShift { weights, dim } => {
                let mut m = DMatrix::from_element(*dim, *dim, zero);
                for (k, &w) in weights.iter().enumerate() {
                    m[(k + 1, k)] = Complex64::new(w, 0.0);
                }
                m
            }
            OperatorSpec::Identity(dim) => DMatrix::identity(*dim, *dim),
            OperatorSpec::Sum(terms) => {
                let mut acc: Option<DMatrix<Complex64>> = None;
                for (coeff, spec) in terms {
                    let term = spec.materialize() * *coeff;
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a + term,
                    });
                }
                acc.expect("validated nonempty")
            }
            OperatorSpec::DirectSum(parts) => {
                let blocks: Vec<_> = parts.iter().map(OperatorSpec::materialize).collect();
                block_diagonal(&blocks)
            }
            OperatorSpec::Scale { factor, inner } => inner.materialize() * *factor,
            OperatorSpec::Negate(inner) => -inner.materialize(),
        }
    }
}

fn nonzero_dim(dim: usize) -> Result<usize> {
    if dim == 0 {
        Err(Error::InvalidSpec("dimension must be >= 1"))
    } else {
        Ok(dim)
    }
}

fn check_finite(values: impl IntoIterator<Item = Complex64>) -> Result<()> {
    if values.into_iter().all(|z| z.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidSpec("nonfinite entry"))
    }
}

pub(crate) fn block_diagonal(blocks: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let mut offset = 0;
    for b in blocks {
        let k = b.nrows();
        m.view_mut((offset, offset), (k, k)).copy_from(b);
        offset += k;
    }
    m
}

/// Largest singular value together with whether the solver converged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub converged: bool,
}

/// A materialized operator. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    matrix: DMatrix<Complex64>,
    spec: OperatorSpec,
}

pub fn build_operator(spec: OperatorSpec) -> Result<LinearOperator> {
    LinearOperator::build(spec)
}

impl LinearOperator {
    pub fn build(spec: OperatorSpec) -> Result<Self> {
        spec.dim()?;
        let matrix = spec.materialize();
        if matrix.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidSpec("realized matrix has nonfinite entries"));
        }
        Ok(LinearOperator { matrix, spec })
    }

    /// Wraps an explicit square matrix; the recorded spec is `Dense`.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::dims(matrix.nrows(), matrix.ncols()));
        }
        let rows = (0..matrix.nrows())
            .map(|i| matrix.row(i).iter().copied().collect())
            .collect();
        Self::build(OperatorSpec::Dense(rows))
    }

    pub(crate) fn from_parts(matrix: DMatrix<Complex64>, spec: OperatorSpec) -> Self {
        debug_assert_eq!(spec.dim().ok(), Some(matrix.nrows()));
        LinearOperator { matrix, spec }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        v.check_dim(self.dim())?;
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &Vector) -> Vector {
        Vector::from_dvector(&self.matrix * v.as_dvector())
    }

    /// `T^k`
    pub fn power(&self, k: u32) -> DMatrix<Complex64> {
        let mut out = DMatrix::identity(self.dim(), self.dim());
        for _ in 0..k {
            out = &self.matrix * out;
        }
        out
    }

    pub fn operator_norm(&self) -> f64 {
        self.operator_norm_estimate().value
    }

    /// Spectral norm via a full SVD, falling back to power iteration on
    /// `T*T` when the SVD does not converge.
    pub fn operator_norm_estimate(&self) -> NormEstimate {
        if let Some(sv) = self.singular_values() {
            return NormEstimate {
                value: sv.iter().copied().fold(0.0, f64::max),
                converged: true,
            };
        }
        power_iteration_norm(&self.matrix)
    }

    pub fn singular_values(&self) -> Option<Vec<f64>> {
        SVD::try_new(
            self.matrix.clone(),
            false,
            false,
            f64::EPSILON,
            NORM_MAX_ITER,
        )
        .map(|svd| svd.singular_values.iter().copied().collect())
    }

    /// Eigenvalues of the conjugate transpose, with multiplicity.
    pub fn adjoint_point_spectrum(&self) -> Result<Vec<Complex64>> {
        eigen::eigenvalues(&self.matrix.adjoint())
    }

    /// `dim − rank`, counting singular values above `dim · σ_max · 1e-12`.
    pub fn range_density_defect(&self) -> usize {
        self.range_density_defect_with(DEFAULT_RANK_CUTOFF)
    }

    pub fn range_density_defect_with(&self, relative_cutoff: f64) -> usize {
        let n = self.dim();
        let sv = match self.singular_values() {
            Some(sv) => sv,
            // no rank certificate without a converged SVD
            None => return n,
        };
        let sigma_max = sv.iter().copied().fold(0.0, f64::max);
        let threshold = n as f64 * sigma_max * relative_cutoff;
        let rank = sv.iter().filter(|&&s| s > threshold).count();
        n - rank
    }
}

fn power_iteration_norm(m: &DMatrix<Complex64>) -> NormEstimate {
    let n = m.nrows();
    let gram = m.adjoint() * m;
    let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 + i as f64 * 1e-3, 0.5));
    v /= Complex64::new(v.norm(), 0.0);
    let mut lambda = 0.0;
    for _ in 0..NORM_MAX_ITER {
        let w = &gram * &v;
        let next = w.norm();
        if next == 0.0 {
            return NormEstimate {
                value: 0.0,
                converged: true,
            };
        }
        v = w / Complex64::new(next, 0.0);
        if (next - lambda).abs() <= 1e-16 * next {
            return NormEstimate {
                value: next.sqrt(),
                converged: true,
            };
        }
        lambda = next;
    }
    NormEstimate {
        value: lambda.sqrt(),
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn diag_2i() -> LinearOperator {
        LinearOperator::build(OperatorSpec::Diagonal(alloc::vec![
            c64(0.0, 2.0),
            c64(0.0, -2.0)
        ]))
        .unwrap()
    }

    fn two_i_plus_b(dim: usize) -> OperatorSpec {
        OperatorSpec::Sum(alloc::vec![
            (c64(2.0, 0.0), OperatorSpec::Identity(dim)),
            (c64(1.0, 0.0), OperatorSpec::backward_shift(dim)),
        ])
    }

    #[test]
    fn builds_named_operators() {
        let d = diag_2i();
        assert_eq!(d.matrix()[(0, 0)], c64(0.0, 2.0));
        assert_eq!(d.matrix()[(1, 1)], c64(0.0, -2.0));
        assert_eq!(d.matrix()[(0, 1)], c64(0.0, 0.0));

        let id = LinearOperator::build(OperatorSpec::Identity(3)).unwrap();
        assert_eq!(id.matrix(), &DMatrix::identity(3, 3));

        let m = LinearOperator::build(two_i_plus_b(2)).unwrap();
        let expected = DMatrix::from_row_slice(
            2,
            2,
            &[c64(2.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(2.0, 0.0)],
        );
        assert_eq!(m.matrix(), &expected);
    }

    #[test]
    fn shift_semantics() {
        let b = LinearOperator::build(OperatorSpec::backward_shift(3)).unwrap();
        let v = Vector::from_real(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(
            b.apply(&v).unwrap(),
            Vector::from_real(&[0.0, 1.0, 0.0]).unwrap()
        );
        let e1 = Vector::basis(3, 0);
        assert_eq!(b.apply(&e1).unwrap(), Vector::zeros(3));

        let f = LinearOperator::build(OperatorSpec::ForwardShift {
            weights: alloc::vec![2.0, 3.0],
            dim: 3,
        })
        .unwrap();
        assert_eq!(
            f.apply(&e1).unwrap(),
            Vector::from_real(&[0.0, 2.0, 0.0]).unwrap()
        );
        assert_eq!(f.apply(&Vector::basis(3, 2)).unwrap(), Vector::zeros(3));
    }

    #[test]
    fn apply_examples() {
        let x = Vector::from_real(&[1.0, 1.0]).unwrap();
        assert_eq!(
            diag_2i().apply(&x).unwrap(),
            Vector::new(alloc::vec![c64(0.0, 2.0), c64(0.0, -2.0)]).unwrap()
        );
        let m = LinearOperator::build(two_i_plus_b(2)).unwrap();
        assert_eq!(
            m.apply(&x).unwrap(),
            Vector::from_real(&[3.0, 2.0]).unwrap()
        );
        assert_eq!(
            m.apply(&Vector::zeros(3)),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        );
    }

    #[test]
    fn spec_errors() {
        let bad_sum = OperatorSpec::Sum(alloc::vec![
            (c64(1.0, 0.0), OperatorSpec::Identity(2)),
            (c64(1.0, 0.0), OperatorSpec::Identity(3)),
        ]);
        assert!(matches!(
            LinearOperator::build(bad_sum),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            LinearOperator::build(OperatorSpec::Diagonal(alloc::vec![c64(f64::NAN, 0.0)])),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            LinearOperator::build(OperatorSpec::BackwardShift {
                weights: alloc::vec![1.0],
                dim: 3
            }),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            LinearOperator::build(OperatorSpec::Identity(0)),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            LinearOperator::build(OperatorSpec::Dense(alloc::vec![
                alloc::vec![c64(1.0, 0.0), c64(0.0, 0.0)],
                alloc::vec![c64(1.0, 0.0)],
            ])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn norms() {
        let id = LinearOperator::build(OperatorSpec::Identity(3)).unwrap();
        assert_relative_eq!(id.operator_norm(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(diag_2i().operator_norm(), 2.0, max_relative = 1e-12);
        let twice_b =
            LinearOperator::build(OperatorSpec::backward_shift(8).scaled(c64(2.0, 0.0))).unwrap();
        assert_relative_eq!(twice_b.operator_norm(), 2.0, max_relative = 1e-12);
        assert!(twice_b.operator_norm_estimate().converged);
    }

    #[test]
    fn power_iteration_agrees_with_svd() {
        let m = LinearOperator::build(two_i_plus_b(6)).unwrap();
        let est = power_iteration_norm(m.matrix());
        assert!(est.converged);
        assert_relative_eq!(est.value, m.operator_norm(), max_relative = 1e-8);
    }

    #[test]
    fn adjoint_spectra() {
        let mut eigs = diag_2i().adjoint_point_spectrum().unwrap();
        eigs.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert_eq!(eigs, alloc::vec![c64(0.0, -2.0), c64(0.0, 2.0)]);

        let id = LinearOperator::build(OperatorSpec::Identity(2)).unwrap();
        assert_eq!(
            id.adjoint_point_spectrum().unwrap(),
            alloc::vec![c64(1.0, 0.0); 2]
        );

        let m = LinearOperator::build(two_i_plus_b(2)).unwrap();
        assert_eq!(
            m.adjoint_point_spectrum().unwrap(),
            alloc::vec![c64(2.0, 0.0); 2]
        );
    }

    #[test]
    fn range_defects() {
        let f = LinearOperator::build(OperatorSpec::forward_shift(3)).unwrap();
        assert_eq!(f.range_density_defect(), 1);
        let id = LinearOperator::build(OperatorSpec::Identity(4)).unwrap();
        assert_eq!(id.range_density_defect(), 0);
        assert_eq!(diag_2i().range_density_defect(), 0);
        let zero =
            LinearOperator::build(OperatorSpec::Diagonal(alloc::vec![c64(0.0, 0.0); 3])).unwrap();
        assert_eq!(zero.range_density_defect(), 3);
    }

    #[test]
    fn diagonal_entries_through_combinators() {
        let spec = OperatorSpec::DirectSum(alloc::vec![
            OperatorSpec::Diagonal(alloc::vec![c64(0.0, 2.0)]),
            OperatorSpec::Diagonal(alloc::vec![c64(0.0, 2.0)]).negated(),
        ]);
        assert_eq!(
            spec.diagonal_entries(),
            Some(alloc::vec![c64(0.0, 2.0), c64(0.0, -2.0)])
        );
        assert_eq!(OperatorSpec::backward_shift(3).diagonal_entries(), None);
    }

    fn arb_dense(max_dim: usize) -> impl Strategy<Value = Vec<Vec<Complex64>>> {
        (1..=max_dim).prop_flat_map(|n| {
            proptest::collection::vec(
                proptest::collection::vec(
                    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c64(a, b)),
                    n,
                ),
                n,
            )
        })
    }

    proptest! {
        #[test]
        fn direct_sum_with_negation_is_block_matrix(rows in arb_dense(5)) {
            let a = OperatorSpec::Dense(rows.clone());
            let op = LinearOperator::build(OperatorSpec::DirectSum(alloc::vec![
                a.clone(),
                a.clone().negated(),
            ])).unwrap();
            let n = rows.len();
            for i in 0..2 * n {
                for j in 0..2 * n {
                    let expected = if i < n && j < n {
                        rows[i][j]
                    } else if i >= n && j >= n {
                        -rows[i - n][j - n]
                    } else {
                        c64(0.0, 0.0)
                    };
                    prop_assert_eq!(op.matrix()[(i, j)], expected);
                }
            }
        }

        #[test]
        fn norm_scales_with_modulus(rows in arb_dense(6), re in -3.0..3.0f64, im in -3.0..3.0f64) {
            let c = c64(re, im);
            let t = LinearOperator::build(OperatorSpec::Dense(rows.clone())).unwrap();
            let ct = LinearOperator::build(OperatorSpec::Dense(rows).scaled(c)).unwrap();
            let lhs = ct.operator_norm();
            let rhs = c.norm() * t.operator_norm();
            prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.max(1e-300));
        }

        #[test]
        fn adjoint_spectrum_of_diagonal_is_conjugate(
            entries in proptest::collection::vec((-4.0..4.0f64, -4.0..4.0f64), 1..8)
        ) {
            let lambda: Vec<Complex64> = entries.iter().map(|&(a, b)| c64(a, b)).collect();
            let op = LinearOperator::build(OperatorSpec::Diagonal(lambda.clone())).unwrap();
            let eigs = op.adjoint_point_spectrum().unwrap();
            // Multiset comparison by greedy matching.
            let mut remaining = eigs.clone();
            for l in &lambda {
                let (idx, dist) = remaining
                    .iter()
                    .enumerate()
                    .map(|(i, z)| (i, (z - l.conj()).norm()))
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                    .unwrap();
                prop_assert!(dist <= 1e-9);
                remaining.swap_remove(idx);
            }
        }

        #[test]
        fn full_range_means_solvable(rows in arb_dense(6), rhs in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6)) {
            let t = LinearOperator::build(OperatorSpec::Dense(rows)).unwrap();
            prop_assume!(t.range_density_defect() == 0);
            let n = t.dim();
            let v = DVector::from_iterator(n, rhs.iter().take(n).map(|&(a, b)| c64(a, b)));
            let u = t.matrix().clone().lu().solve(&v).unwrap();
            let residual = (t.matrix() * u - &v).norm();
            prop_assert!(residual <= 1e-8 * v.norm().max(1.0));
        }
    }
}
