use alloc::vec::Vec;
use core::ops::Index;

use nalgebra::DVector;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;

use crate::{Error, Result};

/// A nonempty vector in ℂ^d with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(DVector<Complex64>);

impl Vector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("vector must have dimension >= 1"));
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument("vector entries must be finite"));
        }
        Ok(Vector(DVector::from_vec(entries)))
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Standard basis vector `e_{index+1}` (zero-based index).
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut v = DVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Vector(v)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1);
        Vector(DVector::zeros(dim))
    }

    pub(crate) fn from_dvector(v: DVector<Complex64>) -> Self {
        Vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.0.data.into()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest entry modulus.
    pub fn max_modulus(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.is_finite())
    }

    /// Inner product `⟨self, f⟩ = Σ self_i · conj(f_i)`, linear in `self`.
    pub fn inner(&self, f: &Vector) -> Complex64 {
        self.0
            .iter()
            .zip(f.0.iter())
            .map(|(u, v)| u * v.conj())
            .sum()
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(&self.0 - &other.0)
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector(&self.0 + &other.0)
    }

    pub fn scale(&self, s: Complex64) -> Vector {
        Vector(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Vector {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `self += s · other`
    pub fn axpy(&mut self, s: Complex64, other: &Vector) {
        self.0.axpy(s, &other.0, Complex64::new(1.0, 0.0));
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Embedding ℂ^d → ℝ^{2d} as `[re_0, im_0, re_1, im_1, ...]`.
    pub fn to_real_embedding(&self) -> Vec<f64> {
        self.0.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::dims(expected, self.dim()))
        }
    }
}

impl Index<usize> for Vector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}
