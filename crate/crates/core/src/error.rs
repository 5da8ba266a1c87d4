use alloc::boxed::Box;

use crate::constructions::EpsilonGreedyPartial;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid operator spec: {0}")]
    InvalidSpec(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("eigensolver did not converge after {iterations} QR sweeps")]
    EigensolverFailure { iterations: usize },

    #[error("coefficient {index} is negative ({value})")]
    NegativeCoefficient { index: usize, value: f64 },

    #[error("coefficients sum to {sum}, not 1")]
    SumNotOne { sum: f64 },

    #[error("polynomial degree {degree} exceeds the cap of {cap}")]
    DegreeTooLarge { degree: usize, cap: usize },

    #[error("orbit left the representable range after n = {last_safe}")]
    NumericalOverflow { last_safe: usize },

    #[error("brute-force oracle accepts at most {max} points, got {found}")]
    TooManyPoints { max: usize, found: usize },

    #[error("functional is zero")]
    ZeroFunctional,

    #[error("eigenvalue list is empty")]
    EmptySpectrum,

    #[error("seed coordinate {index} is zero at a conjugate pair")]
    ZeroCoordinateAtPair { index: usize },

    #[error("confinement witness failed verification at n = {n}")]
    WitnessVerification { n: usize },

    #[error("scale factor must be finite and > 1, got {0}")]
    InvalidScale(f64),

    #[error("oracle missed at step {step}: best ratio {best_ratio}")]
    OracleMiss {
        step: usize,
        best_ratio: f64,
        partial: Box<EpsilonGreedyPartial>,
    },

    #[error("no exponent n <= {max_n} puts z0^n left of Re z = 1")]
    NoExponentFound { max_n: usize },

    #[error("point lies in the closed unit disk (|z0| = {modulus})")]
    NotOutsideDisk { modulus: f64 },
}

impl Error {
    pub(crate) fn dims(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }
}
