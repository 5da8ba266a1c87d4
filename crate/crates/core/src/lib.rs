//! Finite-dimensional numerics for convex-cyclic operators.
//!
//! Everything here is pure computation over `alloc`: operators are dense
//! complex matrices, orbits are tables of vectors, and every decision
//! procedure returns a typed report. IO, file formats and the command line
//! live in the `convexcyclic` companion crate.
//!
//! Modules:
//! - [`operator`]: operator specs, dense realization, norms, spectra, rank.
//! - [`poly`]: convex polynomials and the named families built from them.
//! - [`hull`]: orbits and distance to the convex hull of an orbit segment.
//! - [`criteria`]: sup-probes, diagonal classifier, necessary-condition gates,
//!   m-isometry defects.
//! - [`constructions`]: operator combinators, the ε-greedy support-N average
//!   and the disk-touching convex polynomial.

#![no_std]
#![deny(unsafe_code)]
// `!(x > y)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constructions;
pub mod criteria;
mod eigen;
mod error;
pub mod hull;
pub mod operator;
pub mod poly;
mod vector;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use vector::Vector;

/// Shorthand for building a complex scalar.
#[inline]
pub const fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
