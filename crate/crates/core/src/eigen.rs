//! Eigenvalues of a dense complex matrix.
//!
//! Hessenberg reduction followed by single-shift complex QR with Wilkinson
//! shifts and periodic exceptional shifts. Triangular inputs short-circuit to
//! their diagonal, which keeps defective spectra such as `2I + B` exact.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;

use crate::{Error, Result};

const SWEEPS_PER_EIGENVALUE: usize = 30;
const EXCEPTIONAL_EVERY: usize = 10;

pub(crate) fn eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    if n == 0 {
        return Ok(Vec::new());
    }
    if is_upper_triangular(a) || is_lower_triangular(a) {
        return Ok(a.diagonal().iter().copied().collect());
    }

    let mut h = a.clone().hessenberg().h();
    let mut eigs = alloc::vec![Complex64::new(0.0, 0.0); n];
    let max_sweeps = SWEEPS_PER_EIGENVALUE * n;
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;

    loop {
        if hi == 0 {
            eigs[0] = h[(0, 0)];
            break;
        }
        // Locate the start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if diag == 0.0 {
                diag = frobenius(&h);
            }
            if sub <= f64::EPSILON * diag {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eigs[hi] = h[(hi, hi)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }

        total += 1;
        since_deflation += 1;
        if total > max_sweeps {
            return Err(Error::EigensolverFailure { iterations: total });
        }

        let shift = if since_deflation.is_multiple_of(EXCEPTIONAL_EVERY) {
            let kick = h[(hi, hi - 1)].norm()
                + if hi >= 2 {
                    h[(hi - 1, hi - 2)].norm()
                } else {
                    0.0
                };
            h[(hi, hi)] + Complex64::new(0.75 * kick, 0.4375 * kick)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        qr_sweep(&mut h, lo, hi, shift);
    }
    Ok(eigs)
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let l1 = mean + disc;
    let l2 = mean - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit shifted QR step `H - σI = QR`, `H ← RQ + σI` on the block
/// `lo..=hi`, using Givens rotations.
fn qr_sweep(h: &mut DMatrix<Complex64>, lo: usize, hi: usize, shift: Complex64) {
    for k in lo..=hi {
        h[(k, k)] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        rotations.push((c, s));
    }
    for (offset, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + offset;
        let last = (k + 1).min(hi);
        for i in lo..=last {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
    }
    for k in lo..=hi {
        h[(k, k)] += shift;
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` with real `c` mapping `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let abs_a = a.norm();
    let abs_b = b.norm();
    if abs_b == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if abs_a == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let rho = abs_a.hypot(abs_b);
    let phase = a / abs_a;
    (abs_a / rho, phase * b.conj() / rho)
}

fn frobenius(h: &DMatrix<Complex64>) -> f64 {
    h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn is_upper_triangular(a: &DMatrix<Complex64>) -> bool {
    let n = a.nrows();
    (0..n).all(|i| (0..i).all(|j| a[(i, j)] == Complex64::new(0.0, 0.0)))
}

fn is_lower_triangular(a: &DMatrix<Complex64>) -> bool {
    let n = a.nrows();
    (0..n).all(|i| (i + 1..n).all(|j| a[(i, j)] == Complex64::new(0.0, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |_, _| {
            c64(
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            )
        })
    }

    fn smallest_singular(m: DMatrix<Complex64>) -> f64 {
        m.singular_values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn random_dense_eigenvalues_are_singular_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=12 {
            for _ in 0..5 {
                let a = random_matrix(&mut rng, n);
                let eigs = eigenvalues(&a).unwrap();
                assert_eq!(eigs.len(), n);
                let scale = a.norm();
                for &lambda in &eigs {
                    let shifted = &a - DMatrix::identity(n, n) * lambda;
                    assert!(smallest_singular(shifted) <= 1e-10 * scale.max(1.0));
                }
                // trace = Σ λ
                let trace: Complex64 = a.diagonal().iter().sum();
                let sum: Complex64 = eigs.iter().sum();
                assert!((trace - sum).norm() <= 1e-10 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn cyclic_permutation_needs_exceptional_shift() {
        let mut a = DMatrix::zeros(5, 5);
        for i in 0..4 {
            a[(i + 1, i)] = c64(1.0, 0.0);
        }
        a[(0, 4)] = c64(1.0, 0.0); // cyclic permutation: eigenvalues are 5th roots of unity
        let eigs = eigenvalues(&a).unwrap();
        for z in eigs {
            assert!((z.powu(5) - c64(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn triangular_shortcut_is_exact() {
        let mut a = DMatrix::identity(4, 4) * c64(2.0, 0.0);
        for i in 0..3 {
            a[(i, i + 1)] = c64(1.0, 0.0);
        }
        assert_eq!(eigenvalues(&a).unwrap(), alloc::vec![c64(2.0, 0.0); 4]);
        assert_eq!(
            eigenvalues(&a.adjoint()).unwrap(),
            alloc::vec![c64(2.0, 0.0); 4]
        );
    }

    #[test]
    fn rotation_has_conjugate_pair() {
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(-1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
        );
        let mut eigs = eigenvalues(&a).unwrap();
        eigs.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
        assert!((eigs[0] - c64(0.0, -1.0)).norm() < 1e-14);
        assert!((eigs[1] - c64(0.0, 1.0)).norm() < 1e-14);
    }
}
