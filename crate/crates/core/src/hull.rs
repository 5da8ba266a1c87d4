//! Orbits and the distance from a target to the convex hull of an orbit
//! segment.
//!
//! The hull question is a simplex-constrained least-squares problem over the
//! orbit rows. It is solved with away-step Frank–Wolfe on the real embedding
//! ℂ^d ≅ ℝ^{2d}; iterates are explicit convex combinations, so the returned
//! weights are directly the coefficients of a convex polynomial `p` with
//! `p(T)x ≈ y`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;

use crate::operator::{LinearOperator, OperatorSpec};
use crate::poly::ConvexPolynomial;
use crate::{Error, Result, Vector};

pub const MAX_ORBIT_LENGTH: usize = 100_000;
/// Orbit entries above this modulus abort the orbit computation.
pub const OVERFLOW_GUARD: f64 = 1e300;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const BRUTE_FORCE_MAX_POINTS: usize = 6;
pub const BRUTE_FORCE_MAX_GRID: usize = 200;

/// Rows `x, Tx, …, T^N x`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTable {
    rows: Vec<Vector>,
    operator_spec: OperatorSpec,
}

impl OrbitTable {
    /// Treats arbitrary points as the rows of a table so the hull solver can
    /// run on them. The recorded spec is the identity.
    pub fn from_points(points: Vec<Vector>) -> Result<Self> {
        let dim = points
            .first()
            .ok_or(Error::InvalidArgument("no points"))?
            .dim();
        for p in &points {
            p.check_dim(dim)?;
        }
        Ok(OrbitTable {
            rows: points,
            operator_spec: OperatorSpec::Identity(dim),
        })
    }

    pub fn rows(&self) -> &[Vector] {
        &self.rows
    }

    pub fn seed(&self) -> &Vector {
        &self.rows[0]
    }

    pub fn operator_spec(&self) -> &OperatorSpec {
        &self.operator_spec
    }

    /// Largest exponent `N` in the table.
    pub fn horizon(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.rows[0].dim()
    }

    /// `Σ a_k rows[k]` for a weight vector of length at most `N + 1`.
    pub fn combine(&self, weights: &[f64]) -> Vector {
        assert!(weights.len() <= self.rows.len());
        let mut acc = Vector::zeros(self.dim());
        for (row, &a) in self.rows.iter().zip(weights) {
            if a != 0.0 {
                acc.axpy(Complex64::new(a, 0.0), row);
            }
        }
        acc
    }
}

pub fn compute_orbit(op: &LinearOperator, x: &Vector, horizon: usize) -> Result<OrbitTable> {
    x.check_dim(op.dim())?;
    if horizon > MAX_ORBIT_LENGTH {
        return Err(Error::InvalidArgument("orbit horizon exceeds 100000"));
    }
    let mut rows = Vec::with_capacity(horizon + 1);
    rows.push(x.clone());
    for n in 1..=horizon {
        let next = op.apply_unchecked(&rows[n - 1]);
        if !next.is_finite() || next.max_modulus() > OVERFLOW_GUARD {
            return Err(Error::NumericalOverflow { last_safe: n - 1 });
        }
        rows.push(next);
    }
    Ok(OrbitTable {
        rows,
        operator_spec: op.spec().clone(),
    })
}

/// Best convex combination of orbit rows found by the solver, with its
/// optimality certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct HullApproximation {
    /// Simplex weights over the orbit rows, indexed by exponent.
    pub coefficients: Vec<f64>,
    /// `‖Σ a_k rows[k] − y‖`, recomputed from `coefficients`.
    pub distance: f64,
    /// Frank–Wolfe duality gap on the squared distance at termination.
    pub gap: f64,
    pub iterations: usize,
}

impl HullApproximation {
    /// Certified lower bound on the true hull distance: `√(distance² − gap)`.
    pub fn lower_bound(&self) -> f64 {
        (self.distance * self.distance - self.gap).max(0.0).sqrt()
    }

    pub fn polynomial(&self) -> Result<ConvexPolynomial> {
        ConvexPolynomial::new(&self.coefficients)
    }
}

/// Solver state handed to an observer after every step.
#[derive(Debug)]
pub struct Checkpoint<'a> {
    pub iteration: usize,
    pub weights: &'a [f64],
    /// Current combination in the real embedding `[re_0, im_0, re_1, …]`.
    pub point: &'a [f64],
}

pub fn best_convex_approximation(
    orbit: &OrbitTable,
    y: &Vector,
    tol: f64,
    max_iter: usize,
) -> Result<HullApproximation> {
    best_convex_approximation_observed(orbit, y, tol, max_iter, |_| {})
}

/// As [`best_convex_approximation`], calling `observe` after each step.
pub fn best_convex_approximation_observed<F>(
    orbit: &OrbitTable,
    y: &Vector,
    tol: f64,
    max_iter: usize,
    observe: F,
) -> Result<HullApproximation>
where
    F: FnMut(Checkpoint<'_>),
{
    y.check_dim(orbit.dim())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive"));
    }
    let points: Vec<Vec<f64>> = orbit.rows.iter().map(Vector::to_real_embedding).collect();
    let target = y.to_real_embedding();
    let sol = simplex_least_squares(&points, &target, tol * tol, max_iter, observe);
    let distance = orbit.combine(&sol.weights).distance(y);
    Ok(HullApproximation {
        coefficients: sol.weights,
        distance,
        gap: sol.gap,
        iterations: sol.iterations,
    })
}

struct SimplexSolution {
    weights: Vec<f64>,
    gap: f64,
    iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Away-step Frank–Wolfe for `min ‖Σ w_k p_k − y‖²` over the simplex, with
/// exact line search. Stops once the FW gap drops to `gap_tol`.
fn simplex_least_squares<F>(
    points: &[Vec<f64>],
    target: &[f64],
    gap_tol: f64,
    max_iter: usize,
    mut observe: F,
) -> SimplexSolution
where
    F: FnMut(Checkpoint<'_>),
{
    let m = points.len();
    let d = target.len();

    let start = (0..m)
        .min_by(|&a, &b| sq_dist(&points[a], target).total_cmp(&sq_dist(&points[b], target)))
        .expect("orbit has at least one row");
    let mut weights = alloc::vec![0.0; m];
    weights[start] = 1.0;
    let mut active: Vec<usize> = alloc::vec![start];
    let mut x = points[start].clone();
    let mut residual = alloc::vec![0.0; d];
    let mut grad = alloc::vec![0.0; m];
    let mut direction = alloc::vec![0.0; d];

    let mut iterations = 0;
    let gap = loop {
        for (r, (xi, yi)) in residual.iter_mut().zip(x.iter().zip(target)) {
            *r = xi - yi;
        }
        for (g, p) in grad.iter_mut().zip(points) {
            *g = dot(&residual, p);
        }
        let g_x = dot(&residual, &x);
        let (fw_vertex, g_fw) = grad
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let fw_gap = (2.0 * (g_x - g_fw)).max(0.0);
        if fw_gap <= gap_tol || iterations >= max_iter {
            break fw_gap;
        }

        let (away_vertex, g_away) = active
            .iter()
            .map(|&k| (k, grad[k]))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let away_gap = 2.0 * (g_away - g_x);

        let toward = fw_gap >= away_gap;
        let gamma_max = if toward {
            for ((dir, p), xi) in direction.iter_mut().zip(&points[fw_vertex]).zip(&x) {
                *dir = p - xi;
            }
            1.0
        } else {
            for ((dir, p), xi) in direction.iter_mut().zip(&points[away_vertex]).zip(&x) {
                *dir = xi - p;
            }
            let w = weights[away_vertex];
            w / (1.0 - w)
        };
        let dd = dot(&direction, &direction);
        if dd == 0.0 {
            break fw_gap;
        }
        let gamma = (-dot(&residual, &direction) / dd).clamp(0.0, gamma_max);
        if gamma == 0.0 {
            // No representable descent left along either direction.
            break fw_gap;
        }

        if toward {
            for &k in &active {
                weights[k] *= 1.0 - gamma;
            }
            weights[fw_vertex] += gamma;
        } else {
            for &k in &active {
                weights[k] *= 1.0 + gamma;
            }
            weights[away_vertex] -= gamma;
            if gamma >= gamma_max {
                weights[away_vertex] = 0.0;
            }
        }
        if toward && !active.contains(&fw_vertex) {
            active.push(fw_vertex);
        }
        active.retain(|&k| {
            if weights[k] <= 0.0 {
                weights[k] = 0.0;
                false
            } else {
                true
            }
        });
        let total: f64 = active.iter().map(|&k| weights[k]).sum();
        for &k in &active {
            weights[k] /= total;
        }

        x.iter_mut().for_each(|v| *v = 0.0);
        for &k in &active {
            let w = weights[k];
            for (xi, p) in x.iter_mut().zip(&points[k]) {
                *xi += w * p;
            }
        }
        iterations += 1;
        observe(Checkpoint {
            iteration: iterations,
            weights: &weights,
            point: &x,
        });
    };

    SimplexSolution {
        weights,
        gap,
        iterations,
    }
}

/// Exhaustive minimum of `‖Σ a_k points[k] − y‖` over the lattice
/// `{a_k = m_k / grid, Σ m_k = grid}`. Independent of the Frank–Wolfe path;
/// intended as a test oracle.
pub fn brute_force_simplex_oracle(points: &[Vector], y: &Vector, grid: usize) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("oracle needs at least one point"));
    }
    if points.len() > BRUTE_FORCE_MAX_POINTS {
        return Err(Error::TooManyPoints {
            max: BRUTE_FORCE_MAX_POINTS,
            found: points.len(),
        });
    }
    if grid == 0 || grid > BRUTE_FORCE_MAX_GRID {
        return Err(Error::InvalidArgument("grid must be in 1..=200"));
    }
    for p in points {
        p.check_dim(y.dim())?;
    }
    let real: Vec<Vec<f64>> = points.iter().map(Vector::to_real_embedding).collect();
    let target = y.to_real_embedding();
    let d = target.len();
    let mut partials = alloc::vec![alloc::vec![0.0; d]; real.len() + 1];
    let mut best = f64::INFINITY;
    lattice_search(&real, &target, grid, 0, grid, &mut partials, &mut best);
    Ok(best.sqrt())
}

fn lattice_search(
    points: &[Vec<f64>],
    target: &[f64],
    grid: usize,
    index: usize,
    remaining: usize,
    partials: &mut [Vec<f64>],
    best: &mut f64,
) {
    let step = 1.0 / grid as f64;
    if index == points.len() - 1 {
        let a = remaining as f64 * step;
        let mut sq = 0.0;
        for ((acc, p), y) in partials[index].iter().zip(&points[index]).zip(target) {
            let v = acc + a * p - y;
            sq += v * v;
        }
        if sq < *best {
            *best = sq;
        }
        return;
    }
    for m in 0..=remaining {
        let a = m as f64 * step;
        let (head, tail) = partials.split_at_mut(index + 1);
        for ((next, acc), p) in tail[0].iter_mut().zip(&head[index]).zip(&points[index]) {
            *next = acc + a * p;
        }
        lattice_search(
            points,
            target,
            grid,
            index + 1,
            remaining - m,
            partials,
            best,
        );
    }
}

/// Worst-case gap between the lattice minimum and the true simplex minimum:
/// `n · diam / (2 · grid)` for `n` points of diameter `diam`.
pub fn simplex_lattice_resolution(points: &[Vector], grid: usize) -> f64 {
    let mut diam: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            diam = diam.max(p.distance(q));
        }
    }
    points.len() as f64 * diam / (2.0 * grid as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityProbe {
    /// Fraction of targets reached within `tol`.
    pub score: f64,
    pub residuals: Vec<f64>,
    pub approximations: Vec<HullApproximation>,
}

/// Solves the hull problem for each target against one orbit segment. A
/// heuristic indicator of density; finite data never certifies it.
pub fn density_probe(
    op: &LinearOperator,
    x: &Vector,
    targets: &[Vector],
    horizon: usize,
    tol: f64,
) -> Result<DensityProbe> {
    let orbit = compute_orbit(op, x, horizon)?;
    let approximations = targets
        .iter()
        .map(|y| best_convex_approximation(&orbit, y, tol, DEFAULT_MAX_ITER))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_density(approximations, tol))
}

/// Builds the probe record from per-target solutions computed elsewhere
/// (e.g. in parallel by a caller).
pub fn summarize_density(approximations: Vec<HullApproximation>, tol: f64) -> DensityProbe {
    let residuals: Vec<f64> = approximations.iter().map(|a| a.distance).collect();
    let hits = residuals.iter().filter(|&&r| r <= tol).count();
    let score = if residuals.is_empty() {
        0.0
    } else {
        hits as f64 / residuals.len() as f64
    };
    DensityProbe {
        score,
        residuals,
        approximations,
    }
}

/// Convex-polynomial families searched by [`family_probe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Cesaro,
    Pkc(f64),
    /// `(T^{k_1}x + ⋯ + T^{k_N}x)/N` with `N` terms chosen greedily.
    MonomialAverage(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyProbe {
    /// Family index achieving the best distance; for monomial averages the
    /// largest exponent used.
    pub best_k: usize,
    pub distance: f64,
    /// Exponents chosen by the greedy monomial-average search.
    pub exponents: Vec<usize>,
}

pub fn family_probe(
    op: &LinearOperator,
    x: &Vector,
    y: &Vector,
    family: Family,
    max_k: usize,
) -> Result<FamilyProbe> {
    x.check_dim(op.dim())?;
    y.check_dim(op.dim())?;
    if max_k == 0 {
        return Err(Error::InvalidArgument("max_k must be >= 1"));
    }
    match family {
        Family::Cesaro | Family::Pkc(_) => {
            let mut best = FamilyProbe {
                best_k: 0,
                distance: f64::INFINITY,
                exponents: Vec::new(),
            };
            for k in 1..=max_k {
                let p = match family {
                    Family::Pkc(c) => ConvexPolynomial::pkc(k, c)?,
                    _ => ConvexPolynomial::cesaro_mean(k)?,
                };
                let distance = p.apply(op, x)?.distance(y);
                if distance < best.distance {
                    best.best_k = k;
                    best.distance = distance;
                }
            }
            Ok(best)
        }
        Family::MonomialAverage(terms) => {
            if terms == 0 {
                return Err(Error::InvalidArgument("monomial average needs >= 1 term"));
            }
            let orbit = compute_orbit(op, x, max_k)?;
            let exponents = greedy_exponents(orbit.rows(), y, terms);
            let mut weights = alloc::vec![0.0; max_k + 1];
            for &k in &exponents {
                weights[k] += 1.0 / terms as f64;
            }
            let distance = orbit.combine(&weights).distance(y);
            Ok(FamilyProbe {
                best_k: exponents.iter().copied().max().unwrap_or(0),
                distance,
                exponents,
            })
        }
    }
}

/// Index of the row nearest to `target` (lowest index on ties) and its distance.
pub(crate) fn nearest_row(rows: &[Vector], target: &Vector) -> (usize, f64) {
    rows.iter()
        .enumerate()
        .map(|(n, row)| (n, row.distance(target)))
        .fold(
            (0, f64::INFINITY),
            |best, cur| {
                if cur.1 < best.1 {
                    cur
                } else {
                    best
                }
            },
        )
}

/// Greedy residual matching: `r_1 = N·y`, then repeatedly pick the row
/// nearest to `r_j` and subtract it.
pub(crate) fn greedy_exponents(rows: &[Vector], y: &Vector, terms: usize) -> Vec<usize> {
    let mut residual = y.scale_real(terms as f64);
    let mut exponents = Vec::with_capacity(terms);
    for _ in 0..terms {
        let (k, _) = nearest_row(rows, &residual);
        residual = residual.sub(&rows[k]);
        exponents.push(k);
    }
    exponents
}
