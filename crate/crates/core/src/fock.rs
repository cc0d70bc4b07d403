//! Truncated symmetric Fock space over `ℂ^r`, coherent vectors, and the Weyl action
//! `W(h) EXP ψ(g) = F(h + g)/F(g) · EXP ψ(h + g)` on coherent states.
//!
//! The degree-`n` part has an orthonormal basis indexed by multisets of
//! `{0, …, r−1}` of size `n`. A multiset is stored as its non-decreasing index
//! sequence, and each degree is listed in colexicographic order (compare last
//! entries first). In that basis the coherent vector has coefficients
//! `Π ψ_i^{m_i} / sqrt(Π m_i!)`, where `m_i` is the multiplicity of `i`, and the
//! multinomial theorem gives `⟨EXP ψ, EXP φ⟩ = Σ_n ⟨ψ, φ⟩ⁿ / n! = exp⟨ψ, φ⟩`.
//!
//! Matrix elements of `W` are computed from `F` and the kernel alone, never from
//! truncated vectors, so they carry no truncation error.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exponent::{ExponentError, LevyTriplet};
use crate::gns::{inner, kernel, norm, CocycleRealization};
use crate::io::{complex_matrix, complex_pairs};
use crate::posdef::DEFAULT_BRANCH_FLOOR;

pub const DEFAULT_DEGREE: usize = 12;
pub const DEFAULT_DIMENSION_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("truncated Fock space of rank {rank} and degree {degree} has more than {budget} basis vectors")]
    TruncationOverflow { rank: usize, degree: usize, budget: usize },
    #[error("vectors have different lengths ({0} and {1})")]
    DimensionMismatch(usize, usize),
    #[error("|F({t})| = {modulus:e} is at or below the floor, so W cannot be applied")]
    VanishingF { t: f64, modulus: f64 },
    #[error("series and coefficient contraction disagree: {series} vs {contraction}")]
    PathMismatch { series: Complex64, contraction: Complex64 },
    #[error(transparent)]
    Exponent(#[from] ExponentError),
}

/// `C(n, k)` saturating at `usize::MAX`.
fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Shape of a truncated Fock space: one-particle rank and maximal degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TruncatedFock {
    pub rank: usize,
    pub degree: usize,
}

impl TruncatedFock {
    pub fn new(rank: usize, degree: usize) -> Self {
        Self { rank, degree }
    }

    /// `C(r + n − 1, n)`.
    pub fn degree_dimension(&self, n: usize) -> usize {
        if n == 0 {
            1
        } else if self.rank == 0 {
            0
        } else {
            binomial(self.rank + n - 1, n)
        }
    }

    /// `Σ_{n ≤ N} C(r + n − 1, n)`.
    pub fn dimension(&self) -> usize {
        (0..=self.degree).fold(0usize, |acc, n| acc.saturating_add(self.degree_dimension(n)))
    }

    pub fn check_budget(&self, budget: usize) -> Result<(), FockError> {
        if self.dimension() > budget {
            return Err(FockError::TruncationOverflow {
                rank: self.rank,
                degree: self.degree,
                budget,
            });
        }
        Ok(())
    }

    /// Multisets of size `n`, colexicographic.
    pub fn degree_basis(&self, n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        if self.rank == 0 {
            return vec![];
        }
        // Colex on non-decreasing sequences is lex on their reversals, which
        // are non-increasing; generate those lexicographically and flip.
        let mut out = Vec::with_capacity(self.degree_dimension(n));
        let mut rev = vec![0usize; n];
        loop {
            out.push(rev.iter().rev().copied().collect());
            // next non-increasing sequence in lex order
            let Some(pos) = (0..n).rev().find(|&i| {
                let cap = if i == 0 { self.rank - 1 } else { rev[i - 1] };
                rev[i] < cap
            }) else {
                break;
            };
            rev[pos] += 1;
            for x in rev.iter_mut().skip(pos + 1) {
                *x = 0;
            }
        }
        out
    }

    /// The whole graded basis, degree by degree.
    pub fn basis(&self) -> Vec<Vec<usize>> {
        (0..=self.degree).flat_map(|n| self.degree_basis(n)).collect()
    }
}

/// Truncated `EXP ψ` in the graded basis of [`TruncatedFock`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherentVector {
    pub space: TruncatedFock,
    #[serde(serialize_with = "complex_pairs")]
    pub psi: Vec<Complex64>,
    /// Coefficients, aligned with `TruncatedFock::basis`.
    #[serde(serialize_with = "complex_pairs")]
    pub coefficients: Vec<Complex64>,
}

impl CoherentVector {
    pub fn new(psi: &[Complex64], degree: usize) -> Result<Self, FockError> {
        Self::with_budget(psi, degree, DEFAULT_DIMENSION_BUDGET)
    }

    pub fn with_budget(psi: &[Complex64], degree: usize, budget: usize) -> Result<Self, FockError> {
        let space = TruncatedFock::new(psi.len(), degree);
        space.check_budget(budget)?;
        let mut coefficients = Vec::with_capacity(space.dimension());
        for n in 0..=degree {
            for m in space.degree_basis(n) {
                coefficients.push(coefficient(psi, &m));
            }
        }
        Ok(Self {
            space,
            psi: psi.to_vec(),
            coefficients,
        })
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64, FockError> {
        if self.coefficients.len() != other.coefficients.len() {
            return Err(FockError::DimensionMismatch(self.coefficients.len(), other.coefficients.len()));
        }
        Ok(inner(&self.coefficients, &other.coefficients))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// `Π ψ_i^{m_i} / sqrt(Π m_i!)` for a non-decreasing index sequence.
fn coefficient(psi: &[Complex64], multiset: &[usize]) -> Complex64 {
    let mut value = Complex64::new(1.0, 0.0);
    let mut run = 0usize;
    let mut scale = 1.0f64;
    for (k, &i) in multiset.iter().enumerate() {
        run = if k > 0 && multiset[k - 1] == i { run + 1 } else { 1 };
        scale *= run as f64;
        value *= psi[i];
    }
    value / scale.sqrt()
}

/// Truncated `⟨EXP ψ, EXP φ⟩` with a bound on its distance from `exp⟨ψ, φ⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentInner {
    #[serde(serialize_with = "crate::io::complex_pair")]
    pub value: Complex64,
    #[serde(serialize_with = "crate::io::complex_pair")]
    pub contraction: Complex64,
    pub bound: f64,
    pub degree: usize,
}

/// `Σ_{n ≤ N} ⟨ψ, φ⟩ⁿ / n!`, also computed by contracting the graded
/// coefficient arrays. The bound is the series tail
/// `(‖ψ‖‖φ‖)^{N+1} / (N+1)! · e^{‖ψ‖‖φ‖}` plus an allowance for rounding in the
/// partial sum.
pub fn coherent_inner(psi: &[Complex64], phi: &[Complex64], degree: usize) -> Result<CoherentInner, FockError> {
    coherent_inner_with_budget(psi, phi, degree, DEFAULT_DIMENSION_BUDGET)
}

pub fn coherent_inner_with_budget(
    psi: &[Complex64],
    phi: &[Complex64],
    degree: usize,
    budget: usize,
) -> Result<CoherentInner, FockError> {
    if psi.len() != phi.len() {
        return Err(FockError::DimensionMismatch(psi.len(), phi.len()));
    }
    let z = inner(psi, phi);
    let mut value = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut magnitude = 0.0;
    for n in 0..=degree {
        if n > 0 {
            term *= z / n as f64;
        }
        value += term;
        magnitude += term.norm();
    }
    let a = CoherentVector::with_budget(psi, degree, budget)?;
    let b = CoherentVector::with_budget(phi, degree, budget)?;
    let contraction = a.inner(&b)?;
    let slack = 1e-12 * magnitude.max(1.0) + 1e-12 * (norm(psi) * norm(phi)).exp();
    if (contraction - value).norm() > slack {
        return Err(FockError::PathMismatch {
            series: value,
            contraction,
        });
    }
    let x = norm(psi) * norm(phi);
    let mut tail = x.exp();
    for k in 1..=degree + 1 {
        tail *= x / k as f64;
    }
    let rounding = 4.0 * f64::EPSILON * (degree as f64 + 2.0) * z.norm().exp();
    Ok(CoherentInner {
        value,
        contraction,
        bound: tail + rounding,
        degree,
    })
}

/// Largest degree `≤ degree` whose truncated space fits in `budget`.
pub fn fitting_degree(rank: usize, degree: usize, budget: usize) -> usize {
    (0..=degree)
        .rev()
        .find(|&n| TruncatedFock::new(rank, n).dimension() <= budget)
        .unwrap_or(0)
}

/// Truncated coherent Gram matrix of a realization against the exponential of its Gram matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherentGramCheck {
    pub requested_degree: usize,
    /// Degree actually used, lowered until the space fits the budget.
    pub degree: usize,
    pub dimension: usize,
    /// `max (|value − exp K_jk| − bound_jk)`; non-positive when every bound holds.
    pub max_excess: f64,
    pub max_error: f64,
    pub max_bound: f64,
    /// Largest disagreement between the series and the coefficient contraction.
    pub max_path_mismatch: f64,
    pub passed: bool,
}

/// Builds `EXP ψ(t_j)` once per grid point and checks every pair against
/// `exp⟨ψ(t_j), ψ(t_k)⟩` within the truncation bound.
pub fn coherent_gram_check(
    real: &CocycleRealization,
    degree: usize,
    budget: usize,
) -> Result<CoherentGramCheck, FockError> {
    let used = fitting_degree(real.rank, degree, budget);
    let vectors = real
        .vectors
        .par_iter()
        .map(|psi| CoherentVector::with_budget(psi, used, budget))
        .collect::<Result<Vec<_>, _>>()?;
    let n = vectors.len();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..n).map(move |l| (j, l))).collect();
    let rows = cells
        .par_iter()
        .map(|&(j, l)| {
            let (psi, phi) = (&real.vectors[j], &real.vectors[l]);
            let z = inner(psi, phi);
            let mut series = Complex64::new(0.0, 0.0);
            let mut term = Complex64::new(1.0, 0.0);
            for m in 0..=used {
                if m > 0 {
                    term *= z / m as f64;
                }
                series += term;
            }
            let contraction = vectors[j].inner(&vectors[l])?;
            let x = norm(psi) * norm(phi);
            let mut tail = x.exp();
            for i in 1..=used + 1 {
                tail *= x / i as f64;
            }
            let bound = tail + 4.0 * f64::EPSILON * (used as f64 + 2.0) * z.norm().exp();
            let error = (series - z.exp()).norm();
            Ok((error - bound, error, bound, (series - contraction).norm()))
        })
        .collect::<Result<Vec<_>, FockError>>()?;
    let mut out = CoherentGramCheck {
        requested_degree: degree,
        degree: used,
        dimension: TruncatedFock::new(real.rank, used).dimension(),
        max_excess: f64::NEG_INFINITY,
        max_error: 0.0,
        max_bound: 0.0,
        max_path_mismatch: 0.0,
        passed: true,
    };
    for (excess, error, bound, mismatch) in rows {
        out.max_excess = out.max_excess.max(excess);
        out.max_error = out.max_error.max(error);
        out.max_bound = out.max_bound.max(bound);
        out.max_path_mismatch = out.max_path_mismatch.max(mismatch);
    }
    out.passed = n == 0 || out.max_excess <= 0.0;
    if n == 0 {
        out.max_excess = 0.0;
    }
    Ok(out)
}

/// `log(F(h + t)/F(t)) = f(h + t) − f(t)`, refusing points where `|F|` vanishes.
fn log_ratio(trip: &LevyTriplet, t: f64, h: f64) -> Result<Complex64, FockError> {
    let ft = trip.exponent(t)?;
    let modulus = ft.re.exp();
    if modulus <= DEFAULT_BRANCH_FLOOR {
        return Err(FockError::VanishingF { t, modulus });
    }
    Ok(trip.exponent(h + t)? - ft)
}

/// `⟨EXP ψ(t_j), W(h) EXP ψ(t_k)⟩ = F(h + t_k)/F(t_k) · exp K(t_j, h + t_k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylGram {
    pub grid: Vec<f64>,
    pub h: f64,
    #[serde(serialize_with = "complex_matrix")]
    pub entries: DMatrix<Complex64>,
}

pub fn weyl_gram(trip: &LevyTriplet, grid: &[f64], h: f64) -> Result<WeylGram, FockError> {
    let n = grid.len();
    let ratios = grid
        .par_iter()
        .map(|&t| log_ratio(trip, t, h))
        .collect::<Result<Vec<_>, _>>()?;
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..n).map(move |k| (j, k))).collect();
    let values = cells
        .par_iter()
        .map(|&(j, k)| Ok((ratios[k] + kernel(trip, grid[j], h + grid[k])?).exp()))
        .collect::<Result<Vec<_>, FockError>>()?;
    Ok(WeylGram {
        grid: grid.to_vec(),
        h,
        entries: DMatrix::from_iterator(n, n, transpose_order(n, values)),
    })
}

/// Row-major values into the column-major order `from_iterator` expects.
fn transpose_order(n: usize, values: Vec<Complex64>) -> impl Iterator<Item = Complex64> {
    (0..n * n).map(move |idx| values[(idx % n) * n + idx / n])
}

fn max_over_cells(
    n: usize,
    f: impl Fn(usize, usize) -> Result<(f64, f64), FockError> + Sync,
) -> Result<(f64, f64), FockError> {
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..n).map(move |k| (j, k))).collect();
    let vals = cells
        .par_iter()
        .map(|&(j, k)| f(j, k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(vals
        .into_iter()
        .fold((0.0, 0.0), |(d, s), (dv, sv)| (f64::max(d, dv), f64::max(s, sv))))
}

/// A residual together with the scale it should be compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub residual: f64,
    /// `1 + max |matrix element|` of the reference side.
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        self.residual / self.scale
    }
}

/// `max |conj(c_j) c_k exp K(h + t_j, h + t_k) − exp K(t_j, t_k)|` with
/// `c_k = F(h + t_k)/F(t_k)`: `W(h)` preserves the coherent Gram matrix.
pub fn weyl_unitarity_residual(trip: &LevyTriplet, grid: &[f64], h: f64) -> Result<Residual, FockError> {
    if h == 0.0 {
        let scale = max_over_cells(grid.len(), |j, k| Ok((0.0, kernel(trip, grid[j], grid[k])?.exp().norm())))?.1;
        return Ok(Residual {
            residual: 0.0,
            scale: 1.0 + scale,
        });
    }
    let ratios = grid
        .par_iter()
        .map(|&t| log_ratio(trip, t, h))
        .collect::<Result<Vec<_>, _>>()?;
    let (residual, scale) = max_over_cells(grid.len(), |j, k| {
        let (s, t) = (grid[j], grid[k]);
        let moved = (ratios[j].conj() + ratios[k] + kernel(trip, h + s, h + t)?).exp();
        let plain = kernel(trip, s, t)?.exp();
        Ok(((moved - plain).norm(), plain.norm()))
    })?;
    Ok(Residual {
        residual,
        scale: 1.0 + scale,
    })
}

/// `⟨EXP ψ(0), W(t) EXP ψ(0)⟩`, which must equal `F(t)`.
pub fn vacuum_expectation(trip: &LevyTriplet, t: f64) -> Result<Complex64, FockError> {
    Ok(weyl_gram(trip, &[0.0], t)?.entries[(0, 0)])
}

/// Coherent matrix elements of `W(h1) W(h2)` against those of `W(h1 + h2)`.
///
/// The composed side is `⟨W(−h1) EXP ψ(t_j), W(h2) EXP ψ(t_k)⟩`, expanded by the
/// action on both coherent states, so the kernel is evaluated at different shifted
/// points on the two sides.
pub fn representation_residual(trip: &LevyTriplet, grid: &[f64], h1: f64, h2: f64) -> Result<Residual, FockError> {
    let left = grid
        .par_iter()
        .map(|&t| log_ratio(trip, t, -h1))
        .collect::<Result<Vec<_>, _>>()?;
    let right = grid
        .par_iter()
        .map(|&t| log_ratio(trip, t, h2))
        .collect::<Result<Vec<_>, _>>()?;
    let both = grid
        .par_iter()
        .map(|&t| log_ratio(trip, t, h1 + h2))
        .collect::<Result<Vec<_>, _>>()?;
    let (residual, scale) = max_over_cells(grid.len(), |j, k| {
        let (s, t) = (grid[j], grid[k]);
        let composed = (left[j].conj() + right[k] + kernel(trip, s - h1, h2 + t)?).exp();
        let direct = (both[k] + kernel(trip, s, h1 + h2 + t)?).exp();
        Ok(((composed - direct).norm(), direct.norm()))
    })?;
    Ok(Residual {
        residual,
        scale: 1.0 + scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::Convention;
    use crate::grid;
    use crate::measure::LevyMeasure;
    use std::f64::consts::{E, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dimensions_match_the_count() {
        for r in 0..=6 {
            for n in 0..=8 {
                let space = TruncatedFock::new(r, n);
                let basis = space.basis();
                assert_eq!(basis.len(), space.dimension(), "r={r} N={n}");
                let brute: usize = (0..=n).map(|d| count_multisets(r, d)).sum();
                assert_eq!(space.dimension(), brute);
            }
        }
    }

    fn count_multisets(r: usize, n: usize) -> usize {
        if n == 0 {
            return 1;
        }
        if r == 0 {
            return 0;
        }
        // either no copy of the last symbol, or at least one
        count_multisets(r - 1, n) + count_multisets(r, n - 1)
    }

    #[test]
    fn degree_basis_is_colex() {
        let b = TruncatedFock::new(3, 2).degree_basis(2);
        let expect: Vec<Vec<usize>> = vec![
            vec![0, 0],
            vec![0, 1],
            vec![1, 1],
            vec![0, 2],
            vec![1, 2],
            vec![2, 2],
        ];
        assert_eq!(b, expect);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn coherent_inner_examples() {
        let psi = [c(1.0, 0.0), c(0.0, 0.0)];
        let phi = [c(0.0, 0.0), c(0.0, 2.0)];
        for n in [0, 3, 12] {
            assert_eq!(coherent_inner(&psi, &phi, n).unwrap().value, c(1.0, 0.0));
        }

        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let out = coherent_inner(&psi, &psi, 10).unwrap();
        let partial: f64 = (0..=10).map(|k| 1.0 / (1..=k).map(|i| i as f64).product::<f64>()).sum();
        assert!((out.value.re - partial).abs() < 1e-15);
        assert!((out.value.re - 2.71828180).abs() < 1e-8);
        assert!((out.value.re - E).abs() <= 2.8e-8);
        assert!((out.value - c(E, 0.0)).norm() <= out.bound);

        let zero = [c(0.0, 0.0); 3];
        let out = coherent_inner(&zero, &zero, 5).unwrap();
        assert_eq!(out.value, c(1.0, 0.0));
        assert!(out.bound < 1e-13);
    }

    #[test]
    fn coherent_norm_grows_to_the_exponential() {
        let psi = [c(0.7, 0.2), c(-0.3, 0.5)];
        let target = norm(&psi).powi(2).exp();
        let mut last = 0.0;
        for n in [2, 4, 8, 16] {
            let v = CoherentVector::new(&psi, n).unwrap();
            assert!(v.norm_sqr() <= target + 1e-14);
            assert!(v.norm_sqr() >= last);
            last = v.norm_sqr();
        }
        assert!((last - target).abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let psi = vec![c(0.1, 0.0); 20];
        assert!(matches!(
            coherent_inner(&psi, &psi, 12),
            Err(FockError::TruncationOverflow { .. })
        ));
    }

    #[test]
    fn weyl_examples() {
        let g = LevyTriplet::gaussian(0.0, 1.0).unwrap();
        let pts = [0.0, 1.0];
        let w0 = weyl_gram(&g, &pts, 0.0).unwrap();
        for j in 0..2 {
            for k in 0..2 {
                let expect = kernel(&g, pts[j], pts[k]).unwrap().exp();
                assert!((w0.entries[(j, k)] - expect).norm() < 1e-15);
            }
        }
        let w1 = weyl_gram(&g, &pts, 1.0).unwrap();
        assert!((w1.entries[(0, 0)] - c((-0.5f64).exp(), 0.0)).norm() < 1e-15);
        // row 1, column 0: F(1)/F(0) · exp K(1, 1)
        assert!((w1.entries[(1, 0)] - c(0.5f64.exp(), 0.0)).norm() < 1e-14);

        let b = 0.8;
        let drift = LevyTriplet::gaussian(b, 0.0).unwrap();
        let w = weyl_gram(&drift, &[0.0, 0.5, 1.5], 0.3).unwrap();
        for z in w.entries.iter() {
            assert!((z - c(0.0, b * 0.3).exp()).norm() < 1e-15);
        }
    }

    #[test]
    fn unitarity_examples() {
        let drift = LevyTriplet::gaussian(1.1, 0.0).unwrap();
        let pts = grid::arithmetic(0.0, 2.0, 0.5).unwrap();
        assert!(weyl_unitarity_residual(&drift, &pts, 0.9).unwrap().residual < 1e-12);
        let g = LevyTriplet::gaussian(0.0, 1.0).unwrap();
        assert!(weyl_unitarity_residual(&g, &pts, 0.5).unwrap().residual <= 1e-9);
        assert_eq!(weyl_unitarity_residual(&g, &pts, 0.0).unwrap().residual, 0.0);
    }

    #[test]
    fn vacuum_examples() {
        let g = LevyTriplet::gaussian(0.0, 1.0).unwrap();
        assert_eq!(vacuum_expectation(&g, 0.0).unwrap(), c(1.0, 0.0));
        assert!((vacuum_expectation(&g, 1.0).unwrap().re - 0.60653).abs() < 1e-5);
        let a = LevyTriplet::new(0.0, 0.0, LevyMeasure::from_atoms([(1.0, 1.0)]), Convention::DeFinetti).unwrap();
        let v = vacuum_expectation(&a, PI).unwrap();
        assert!((v - c((-2.0f64).exp(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn representation_examples() {
        let pts = grid::arithmetic(0.0, 2.0, 0.5).unwrap();
        let g = LevyTriplet::gaussian(0.0, 1.0).unwrap();
        assert!(representation_residual(&g, &pts, 0.0, 0.0).unwrap().residual < 1e-15);
        let drift = LevyTriplet::gaussian(0.6, 0.0).unwrap();
        assert!(representation_residual(&drift, &pts, 0.7, -0.7).unwrap().residual < 1e-12);
        assert!(representation_residual(&g, &pts, 0.5, 1.0).unwrap().residual <= 1e-9);
        let a = LevyTriplet::new(0.2, 0.3, LevyMeasure::from_atoms([(1.0, 0.5), (-0.4, 0.3)]), Convention::Levy).unwrap();
        let r = representation_residual(&a, &pts, 0.5, -1.2).unwrap();
        assert!(r.relative() <= 1e-12, "{r:?}");
    }

    #[test]
    fn coherent_gram_of_a_realization() {
        let a = LevyTriplet::new(0.0, 0.5, LevyMeasure::from_atoms([(1.0, 0.5), (-0.6, 0.4)]), Convention::Levy).unwrap();
        let pts = grid::arithmetic(0.0, 2.0, 0.5).unwrap();
        let k = crate::gns::kernel_matrix_from_triplet(&a, &pts).unwrap();
        let real = crate::gns::realize_cocycle(&k, 1e-10).unwrap();
        assert_eq!(real.rank, 3);
        let check = coherent_gram_check(&real, 12, DEFAULT_DIMENSION_BUDGET).unwrap();
        assert!(check.passed && check.degree == 12, "{check:?}");
        assert!(check.max_path_mismatch < 1e-12);
        let small = coherent_gram_check(&real, 12, 100).unwrap();
        assert_eq!(small.degree, fitting_degree(3, 12, 100));
        assert!(small.dimension <= 100 && small.passed, "{small:?}");
    }

    #[test]
    fn vanishing_f_is_refused() {
        let g = LevyTriplet::gaussian(0.0, 8.0).unwrap();
        assert!(matches!(weyl_gram(&g, &[0.0, 4.0], 0.5), Err(FockError::VanishingF { .. })));
    }
}
