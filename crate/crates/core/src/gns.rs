//! The cocycle kernel of an exponent and its finite-rank Hilbert-space realization.
//!
//! For an exponent `f` the kernel `K(s, t) = f(t − s) − f(−s) − f(t)` is positive
//! semidefinite exactly when `f` is conditionally positive semidefinite. Writing
//! `K(s, t) = ⟨ψ(s), ψ(t)⟩` turns the grid into concrete vectors `ψ(t_j) ∈ ℂ^r`,
//! and translation acts on them through `V(h)ψ(g) = ψ(h + g) − ψ(h)`.
//!
//! For a triplet the kernel has the closed form
//! `K(s, t) = a·s·t + ∫ (e^{−ips} − 1)(e^{ipt} − 1) dν(p)`, in which the drift and
//! the centering convention never appear.
//!
//! Inner products are antilinear in the first slot: `⟨x, y⟩ = Σ conj(x_i) y_i`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exponent::{cis_m1, ExponentError, LevyTriplet};
use crate::io::{complex_matrix, complex_pairs};
use crate::measure::JumpIntegrand;
use crate::posdef::{self, GridFunction, PosdefError, Table, DEFAULT_PSD_TOL};

/// Eigenvalues below this fraction of the largest are dropped from a realization.
pub const DEFAULT_EIGEN_FLOOR: f64 = 1e-10;

/// Normalized coboundary residual below which a cocycle is reported as a coboundary.
pub const DEFAULT_COBOUNDARY_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GnsError {
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Posdef(#[from] PosdefError),
    #[error("kernel is not positive semidefinite: eigenvalue {min_eigenvalue:e} against largest {max_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64, max_eigenvalue: f64 },
    #[error("kernel cannot be evaluated at the shifted point {0}: it is outside the exponent table")]
    UnevaluableShift(f64),
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `⟨ψ(s), ψ(t)⟩` from the closed form.
///
/// Pairs are evaluated with `s ≤ t` and conjugated otherwise, so the result is
/// exactly Hermitian and exactly real on the diagonal.
pub fn kernel(trip: &LevyTriplet, s: f64, t: f64) -> Result<Complex64, ExponentError> {
    if s == 0.0 || t == 0.0 {
        return Ok(zero());
    }
    if s > t {
        return Ok(kernel(trip, t, s)?.conj());
    }
    let k = kernel_ordered(trip, s, t)?;
    Ok(if s == t { Complex64::new(k.re, 0.0) } else { k })
}

fn kernel_ordered(trip: &LevyTriplet, s: f64, t: f64) -> Result<Complex64, ExponentError> {
    let gauss = Complex64::new(trip.diffusion() * s * t, 0.0);
    let nu = trip.measure();
    if nu.is_empty() {
        return Ok(gauss);
    }
    let value = move |p: f64| cis_m1(p * s).conj() * cis_m1(p * t);
    let one = |_p: f64| Complex64::new(1.0, 0.0);
    let integrand = JumpIntegrand {
        value: &value,
        zero_order: Some(2),
        waves: vec![
            (Complex64::new(1.0, 0.0), t - s),
            (Complex64::new(-1.0, 0.0), -s),
            (Complex64::new(-1.0, 0.0), t),
        ],
        smooth: &one,
        smooth_order: Some(0),
        breaks: vec![],
    };
    Ok(gauss + nu.integrate(&integrand)?.value)
}

/// `f(t − s) − f(−s) − f(t)` through the exponent; agrees with [`kernel`].
pub fn kernel_via_exponent(trip: &LevyTriplet, s: f64, t: f64) -> Result<Complex64, ExponentError> {
    Ok(trip.exponent(t - s)? - trip.exponent(-s)? - trip.exponent(t)?)
}

/// Where kernel values at arbitrary (shifted) points come from.
pub trait KernelSource: Sync {
    fn kernel(&self, s: f64, t: f64) -> Result<Complex64, GnsError>;
}

impl KernelSource for LevyTriplet {
    fn kernel(&self, s: f64, t: f64) -> Result<Complex64, GnsError> {
        Ok(kernel(self, s, t)?)
    }
}

/// An exponent table; shifts must land on tabulated points.
impl KernelSource for GridFunction {
    fn kernel(&self, s: f64, t: f64) -> Result<Complex64, GnsError> {
        let at = |x: f64| self.lookup(x, zero()).ok_or(GnsError::UnevaluableShift(x));
        Ok(at(t - s)? - at(s)?.conj() - at(t)?)
    }
}

/// `K(t_j, t_k)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelMatrix {
    pub grid: Vec<f64>,
    #[serde(rename = "entries", serialize_with = "complex_matrix")]
    pub k: DMatrix<Complex64>,
}

impl KernelMatrix {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.k.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Kernel matrix of a tabulated exponent on its non-negative points.
pub fn kernel_matrix(f: &GridFunction) -> Result<KernelMatrix, GnsError> {
    kernel_matrix_on(f, &f.nonnegative_points())
}

/// Kernel matrix of a tabulated exponent on explicit nodes.
pub fn kernel_matrix_on(f: &GridFunction, nodes: &[f64]) -> Result<KernelMatrix, GnsError> {
    let table = Table { grid: f, origin: zero() };
    let k = posdef::conditional_matrix(nodes, &table)?;
    Ok(KernelMatrix {
        grid: nodes.to_vec(),
        k,
    })
}

/// Kernel matrix of a triplet from the closed form; the upper triangle is
/// evaluated in parallel and mirrored.
pub fn kernel_matrix_from_triplet(trip: &LevyTriplet, grid: &[f64]) -> Result<KernelMatrix, GnsError> {
    let k = kernel_matrix_with(grid, |s, t| Ok(kernel(trip, s, t)?))?;
    Ok(KernelMatrix { grid: grid.to_vec(), k })
}

fn kernel_matrix_with(
    grid: &[f64],
    k: impl Fn(f64, f64) -> Result<Complex64, GnsError> + Sync,
) -> Result<DMatrix<Complex64>, GnsError> {
    let n = grid.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (j..n).map(move |l| (j, l))).collect();
    let values = pairs
        .par_iter()
        .map(|&(j, l)| k(grid[j], grid[l]))
        .collect::<Result<Vec<_>, _>>()?;
    let mut m = DMatrix::from_element(n, n, zero());
    for (&(j, l), v) in pairs.iter().zip(values) {
        if j == l {
            m[(j, j)] = Complex64::new(v.re, 0.0);
        } else {
            m[(j, l)] = v;
            m[(l, j)] = v.conj();
        }
    }
    Ok(m)
}

fn serialize_vectors<S: Serializer>(vs: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
    struct Row<'a>(&'a [Complex64]);
    impl Serialize for Row<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            complex_pairs(self.0, s)
        }
    }
    s.collect_seq(vs.iter().map(|v| Row(v)))
}

/// Vectors `ψ(t_j) ∈ ℂ^r` with `⟨ψ(t_j), ψ(t_k)⟩ = K_{jk}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CocycleRealization {
    pub grid: Vec<f64>,
    pub rank: usize,
    pub eigen_floor: f64,
    /// Retained eigenvalues, largest first.
    pub eigenvalues: Vec<f64>,
    #[serde(serialize_with = "serialize_vectors")]
    pub vectors: Vec<Vec<Complex64>>,
}

impl CocycleRealization {
    pub fn inner(&self, j: usize, k: usize) -> Complex64 {
        inner(&self.vectors[j], &self.vectors[k])
    }

    pub fn norm(&self, j: usize) -> f64 {
        norm(&self.vectors[j])
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.grid.len()).map(|j| self.norm(j)).fold(0.0, f64::max)
    }

    /// `max |⟨ψ(t_j), ψ(t_k)⟩ − K_{jk}|`.
    pub fn gram_error(&self, k: &KernelMatrix) -> f64 {
        let n = self.grid.len();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for l in 0..n {
                worst = worst.max((self.inner(j, l) - k.k[(j, l)]).norm());
            }
        }
        worst
    }
}

/// `Σ conj(x_i) y_i`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Factorizes `K = Σ λ_i u_i u_i*` and keeps eigenvalues above
/// `eigen_floor · λ_max`; then `ψ_i(t_j) = √λ_i · conj(u_i[j])`.
pub fn realize_cocycle(k: &KernelMatrix, eigen_floor: f64) -> Result<CocycleRealization, GnsError> {
    let n = k.len();
    let dev = posdef::hermitian_deviation(&k.k);
    if dev > 1e-10 * k.max_abs().max(1.0) {
        return Err(PosdefError::NonHermitianMatrix(dev).into());
    }
    if n == 0 {
        return Ok(CocycleRealization {
            grid: vec![],
            rank: 0,
            eigen_floor,
            eigenvalues: vec![],
            vectors: vec![],
        });
    }
    let eig = k.k.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let lmax = eig.eigenvalues[order[0]].max(0.0);
    let lmin = eig.eigenvalues[order[n - 1]];
    if lmin < -DEFAULT_PSD_TOL * lmax.max(1.0) {
        return Err(GnsError::NotPsd {
            min_eigenvalue: lmin,
            max_eigenvalue: lmax,
        });
    }
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| lmax > 0.0 && eig.eigenvalues[i] > eigen_floor * lmax)
        .collect();
    let vectors = (0..n)
        .map(|j| {
            if k.grid[j] == 0.0 {
                return vec![zero(); kept.len()];
            }
            kept.iter()
                .map(|&i| eig.eigenvectors[(j, i)].conj() * eig.eigenvalues[i].sqrt())
                .collect()
        })
        .collect();
    Ok(CocycleRealization {
        grid: k.grid.clone(),
        rank: kept.len(),
        eigen_floor,
        eigenvalues: kept.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors,
    })
}

/// `max_{s,t} |K(h+s, h+t) − K(h+s, h) − K(h, h+t) + K(h, h) − K(s, t)|`, the
/// statement that `V(h)` preserves inner products of cocycle values.
pub fn shift_covariance_residual<K: KernelSource + ?Sized>(
    source: &K,
    grid: &[f64],
    h: f64,
) -> Result<f64, GnsError> {
    let khh = source.kernel(h, h)?;
    let to_h = grid
        .par_iter()
        .map(|&t| source.kernel(h, h + t))
        .collect::<Result<Vec<_>, _>>()?;
    let n = grid.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..n).map(move |l| (j, l))).collect();
    let devs = pairs
        .par_iter()
        .map(|&(j, l)| {
            let (s, t) = (grid[j], grid[l]);
            let lhs = source.kernel(h + s, h + t)? - to_h[j].conj() - to_h[l] + khh;
            Ok((lhs - source.kernel(s, t)?).norm())
        })
        .collect::<Result<Vec<f64>, GnsError>>()?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

/// Least-squares test of `ψ(g) = (V(g) − I)ψ₀`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoboundaryFit {
    /// `sqrt(min Σ_g ‖ψ(g) − (V(g) − I)ψ₀‖² / N)`.
    pub residual: f64,
    /// `residual / max_g ‖ψ(g)‖`, or 0 when every `ψ(g)` vanishes.
    pub normalized: f64,
    pub max_norm: f64,
    /// Minimizer in the realization's coordinates.
    #[serde(serialize_with = "complex_pairs")]
    pub psi0: Vec<Complex64>,
}

/// Fits `ψ₀ = Σ_k c_k ψ(t_k)` so that `(V(g) − I)ψ₀` matches `ψ(g)` over the grid.
///
/// With `φ_k(g) = (V(g) − I)ψ(t_k) = ψ(g + t_k) − ψ(g) − ψ(t_k)`, every inner
/// product in the normal equations `A c = y` reduces to kernel values at shifted
/// points, which `source` provides. The minimum-norm solution is used when `A`
/// is singular.
pub fn coboundary_residual<K: KernelSource + ?Sized>(
    real: &CocycleRealization,
    source: &K,
) -> Result<CoboundaryFit, GnsError> {
    let grid = &real.grid;
    let n = grid.len();
    let max_norm = real.max_norm();
    if n == 0 || real.rank == 0 {
        return Ok(CoboundaryFit {
            residual: 0.0,
            normalized: 0.0,
            max_norm,
            psi0: vec![zero(); real.rank],
        });
    }
    let kern = |s: f64, t: f64| source.kernel(s, t);

    // ⟨φ_j(g), φ_k(g)⟩ and ⟨φ_j(g), ψ(g)⟩ summed over g.
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|j| (j..n).map(move |k| (j, k))).collect();
    let a_vals = cells
        .par_iter()
        .map(|&(j, k)| {
            let (tj, tk) = (grid[j], grid[k]);
            let mut acc = zero();
            for &g in grid {
                let xs = [(g + tj, 1.0), (g, -1.0), (tj, -1.0)];
                let ys = [(g + tk, 1.0), (g, -1.0), (tk, -1.0)];
                for &(x, cx) in &xs {
                    for &(y, cy) in &ys {
                        acc += kern(x, y)? * (cx * cy);
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>, GnsError>>()?;
    let mut a = DMatrix::from_element(n, n, zero());
    for (&(j, k), v) in cells.iter().zip(a_vals) {
        a[(j, k)] = v;
        a[(k, j)] = v.conj();
    }
    let y = (0..n)
        .into_par_iter()
        .map(|j| {
            let tj = grid[j];
            let mut acc = zero();
            for &g in grid {
                acc += kern(g + tj, g)? - kern(g, g)? - kern(tj, g)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>, GnsError>>()?;
    let y = DVector::from_vec(y);
    let total: f64 = grid
        .par_iter()
        .map(|&g| kern(g, g).map(|z| z.re))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .sum();

    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = smax * 1e-12 * n as f64;
    let c = svd
        .solve(&y, cutoff)
        .expect("both singular bases were requested");

    // Σ‖ψ − Σ c φ‖² = total − 2 Re(y*c) + c*Ac, which is total − y*c at the optimum.
    let quad = (c.adjoint() * &a * &c)[(0, 0)].re;
    let cross = (y.adjoint() * &c)[(0, 0)].re;
    let sq = (total - 2.0 * cross + quad).max(0.0);
    let residual = (sq / n as f64).sqrt();

    let mut psi0 = vec![zero(); real.rank];
    for (k, ck) in c.iter().enumerate() {
        for (slot, v) in psi0.iter_mut().zip(&real.vectors[k]) {
            *slot += ck * v;
        }
    }
    Ok(CoboundaryFit {
        residual,
        normalized: if max_norm > 0.0 { residual / max_norm } else { 0.0 },
        max_norm,
        psi0,
    })
}
