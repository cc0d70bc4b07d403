//! Positivity on finite grids.
//!
//! A function `F` on the group `ℝ` is positive definite when every Gram matrix
//! `M_ij = σ(−t_i, t_j) F(t_j − t_i)` is positive semidefinite. Infinite
//! divisibility asks the same of a branch of `F^{1/n}` for every `n`, which is
//! equivalent to conditional positivity of the exponent `f = log F`: the matrix
//! `C_jk = f(t_k − t_j) − f(−t_j) − f(t_k)` must be positive semidefinite.
//!
//! Functions known only on a grid act as difference tables. Gram matrices built
//! from a table use its non-negative points as nodes and look up each difference
//! `d` either directly or as `conj(F(−d))`; the value at `0` is implied when the
//! table does not carry it (`1` for `F`, `0` for `f`).

use std::f64::consts::PI;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponent::{ExponentError, LevyTriplet};
use crate::io::fmt17;

pub const DEFAULT_PSD_TOL: f64 = 1e-8;
pub const DEFAULT_BRANCH_FLOOR: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-12;
const INPUT_HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PosdefError {
    #[error("grid points must be finite and strictly increasing")]
    UnorderedGrid,
    #[error("grid has {points} points but {values} values")]
    LengthMismatch { points: usize, values: usize },
    #[error("value at t = 0 is {found}, expected {expected}")]
    NotNormalized { expected: Complex64, found: Complex64 },
    #[error("no value for the difference t = {0}: the table does not contain it or its negative")]
    UnevaluableDifference(f64),
    #[error("function is not Hermitian: F(-t) != conj F(t) at t = {t} (deviation {deviation:e})")]
    NonHermitian { t: f64, deviation: f64 },
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NonHermitianMatrix(f64),
    #[error("multiplier is not unit-modulus at ({0}, {1})")]
    InvalidMultiplier(f64, f64),
    #[error("|F| = {modulus:e} at t = {t} is at or below the branch floor")]
    ZeroCrossing { t: f64, modulus: f64 },
    #[error("F changes sign between t = {from} and t = {to}, so it vanishes in between")]
    SignChange { from: f64, to: f64 },
    #[error("phase step between t = {from} and t = {to} reaches π; refine the grid")]
    Aliasing { from: f64, to: f64 },
    #[error("0 must be a grid point to anchor the logarithm")]
    MissingOrigin,
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error("table I/O: {0}")]
    Io(String),
}

/// Values of a function on strictly increasing points of `ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    points: Vec<f64>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(points: Vec<f64>, values: Vec<Complex64>) -> Result<Self, PosdefError> {
        if points.len() != values.len() {
            return Err(PosdefError::LengthMismatch {
                points: points.len(),
                values: values.len(),
            });
        }
        if points.iter().any(|t| !t.is_finite()) || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PosdefError::UnorderedGrid);
        }
        Ok(Self { points, values })
    }

    pub fn from_fn(points: Vec<f64>, f: impl Fn(f64) -> Complex64) -> Result<Self, PosdefError> {
        let values = points.iter().map(|&t| f(t)).collect();
        Self::new(points, values)
    }

    /// A characteristic function: the value at `0`, if present, must be `1`.
    pub fn char_fn(points: Vec<f64>, values: Vec<Complex64>) -> Result<Self, PosdefError> {
        Self::new(points, values)?.normalized_at_origin(Complex64::new(1.0, 0.0))
    }

    /// An exponent: the value at `0`, if present, must be `0`.
    pub fn exponent(points: Vec<f64>, values: Vec<Complex64>) -> Result<Self, PosdefError> {
        Self::new(points, values)?.normalized_at_origin(Complex64::new(0.0, 0.0))
    }

    fn normalized_at_origin(self, expected: Complex64) -> Result<Self, PosdefError> {
        if let Some(i) = self.index_of(0.0) {
            let found = self.values[i];
            if (found - expected).norm() > 1e-12 {
                return Err(PosdefError::NotNormalized { expected, found });
            }
        }
        Ok(self)
    }

    /// `f` of a triplet on the given points.
    pub fn from_triplet_exponent(trip: &LevyTriplet, points: Vec<f64>) -> Result<Self, PosdefError> {
        let values = trip.exponent_grid(&points)?.values;
        Self::new(points, values)
    }

    /// `F` of a triplet on the given points.
    pub fn from_triplet_char_fn(trip: &LevyTriplet, points: Vec<f64>) -> Result<Self, PosdefError> {
        let values = trip.exponent_grid(&points)?.values.into_iter().map(Complex64::exp).collect();
        Self::new(points, values)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            points: self.points.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Non-negative points, the default Gram nodes of a table.
    pub fn nonnegative_points(&self) -> Vec<f64> {
        self.points.iter().copied().filter(|&t| t >= 0.0).collect()
    }

    fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * (1.0 + t.abs());
        let i = self.points.partition_point(|&x| x < t - tol);
        (i < self.points.len() && (self.points[i] - t).abs() <= tol).then_some(i)
    }

    /// Table lookup with conjugate symmetry; `origin` stands in for a missing `t = 0`.
    pub fn lookup(&self, t: f64, origin: Complex64) -> Option<Complex64> {
        if let Some(i) = self.index_of(t) {
            return Some(self.values[i]);
        }
        if let Some(i) = self.index_of(-t) {
            return Some(self.values[i].conj());
        }
        (t.abs() <= 1e-12).then_some(origin)
    }

    /// Reads columns `t, re, im` (with header).
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, PosdefError> {
        #[derive(Deserialize)]
        struct Row {
            t: f64,
            re: f64,
            im: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        let mut values = Vec::new();
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| PosdefError::Io(e.to_string()))?;
            if !(row.re.is_finite() && row.im.is_finite()) {
                return Err(PosdefError::Io(format!("non-finite value at t = {}", row.t)));
            }
            points.push(row.t);
            values.push(Complex64::new(row.re, row.im));
        }
        Self::new(points, values)
    }

    /// Writes columns `t, re, im` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,re,im")?;
        for (t, v) in self.points.iter().zip(&self.values) {
            writeln!(w, "{},{},{}", fmt17(*t), fmt17(v.re), fmt17(v.im))?;
        }
        Ok(())
    }
}

/// Something that can be evaluated at arbitrary group elements.
pub trait GroupFunction: Sync {
    fn at(&self, t: f64) -> Result<Complex64, PosdefError>;
}

/// A table read with conjugate symmetry, implying `origin` at `t = 0`.
pub struct Table<'a> {
    pub grid: &'a GridFunction,
    pub origin: Complex64,
}

impl GroupFunction for Table<'_> {
    fn at(&self, t: f64) -> Result<Complex64, PosdefError> {
        self.grid
            .lookup(t, self.origin)
            .ok_or(PosdefError::UnevaluableDifference(t))
    }
}

/// Any closure `t ↦ F(t)`.
pub struct FnFunction<F>(pub F);

impl<F: Fn(f64) -> Complex64 + Sync> GroupFunction for FnFunction<F> {
    fn at(&self, t: f64) -> Result<Complex64, PosdefError> {
        Ok((self.0)(t))
    }
}

/// `F = exp f` of a triplet.
pub struct TripletCharFn<'a>(pub &'a LevyTriplet);

impl GroupFunction for TripletCharFn<'_> {
    fn at(&self, t: f64) -> Result<Complex64, PosdefError> {
        Ok(self.0.char_fn(t)?)
    }
}

/// The exponent `f` of a triplet.
pub struct TripletExponent<'a>(pub &'a LevyTriplet);

impl GroupFunction for TripletExponent<'_> {
    fn at(&self, t: f64) -> Result<Complex64, PosdefError> {
        Ok(self.0.exponent(t)?)
    }
}

/// Two-argument multiplier `σ(g, h)`, required to be unit-modulus.
pub type Multiplier<'a> = &'a (dyn Fn(f64, f64) -> Complex64 + Sync);

/// Evaluates `F` at every distinct difference `t_j − t_i`, once each, in parallel.
/// Both `d` and `−d` are evaluated so that Hermitian symmetry can be checked.
fn difference_values<G: GroupFunction + ?Sized>(
    nodes: &[f64],
    f: &G,
) -> Result<DMatrix<Complex64>, PosdefError> {
    let n = nodes.len();
    let mut diffs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, ti) in nodes.iter().enumerate() {
        for (j, tj) in nodes.iter().enumerate() {
            diffs.push((tj - ti, i, j));
        }
    }
    diffs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut uniques: Vec<f64> = Vec::new();
    let mut slot = vec![0usize; diffs.len()];
    for (k, (d, _, _)) in diffs.iter().enumerate() {
        match uniques.last() {
            Some(&u) if (d - u).abs() <= 1e-12 * (1.0 + d.abs()) => {}
            _ => uniques.push(*d),
        }
        slot[k] = uniques.len() - 1;
    }
    let values = uniques
        .par_iter()
        .map(|&d| if d == 0.0 || d.abs() < 1e-14 { f.at(0.0) } else { f.at(d) })
        .collect::<Result<Vec<_>, _>>()?;
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (k, &(_, i, j)) in diffs.iter().enumerate() {
        m[(i, j)] = values[slot[k]];
    }
    Ok(m)
}

fn check_function_hermitian(nodes: &[f64], table: &DMatrix<Complex64>) -> Result<(), PosdefError> {
    let n = nodes.len();
    for i in 0..n {
        for j in i..n {
            let dev = (table[(i, j)] - table[(j, i)].conj()).norm();
            let scale = 1.0f64.max(table[(i, j)].norm());
            if dev > HERMITIAN_TOL * scale {
                return Err(PosdefError::NonHermitian {
                    t: nodes[j] - nodes[i],
                    deviation: dev,
                });
            }
        }
    }
    Ok(())
}

/// Largest `|M_ij − conj M_ji|`.
pub fn hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Gram matrix `M_ij = σ(−t_i, t_j) F(t_j − t_i)` on explicit nodes.
pub fn gram_with<G: GroupFunction + ?Sized>(
    nodes: &[f64],
    f: &G,
    sigma: Option<Multiplier<'_>>,
) -> Result<DMatrix<Complex64>, PosdefError> {
    let mut m = difference_values(nodes, f)?;
    check_function_hermitian(nodes, &m)?;
    if let Some(sigma) = sigma {
        for (i, &ti) in nodes.iter().enumerate() {
            for (j, &tj) in nodes.iter().enumerate() {
                let s = sigma(-ti, tj);
                if (s.norm() - 1.0).abs() > 1e-12 {
                    return Err(PosdefError::InvalidMultiplier(-ti, tj));
                }
                m[(i, j)] *= s;
            }
        }
    }
    let dev = hermitian_deviation(&m);
    if dev > HERMITIAN_TOL * max_abs(&m).max(1.0) {
        return Err(PosdefError::NonHermitianMatrix(dev));
    }
    Ok(m)
}

/// Gram matrix of a tabulated `F` on its non-negative points.
pub fn gram(f: &GridFunction, sigma: Option<Multiplier<'_>>) -> Result<DMatrix<Complex64>, PosdefError> {
    let table = Table {
        grid: f,
        origin: Complex64::new(1.0, 0.0),
    };
    gram_with(&f.nonnegative_points(), &table, sigma)
}

/// Outcome of an eigenvalue positivity test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdVerdict {
    #[serde(rename = "pass")]
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    /// Largest eigenvalue modulus.
    pub scale: f64,
    pub tol: f64,
    #[serde(skip)]
    pub eigenvalues: Vec<f64>,
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return vec![];
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// PSD iff the smallest eigenvalue is at least `−tol · max(1, max|λ|)`.
pub fn psd_check(m: &DMatrix<Complex64>, tol: f64) -> Result<PsdVerdict, PosdefError> {
    let dev = hermitian_deviation(m);
    if dev > INPUT_HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(PosdefError::NonHermitianMatrix(dev));
    }
    let eigenvalues = hermitian_eigenvalues(m);
    let min_eigenvalue = eigenvalues.first().copied().unwrap_or(0.0);
    let scale = eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    Ok(PsdVerdict {
        is_psd: min_eigenvalue >= -tol * scale.max(1.0),
        min_eigenvalue,
        scale,
        tol,
        eigenvalues,
    })
}

/// Continuous logarithm `f` with `f(0) = 0` and `exp f = F` on the grid.
///
/// The phase is accumulated from `0` outward in both directions. A step whose
/// phase increment reaches `π` is either a sign change of a real-valued `F`,
/// which forces a zero in between and is reported as [`PosdefError::SignChange`],
/// or genuine aliasing.
pub fn log_branch(f: &GridFunction) -> Result<GridFunction, PosdefError> {
    log_branch_with(f, DEFAULT_BRANCH_FLOOR)
}

pub fn log_branch_with(f: &GridFunction, floor: f64) -> Result<GridFunction, PosdefError> {
    let origin = f.index_of(0.0).ok_or(PosdefError::MissingOrigin)?;
    let one = Complex64::new(1.0, 0.0);
    if (f.values[origin] - one).norm() > 1e-10 {
        return Err(PosdefError::NotNormalized {
            expected: one,
            found: f.values[origin],
        });
    }
    for (t, v) in f.points.iter().zip(&f.values) {
        if v.norm() <= floor {
            return Err(PosdefError::ZeroCrossing {
                t: *t,
                modulus: v.norm(),
            });
        }
    }
    let n = f.len();
    let mut phase = vec![0.0; n];
    let max_step = PI * (1.0 - 1e-9);
    let step = |from: usize, to: usize, acc: f64| -> Result<f64, PosdefError> {
        let (a, b) = (f.values[from], f.values[to]);
        let d = (b / a).arg();
        if d.abs() >= max_step {
            let real = |z: Complex64| z.im.abs() <= 1e-12 * z.norm();
            return Err(if real(a) && real(b) {
                PosdefError::SignChange {
                    from: f.points[from],
                    to: f.points[to],
                }
            } else {
                PosdefError::Aliasing {
                    from: f.points[from],
                    to: f.points[to],
                }
            });
        }
        Ok(acc + d)
    };
    for j in origin + 1..n {
        phase[j] = step(j - 1, j, phase[j - 1])?;
    }
    for j in (0..origin).rev() {
        phase[j] = step(j + 1, j, phase[j + 1])?;
    }
    let values = f
        .values
        .iter()
        .zip(&phase)
        .enumerate()
        .map(|(j, (v, th))| {
            if j == origin {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(v.norm().ln(), *th)
            }
        })
        .collect();
    Ok(GridFunction {
        points: f.points.clone(),
        values,
    })
}

/// `C_jk = f(t_k − t_j) − f(−t_j) − f(t_k)` on explicit nodes.
pub fn conditional_matrix<G: GroupFunction + ?Sized>(
    nodes: &[f64],
    f: &G,
) -> Result<DMatrix<Complex64>, PosdefError> {
    let diff = difference_values(nodes, f)?;
    check_function_hermitian(nodes, &diff)?;
    let point = nodes
        .par_iter()
        .map(|&t| if t == 0.0 { Ok(Complex64::new(0.0, 0.0)) } else { f.at(t) })
        .collect::<Result<Vec<_>, _>>()?;
    let n = nodes.len();
    // f(−t_j) = conj f(t_j) by Hermitian symmetry, checked above on the differences.
    Ok(DMatrix::from_fn(n, n, |j, k| diff[(j, k)] - point[j].conj() - point[k]))
}

/// Conditional positive semidefiniteness of a tabulated exponent, on its
/// non-negative points.
pub fn conditional_psd_check(f: &GridFunction, tol: f64) -> Result<PsdVerdict, PosdefError> {
    let table = Table {
        grid: f,
        origin: Complex64::new(0.0, 0.0),
    };
    let c = conditional_matrix(&f.nonnegative_points(), &table)?;
    psd_check(&c, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootVerdict {
    pub n: usize,
    #[serde(flatten)]
    pub verdict: PsdVerdict,
}

/// Per-root verdicts of the n-th-root test; a vanishing `F` shows up as
/// `branch_failure` with no verdicts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisibilityReport {
    pub n_max: usize,
    pub roots: Vec<RootVerdict>,
    pub branch_failure: Option<String>,
    pub passed: bool,
}

/// For `n = 1..=n_max`, tests the Gram matrix of `exp(f/n)` with `f` the
/// continuous logarithm of the table, on the table's non-negative points.
pub fn infinite_divisibility_check(
    table: &GridFunction,
    n_max: usize,
    tol: f64,
) -> Result<DivisibilityReport, PosdefError> {
    infinite_divisibility_check_on(table, &table.nonnegative_points(), n_max, tol)
}

/// As [`infinite_divisibility_check`] with explicit Gram nodes; every difference
/// of nodes must be in the table.
pub fn infinite_divisibility_check_on(
    table: &GridFunction,
    nodes: &[f64],
    n_max: usize,
    tol: f64,
) -> Result<DivisibilityReport, PosdefError> {
    match log_branch(table) {
        Ok(branch) => roots_check(&branch, nodes, n_max, tol),
        Err(e @ (PosdefError::ZeroCrossing { .. } | PosdefError::SignChange { .. })) => Ok(DivisibilityReport {
            n_max,
            roots: vec![],
            branch_failure: Some(e.to_string()),
            passed: false,
        }),
        Err(e) => Err(e),
    }
}

/// The n-th-root test for an exponent that is already known, such as the
/// exponent of a triplet, so no logarithm has to be taken.
pub fn roots_check(
    exponent: &GridFunction,
    nodes: &[f64],
    n_max: usize,
    tol: f64,
) -> Result<DivisibilityReport, PosdefError> {
    let roots = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let root = exponent.map(|v| (v / n as f64).exp());
            let lookup = Table {
                grid: &root,
                origin: Complex64::new(1.0, 0.0),
            };
            let m = gram_with(nodes, &lookup, None)?;
            Ok(RootVerdict {
                n,
                verdict: psd_check(&m, tol)?,
            })
        })
        .collect::<Result<Vec<_>, PosdefError>>()?;
    let passed = roots.iter().all(|r| r.verdict.is_psd);
    Ok(DivisibilityReport {
        n_max,
        roots,
        branch_failure: None,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn table(points: Vec<f64>, f: impl Fn(f64) -> Complex64) -> GridFunction {
        GridFunction::from_fn(points, f).unwrap()
    }

    #[test]
    fn gram_examples() {
        let ones = table(vec![0.0, 1.0, 2.0], |_| c(1.0, 0.0));
        let m = gram(&ones, None).unwrap();
        assert!(m.iter().all(|z| *z == c(1.0, 0.0)));

        let g = table(vec![0.0, 1.0], |t| c((-0.5 * t * t).exp(), 0.0));
        let m = gram(&g, None).unwrap();
        let e = (-0.5f64).exp();
        assert_eq!(m[(0, 1)], c(e, 0.0));
        assert_eq!(m[(1, 0)], c(e, 0.0));
        assert_eq!(m[(1, 1)], c(1.0, 0.0));

        let phase = table(vec![0.0, 1.0, 2.0], |t| c(0.0, t).exp());
        let m = gram(&phase, None).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[(i, j)] - c(0.0, j as f64 - i as f64).exp()).norm() < 1e-15);
            }
        }
        let v = psd_check(&m, DEFAULT_PSD_TOL).unwrap();
        assert!((v.eigenvalues[2] - 3.0).abs() < 1e-12);
        assert!(v.eigenvalues[1].abs() < 1e-12);
    }

    #[test]
    fn gram_rejects_missing_differences_and_non_hermitian_functions() {
        let sparse = table(vec![0.0, 1.0, 3.0], |_| c(1.0, 0.0));
        assert!(matches!(gram(&sparse, None), Err(PosdefError::UnevaluableDifference(_))));
        let skew = FnFunction(|t: f64| c(1.0, t * t));
        assert!(matches!(
            gram_with(&[0.0, 1.0], &skew, None),
            Err(PosdefError::NonHermitian { .. })
        ));
    }

    #[test]
    fn multiplier_is_applied_and_checked() {
        let ones = FnFunction(|_t: f64| c(1.0, 0.0));
        let phase = |g: f64, h: f64| c(0.0, 0.3 * (h + g)).exp();
        let m = gram_with(&[0.0, 1.0, 2.0], &ones, Some(&phase)).unwrap();
        assert!((m[(0, 2)] - c(0.0, 0.6).exp()).norm() < 1e-15);
        let not_unit = |_g: f64, _h: f64| c(2.0, 0.0);
        assert!(matches!(
            gram_with(&[0.0, 1.0], &ones, Some(&not_unit)),
            Err(PosdefError::InvalidMultiplier(..))
        ));
    }

    #[test]
    fn psd_examples() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        let v = psd_check(&m, DEFAULT_PSD_TOL).unwrap();
        assert!(v.is_psd);
        assert!(v.min_eigenvalue.abs() < 1e-12);

        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        let v = psd_check(&m, DEFAULT_PSD_TOL).unwrap();
        assert!(!v.is_psd);
        assert!((v.min_eigenvalue + 1.0).abs() < 1e-12);

        let v = psd_check(&DMatrix::from_element(3, 3, c(1.0, 0.0)), DEFAULT_PSD_TOL).unwrap();
        assert!(v.is_psd);
        assert!((v.eigenvalues[2] - 3.0).abs() < 1e-12);
        assert!(v.eigenvalues[0].abs() < 1e-12 && v.eigenvalues[1].abs() < 1e-12);

        let skew = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)]);
        assert!(matches!(psd_check(&skew, 1e-8), Err(PosdefError::NonHermitianMatrix(_))));
    }

    #[test]
    fn hermitian_eigensolver_on_complex_input() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn log_branch_unwraps_past_pi() {
        let pts = grid::arithmetic(-3.0, 3.0, 0.5).unwrap();
        let phase = table(pts.clone(), |t| c(0.0, t).exp());
        let f = log_branch(&phase).unwrap();
        for (t, v) in f.points().iter().zip(f.values()) {
            assert!((v - c(0.0, *t)).norm() < 1e-12, "t={t}: {v}");
        }
        let last = *f.values().last().unwrap();
        assert!((last.im - 3.0).abs() < 1e-12);

        let ones = table(pts.clone(), |_| c(1.0, 0.0));
        assert!(log_branch(&ones).unwrap().values().iter().all(|v| v.norm() == 0.0));

        let gauss = table(pts, |t| c((-0.5 * t * t).exp(), 0.0));
        for (t, v) in log_branch(&gauss).unwrap().points().iter().zip(log_branch(&gauss).unwrap().values()) {
            assert!((v - c(-0.5 * t * t, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn log_branch_failures() {
        let sinc = table(grid::arithmetic(-4.0, 4.0, 0.5).unwrap(), |t| {
            c(if t == 0.0 { 1.0 } else { t.sin() / t }, 0.0)
        });
        assert!(matches!(log_branch(&sinc), Err(PosdefError::SignChange { .. })));

        let fast = table(vec![0.0, 0.5, 1.5], |t| c(0.0, PI * t).exp());
        assert!(matches!(log_branch(&fast), Err(PosdefError::Aliasing { .. })));

        let tiny = table(vec![0.0, 1.0], |t| c(if t == 0.0 { 1.0 } else { 1e-9 }, 0.0));
        assert!(matches!(log_branch(&tiny), Err(PosdefError::ZeroCrossing { .. })));

        let no_origin = table(vec![1.0, 2.0], |_| c(1.0, 0.0));
        assert!(matches!(log_branch(&no_origin), Err(PosdefError::MissingOrigin)));
    }

    #[test]
    fn conditional_examples() {
        let b = 0.7;
        let drift = table(grid::arithmetic(-2.0, 2.0, 0.5).unwrap(), |t| c(0.0, b * t));
        let v = conditional_psd_check(&drift, DEFAULT_PSD_TOL).unwrap();
        assert!(v.is_psd && v.scale < 1e-12);

        let gauss = table(vec![1.0, 2.0], |t| c(-0.5 * t * t, 0.0));
        let lookup = Table { grid: &gauss, origin: c(0.0, 0.0) };
        let m = conditional_matrix(&[1.0, 2.0], &lookup).unwrap();
        let expect = [[1.0, 2.0], [2.0, 4.0]];
        for j in 0..2 {
            for k in 0..2 {
                assert!((m[(j, k)] - c(expect[j][k], 0.0)).norm() < 1e-15);
            }
        }
        assert!(conditional_psd_check(&gauss, DEFAULT_PSD_TOL).unwrap().is_psd);

        let bad = table(vec![1.0, 2.0], |t| c(t * t, 0.0));
        let v = conditional_psd_check(&bad, DEFAULT_PSD_TOL).unwrap();
        assert!(!v.is_psd);
    }

    #[test]
    fn divisibility_of_point_mass_and_non_divisibility_of_sinc() {
        let pts = grid::arithmetic(-4.0, 4.0, 0.5).unwrap();
        let ones = table(pts.clone(), |_| c(1.0, 0.0));
        let r = infinite_divisibility_check(&ones, 16, DEFAULT_PSD_TOL).unwrap();
        assert!(r.passed && r.roots.len() == 16);

        let sinc = table(pts, |t| c(if t == 0.0 { 1.0 } else { t.sin() / t }, 0.0));
        let r = infinite_divisibility_check(&sinc, 8, DEFAULT_PSD_TOL).unwrap();
        assert!(!r.passed);
        assert!(r.branch_failure.is_some());
    }

    #[test]
    fn csv_round_trip() {
        let g = table(vec![-1.0, 0.0, 0.5], |t| c(t.cos(), 1.0 / 3.0 * t));
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = GridFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, g);
        assert!(GridFunction::read_csv("t,re,im\n1,0,0\n0,1,0\n".as_bytes()).is_err());
    }
}
