//! Lévy measures: finitely many atoms plus an optional density from a few built-in
//! families, and the machinery that integrates jump integrands against them.
//!
//! Every integral is a finite atom sum plus one-dimensional quadrature over the
//! density pieces. Pieces are integrated on the positive half-line in `q = |p|`,
//! with the sign of `p` carried separately. Two situations get special treatment:
//!
//! * a power density `|p|^-α` reaching down to `p = 0` is integrated on `[0, c]`
//!   after the substitution `p = c u^m`, with `m` chosen from `α` and the order of
//!   vanishing of the integrand, which turns the algebraic endpoint into a smooth one;
//! * an untruncated power tail `[P, ∞)` is split into oscillatory waves `e^{iωp}`,
//!   integrated along the rotated ray `p = P + i·sgn(ω)·s`, and a monotone remainder
//!   integrated after `p = P u^-m`.
//!
//! When the integral does not exist the substitution is skipped and the plain
//! quadrature is left to fail, so divergence surfaces as non-convergence.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{Adaptive, QuadError};

/// Support of a Gaussian density is cut at this many standard deviations.
pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 12.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("atom at p = {p} with weight {w} is invalid: {reason}")]
    InvalidAtom { p: f64, w: f64, reason: &'static str },
    #[error("two atoms share the jump size p = {0}")]
    DuplicateAtom(f64),
    #[error("invalid density parameters: {0}")]
    InvalidDensity(String),
    #[error("invalid quadrature settings: {0}")]
    InvalidQuadrature(String),
}

/// A point mass `w δ_p` of the Lévy measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Atom {
    pub p: f64,
    pub w: f64,
}

impl From<[f64; 2]> for Atom {
    fn from([p, w]: [f64; 2]) -> Self {
        Atom { p, w }
    }
}

impl From<Atom> for [f64; 2] {
    fn from(a: Atom) -> Self {
        [a.p, a.w]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sides {
    Positive,
    Negative,
    #[default]
    Both,
}

fn one() -> f64 {
    1.0
}

/// Built-in density families for the absolutely continuous part of ν.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Density {
    /// `height` on `[lo, hi]`.
    Uniform {
        lo: f64,
        hi: f64,
        #[serde(default = "one")]
        height: f64,
    },
    /// `scale · |p|^-exponent` for `inner ≤ |p| ≤ cutoff` on the selected sides.
    /// A missing cutoff means an untruncated tail.
    Power {
        exponent: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<f64>,
        #[serde(default)]
        inner: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        sides: Sides,
    },
    /// `weight` times the centred normal density with standard deviation `scale`,
    /// i.e. `|ψ̂(p)|²` for a Gaussian `ψ̂`.
    GaussianL2 {
        scale: f64,
        #[serde(default = "one")]
        weight: f64,
    },
}

/// A stretch `[lo, hi]` of `q = |p|`, with `p = sign · q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub sign: f64,
}

impl Density {
    pub fn validate(&self) -> Result<(), MeasureError> {
        let bad = |m: String| Err(MeasureError::InvalidDensity(m));
        match *self {
            Density::Uniform { lo, hi, height } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad(format!("uniform needs finite lo < hi, got [{lo}, {hi}]"));
                }
                if !(height.is_finite() && height > 0.0) {
                    return bad(format!("uniform height must be positive, got {height}"));
                }
            }
            Density::Power {
                exponent,
                cutoff,
                inner,
                scale,
                ..
            } => {
                if !exponent.is_finite() {
                    return bad(format!("power exponent must be finite, got {exponent}"));
                }
                if !(scale.is_finite() && scale > 0.0) {
                    return bad(format!("power scale must be positive, got {scale}"));
                }
                if !(inner.is_finite() && inner >= 0.0) {
                    return bad(format!("power inner radius must be >= 0, got {inner}"));
                }
                if let Some(c) = cutoff {
                    if !(c.is_finite() && c > inner) {
                        return bad(format!("power cutoff {c} must be finite and exceed inner {inner}"));
                    }
                }
            }
            Density::GaussianL2 { scale, weight } => {
                if !(scale.is_finite() && scale > 0.0) {
                    return bad(format!("gaussian_l2 scale must be positive, got {scale}"));
                }
                if !(weight.is_finite() && weight > 0.0) {
                    return bad(format!("gaussian_l2 weight must be positive, got {weight}"));
                }
            }
        }
        Ok(())
    }

    /// Density value at a real jump size.
    pub fn value(&self, p: f64) -> f64 {
        match *self {
            Density::Uniform { lo, hi, height } => {
                if (lo..=hi).contains(&p) {
                    height
                } else {
                    0.0
                }
            }
            Density::Power {
                exponent,
                cutoff,
                inner,
                scale,
                sides,
            } => {
                let q = p.abs();
                let side_ok = match sides {
                    Sides::Both => p != 0.0,
                    Sides::Positive => p > 0.0,
                    Sides::Negative => p < 0.0,
                };
                let hi = cutoff.unwrap_or(f64::INFINITY);
                if side_ok && q >= inner && q <= hi {
                    scale * q.powf(-exponent)
                } else {
                    0.0
                }
            }
            Density::GaussianL2 { scale, weight } => {
                if p.abs() > GAUSSIAN_SUPPORT_SIGMAS * scale {
                    return 0.0;
                }
                let z = p / scale;
                weight * (-0.5 * z * z).exp() / (scale * (2.0 * std::f64::consts::PI).sqrt())
            }
        }
    }

    /// Analytic continuation of the density along an untruncated tail, in `q = |p|`.
    pub(crate) fn value_complex(&self, z: Complex64) -> Option<Complex64> {
        match *self {
            Density::Power {
                exponent,
                cutoff: None,
                scale,
                ..
            } => Some(z.powf(-exponent) * scale),
            _ => None,
        }
    }

    /// Exponent `α` when the density behaves like `|p|^-α` down to `p = 0`.
    pub(crate) fn zero_singularity(&self) -> Option<f64> {
        match *self {
            Density::Power { exponent, inner, .. } if inner == 0.0 && exponent > 0.0 => {
                Some(exponent)
            }
            _ => None,
        }
    }

    /// Exponent `α` when the density decays like `|p|^-α` without a cutoff.
    pub(crate) fn tail_exponent(&self) -> Option<f64> {
        match *self {
            Density::Power {
                exponent,
                cutoff: None,
                ..
            } => Some(exponent),
            _ => None,
        }
    }

    pub(crate) fn pieces(&self) -> Vec<Piece> {
        match *self {
            Density::Uniform { lo, hi, .. } => {
                let mut out = Vec::new();
                if hi > 0.0 {
                    out.push(Piece {
                        lo: lo.max(0.0),
                        hi,
                        sign: 1.0,
                    });
                }
                if lo < 0.0 {
                    out.push(Piece {
                        lo: (-hi).max(0.0),
                        hi: -lo,
                        sign: -1.0,
                    });
                }
                out
            }
            Density::Power {
                cutoff,
                inner,
                sides,
                ..
            } => {
                let hi = cutoff.unwrap_or(f64::INFINITY);
                let signs: &[f64] = match sides {
                    Sides::Both => &[1.0, -1.0],
                    Sides::Positive => &[1.0],
                    Sides::Negative => &[-1.0],
                };
                signs
                    .iter()
                    .map(|&sign| Piece { lo: inner, hi, sign })
                    .collect()
            }
            Density::GaussianL2 { scale, .. } => {
                let hi = GAUSSIAN_SUPPORT_SIGMAS * scale;
                vec![
                    Piece { lo: 0.0, hi, sign: 1.0 },
                    Piece { lo: 0.0, hi, sign: -1.0 },
                ]
            }
        }
    }
}

/// Quadrature controls: Gauss-Legendre order per panel, tolerance, evaluation
/// budget per piece, and extra splitting points (in `p`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub order: usize,
    pub tol: f64,
    pub max_evals: usize,
    pub splits: Vec<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            order: 20,
            tol: 1e-10,
            max_evals: 400_000,
            splits: Vec::new(),
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), MeasureError> {
        if !(2..=200).contains(&self.order) {
            return Err(MeasureError::InvalidQuadrature(format!(
                "order {} outside 2..=200",
                self.order
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(MeasureError::InvalidQuadrature(format!("tol {} must be positive", self.tol)));
        }
        if self.max_evals < 4 * self.order {
            return Err(MeasureError::InvalidQuadrature("max_evals too small".into()));
        }
        if self.splits.iter().any(|s| !s.is_finite()) {
            return Err(MeasureError::InvalidQuadrature("non-finite split point".into()));
        }
        Ok(())
    }

    pub(crate) fn driver(&self, abs_tol: f64) -> Adaptive {
        Adaptive::new(self.order, abs_tol, self.tol, self.max_evals)
    }
}

/// The Lévy measure ν: atoms, an optional density, and how to integrate against it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LevyMeasure {
    pub atoms: Vec<Atom>,
    pub density: Option<Density>,
    pub quadrature: QuadratureSpec,
}

impl LevyMeasure {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        Self {
            atoms: atoms.into_iter().map(|(p, w)| Atom { p, w }).collect(),
            ..Self::default()
        }
    }

    pub fn with_density(mut self, density: Density) -> Self {
        self.density = Some(density);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.density.is_none()
    }

    /// Structural checks: atom validity, density parameters, quadrature settings.
    /// Integrability is checked by the moment machinery, not here.
    pub fn validate(&self) -> Result<(), MeasureError> {
        for a in &self.atoms {
            if !a.p.is_finite() || a.p == 0.0 {
                return Err(MeasureError::InvalidAtom {
                    p: a.p,
                    w: a.w,
                    reason: "jump size must be finite and non-zero",
                });
            }
            if !(a.w.is_finite() && a.w > 0.0) {
                return Err(MeasureError::InvalidAtom {
                    p: a.p,
                    w: a.w,
                    reason: "weight must be finite and positive",
                });
            }
        }
        let mut ps: Vec<f64> = self.atoms.iter().map(|a| a.p).collect();
        ps.sort_by(f64::total_cmp);
        if let Some(w) = ps.windows(2).find(|w| w[0] == w[1]) {
            return Err(MeasureError::DuplicateAtom(w[0]));
        }
        if let Some(d) = &self.density {
            d.validate()?;
        }
        self.quadrature.validate()
    }

    /// Mirror image `p ↦ -p`.
    pub fn reflected(&self) -> Self {
        let density = self.density.as_ref().map(|d| match *d {
            Density::Uniform { lo, hi, height } => Density::Uniform {
                lo: -hi,
                hi: -lo,
                height,
            },
            Density::Power {
                exponent,
                cutoff,
                inner,
                scale,
                sides,
            } => Density::Power {
                exponent,
                cutoff,
                inner,
                scale,
                sides: match sides {
                    Sides::Positive => Sides::Negative,
                    Sides::Negative => Sides::Positive,
                    Sides::Both => Sides::Both,
                },
            },
            Density::GaussianL2 { .. } => d.clone(),
        });
        Self {
            atoms: self.atoms.iter().map(|a| Atom { p: -a.p, w: a.w }).collect(),
            density,
            quadrature: QuadratureSpec {
                splits: self.quadrature.splits.iter().map(|s| -s).collect(),
                ..self.quadrature.clone()
            },
        }
    }
}

/// A function of the jump size to be integrated against ν, together with what
/// the integrator needs to know about its shape.
pub(crate) struct JumpIntegrand<'a> {
    /// Numerically stable evaluation at any real `p`.
    pub value: &'a (dyn Fn(f64) -> Complex64 + Sync),
    /// `value(p) = O(|p|^k)` near zero; `None` if it vanishes identically there.
    pub zero_order: Option<i32>,
    /// On `|p| ≥ 1`, `value(p) = Σ c e^{iωp} + smooth(p)` with this list of `(c, ω)`.
    pub waves: Vec<(Complex64, f64)>,
    pub smooth: &'a (dyn Fn(f64) -> Complex64 + Sync),
    /// `smooth(p) = O(|p|^j)` at infinity; `None` if it vanishes there.
    pub smooth_order: Option<i32>,
    /// Kinks of `value`, as positive `|p|` locations.
    pub breaks: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Integral {
    pub value: Complex64,
    pub error: f64,
}

impl LevyMeasure {
    pub(crate) fn integrate(&self, f: &JumpIntegrand<'_>) -> Result<Integral, QuadError> {
        let mut value = Complex64::new(0.0, 0.0);
        for a in &self.atoms {
            value += (f.value)(a.p) * a.w;
        }
        let mut error = 0.0;
        if let Some(d) = &self.density {
            for piece in d.pieces() {
                let out = integrate_piece(d, piece, f, &self.quadrature)?;
                value += out.value;
                error += out.error;
            }
        }
        Ok(Integral { value, error })
    }
}

fn integrate_piece(
    density: &Density,
    piece: Piece,
    f: &JumpIntegrand<'_>,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadError> {
    let sign = piece.sign;
    let finite_hi = piece.hi.is_finite();
    let mut cuts: Vec<f64> = vec![piece.lo];
    let interior = std::iter::once(1.0)
        .chain(f.breaks.iter().copied())
        .chain(spec.splits.iter().filter(|s| **s * sign > 0.0).map(|s| s.abs()));
    for c in interior {
        if c > piece.lo && (c < piece.hi) {
            cuts.push(c);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let tail_start = if finite_hi {
        cuts.push(piece.hi);
        None
    } else {
        Some(cuts.last().expect("cuts start with lo").max(1.0))
    };
    if let Some(p) = tail_start {
        if *cuts.last().unwrap() < p {
            cuts.push(p);
        }
    }

    let segments = cuts.len() - 1 + usize::from(tail_start.is_some());
    let abs_tol = spec.tol / segments.max(1) as f64;
    let driver = spec.driver(abs_tol);
    let rho = |q: f64| density.value(sign * q);
    let mut total = Integral {
        value: Complex64::new(0.0, 0.0),
        error: 0.0,
    };

    for (i, w) in cuts.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let out = match (i, a == 0.0, density.zero_singularity(), f.zero_order) {
            (0, true, Some(alpha), Some(k)) if f64::from(k) - alpha > -1.0 => {
                let beta = f64::from(k) - alpha;
                let m = (2.0 / (beta + 1.0)).max(1.0);
                let g = |u: f64| {
                    let q = b * u.powf(m);
                    if q == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    (f.value)(sign * q) * (rho(q) * m * b * u.powf(m - 1.0))
                };
                driver.integrate(&g, 0.0, 1.0)?
            }
            (0, true, Some(_), None) => continue,
            _ => {
                let g = |q: f64| (f.value)(sign * q) * rho(q);
                driver.integrate(&g, a, b)?
            }
        };
        total.value += out.value;
        total.error += out.error;
    }

    if let Some(p0) = tail_start {
        let out = integrate_tail(density, sign, p0, f, &driver)?;
        total.value += out.value;
        total.error += out.error;
    }
    Ok(total)
}

fn integrate_tail(
    density: &Density,
    sign: f64,
    p0: f64,
    f: &JumpIntegrand<'_>,
    driver: &Adaptive,
) -> Result<Integral, QuadError> {
    let alpha = density
        .tail_exponent()
        .expect("only untruncated power densities have infinite pieces");
    let rho = |q: f64| density.value(sign * q);
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;

    // Non-oscillatory part, plus any zero-frequency waves folded into it.
    let mut constant = Complex64::new(0.0, 0.0);
    let mut waves = Vec::new();
    for &(c, w) in &f.waves {
        if w == 0.0 {
            constant += c;
        } else {
            waves.push((c, sign * w));
        }
    }
    let order = match (f.smooth_order, constant != Complex64::new(0.0, 0.0)) {
        (Some(j), true) => Some(j.max(0)),
        (Some(j), false) => Some(j),
        (None, true) => Some(0),
        (None, false) => None,
    };
    if let Some(j) = order {
        let gamma = alpha - f64::from(j);
        let smooth = |q: f64| (f.smooth)(sign * q) + constant;
        let out = if gamma > 1.0 {
            let m = (2.0 / (gamma - 1.0)).clamp(0.1, 10.0);
            let g = |u: f64| {
                let q = p0 * u.powf(-m);
                if !q.is_finite() {
                    return Complex64::new(0.0, 0.0);
                }
                smooth(q) * (rho(q) * m * p0 * u.powf(-m - 1.0))
            };
            driver.integrate(&g, 0.0, 1.0)?
        } else {
            let g = |u: f64| smooth(p0 / u) * (rho(p0 / u) * p0 / (u * u));
            driver.integrate(&g, 0.0, 1.0)?
        };
        value += out.value;
        error += out.error;
    }

    for (c, w) in waves {
        let dir = w.signum();
        let rate = w.abs();
        let lead = Complex64::new(0.0, w * p0).exp() * c * Complex64::new(0.0, dir);
        let g = |u: f64| {
            let s = u / ((1.0 - u) * rate);
            let ds = 1.0 / ((1.0 - u).powi(2) * rate);
            let decay = (-rate * s).exp();
            if decay == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let z = Complex64::new(p0, dir * s);
            let r = density
                .value_complex(z)
                .expect("tail density has an analytic continuation");
            r * (decay * ds)
        };
        let out = driver.integrate(&g, 0.0, 1.0)?;
        value += lead * out.value;
        error += out.error * c.norm();
    }
    Ok(Integral { value, error })
}
