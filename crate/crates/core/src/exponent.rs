//! Lévy triplets and their characteristic exponents.
//!
//! A triplet `(b, a, ν)` together with a centering [`Convention`] determines
//!
//! ```text
//! f(t) = i b t − a t²/2 + ∫ M(p, t) dν(p)
//! ```
//!
//! with `M = e^{ipt} − 1` (de Finetti), `e^{ipt} − 1 − ipt` (Kolmogorov) or
//! `e^{ipt} − 1 − ipt/(1+p²)` (Lévy). The diffusion term is always `−a t²/2`
//! with `a ≥ 0`; overall intensity factors belong in the atom weights and
//! density scale. The three forms differ only in the drift, and [`convert`]
//! moves between them exactly.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{Atom, Density, JumpIntegrand, LevyMeasure, MeasureError, QuadratureSpec};
use crate::quadrature::QuadError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExponentError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("diffusion coefficient must be finite and >= 0, got {0}")]
    NegativeDiffusion(f64),
    #[error("drift must be finite, got {0}")]
    NonFiniteDrift(f64),
    #[error("moment {kind} diverges under the declared measure ({source})")]
    DivergentMoment { kind: MomentKind, source: QuadError },
    #[error("unknown moment kind `{0}`")]
    InvalidKind(String),
    #[error("triplet is not admissible for the {convention} convention: {detail}")]
    Inadmissible { convention: Convention, detail: String },
    #[error("jump integral failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("invalid triplet document: {0}")]
    Document(String),
}

/// The compensator subtracted inside the jump integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    #[serde(alias = "definetti", alias = "DeFinetti")]
    DeFinetti,
    #[serde(alias = "Kolmogorov")]
    Kolmogorov,
    #[serde(alias = "Levy")]
    Levy,
}

impl Convention {
    pub const ALL: [Convention; 3] = [Convention::DeFinetti, Convention::Kolmogorov, Convention::Levy];
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::DeFinetti => "de_finetti",
            Convention::Kolmogorov => "kolmogorov",
            Convention::Levy => "levy",
        })
    }
}

impl FromStr for Convention {
    type Err = ExponentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "de_finetti" | "definetti" => Ok(Convention::DeFinetti),
            "kolmogorov" => Ok(Convention::Kolmogorov),
            "levy" => Ok(Convention::Levy),
            other => Err(ExponentError::Document(format!("unknown convention `{other}`"))),
        }
    }
}

/// Integrals of ν that the conversions and checks rely on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentKind {
    /// `ν(ℝ)`
    TotalMass,
    /// `∫ min(1, p²) dν`
    Min1P2,
    /// `∫ p/(1+p²) dν`
    POver1P2,
    /// `∫ p³/(1+p²) dν`
    P3Over1P2,
    /// `∫_{|p|<δ} p² dν`
    TruncVar(f64),
    /// `∫_{|p|≥1} |p| dν`
    AbsTail,
}

impl fmt::Display for MomentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentKind::TotalMass => f.write_str("total_mass"),
            MomentKind::Min1P2 => f.write_str("min1p2"),
            MomentKind::POver1P2 => f.write_str("p_over_1p2"),
            MomentKind::P3Over1P2 => f.write_str("p3_over_1p2"),
            MomentKind::TruncVar(d) => write!(f, "trunc_var({d})"),
            MomentKind::AbsTail => f.write_str("abs_tail"),
        }
    }
}

impl FromStr for MomentKind {
    type Err = ExponentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kind = match s {
            "total_mass" => MomentKind::TotalMass,
            "min1p2" => MomentKind::Min1P2,
            "p_over_1p2" => MomentKind::POver1P2,
            "p3_over_1p2" => MomentKind::P3Over1P2,
            "abs_tail" => MomentKind::AbsTail,
            _ => {
                let delta = s
                    .strip_prefix("trunc_var(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|d| d.trim().parse::<f64>().ok())
                    .ok_or_else(|| ExponentError::InvalidKind(s.to_string()))?;
                MomentKind::TruncVar(delta)
            }
        };
        kind.check()?;
        Ok(kind)
    }
}

impl MomentKind {
    fn check(self) -> Result<(), ExponentError> {
        match self {
            MomentKind::TruncVar(d) if !(d.is_finite() && d > 0.0) => {
                Err(ExponentError::InvalidKind(format!("trunc_var({d})")))
            }
            _ => Ok(()),
        }
    }
}

/// `e^{ix} − 1` without cancellation near zero.
pub(crate) fn cis_m1(x: f64) -> Complex64 {
    let h = (0.5 * x).sin();
    Complex64::new(-2.0 * h * h, x.sin())
}

/// `e^{ix} − 1 − ix` without cancellation near zero.
pub(crate) fn cis_m1_mix(x: f64) -> Complex64 {
    let h = (0.5 * x).sin();
    let im = if x.abs() < 0.1 {
        let x2 = x * x;
        -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x.sin() - x
    };
    Complex64::new(-2.0 * h * h, im)
}

/// Jump integrand `M(p, t)` for a convention.
pub(crate) fn jump_kernel(convention: Convention, p: f64, t: f64) -> Complex64 {
    match convention {
        Convention::DeFinetti => cis_m1(p * t),
        Convention::Kolmogorov => cis_m1_mix(p * t),
        Convention::Levy => {
            let p2 = p * p;
            cis_m1_mix(p * t) + Complex64::new(0.0, t * p * p2 / (1.0 + p2))
        }
    }
}

/// Compensator `c(p)` with `M = e^{ipt} − 1 − i t c(p)`.
fn compensator(convention: Convention, p: f64) -> f64 {
    match convention {
        Convention::DeFinetti => 0.0,
        Convention::Kolmogorov => p,
        Convention::Levy => p / (1.0 + p * p),
    }
}

fn real_moment(
    nu: &LevyMeasure,
    kind: MomentKind,
) -> Result<crate::measure::Integral, QuadError> {
    let value: Box<dyn Fn(f64) -> Complex64 + Sync> = match kind {
        MomentKind::TotalMass => Box::new(|_| Complex64::new(1.0, 0.0)),
        MomentKind::Min1P2 => Box::new(|p: f64| Complex64::new((p * p).min(1.0), 0.0)),
        MomentKind::POver1P2 => Box::new(|p: f64| Complex64::new(p / (1.0 + p * p), 0.0)),
        MomentKind::P3Over1P2 => Box::new(|p: f64| Complex64::new(p * p * p / (1.0 + p * p), 0.0)),
        MomentKind::TruncVar(d) => Box::new(move |p: f64| {
            Complex64::new(if p.abs() < d { p * p } else { 0.0 }, 0.0)
        }),
        MomentKind::AbsTail => Box::new(|p: f64| {
            Complex64::new(if p.abs() >= 1.0 { p.abs() } else { 0.0 }, 0.0)
        }),
    };
    let (zero_order, smooth_order, breaks) = match kind {
        MomentKind::TotalMass => (Some(0), Some(0), vec![]),
        MomentKind::Min1P2 => (Some(2), Some(0), vec![1.0]),
        MomentKind::POver1P2 => (Some(1), Some(-1), vec![]),
        MomentKind::P3Over1P2 => (Some(3), Some(1), vec![]),
        MomentKind::TruncVar(d) => (Some(2), None, vec![d]),
        MomentKind::AbsTail => (None, Some(1), vec![1.0]),
    };
    let integrand = JumpIntegrand {
        value: value.as_ref(),
        zero_order,
        waves: vec![],
        smooth: value.as_ref(),
        smooth_order,
        breaks,
    };
    nu.integrate(&integrand)
}

/// `∫ m_kind(p) dν(p)`: atom sum plus adaptive quadrature of the density.
pub fn levy_measure_moments(nu: &LevyMeasure, kind: MomentKind) -> Result<f64, ExponentError> {
    kind.check()?;
    real_moment(nu, kind)
        .map(|i| i.value.re)
        .map_err(|source| ExponentError::DivergentMoment { kind, source })
}

/// One line of a [`Diagnostics`] report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub convention: Convention,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Diagnostics {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Unvalidated triplet data, and the on-disk JSON document.
///
/// ```json
/// { "b": 0.0, "a": 1.0, "convention": "levy",
///   "atoms": [[1.0, 2.0]],
///   "density": { "family": "power", "exponent": 1.5, "cutoff": 2.0 },
///   "quadrature": { "order": 20, "tol": 1e-10 } }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletSpec {
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub a: f64,
    pub convention: Convention,
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Density>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

impl TripletSpec {
    pub fn new(b: f64, a: f64, nu: LevyMeasure, convention: Convention) -> Self {
        Self {
            b,
            a,
            convention,
            atoms: nu.atoms,
            density: nu.density,
            quadrature: nu.quadrature,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ExponentError> {
        serde_json::from_str(text).map_err(|e| ExponentError::Document(e.to_string()))
    }

    pub fn measure(&self) -> LevyMeasure {
        LevyMeasure {
            atoms: self.atoms.clone(),
            density: self.density.clone(),
            quadrature: self.quadrature.clone(),
        }
    }

    pub fn build(&self) -> Result<LevyTriplet, ExponentError> {
        let diag = validate_triplet(self);
        if diag.passed {
            Ok(LevyTriplet {
                b: self.b,
                a: self.a,
                nu: self.measure(),
                convention: self.convention,
            })
        } else if !self.b.is_finite() {
            Err(ExponentError::NonFiniteDrift(self.b))
        } else if !(self.a.is_finite() && self.a >= 0.0) {
            Err(ExponentError::NegativeDiffusion(self.a))
        } else {
            self.measure().validate()?;
            let detail = diag
                .failures()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect::<Vec<_>>()
                .join("; ");
            Err(ExponentError::Inadmissible {
                convention: self.convention,
                detail,
            })
        }
    }
}

fn moment_check(nu: &LevyMeasure, kind: MomentKind, name: &str) -> Check {
    match real_moment(nu, kind) {
        Ok(i) => Check {
            name: name.to_string(),
            passed: true,
            value: Some(i.value.re),
            detail: format!("{kind} = {:.6e} (error estimate {:.1e})", i.value.re, i.error),
        },
        Err(e) => Check {
            name: name.to_string(),
            passed: false,
            value: None,
            detail: format!("{kind} diverges: {e}"),
        },
    }
}

/// Integrability conditions required by the triplet's convention, each reported
/// with the computed moment. The verdict is the conjunction.
pub fn validate_triplet(spec: &TripletSpec) -> Diagnostics {
    let mut checks = vec![
        Check {
            name: "drift".into(),
            passed: spec.b.is_finite(),
            value: Some(spec.b),
            detail: "b must be finite".into(),
        },
        Check {
            name: "diffusion".into(),
            passed: spec.a.is_finite() && spec.a >= 0.0,
            value: Some(spec.a),
            detail: "a must be finite and >= 0".into(),
        },
    ];
    let nu = spec.measure();
    let structure = nu.validate();
    checks.push(Check {
        name: "measure".into(),
        passed: structure.is_ok(),
        value: None,
        detail: match &structure {
            Ok(()) => "atoms, density and quadrature settings are well formed".into(),
            Err(e) => e.to_string(),
        },
    });
    if structure.is_ok() {
        checks.push(moment_check(&nu, MomentKind::Min1P2, "levy_integrability"));
        match spec.convention {
            Convention::DeFinetti => {
                checks.push(moment_check(&nu, MomentKind::TotalMass, "finite_total_mass"))
            }
            Convention::Kolmogorov => {
                checks.push(moment_check(&nu, MomentKind::AbsTail, "first_moment_at_infinity"))
            }
            Convention::Levy => {}
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Diagnostics {
        convention: spec.convention,
        checks,
        passed,
    }
}

/// A validated triplet. Construct through [`LevyTriplet::new`] or [`TripletSpec::build`].
#[derive(Debug, Clone, PartialEq)]
pub struct LevyTriplet {
    b: f64,
    a: f64,
    nu: LevyMeasure,
    convention: Convention,
}

impl LevyTriplet {
    pub fn new(b: f64, a: f64, nu: LevyMeasure, convention: Convention) -> Result<Self, ExponentError> {
        TripletSpec::new(b, a, nu, convention).build()
    }

    /// Pure Gaussian with drift: `f(t) = ibt − at²/2`.
    pub fn gaussian(b: f64, a: f64) -> Result<Self, ExponentError> {
        Self::new(b, a, LevyMeasure::empty(), Convention::Levy)
    }

    pub fn drift(&self) -> f64 {
        self.b
    }

    pub fn diffusion(&self) -> f64 {
        self.a
    }

    pub fn measure(&self) -> &LevyMeasure {
        &self.nu
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn with_drift(&self, b: f64) -> Self {
        Self { b, ..self.clone() }
    }

    pub fn to_spec(&self) -> TripletSpec {
        TripletSpec::new(self.b, self.a, self.nu.clone(), self.convention)
    }

    pub fn diagnostics(&self) -> Diagnostics {
        validate_triplet(&self.to_spec())
    }

    /// `f(t)`; see [`eval_exponent`].
    pub fn exponent(&self, t: f64) -> Result<Complex64, ExponentError> {
        eval_exponent(self, t)
    }

    /// `F(t) = exp f(t)`.
    pub fn char_fn(&self, t: f64) -> Result<Complex64, ExponentError> {
        char_fn(self, t)
    }

    /// `f` on a list of points, evaluated in parallel.
    pub fn exponent_grid(&self, points: &[f64]) -> Result<CharExponentGrid, ExponentError> {
        let values = points
            .par_iter()
            .map(|&t| eval_exponent(self, t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CharExponentGrid {
            points: points.to_vec(),
            values,
        })
    }
}

/// Exponent values on an ordered list of points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharExponentGrid {
    pub points: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// `∫ M_convention(p, t) dν(p)`.
pub(crate) fn jump_part(nu: &LevyMeasure, convention: Convention, t: f64) -> Result<Complex64, QuadError> {
    if nu.is_empty() || t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let value = move |p: f64| jump_kernel(convention, p, t);
    let smooth = move |p: f64| Complex64::new(-1.0, -t * compensator(convention, p));
    let (zero_order, smooth_order) = match convention {
        Convention::DeFinetti => (1, 0),
        Convention::Kolmogorov => (2, 1),
        Convention::Levy => (2, 0),
    };
    let integrand = JumpIntegrand {
        value: &value,
        zero_order: Some(zero_order),
        waves: vec![(Complex64::new(1.0, 0.0), t)],
        smooth: &smooth,
        smooth_order: Some(smooth_order),
        breaks: vec![],
    };
    Ok(nu.integrate(&integrand)?.value)
}

/// `f(t) = ibt − at²/2 + ∫ M(p, t) dν(p)`; exactly zero at `t = 0`, and no
/// quadrature at all when ν is empty.
pub fn eval_exponent(trip: &LevyTriplet, t: f64) -> Result<Complex64, ExponentError> {
    if t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let gauss = Complex64::new(-0.5 * trip.a * t * t, trip.b * t);
    Ok(gauss + jump_part(&trip.nu, trip.convention, t)?)
}

pub fn char_fn(trip: &LevyTriplet, t: f64) -> Result<Complex64, ExponentError> {
    Ok(eval_exponent(trip, t)?.exp())
}

/// Drift of the same law under another convention; `a` and ν are unchanged.
pub fn convert(trip: &LevyTriplet, target: Convention) -> Result<LevyTriplet, ExponentError> {
    use Convention::*;
    if target == trip.convention {
        return Ok(trip.clone());
    }
    let spec = TripletSpec {
        convention: target,
        ..trip.to_spec()
    };
    let diag = validate_triplet(&spec);
    if !diag.passed {
        let detail = diag
            .failures()
            .map(|c| c.detail.clone())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(ExponentError::Inadmissible {
            convention: target,
            detail,
        });
    }
    let m = |kind| levy_measure_moments(&trip.nu, kind);
    // b_to = b_from + ∫ (c_to − c_from) dν
    let shift = match (trip.convention, target) {
        (DeFinetti, Levy) => m(MomentKind::POver1P2)?,
        (Levy, DeFinetti) => -m(MomentKind::POver1P2)?,
        (Kolmogorov, Levy) => -m(MomentKind::P3Over1P2)?,
        (Levy, Kolmogorov) => m(MomentKind::P3Over1P2)?,
        (DeFinetti, Kolmogorov) => m(MomentKind::POver1P2)? + m(MomentKind::P3Over1P2)?,
        (Kolmogorov, DeFinetti) => -m(MomentKind::POver1P2)? - m(MomentKind::P3Over1P2)?,
        _ => unreachable!("identical conventions handled above"),
    };
    Ok(LevyTriplet {
        b: trip.b + shift,
        convention: target,
        ..trip.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn atom(p: f64, w: f64, c: Convention) -> LevyTriplet {
        LevyTriplet::new(0.0, 0.0, LevyMeasure::from_atoms([(p, w)]), c).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn moments_of_simple_measures() {
        let nu = LevyMeasure::from_atoms([(1.0, 2.0)]);
        assert_eq!(levy_measure_moments(&nu, MomentKind::P3Over1P2).unwrap(), 1.0);
        for kind in [MomentKind::TotalMass, MomentKind::Min1P2, MomentKind::TruncVar(0.5)] {
            assert_eq!(levy_measure_moments(&LevyMeasure::empty(), kind).unwrap(), 0.0);
        }
    }

    #[test]
    fn uniform_density_moment_matches_trapezoid_oracle() {
        // oracle: trapezoid rule with 10^6 panels on ∫_1^2 p/(1+p²) dp
        let n = 1_000_000;
        let h = 1.0 / n as f64;
        let g = |p: f64| p / (1.0 + p * p);
        let mut trap = 0.5 * (g(1.0) + g(2.0));
        for i in 1..n {
            trap += g(1.0 + i as f64 * h);
        }
        trap *= h;
        let closed = 0.5 * (5.0f64 / 2.0).ln();
        assert!((trap - closed).abs() < 1e-11);

        let nu = LevyMeasure::empty().with_density(Density::Uniform { lo: 1.0, hi: 2.0, height: 1.0 });
        let v = levy_measure_moments(&nu, MomentKind::POver1P2).unwrap();
        assert!((v - closed).abs() < 1e-10, "{v} vs {closed}");
        assert!((v - 0.4581).abs() < 1e-4);
    }

    #[test]
    fn total_mass_of_infinite_activity_density_diverges() {
        let nu = LevyMeasure::empty().with_density(Density::Power {
            exponent: 1.5,
            cutoff: Some(2.0),
            inner: 0.0,
            scale: 1.0,
            sides: crate::measure::Sides::Both,
        });
        assert!(matches!(
            levy_measure_moments(&nu, MomentKind::TotalMass),
            Err(ExponentError::DivergentMoment { .. })
        ));
        assert!(levy_measure_moments(&nu, MomentKind::Min1P2).is_ok());
    }

    #[test]
    fn moment_kind_parsing() {
        assert_eq!("trunc_var(0.25)".parse::<MomentKind>().unwrap(), MomentKind::TruncVar(0.25));
        assert!(matches!("p_squared".parse::<MomentKind>(), Err(ExponentError::InvalidKind(_))));
        assert!("trunc_var(-1)".parse::<MomentKind>().is_err());
    }

    #[test]
    fn exponent_examples() {
        let empty = LevyTriplet::gaussian(0.0, 0.0).unwrap();
        assert_eq!(eval_exponent(&empty, 7.3).unwrap(), Complex64::new(0.0, 0.0));
        let g = LevyTriplet::gaussian(0.0, 1.0).unwrap();
        assert_eq!(eval_exponent(&g, 1.0).unwrap(), Complex64::new(-0.5, 0.0));

        let df = atom(1.0, 1.0, Convention::DeFinetti);
        assert!(close(eval_exponent(&df, PI).unwrap(), Complex64::new(-2.0, 0.0), 1e-15));
        let levy = atom(1.0, 1.0, Convention::Levy);
        assert!(close(eval_exponent(&levy, PI).unwrap(), Complex64::new(-2.0, -PI / 2.0), 1e-15));
    }

    #[test]
    fn char_fn_examples() {
        let g = LevyTriplet::gaussian(0.0, 1.0).unwrap();
        assert_eq!(char_fn(&g, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        assert!((char_fn(&g, 1.0).unwrap().re - (-0.5f64).exp()).abs() < 1e-15);
        let df = atom(1.0, 1.0, Convention::DeFinetti);
        assert!(close(char_fn(&df, 2.0 * PI).unwrap(), Complex64::new(1.0, 0.0), 1e-14));
    }

    #[test]
    fn conversion_examples() {
        let k = atom(1.0, 1.0, Convention::Kolmogorov);
        assert_eq!(convert(&k, Convention::Levy).unwrap().drift(), -0.5);

        let sym = LevyTriplet::new(
            0.0,
            0.0,
            LevyMeasure::from_atoms([(1.0, 1.0), (-1.0, 1.0)]),
            Convention::Kolmogorov,
        )
        .unwrap();
        assert_eq!(convert(&sym, Convention::Levy).unwrap().drift(), 0.0);

        let df = LevyTriplet::new(1.0, 0.0, LevyMeasure::from_atoms([(2.0, 3.0)]), Convention::DeFinetti)
            .unwrap();
        assert!((convert(&df, Convention::Levy).unwrap().drift() - 2.2).abs() < 1e-15);
    }

    #[test]
    fn levy_to_de_finetti_needs_finite_mass() {
        let spec = TripletSpec {
            b: 0.0,
            a: 0.0,
            convention: Convention::Levy,
            atoms: vec![],
            density: Some(Density::Power {
                exponent: 1.5,
                cutoff: Some(1.0),
                inner: 0.0,
                scale: 1.0,
                sides: crate::measure::Sides::Both,
            }),
            quadrature: QuadratureSpec::default(),
        };
        let trip = spec.build().unwrap();
        assert!(matches!(
            convert(&trip, Convention::DeFinetti),
            Err(ExponentError::Inadmissible { .. })
        ));
        assert!(convert(&trip, Convention::Kolmogorov).is_ok());
    }

    #[test]
    fn validation_examples() {
        for c in Convention::ALL {
            let spec = TripletSpec::new(0.3, 0.2, LevyMeasure::empty(), c);
            assert!(validate_triplet(&spec).passed);
        }
        let tail = Density::Power {
            exponent: 2.0,
            cutoff: None,
            inner: 1.0,
            scale: 1.0,
            sides: crate::measure::Sides::Positive,
        };
        let mut spec = TripletSpec::new(0.0, 0.0, LevyMeasure::empty().with_density(tail), Convention::Kolmogorov);
        let diag = validate_triplet(&spec);
        assert!(!diag.passed);
        let failed: Vec<_> = diag.failures().map(|c| c.name.as_str()).collect();
        assert_eq!(failed, ["first_moment_at_infinity"]);

        spec.convention = Convention::Levy;
        let diag = validate_triplet(&spec);
        assert!(diag.passed);
        let levy = diag.checks.iter().find(|c| c.name == "levy_integrability").unwrap();
        assert!((levy.value.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn untruncated_tail_exponent_is_hermitian_and_dissipative() {
        let tail = Density::Power {
            exponent: 2.0,
            cutoff: None,
            inner: 1.0,
            scale: 1.0,
            sides: crate::measure::Sides::Positive,
        };
        let trip = LevyTriplet::new(0.0, 0.0, LevyMeasure::empty().with_density(tail), Convention::Levy)
            .unwrap();
        for t in [0.3, 1.0, 2.5] {
            let f = eval_exponent(&trip, t).unwrap();
            let g = eval_exponent(&trip, -t).unwrap();
            assert!((f - g.conj()).norm() < 1e-9, "t={t}: {f} vs {g}");
            assert!(f.re <= 0.0);
        }
    }

    #[test]
    fn stable_integrands_near_zero() {
        let x = 1e-9;
        assert!((cis_m1_mix(x).im + x * x * x / 6.0).abs() < 1e-40);
        assert!((cis_m1(x).re + x * x / 2.0).abs() < 1e-30);
        for x in [0.05, 0.099, 0.1, 0.5] {
            let direct = Complex64::new(0.0, x).exp() - 1.0 - Complex64::new(0.0, x);
            assert!((cis_m1_mix(x) - direct).norm() < 1e-15);
        }
    }

    #[test]
    fn document_round_trip_and_unknown_keys() {
        let text = r#"{"b":0.5,"a":1.0,"convention":"kolmogorov","atoms":[[1.0,2.0]],
            "density":{"family":"gaussian_l2","scale":0.5}}"#;
        let spec = TripletSpec::from_json(text).unwrap();
        assert_eq!(spec.atoms, vec![Atom { p: 1.0, w: 2.0 }]);
        let back = TripletSpec::from_json(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        assert!(TripletSpec::from_json(r#"{"convention":"levy","sigma":1}"#).is_err());
        assert!(TripletSpec::from_json(r#"{"convention":"levy","quadrature":{"nodes":3}}"#).is_err());
    }
}
