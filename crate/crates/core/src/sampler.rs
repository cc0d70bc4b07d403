//! Monte-Carlo paths of a Lévy process and empirical characteristic functions.
//!
//! Sampling works in the Levy convention. Over a step `dt` an increment is
//!
//! ```text
//! b_eff·dt + √(a·dt)·N₁ + Σ_atoms p·Poisson(w·dt) + Σ_{i ≤ Poisson(λ_δ·dt)} J_i + √(σ_δ²·dt)·N₂
//! ```
//!
//! where the `J_i` are i.i.d. jumps drawn from the density restricted to
//! `|p| ≥ δ` (total mass `λ_δ`), and jumps below `δ` are replaced by a Gaussian of
//! matching variance `σ_δ² = ∫_{|p|<δ} p² dν`. Matching the exponent
//! `ibt − at²/2 + ∫ (e^{ipt} − 1 − ipt/(1+p²)) dν` then requires
//!
//! ```text
//! b_eff = b − ∫_{sampled} p/(1+p²) dν + ∫_{|p|<δ} p³/(1+p²) dν
//! ```
//!
//! with "sampled" the atoms together with the density on `|p| ≥ δ`. The second
//! term removes the compensator of the jumps drawn as compound Poisson; the third
//! restores the part of the compensator on small jumps that the centred Gaussian
//! does not carry.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`). Path `k` of a run
//! with master seed `s` uses `ChaCha20Rng::seed_from_u64(s)` switched to stream
//! `k`, so every path is reproducible on its own and paths may be drawn in any
//! order or in parallel.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exponent::{convert, levy_measure_moments, Convention, ExponentError, LevyTriplet, MomentKind};
use crate::io::fmt17;
use crate::measure::{Density, JumpIntegrand, LevyMeasure, Sides, GAUSSIAN_SUPPORT_SIGMAS};
use crate::quadrature::{Adaptive, QuadError};

pub const DEFAULT_DELTA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error("sampling integral failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("the density has infinitely many jumps above {delta}; use a positive small-jump threshold")]
    InfiniteActivity { delta: f64 },
    #[error("small-jump threshold must be finite and >= 0, got {0}")]
    InvalidDelta(f64),
    #[error("time step must be finite and > 0, got {0}")]
    InvalidStep(f64),
    #[error("no samples")]
    EmptySample,
    #[error("product of F values {product} disagrees with exp of the summed exponents {via_sum}")]
    ProductMismatch { product: Complex64, via_sum: Complex64 },
}

/// One stretch of the big-jump law with its mass.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Segment {
    /// Uniform on `[lo, hi]`.
    Flat { lo: f64, hi: f64 },
    /// `p = sign·q` with `q ∈ [lo, hi]` distributed like `q^-alpha`; `hi` may be ∞.
    Power { sign: f64, lo: f64, hi: f64, alpha: f64 },
    /// Normal with this standard deviation, restricted to `δ ≤ |p| ≤ cut`.
    Normal { sigma: f64, delta: f64, cut: f64 },
}

impl Segment {
    fn draw(&self, rng: &mut ChaCha20Rng) -> f64 {
        match *self {
            Segment::Flat { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Segment::Power { sign, lo, hi, alpha } => {
                let u: f64 = rng.random();
                let q = if (alpha - 1.0).abs() < 1e-12 {
                    lo * (hi / lo).powf(u)
                } else {
                    let e = 1.0 - alpha;
                    let a = lo.powf(e);
                    let b = if hi.is_finite() { hi.powf(e) } else { 0.0 };
                    (a + u * (b - a)).powf(1.0 / e)
                };
                sign * q.clamp(lo, hi)
            }
            Segment::Normal { sigma, delta, cut } => loop {
                let z: f64 = rng.sample(StandardNormal);
                let p = sigma * z;
                if p.abs() >= delta && p.abs() <= cut {
                    break p;
                }
            },
        }
    }
}

/// `scale · ∫_lo^hi q^-alpha dq`.
fn power_mass(scale: f64, lo: f64, hi: f64, alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        return scale * (hi / lo).ln();
    }
    let e = 1.0 - alpha;
    let b = if hi.is_finite() { hi.powf(e) } else { 0.0 };
    scale * (b - lo.powf(e)) / e
}

fn big_jump_segments(d: &Density, delta: f64) -> Result<Vec<(f64, Segment)>, SamplerError> {
    let mut out = Vec::new();
    match *d {
        Density::Uniform { lo, hi, height } => {
            for (a, b) in [(lo.max(delta), hi), (lo, hi.min(-delta))] {
                if b > a {
                    out.push((height * (b - a), Segment::Flat { lo: a, hi: b }));
                }
            }
            if delta == 0.0 {
                out = vec![(height * (hi - lo), Segment::Flat { lo, hi })];
            }
        }
        Density::Power {
            exponent,
            cutoff,
            inner,
            scale,
            sides,
        } => {
            let lo = inner.max(delta);
            let hi = cutoff.unwrap_or(f64::INFINITY);
            if lo == 0.0 && exponent >= 1.0 {
                return Err(SamplerError::InfiniteActivity { delta });
            }
            if hi > lo {
                let signs: &[f64] = match sides {
                    Sides::Both => &[1.0, -1.0],
                    Sides::Positive => &[1.0],
                    Sides::Negative => &[-1.0],
                };
                let mass = power_mass(scale, lo, hi, exponent);
                for &sign in signs {
                    out.push((
                        mass,
                        Segment::Power {
                            sign,
                            lo,
                            hi,
                            alpha: exponent,
                        },
                    ));
                }
            }
        }
        Density::GaussianL2 { scale, .. } => {
            let cut = GAUSSIAN_SUPPORT_SIGMAS * scale;
            if cut > delta {
                let driver = Adaptive::new(20, 1e-15, 1e-13, 100_000);
                let half = driver
                    .integrate(&|p: f64| Complex64::new(d.value(p), 0.0), delta, cut)?
                    .value
                    .re;
                out.push((
                    2.0 * half,
                    Segment::Normal {
                        sigma: scale,
                        delta,
                        cut,
                    },
                ));
            }
        }
    }
    Ok(out)
}

/// `∫ g dν` over the density only, with `g` vanishing on one side of `δ`.
fn density_integral(
    density: &LevyMeasure,
    g: &(dyn Fn(f64) -> Complex64 + Sync),
    zero_order: Option<i32>,
    smooth_order: Option<i32>,
    delta: f64,
) -> Result<f64, SamplerError> {
    let integrand = JumpIntegrand {
        value: g,
        zero_order,
        waves: vec![],
        smooth: g,
        smooth_order,
        breaks: if delta > 0.0 { vec![delta] } else { vec![] },
    };
    Ok(density.integrate(&integrand)?.value.re)
}

/// Everything needed to draw increments of one triplet.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementLaw {
    pub drift: f64,
    pub diffusion: f64,
    pub small_jump_variance: f64,
    pub delta: f64,
    atoms: Vec<(f64, f64)>,
    segments: Vec<(f64, Segment)>,
    big_jump_rate: f64,
}

impl IncrementLaw {
    pub fn new(trip: &LevyTriplet, delta: f64) -> Result<Self, SamplerError> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(SamplerError::InvalidDelta(delta));
        }
        let levy = convert(trip, Convention::Levy)?;
        let nu = levy.measure();
        let mut drift = levy.drift();
        let atoms: Vec<(f64, f64)> = nu.atoms.iter().map(|a| (a.p, a.w)).collect();
        for &(p, w) in &atoms {
            drift -= w * p / (1.0 + p * p);
        }
        let mut segments = Vec::new();
        let mut small_jump_variance = 0.0;
        if let Some(d) = &nu.density {
            segments = big_jump_segments(d, delta)?;
            let dens = LevyMeasure {
                atoms: vec![],
                density: Some(d.clone()),
                quadrature: nu.quadrature.clone(),
            };
            let big = move |p: f64| Complex64::new(if p.abs() >= delta { p / (1.0 + p * p) } else { 0.0 }, 0.0);
            drift -= density_integral(&dens, &big, if delta > 0.0 { None } else { Some(1) }, Some(-1), delta)?;
            if delta > 0.0 {
                let small = move |p: f64| {
                    Complex64::new(if p.abs() < delta { p * p * p / (1.0 + p * p) } else { 0.0 }, 0.0)
                };
                drift += density_integral(&dens, &small, Some(3), None, delta)?;
                small_jump_variance = levy_measure_moments(&dens, MomentKind::TruncVar(delta))?;
            }
        }
        let big_jump_rate = segments.iter().map(|s| s.0).sum();
        Ok(Self {
            drift,
            diffusion: levy.diffusion(),
            small_jump_variance,
            delta,
            atoms,
            segments,
            big_jump_rate,
        })
    }

    /// Total mass of the density jumps drawn as compound Poisson.
    pub fn big_jump_rate(&self) -> f64 {
        self.big_jump_rate
    }

    fn big_jump(&self, rng: &mut ChaCha20Rng) -> f64 {
        let mut u = rng.random::<f64>() * self.big_jump_rate;
        for (mass, seg) in &self.segments {
            if u < *mass {
                return seg.draw(rng);
            }
            u -= mass;
        }
        self.segments.last().expect("rate is positive only with segments").1.draw(rng)
    }

    /// One increment over `dt`; the draws happen in a fixed order.
    pub fn draw(&self, rng: &mut ChaCha20Rng, dt: f64) -> f64 {
        let mut x = self.drift * dt;
        if self.diffusion > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            x += (self.diffusion * dt).sqrt() * z;
        }
        for &(p, w) in &self.atoms {
            x += p * poisson(rng, w * dt);
        }
        if self.big_jump_rate > 0.0 {
            let n = poisson(rng, self.big_jump_rate * dt) as u64;
            for _ in 0..n {
                x += self.big_jump(rng);
            }
        }
        if self.small_jump_variance > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            x += (self.small_jump_variance * dt).sqrt() * z;
        }
        x
    }
}

fn poisson(rng: &mut ChaCha20Rng, rate: f64) -> f64 {
    if rate <= 0.0 {
        return 0.0;
    }
    Poisson::new(rate).expect("positive finite rate").sample(rng)
}

/// The generator for path `index` of a run seeded with `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `count` i.i.d. increments over `dt`, all from stream 0 of `seed`.
pub fn sample_increments(
    trip: &LevyTriplet,
    dt: f64,
    count: usize,
    seed: u64,
    delta: f64,
) -> Result<Vec<f64>, SamplerError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SamplerError::InvalidStep(dt));
    }
    let law = IncrementLaw::new(trip, delta)?;
    let mut rng = path_rng(seed, 0);
    Ok((0..count).map(|_| law.draw(&mut rng, dt)).collect())
}

/// A path on the equally spaced times `0, T/M, …, T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
    pub delta: f64,
}

impl SamplePath {
    /// Columns `t, value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,value")?;
        for (t, x) in self.times.iter().zip(&self.values) {
            writeln!(w, "{},{}", fmt17(*t), fmt17(*x))?;
        }
        Ok(())
    }
}

/// Shape of a batch of paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSpec {
    pub horizon: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    pub delta: f64,
}

impl PathSpec {
    fn dt(&self) -> Result<f64, SamplerError> {
        let dt = self.horizon / self.steps.max(1) as f64;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SamplerError::InvalidStep(dt));
        }
        Ok(dt)
    }
}

fn walk(law: &IncrementLaw, spec: &PathSpec, index: usize, dt: f64, mut visit: impl FnMut(f64)) {
    let mut rng = path_rng(spec.seed, index as u64);
    let mut x = 0.0;
    for _ in 0..spec.steps.max(1) {
        x += law.draw(&mut rng, dt);
        visit(x);
    }
}

pub fn sample_paths(trip: &LevyTriplet, spec: &PathSpec) -> Result<Vec<SamplePath>, SamplerError> {
    let law = IncrementLaw::new(trip, spec.delta)?;
    let dt = spec.dt()?;
    let m = spec.steps.max(1);
    let times: Vec<f64> = (0..=m).map(|k| spec.horizon * k as f64 / m as f64).collect();
    Ok((0..spec.paths)
        .into_par_iter()
        .map(|i| {
            let mut values = Vec::with_capacity(m + 1);
            values.push(0.0);
            walk(&law, spec, i, dt, |x| values.push(x));
            SamplePath {
                times: times.clone(),
                values,
                seed: spec.seed,
                stream: i as u64,
                delta: spec.delta,
            }
        })
        .collect())
}

/// `X(T)` of every path, identical to the last values of [`sample_paths`].
pub fn sample_endpoints(trip: &LevyTriplet, spec: &PathSpec) -> Result<Vec<f64>, SamplerError> {
    let law = IncrementLaw::new(trip, spec.delta)?;
    let dt = spec.dt()?;
    Ok((0..spec.paths)
        .into_par_iter()
        .map(|i| {
            let mut end = 0.0;
            walk(&law, spec, i, dt, |x| end = x);
            end
        })
        .collect())
}

/// Empirical characteristic function with its confidence radius `4/√n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcfReport {
    pub t: Vec<f64>,
    #[serde(serialize_with = "crate::io::complex_pairs")]
    pub values: Vec<Complex64>,
    pub n: usize,
    pub radius: f64,
}

impl EcfReport {
    /// Columns `t, re, im, ci`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,re,im,ci")?;
        for (t, v) in self.t.iter().zip(&self.values) {
            writeln!(w, "{},{},{},{}", fmt17(*t), fmt17(v.re), fmt17(v.im), fmt17(self.radius))?;
        }
        Ok(())
    }
}

/// `(1/n) Σ_k e^{i t X_k}` on each `t`.
pub fn ecf(samples: &[f64], tgrid: &[f64]) -> Result<EcfReport, SamplerError> {
    if samples.is_empty() {
        return Err(SamplerError::EmptySample);
    }
    let n = samples.len();
    let values = tgrid
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                return Complex64::new(1.0, 0.0);
            }
            let (mut re, mut im) = (0.0, 0.0);
            for &x in samples {
                let (s, c) = (t * x).sin_cos();
                re += c;
                im += s;
            }
            Complex64::new(re / n as f64, im / n as f64)
        })
        .collect();
    Ok(EcfReport {
        t: tgrid.to_vec(),
        values,
        n,
        radius: 4.0 / (n as f64).sqrt(),
    })
}

/// `Π_j F(g_j)`, checked against `exp Σ_j f(g_j)`.
pub fn product_charfn(trip: &LevyTriplet, g_list: &[f64]) -> Result<Complex64, SamplerError> {
    let mut product = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for &g in g_list {
        let f = trip.exponent(g)?;
        product *= f.exp();
        sum += f;
    }
    let via_sum = sum.exp();
    if (product - via_sum).norm() > 1e-10 * (1.0 + via_sum.norm()) {
        return Err(SamplerError::ProductMismatch { product, via_sum });
    }
    Ok(product)
}

/// ECF of `X(T)` against the model `exp(T f(t))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcfComparison {
    pub ecf: EcfReport,
    #[serde(serialize_with = "crate::io::complex_pairs")]
    pub model: Vec<Complex64>,
    pub deviation: Vec<f64>,
    pub max_deviation: f64,
    /// Allowed deviation, `radius_mult / √n`.
    pub threshold: f64,
    pub passed: bool,
}

impl EcfComparison {
    /// Columns `t, re, im, ci, model_re, model_im, deviation`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,re,im,ci,model_re,model_im,deviation")?;
        for (k, t) in self.ecf.t.iter().enumerate() {
            let (v, m) = (self.ecf.values[k], self.model[k]);
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt17(*t),
                fmt17(v.re),
                fmt17(v.im),
                fmt17(self.ecf.radius),
                fmt17(m.re),
                fmt17(m.im),
                fmt17(self.deviation[k])
            )?;
        }
        Ok(())
    }
}

/// Samples endpoints and compares their ECF with `exp(T f(t))`.
pub fn ecf_compare(
    trip: &LevyTriplet,
    spec: &PathSpec,
    tgrid: &[f64],
    radius_mult: f64,
) -> Result<EcfComparison, SamplerError> {
    let ends = sample_endpoints(trip, spec)?;
    compare_to_model(trip, spec.horizon, &ends, tgrid, radius_mult)
}

/// Compares the ECF of given samples of `X(T)` with `exp(T f(t))`.
pub fn compare_to_model(
    trip: &LevyTriplet,
    horizon: f64,
    samples: &[f64],
    tgrid: &[f64],
    radius_mult: f64,
) -> Result<EcfComparison, SamplerError> {
    let ecf = ecf(samples, tgrid)?;
    let model = tgrid
        .par_iter()
        .map(|&t| Ok((trip.exponent(t)? * horizon).exp()))
        .collect::<Result<Vec<_>, ExponentError>>()?;
    let deviation: Vec<f64> = ecf.values.iter().zip(&model).map(|(e, m)| (e - m).norm()).collect();
    let max_deviation = deviation.iter().copied().fold(0.0, f64::max);
    let threshold = radius_mult / (ecf.n as f64).sqrt();
    Ok(EcfComparison {
        passed: max_deviation <= threshold,
        ecf,
        model,
        deviation,
        max_deviation,
        threshold,
    })
}

/// ECFs of single increments over `dt` and of sums of two over `dt/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisibilityInLaw {
    pub whole: EcfReport,
    pub halves: EcfReport,
    pub max_deviation: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// The halves use the seed `seed + 1`, so the two samples are independent.
pub fn divisibility_in_law(
    trip: &LevyTriplet,
    dt: f64,
    n: usize,
    seed: u64,
    delta: f64,
    tgrid: &[f64],
    radius_mult: f64,
) -> Result<DivisibilityInLaw, SamplerError> {
    let whole = PathSpec {
        horizon: dt,
        steps: 1,
        paths: n,
        seed,
        delta,
    };
    let halves = PathSpec {
        steps: 2,
        seed: seed.wrapping_add(1),
        ..whole
    };
    let whole = ecf(&sample_endpoints(trip, &whole)?, tgrid)?;
    let halves = ecf(&sample_endpoints(trip, &halves)?, tgrid)?;
    let max_deviation = whole
        .values
        .iter()
        .zip(&halves.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let threshold = radius_mult / (n as f64).sqrt();
    Ok(DivisibilityInLaw {
        whole,
        halves,
        max_deviation,
        threshold,
        passed: max_deviation <= threshold,
    })
}
