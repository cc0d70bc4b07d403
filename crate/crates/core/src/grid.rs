//! Point sets on the real line.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid spec `{0}` is not of the form lo:hi:step")]
    Syntax(String),
    #[error("grid needs finite lo <= hi and step > 0, got lo={lo}, hi={hi}, step={step}")]
    Bounds { lo: f64, hi: f64, step: f64 },
    #[error("grid would have {0} points, more than the limit of {MAX_POINTS}")]
    TooLarge(usize),
}

pub const MAX_POINTS: usize = 1_000_000;

/// `lo, lo + step, …` up to `hi` inclusive (to within a rounding slack).
/// Points are computed as `lo + k·step`, never by accumulation.
pub fn arithmetic(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, GridError> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite() && lo <= hi && step > 0.0) {
        return Err(GridError::Bounds { lo, hi, step });
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if n > MAX_POINTS {
        return Err(GridError::TooLarge(n));
    }
    Ok((0..n).map(|k| snap(lo + k as f64 * step)).collect())
}

/// `n` equally spaced points from `lo` to `hi`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|k| snap(lo + (hi - lo) * k as f64 / (n - 1) as f64))
            .collect(),
    }
}

/// Clears the sign and rounding residue of values that should be exactly zero.
fn snap(x: f64) -> f64 {
    if x.abs() < 1e-13 {
        0.0
    } else {
        x
    }
}

/// Parses `lo:hi:step`.
pub fn parse_spec(spec: &str) -> Result<Vec<f64>, GridError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(GridError::Syntax(spec.to_string()));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| GridError::Syntax(spec.to_string()));
    arithmetic(num(lo)?, num(hi)?, num(step)?)
}

/// Smallest spacing between consecutive points, if there are at least two.
pub fn min_spacing(points: &[f64]) -> Option<f64> {
    points
        .windows(2)
        .map(|w| w[1] - w[0])
        .min_by(f64::total_cmp)
}

/// For an arithmetic grid with spacing `step`, the arithmetic grid that contains
/// every pairwise difference, refined by an integer factor.
pub fn difference_grid(points: &[f64], refine: usize) -> Vec<f64> {
    let (Some(first), Some(last)) = (points.first(), points.last()) else {
        return vec![0.0];
    };
    let span = last - first;
    let step = min_spacing(points).unwrap_or(1.0) / refine.max(1) as f64;
    let k = (span / step).round() as i64;
    (-k..=k).map(|i| snap(i as f64 * step)).collect()
}
