//! Adaptive Gauss-Legendre quadrature for complex integrands on finite intervals.
//!
//! The driver is global: every leaf interval carries the difference between its
//! one-panel and two-panel estimates, and the leaf with the largest difference is
//! bisected until the summed estimate falls below `abs_tol + rel_tol * |value|`.
//! Divergent integrands show up as a leaf that keeps demanding refinement past
//! `max_depth`, or as an exhausted evaluation budget.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge after {evals} evaluations (value {value}, error estimate {error:e})")]
    NoConvergence {
        value: Complex64,
        error: f64,
        evals: usize,
    },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

/// Fixed n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, refined by Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// One panel on [a, b].
    pub fn integrate<F>(&self, f: &F, a: f64, b: f64) -> Result<Complex64, QuadError>
    where
        F: Fn(f64) -> Complex64 + ?Sized,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let xi = mid + half * x;
            let v = f(xi);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(QuadError::NonFinite { x: xi });
            }
            acc += v * *w;
        }
        Ok(acc * half)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOutcome {
    pub value: Complex64,
    pub error: f64,
    pub evals: usize,
}

#[derive(Debug, Clone)]
pub struct Adaptive {
    rule: GaussLegendre,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
    pub max_depth: u32,
}

struct Leaf {
    a: f64,
    b: f64,
    depth: u32,
    left: Complex64,
    right: Complex64,
    error: f64,
}

impl PartialEq for Leaf {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Leaf {}
impl PartialOrd for Leaf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Leaf {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

impl Adaptive {
    pub fn new(order: usize, abs_tol: f64, rel_tol: f64, max_evals: usize) -> Self {
        Self {
            rule: GaussLegendre::new(order),
            abs_tol,
            rel_tol,
            max_evals,
            max_depth: 64,
        }
    }

    pub fn order(&self) -> usize {
        self.rule.len()
    }

    fn leaf<F>(&self, f: &F, a: f64, b: f64, whole: Complex64, depth: u32) -> Result<Leaf, QuadError>
    where
        F: Fn(f64) -> Complex64 + ?Sized,
    {
        let m = 0.5 * (a + b);
        let left = self.rule.integrate(f, a, m)?;
        let right = self.rule.integrate(f, m, b)?;
        let error = (whole - left - right).norm();
        Ok(Leaf {
            a,
            b,
            depth,
            left,
            right,
            error,
        })
    }

    pub fn integrate<F>(&self, f: &F, a: f64, b: f64) -> Result<QuadOutcome, QuadError>
    where
        F: Fn(f64) -> Complex64 + ?Sized,
    {
        if a == b {
            return Ok(QuadOutcome {
                value: Complex64::new(0.0, 0.0),
                error: 0.0,
                evals: 0,
            });
        }
        let n = self.rule.len();
        let whole = self.rule.integrate(f, a, b)?;
        let first = self.leaf(f, a, b, whole, 0)?;
        let mut evals = 3 * n;
        let mut value = first.left + first.right;
        let mut error = first.error;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        while error > self.abs_tol + self.rel_tol * value.norm() {
            let worst = heap.pop().expect("heap never empties");
            let m = 0.5 * (worst.a + worst.b);
            let exhausted = evals + 4 * n > self.max_evals;
            let too_deep = worst.depth >= self.max_depth || m <= worst.a || m >= worst.b;
            if exhausted || too_deep {
                return Err(QuadError::NoConvergence { value, error, evals });
            }
            let lo = self.leaf(f, worst.a, m, worst.left, worst.depth + 1)?;
            let hi = self.leaf(f, m, worst.b, worst.right, worst.depth + 1)?;
            evals += 4 * n;
            value += lo.left + lo.right + hi.left + hi.right - worst.left - worst.right;
            error += lo.error + hi.error - worst.error;
            heap.push(lo);
            heap.push(hi);
        }
        // resum to shed the drift of the running totals
        let (value, error) = heap.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), l| {
            (v + l.left + l.right, e + l.error)
        });
        Ok(QuadOutcome { value, error, evals })
    }
}
