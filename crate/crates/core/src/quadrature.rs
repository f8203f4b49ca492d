//! Quadrature on [-1, 1].
//!
//! Two rules are provided. The default is an adaptive composite Gauss–Kronrod
//! (7/15) scheme that bisects the interval with the largest local error until
//! the summed error estimate meets the absolute tolerance. The second is the
//! Gauss–Jacobi rule with weight (1 - x)^(-1/2) (1 + x)^(-1/2), whose nodes and
//! weights are known in closed form (Chebyshev nodes, equal weights). It is
//! used for integrands with inverse-square-root endpoint singularities such as
//! f^(-1/2) on profiles with simple zeros at ±1.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureRule {
    #[serde(rename = "adaptive-composite-Gauss")]
    AdaptiveGauss,
    #[serde(rename = "Gauss-Jacobi-endpoint-weighted")]
    GaussJacobiEndpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rule: QuadratureRule,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::AdaptiveGauss,
            abs_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::invalid("abs_tol", "must be a positive finite number"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::invalid("max_subdivisions", "must be at least 1"));
        }
        Ok(())
    }

    /// Node budget for the endpoint-weighted rule, matched to the adaptive
    /// rule's evaluation budget.
    fn max_nodes(&self) -> usize {
        (15 * self.max_subdivisions).max(32)
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate and |Kronrod - Gauss| on [a, b].
fn gk15<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = g(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = r * XGK[i];
        let s = g(c - dx) + g(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * r, ((kron - gauss) * r).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive Gauss–Kronrod integration of `g` over [a, b].
pub fn adaptive_gauss<F: Fn(f64) -> f64>(
    g: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<f64> {
    let (value, error) = gk15(&g, a, b);
    let mut total = value;
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });

    loop {
        if !total.is_finite() {
            return Err(Error::Accuracy {
                estimate: total,
                error: f64::INFINITY,
            });
        }
        // Below this the estimate is dominated by rounding in the sum itself.
        let floor = 50.0 * f64::EPSILON * total.abs();
        if total_err <= abs_tol.max(floor) {
            return Ok(total);
        }
        if heap.len() >= max_subdivisions {
            return Err(Error::Accuracy {
                estimate: total,
                error: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            return Err(Error::Accuracy {
                estimate: total,
                error: total_err,
            });
        }
        let (v1, e1) = gk15(&g, worst.a, mid);
        let (v2, e2) = gk15(&g, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        // Resum occasionally to stop drift in the running totals.
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// n-point midpoint sum in the angle variable; `node` takes t with x = cos t.
fn chebyshev_sum<F: Fn(f64) -> f64>(node: &F, n: usize) -> f64 {
    let step = PI / n as f64;
    let sum: f64 = (0..n).map(|i| node((i as f64 + 0.5) * step)).sum();
    sum * step
}

/// Integral of h(x) / sqrt(1 - x^2) over [-1, 1] by n-point Gauss–Chebyshev,
/// doubling n until two successive estimates agree within `abs_tol`.
pub fn gauss_chebyshev<F: Fn(f64) -> f64>(h: F, abs_tol: f64, max_nodes: usize) -> Result<f64> {
    let node = |t: f64| h(t.cos());
    let mut n = 16;
    let mut prev = chebyshev_sum(&node, n);
    loop {
        n *= 2;
        let next = chebyshev_sum(&node, n);
        let diff = (next - prev).abs();
        if !next.is_finite() {
            return Err(Error::Accuracy {
                estimate: next,
                error: f64::INFINITY,
            });
        }
        if diff <= abs_tol.max(50.0 * f64::EPSILON * next.abs()) {
            return Ok(next);
        }
        if 2 * n > max_nodes {
            return Err(Error::Accuracy {
                estimate: next,
                error: diff,
            });
        }
        prev = next;
    }
}

/// Integrates `g` over [-1, 1] with the configured rule.
///
/// With the endpoint-weighted rule the Jacobi weight is divided out, i.e. the
/// rule is applied to g(x) sqrt(1 - x^2).
pub fn integrate<F: Fn(f64) -> f64>(g: F, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    match cfg.rule {
        QuadratureRule::AdaptiveGauss => {
            adaptive_gauss(g, -1.0, 1.0, cfg.abs_tol, cfg.max_subdivisions)
        }
        QuadratureRule::GaussJacobiEndpoint => gauss_chebyshev(
            |x| g(x) * ((1.0 - x) * (1.0 + x)).sqrt(),
            cfg.abs_tol,
            cfg.max_nodes(),
        ),
    }
}

/// Integral of h(x) / sqrt(1 - x^2) over [-1, 1]; always endpoint-weighted.
pub fn integrate_inv_sqrt<F: Fn(f64) -> f64>(h: F, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    gauss_chebyshev(h, cfg.abs_tol, cfg.max_nodes())
}
