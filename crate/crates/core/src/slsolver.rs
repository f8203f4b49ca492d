//! Fourier-mode eigenproblems.
//!
//! Separating e^{ikθ} from the Laplacian leaves, for each mode k, the singular
//! Sturm–Liouville operator
//!
//! ```text
//! L_k u = -(f u')' + k² u / f   on (-1, 1)
//! ```
//!
//! Modes k ≥ 1 carry Dirichlet data at ±1. For k = 0 no boundary condition is
//! imposed: f(±1) = 0 kills the boundary flux, constants are eigenfunctions and
//! the lowest eigenvalue is 0.
//!
//! The operator is discretized in flux form on a uniform grid: f at cell faces
//! (midpoints), k²/f at nodes. Modes k ≥ 1 use interior nodes only; k = 0 keeps
//! the endpoint nodes with half-cell mass. After the diagonal mass is scaled
//! out the matrix is symmetric tridiagonal and its lowest eigenvalues come from
//! Sturm-sequence bisection. Eigenvalues are refined by grid doubling with a
//! Richardson tableau; the tableau's last correction is the error estimate.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{self, MetricProfile};
use crate::quadrature::QuadratureConfig;
use crate::tridiag::{self, SymTridiagonal};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub n_initial: usize,
    pub n_max: usize,
    pub rel_tol: f64,
    pub use_richardson: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_initial: 256,
            n_max: 65536,
            rel_tol: 1e-6,
            use_richardson: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_initial < 3 {
            return Err(Error::invalid("n_initial", "must be at least 3"));
        }
        if self.n_max < self.n_initial {
            return Err(Error::invalid("n_max", "must be at least n_initial"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::invalid("rel_tol", "must be a positive finite number"));
        }
        Ok(())
    }

    /// Whether `error` meets the relative target for `value`.
    pub fn accepts(&self, value: f64, error: f64) -> bool {
        error <= self.rel_tol * value.abs().max(1.0)
    }
}

/// The lowest eigenvalues of one mode operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SLSpectrumSlice {
    pub k: u32,
    pub eigenvalues: Vec<f64>,
    pub error_estimates: Vec<f64>,
    pub grid_used: usize,
    /// False when `n_max` was reached before every estimate met `rel_tol`.
    pub converged: bool,
}

impl SLSpectrumSlice {
    pub fn max_error(&self) -> f64 {
        self.error_estimates.iter().cloned().fold(0.0, f64::max)
    }
}

/// Discrete L_k on a uniform grid of `n` cells.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    pub k: u32,
    pub n: usize,
    pub nodes: Vec<f64>,
    /// Diagonal mass (cell widths).
    pub mass: Vec<f64>,
    /// M^{-1/2} K M^{-1/2}
    pub matrix: SymTridiagonal,
}

impl ModeOperator {
    pub fn new(p: &MetricProfile, k: u32, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("grid", "need at least 3 cells"));
        }
        let h = 2.0 / n as f64;
        let face: Vec<f64> = (0..n).map(|i| p.f(-1.0 + (i as f64 + 0.5) * h)).collect();
        let (first, last) = if k == 0 { (0, n) } else { (1, n - 1) };
        let size = last - first + 1;
        let mut nodes = Vec::with_capacity(size);
        let mut mass = Vec::with_capacity(size);
        let mut stiff = Vec::with_capacity(size);
        let k2 = (k as f64) * (k as f64);
        for i in first..=last {
            let x = if i == n { 1.0 } else { -1.0 + i as f64 * h };
            let left = if i > 0 { face[i - 1] } else { 0.0 };
            let right = if i < n { face[i] } else { 0.0 };
            let w = if i == 0 || i == n { 0.5 * h } else { h };
            let mut kii = (left + right) / h;
            if k > 0 {
                let fx = p.f(x);
                if !(fx > 0.0 && fx.is_finite()) {
                    return Err(Error::Domain(format!(
                        "profile is not positive at x = {x} (f = {fx})"
                    )));
                }
                kii += w * k2 / fx;
            }
            nodes.push(x);
            mass.push(w);
            stiff.push(kii);
        }
        let diag: Vec<f64> = stiff.iter().zip(&mass).map(|(s, m)| s / m).collect();
        let off: Vec<f64> = (0..size - 1)
            .map(|r| {
                let i = first + r;
                -face[i] / h / (mass[r] * mass[r + 1]).sqrt()
            })
            .collect();
        Ok(Self {
            k,
            n,
            nodes,
            mass,
            matrix: SymTridiagonal::new(diag, off),
        })
    }

    pub fn lowest(&self, count: usize) -> Vec<f64> {
        tridiag::lowest_eigenvalues(&self.matrix, count)
    }

    /// Applies the unsymmetrized operator M^{-1} K to nodal values.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let s: Vec<f64> = self.mass.iter().map(|m| m.sqrt()).collect();
        let v: Vec<f64> = u.iter().zip(&s).map(|(a, b)| a * b).collect();
        let w = self.matrix.apply(&v);
        w.iter().zip(&s).map(|(a, b)| a / b).collect()
    }

    /// Solves M^{-1} K y = r.
    pub fn solve(&self, r: &[f64]) -> Vec<f64> {
        let s: Vec<f64> = self.mass.iter().map(|m| m.sqrt()).collect();
        let v: Vec<f64> = r.iter().zip(&s).map(|(a, b)| a * b).collect();
        let w = tridiag::shifted_solve(&self.matrix, 0.0, &v);
        w.iter().zip(&s).map(|(a, b)| a / b).collect()
    }
}

/// Exponents of the leading error terms. The k = 1 eigenfunctions behave like
/// sqrt(1 ∓ x) at the poles, which drops the scheme to first order.
fn error_exponents(k: u32) -> [f64; 3] {
    if k == 1 {
        [1.0, 2.0, 3.0]
    } else {
        [2.0, 3.0, 4.0]
    }
}

/// Richardson tableau over grid-doubled values (coarsest first).
/// Returns (best value, error estimate).
pub(crate) fn extrapolate(levels: &[f64], exponents: &[f64]) -> (f64, f64) {
    let mut column = levels.to_vec();
    let depth = (levels.len() - 1).min(exponents.len());
    if depth == 0 {
        return (levels[0], f64::INFINITY);
    }
    let mut prev_best = *column.last().unwrap();
    for &p in &exponents[..depth] {
        prev_best = *column.last().unwrap();
        let factor = 2f64.powf(p) - 1.0;
        column = column
            .windows(2)
            .map(|w| w[1] + (w[1] - w[0]) / factor)
            .collect();
    }
    let best = *column.last().unwrap();
    (best, (best - prev_best).abs())
}

fn unextrapolated(levels: &[f64], exponent: f64) -> (f64, f64) {
    let last = *levels.last().unwrap();
    match levels.len() {
        1 => (last, f64::INFINITY),
        n => (last, (last - levels[n - 2]).abs() / (2f64.powf(exponent) - 1.0)),
    }
}

fn starting_grid(count: usize, cfg: &SolverConfig) -> usize {
    let mut n = cfg.n_initial;
    while n < 4 * count + 4 && 2 * n <= cfg.n_max {
        n *= 2;
    }
    n
}

/// The lowest `count` eigenvalues of L_k. Negative k is folded to |k|.
pub fn eigenvalues(p: &MetricProfile, k: i64, count: usize, cfg: &SolverConfig) -> Result<SLSpectrumSlice> {
    refine(p, k, count, cfg, |values, errors| {
        values.iter().zip(errors).all(|(v, e)| cfg.accepts(*v, *e))
    })
}

/// Grid-doubling driver: stops once `done(values, errors)` holds (after at
/// least three grids) or the next grid would exceed `n_max`.
fn refine<F>(p: &MetricProfile, k: i64, count: usize, cfg: &SolverConfig, done: F) -> Result<SLSpectrumSlice>
where
    F: Fn(&[f64], &[f64]) -> bool,
{
    cfg.validate()?;
    if count == 0 {
        return Err(Error::invalid("count", "must be at least 1"));
    }
    let k = u32::try_from(k.unsigned_abs()).map_err(|_| Error::invalid("k", "too large"))?;
    let exps = error_exponents(k);

    let mut n = starting_grid(count, cfg);
    let mut history: Vec<Vec<f64>> = Vec::new();
    loop {
        let op = ModeOperator::new(p, k, n)?;
        if op.matrix.len() < count {
            return Err(Error::invalid(
                "count",
                format!("{count} eigenvalues requested but the grid has {} unknowns", op.matrix.len()),
            ));
        }
        history.push(op.lowest(count));

        let mut values = Vec::with_capacity(count);
        let mut errors = Vec::with_capacity(count);
        for j in 0..count {
            let levels: Vec<f64> = history.iter().map(|h| h[j]).collect();
            let (v, e) = if cfg.use_richardson {
                extrapolate(&levels, &exps)
            } else {
                unextrapolated(&levels, exps[0])
            };
            values.push(v);
            errors.push(e);
        }
        let converged = history.len() >= 3 && done(&values, &errors);
        if converged || 2 * n > cfg.n_max {
            return Ok(SLSpectrumSlice {
                k,
                eigenvalues: values,
                error_estimates: errors,
                grid_used: n,
                converged,
            });
        }
        n *= 2;
    }
}

/// Every eigenvalue of L_k up to `ceiling`, plus the first one above it.
pub fn eigenvalues_below(p: &MetricProfile, k: u32, ceiling: f64, cfg: &SolverConfig) -> Result<SLSpectrumSlice> {
    cfg.validate()?;
    let coarse = ModeOperator::new(p, k, cfg.n_initial)?;
    let off_sq: Vec<f64> = coarse.matrix.off.iter().map(|e| e * e).collect();
    let guess = tridiag::sturm_count(&coarse.matrix.diag, &off_sq, 1.1 * ceiling + 1.0, f64::MIN_POSITIVE);
    let mut count = guess + 1;
    loop {
        let slice = eigenvalues(p, k as i64, count, cfg)?;
        if *slice.eigenvalues.last().unwrap() > ceiling {
            return Ok(slice);
        }
        count *= 2;
    }
}

pub fn first_eigenvalue(p: &MetricProfile, k: i64, cfg: &SolverConfig) -> Result<f64> {
    Ok(eigenvalues(p, k, 1, cfg)?.eigenvalues[0])
}

/// Partial sum of 1/λ_k^j against the exact total 1/|k|.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub k: u32,
    pub terms_used: usize,
    pub partial_sum: f64,
    pub tail_estimate: f64,
    pub target: f64,
    pub deviation: f64,
}

/// Sums 1/λ_k^j for j ≤ `terms` and estimates the remainder from the Weyl
/// asymptotics λ_k^j ≈ (πj/T)², T = ∫ f^{-1/2} dx, giving tail ≈ (T/π)²/J.
pub fn trace_check(p: &MetricProfile, k: i64, terms: usize, cfg: &SolverConfig) -> Result<TraceReport> {
    if k == 0 {
        return Err(Error::Domain(
            "the trace identity holds only for k != 0".to_string(),
        ));
    }
    if terms == 0 {
        return Err(Error::invalid("terms", "must be at least 1"));
    }
    // Refine until the partial sum, not each term, meets rel_tol.
    let slice = refine(p, k, terms, cfg, |values, errors| {
        let sum: f64 = values.iter().map(|v| 1.0 / v).sum();
        let err: f64 = values.iter().zip(errors).map(|(v, e)| e / (v * v)).sum();
        err <= cfg.rel_tol * sum
    })?;
    let partial_sum: f64 = slice.eigenvalues.iter().map(|v| 1.0 / v).sum();
    let length = profile::meridian_length(p, &QuadratureConfig::default())?;
    let tail_estimate = (length / PI).powi(2) / terms as f64;
    let target = 1.0 / slice.k as f64;
    Ok(TraceReport {
        k: slice.k,
        terms_used: terms,
        partial_sum,
        tail_estimate,
        target,
        deviation: (partial_sum + tail_estimate - target).abs(),
    })
}

/// Nodal samples of one eigenfunction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenfunction {
    pub k: u32,
    pub j: usize,
    pub eigenvalue: f64,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

/// The j-th eigenfunction (j ≥ 1) of L_k on the grid where its eigenvalue
/// converged. Unit discrete L² norm (Σ w_i u_i² = 1 with cell widths w_i);
/// the first non-negligible sample from the left is positive.
pub fn eigenfunction(p: &MetricProfile, k: i64, j: usize, cfg: &SolverConfig) -> Result<Eigenfunction> {
    if j == 0 {
        return Err(Error::invalid("j", "eigenfunction index starts at 1"));
    }
    let slice = eigenvalues(p, k, j, cfg)?;
    let op = ModeOperator::new(p, slice.k, slice.grid_used)?;
    let raw = op.lowest(j)[j - 1];
    let v = tridiag::inverse_iteration(&op.matrix, raw);
    let mut values: Vec<f64> = v.iter().zip(&op.mass).map(|(a, m)| a / m.sqrt()).collect();
    let peak = values.iter().fold(0.0f64, |acc, u| acc.max(u.abs()));
    if let Some(first) = values.iter().find(|u| u.abs() > 1e-8 * peak) {
        if *first < 0.0 {
            values.iter_mut().for_each(|u| *u = -*u);
        }
    }
    Ok(Eigenfunction {
        k: slice.k,
        j,
        eigenvalue: slice.eigenvalues[j - 1],
        x: op.nodes,
        values,
    })
}

/// Solves several modes concurrently; output ordered as `modes`.
pub fn solve_modes(
    p: &MetricProfile,
    modes: &[u32],
    count: usize,
    cfg: &SolverConfig,
) -> Result<Vec<SLSpectrumSlice>> {
    modes
        .par_iter()
        .map(|&k| eigenvalues(p, k as i64, count, cfg))
        .collect()
}
