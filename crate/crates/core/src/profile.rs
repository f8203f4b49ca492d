//! Rotationally symmetric metrics on the sphere.
//!
//! In the chart (x, θ) ∈ (-1, 1) × [0, 2π) the metric is
//! `g = dx²/f(x) + f(x) dθ²`, so `det g = 1` and the area element is `dx dθ`.
//! The metric closes smoothly at the poles when f(±1) = 0, f'(-1) = 2 and
//! f'(1) = -2. Gauss curvature is K(x) = -f''(x)/2.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureConfig, QuadratureRule};
use crate::spline::ClampedSpline;

/// Absolute tolerance for the endpoint value and slope conditions.
pub const ENDPOINT_TOL: f64 = 1e-9;

pub const CHART_NOTE: &str =
    "chart (x, theta) in (-1, 1) x [0, 2pi); g = dx^2 / f(x) + f(x) dtheta^2";

/// Grid used to decide whether f'' is bounded.
const CAPABILITY_GRID: usize = 257;

/// A profile definition. Serializes as `{"kind": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfileSpec", into = "RawProfileSpec")]
pub enum ProfileSpec {
    /// f(x) = 1 - x², the round sphere.
    Canonical,
    /// f(x) = 2(1 - x²)/(1 + x²); negative curvature near both poles.
    Example,
    /// f(x) = (1 - x²) q(x) with q given by monomial coefficients (constant first).
    PolynomialFactor { coefficients: Vec<f64> },
    /// f(x) = (1 - x²) P(x)/Q(x), monomial coefficients.
    Rational {
        numerator: Vec<f64>,
        denominator: Vec<f64>,
    },
    /// Tabulated (x, f) pairs covering [-1, 1], reconstructed by a clamped
    /// cubic spline with end slopes fixed to +2 and -2.
    Sampled { x: Vec<f64>, f: Vec<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawProfileSpec {
    kind: String,
    #[serde(default)]
    params: serde_json::Map<String, serde_json::Value>,
}

fn take_array(
    params: &serde_json::Map<String, serde_json::Value>,
    key: &str,
) -> std::result::Result<Vec<f64>, String> {
    let value = params
        .get(key)
        .ok_or_else(|| format!("invalid `params.{key}`: missing"))?;
    let items = value
        .as_array()
        .ok_or_else(|| format!("invalid `params.{key}`: expected an array of numbers"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_f64()
                .ok_or_else(|| format!("invalid `params.{key}[{i}]`: not a number"))
        })
        .collect()
}

impl TryFrom<RawProfileSpec> for ProfileSpec {
    type Error = String;

    fn try_from(raw: RawProfileSpec) -> std::result::Result<Self, String> {
        let p = &raw.params;
        match raw.kind.as_str() {
            "canonical" => Ok(ProfileSpec::Canonical),
            "paper-example" => Ok(ProfileSpec::Example),
            "polynomial-factor" => Ok(ProfileSpec::PolynomialFactor {
                coefficients: take_array(p, "coefficients")?,
            }),
            "rational" => Ok(ProfileSpec::Rational {
                numerator: take_array(p, "numerator")?,
                denominator: take_array(p, "denominator")?,
            }),
            "sampled" => Ok(ProfileSpec::Sampled {
                x: take_array(p, "x")?,
                f: take_array(p, "f")?,
            }),
            other => Err(format!("invalid `kind`: unknown profile kind {other:?}")),
        }
    }
}

impl From<ProfileSpec> for RawProfileSpec {
    fn from(spec: ProfileSpec) -> Self {
        use serde_json::json;
        let (kind, params) = match spec {
            ProfileSpec::Canonical => ("canonical", json!({})),
            ProfileSpec::Example => ("paper-example", json!({})),
            ProfileSpec::PolynomialFactor { coefficients } => {
                ("polynomial-factor", json!({ "coefficients": coefficients }))
            }
            ProfileSpec::Rational {
                numerator,
                denominator,
            } => (
                "rational",
                json!({ "numerator": numerator, "denominator": denominator }),
            ),
            ProfileSpec::Sampled { x, f } => ("sampled", json!({ "x": x, "f": f })),
        };
        let params = match params {
            serde_json::Value::Object(map) => map,
            _ => unreachable!(),
        };
        RawProfileSpec {
            kind: kind.to_string(),
            params,
        }
    }
}

impl ProfileSpec {
    /// Builtin profiles by CLI name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "canonical" => Some(ProfileSpec::Canonical),
            "paper-example" => Some(ProfileSpec::Example),
            _ => None,
        }
    }

    /// f(x) = (1 - x²)(1 + c(1 - x²)).
    pub fn bulged(c: f64) -> Self {
        ProfileSpec::PolynomialFactor {
            coefficients: vec![1.0 + c, 0.0, -c],
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            match msg.strip_prefix("invalid `") {
                Some(rest) => match rest.split_once("`: ") {
                    Some((field, reason)) => Error::invalid(field, reason),
                    None => Error::invalid("profile", msg.clone()),
                },
                None => Error::invalid("profile", msg),
            }
        })
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Canonical,
    Example,
    PolynomialFactor(Vec<f64>),
    Rational(Vec<f64>, Vec<f64>),
    Sampled(ClampedSpline),
}

/// A built profile with evaluators for f, f' and f''.
///
/// Immutable after construction; safe to share between threads.
#[derive(Clone, Debug)]
pub struct MetricProfile {
    spec: ProfileSpec,
    repr: Repr,
}

/// Polynomial value and first two derivatives by Horner's scheme.
fn poly3(c: &[f64], x: f64) -> (f64, f64, f64) {
    let (mut p, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for &a in c.iter().rev() {
        d2 = d2 * x + 2.0 * d1;
        d1 = d1 * x + p;
        p = p * x + a;
    }
    (p, d1, d2)
}

fn check_finite(field: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(field, "must not be empty"));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{field}[{i}]"), "not a finite number"));
    }
    Ok(())
}

/// Builds evaluators for a profile definition.
pub fn build_profile(spec: &ProfileSpec) -> Result<MetricProfile> {
    let repr = match spec {
        ProfileSpec::Canonical => Repr::Canonical,
        ProfileSpec::Example => Repr::Example,
        ProfileSpec::PolynomialFactor { coefficients } => {
            check_finite("params.coefficients", coefficients)?;
            Repr::PolynomialFactor(coefficients.clone())
        }
        ProfileSpec::Rational {
            numerator,
            denominator,
        } => {
            check_finite("params.numerator", numerator)?;
            check_finite("params.denominator", denominator)?;
            if denominator.iter().all(|&c| c == 0.0) {
                return Err(Error::invalid("params.denominator", "identically zero"));
            }
            Repr::Rational(numerator.clone(), denominator.clone())
        }
        ProfileSpec::Sampled { x, f } => {
            check_finite("params.x", x)?;
            check_finite("params.f", f)?;
            if x.len() != f.len() {
                return Err(Error::invalid(
                    "params.f",
                    format!("length {} differs from params.x length {}", f.len(), x.len()),
                ));
            }
            if x.len() < 3 {
                return Err(Error::invalid("params.x", "need at least 3 samples"));
            }
            if let Some(i) = x.windows(2).position(|w| w[1] <= w[0]) {
                return Err(Error::invalid(
                    format!("params.x[{}]", i + 1),
                    "sample grid must be strictly increasing",
                ));
            }
            if (x[0] + 1.0).abs() > 1e-12 || (x[x.len() - 1] - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(
                    "params.x",
                    "sample grid must start at -1 and end at 1",
                ));
            }
            let mut knots = x.clone();
            knots[0] = -1.0;
            *knots.last_mut().unwrap() = 1.0;
            Repr::Sampled(ClampedSpline::new(&knots, f, 2.0, -2.0))
        }
    };
    Ok(MetricProfile {
        spec: spec.clone(),
        repr,
    })
}

impl MetricProfile {
    pub fn canonical() -> Self {
        build_profile(&ProfileSpec::Canonical).expect("builtin")
    }

    pub fn example() -> Self {
        build_profile(&ProfileSpec::Example).expect("builtin")
    }

    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    pub fn chart_note(&self) -> &'static str {
        CHART_NOTE
    }

    /// (f, f', f'') at x.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match &self.repr {
            Repr::Canonical => ((1.0 - x) * (1.0 + x), -2.0 * x, -2.0),
            Repr::Example => {
                let s = 1.0 + x * x;
                (
                    2.0 * (1.0 - x * x) / s,
                    -8.0 * x / (s * s),
                    (24.0 * x * x - 8.0) / (s * s * s),
                )
            }
            Repr::PolynomialFactor(c) => {
                let (q, q1, q2) = poly3(c, x);
                with_factor(x, q, q1, q2)
            }
            Repr::Rational(num, den) => {
                let (q, q1, q2) = rational3(num, den, x);
                with_factor(x, q, q1, q2)
            }
            Repr::Sampled(s) => s.eval(x),
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Canonical => (1.0 - x) * (1.0 + x),
            Repr::Example => 2.0 * (1.0 - x) * (1.0 + x) / (1.0 + x * x),
            _ => self.eval(x).0,
        }
    }

    pub fn df(&self, x: f64) -> f64 {
        self.eval(x).1
    }

    pub fn d2f(&self, x: f64) -> f64 {
        self.eval(x).2
    }

    /// f(x)/(1 - x²), extended continuously to the endpoints.
    pub fn reduced(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Canonical => 1.0,
            Repr::Example => 2.0 / (1.0 + x * x),
            Repr::PolynomialFactor(c) => poly3(c, x).0,
            Repr::Rational(num, den) => poly3(num, x).0 / poly3(den, x).0,
            Repr::Sampled(s) => {
                // Near a pole s, with d = x - s, f ≈ f'(s) d + f''(s) d²/2 and
                // 1 - x² = -d (d + 2s); cancel d analytically.
                let gap = 1.0 - x.abs();
                if gap < 1e-5 {
                    let pole = x.signum();
                    let (_, f1, f2) = s.eval(pole);
                    let d = x - pole;
                    -(f1 + 0.5 * f2 * d) / (d + 2.0 * pole)
                } else {
                    s.eval(x).0 / ((1.0 - x) * (1.0 + x))
                }
            }
        }
    }

    /// Err unless f'' is finite on [-1, 1].
    pub fn require_curvature(&self) -> Result<()> {
        for i in 0..CAPABILITY_GRID {
            let x = -1.0 + 2.0 * i as f64 / (CAPABILITY_GRID - 1) as f64;
            let k = self.d2f(x);
            if !k.is_finite() {
                return Err(Error::Capability(format!(
                    "f'' is not bounded (non-finite at x = {x})"
                )));
            }
        }
        Ok(())
    }

    /// Rough maximum of f over a uniform grid; used as a scale for high moments.
    pub fn scale(&self) -> f64 {
        let n = 2001;
        (1..n - 1)
            .map(|i| self.f(-1.0 + 2.0 * i as f64 / (n - 1) as f64))
            .fold(f64::MIN_POSITIVE, f64::max)
    }
}

fn with_factor(x: f64, q: f64, q1: f64, q2: f64) -> (f64, f64, f64) {
    let w = (1.0 - x) * (1.0 + x);
    (
        w * q,
        -2.0 * x * q + w * q1,
        -2.0 * q - 4.0 * x * q1 + w * q2,
    )
}

fn rational3(num: &[f64], den: &[f64], x: f64) -> (f64, f64, f64) {
    let (p, p1, p2) = poly3(num, x);
    let (d, d1, d2) = poly3(den, x);
    let q = p / d;
    let q1 = (p1 - q * d1) / d;
    let q2 = (p2 - 2.0 * q1 * d1 - q * d2) / d;
    (q, q1, q2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    /// f(-1), f(1)
    pub endpoint_values: [f64; 2],
    /// f'(-1), f'(1)
    pub endpoint_derivatives: [f64; 2],
    pub min_f_interior: f64,
    pub area: f64,
    /// ∫ K dx, or None when f'' is unbounded.
    pub curvature_integral: Option<f64>,
    pub messages: Vec<String>,
}

/// Checks positivity on a uniform grid of `grid_size` points (endpoints
/// included) and the pole conditions within [`ENDPOINT_TOL`].
pub fn validate_profile(p: &MetricProfile, grid_size: usize) -> Result<ValidationReport> {
    if grid_size < 3 {
        return Err(Error::invalid("grid_size", "must be at least 3"));
    }
    let mut messages = Vec::new();
    let (f_lo, d_lo, _) = p.eval(-1.0);
    let (f_hi, d_hi, _) = p.eval(1.0);

    if !(f_lo.abs() <= ENDPOINT_TOL) {
        messages.push(format!("f(-1) = {f_lo:e}, expected 0"));
    }
    if !(f_hi.abs() <= ENDPOINT_TOL) {
        messages.push(format!("f(1) = {f_hi:e}, expected 0"));
    }
    if !((d_lo - 2.0).abs() <= ENDPOINT_TOL) {
        messages.push(format!("f'(-1) = {d_lo}, expected 2"));
    }
    if !((d_hi + 2.0).abs() <= ENDPOINT_TOL) {
        messages.push(format!("f'(1) = {d_hi}, expected -2"));
    }

    let mut min_f = f64::INFINITY;
    let mut first_bad = None;
    for i in 1..grid_size - 1 {
        let x = -1.0 + 2.0 * i as f64 / (grid_size - 1) as f64;
        let v = p.f(x);
        if v.is_nan() {
            min_f = f64::NAN;
        } else {
            min_f = min_f.min(v);
        }
        if !(v > 0.0 && v.is_finite()) && first_bad.is_none() {
            first_bad = Some((x, v));
        }
    }
    if let Some((x, v)) = first_bad {
        messages.push(format!("f({x}) = {v}, expected positive and finite"));
    }

    let curvature_integral = match p.require_curvature() {
        Ok(()) => match integrate_curvature_moment(p, 0, &QuadratureConfig::default()) {
            Ok(v) => Some(v),
            Err(e) => {
                messages.push(format!("curvature integral: {e}"));
                None
            }
        },
        Err(e) => {
            messages.push(e.to_string());
            None
        }
    };

    Ok(ValidationReport {
        passed: messages.is_empty(),
        endpoint_values: [f_lo, f_hi],
        endpoint_derivatives: [d_lo, d_hi],
        min_f_interior: min_f,
        area: 4.0 * PI,
        curvature_integral,
        messages,
    })
}

pub fn curvature_at(p: &MetricProfile, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} lies outside [-1, 1]")));
    }
    let k = -0.5 * p.d2f(x);
    if !k.is_finite() {
        return Err(Error::Capability(format!("f'' is not finite at x = {x}")));
    }
    Ok(k)
}

/// Integrates over [-1, 1]. Sampled profiles are piecewise cubic, so the
/// adaptive rule runs on each knot interval separately.
fn integrate_over<F: Fn(f64) -> f64>(p: &MetricProfile, g: F, q: &QuadratureConfig) -> Result<f64> {
    match (&p.repr, q.rule) {
        (Repr::Sampled(spline), QuadratureRule::AdaptiveGauss) => {
            q.validate()?;
            let knots = spline.knots();
            let tol = q.abs_tol / (knots.len() - 1) as f64;
            knots
                .windows(2)
                .map(|w| quadrature::adaptive_gauss(&g, w[0], w[1], tol, q.max_subdivisions))
                .sum()
        }
        _ => quadrature::integrate(g, q),
    }
}

/// f^l assembled as exp(l ln f) where f > 0; exact zero at the poles.
#[inline]
pub(crate) fn power(f: f64, l: u32) -> f64 {
    match l {
        0 => 1.0,
        1 => f,
        _ if f > 0.0 => (l as f64 * f.ln()).exp(),
        _ => f.powi(l as i32),
    }
}

/// ∫ f^l dx over [-1, 1].
pub fn integrate_moment(p: &MetricProfile, l: u32, q: &QuadratureConfig) -> Result<f64> {
    integrate_over(p, |x| power(p.f(x), l), q)
}

/// ∫ f^l K dx over [-1, 1].
pub fn integrate_curvature_moment(p: &MetricProfile, l: u32, q: &QuadratureConfig) -> Result<f64> {
    p.require_curvature()?;
    integrate_over(p, 
        |x| {
            let (f, _, f2) = p.eval(x);
            -0.5 * f2 * power(f, l)
        },
        q,
    )
}

/// ∫ (f/scale)^l dx. Keeps high moments O(1) when max f is far from 1.
pub(crate) fn scaled_moment(p: &MetricProfile, l: u32, scale: f64, q: &QuadratureConfig) -> Result<f64> {
    integrate_over(p, |x| power(p.f(x) / scale, l), q)
}

/// ∫ (f/scale)^l K dx.
pub(crate) fn scaled_curvature_moment(
    p: &MetricProfile,
    l: u32,
    scale: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    p.require_curvature()?;
    integrate_over(p, 
        |x| {
            let (f, _, f2) = p.eval(x);
            -0.5 * f2 * power(f / scale, l)
        },
        q,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSignIndicator {
    pub f_integral: f64,
    #[serde(rename = "x2K_integral")]
    pub x2k_integral: f64,
    /// ∫ f ≥ 2, which forces K < 0 somewhere.
    pub implies_negative_curvature: bool,
}

/// ∫ f, ∫ x² K and whether ∫ f ≥ 2. The two integrals satisfy ∫ f = 2 - ∫ x² K.
pub fn curvature_sign_indicator(p: &MetricProfile, q: &QuadratureConfig) -> Result<CurvatureSignIndicator> {
    p.require_curvature()?;
    let f_integral = integrate_moment(p, 1, q)?;
    let x2k_integral = integrate_over(p, |x| -0.5 * x * x * p.d2f(x), q)?;
    Ok(CurvatureSignIndicator {
        f_integral,
        x2k_integral,
        implies_negative_curvature: f_integral >= 2.0,
    })
}

/// Sign changes of K on a uniform grid, refined by bisection.
pub fn curvature_zeros(p: &MetricProfile, grid_size: usize) -> Result<Vec<f64>> {
    p.require_curvature()?;
    let n = grid_size.max(3);
    let k = |x: f64| -0.5 * p.d2f(x);
    let xs: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let mut zeros = Vec::new();
    for w in xs.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (ka, kb) = (k(a), k(b));
        if ka == 0.0 {
            zeros.push(a);
            continue;
        }
        if ka.signum() == kb.signum() || kb == 0.0 {
            continue;
        }
        let mut sa = ka.signum();
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let km = k(mid);
            if km == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if km.signum() == sa {
                a = mid;
                sa = km.signum();
            } else {
                b = mid;
            }
        }
        zeros.push(0.5 * (a + b));
    }
    if k(1.0) == 0.0 {
        zeros.push(1.0);
    }
    Ok(zeros)
}

/// Minimum of K over a uniform grid of `grid_size` points.
pub fn min_curvature(p: &MetricProfile, grid_size: usize) -> Result<f64> {
    p.require_curvature()?;
    let n = grid_size.max(2);
    Ok((0..n)
        .map(|i| -0.5 * p.d2f(-1.0 + 2.0 * i as f64 / (n - 1) as f64))
        .fold(f64::INFINITY, f64::min))
}

/// T = ∫ f^(-1/2) dx, the length of the meridian from pole to pole.
pub fn meridian_length(p: &MetricProfile, q: &QuadratureConfig) -> Result<f64> {
    // f^(-1/2) = (1 - x²)^(-1/2) · reduced^(-1/2)
    quadrature::integrate_inv_sqrt(|x| 1.0 / p.reduced(x).sqrt(), q)
}
