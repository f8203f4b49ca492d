//! Upper bounds for λ_m from the trial functions u = f^{l/2} e^{±imθ}.
//!
//! The Rayleigh quotient of f^{l/2} in mode m gives
//!
//! ```text
//! λ_m ≤ m² ∫f^{l-1} / ∫f^l + l ∫f^l K / (2 ∫f^l)
//! ```
//!
//! for every l ≥ 1. Taking l = m gives the sharp bound (equality on the round
//! sphere) and l = 1 the rough bound m²·2/∫f + ∫fK/(2∫f).

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{self, MetricProfile};
use crate::quadrature::QuadratureConfig;
use crate::slsolver::{ModeOperator, SolverConfig};
use crate::spectrum::GlobalSpectrum;

/// Moments ∫(f/M)^{l-1}, ∫(f/M)^l and ∫(f/M)^l K with M ≈ max f.
struct Moments {
    scale: f64,
    lower: f64,
    upper: f64,
    curvature: f64,
}

impl Moments {
    fn new(p: &MetricProfile, l: u32, q: &QuadratureConfig) -> Result<Self> {
        p.require_curvature()?;
        let scale = p.scale();
        Ok(Self {
            scale,
            lower: profile::scaled_moment(p, l - 1, scale, q)?,
            upper: profile::scaled_moment(p, l, scale, q)?,
            curvature: profile::scaled_curvature_moment(p, l, scale, q)?,
        })
    }

    fn ray(&self, m: u32, l: u32) -> f64 {
        let m2 = (m as f64) * (m as f64);
        m2 * self.lower / (self.scale * self.upper) + l as f64 * self.curvature / (2.0 * self.upper)
    }
}

fn check_index(name: &str, v: u32) -> Result<()> {
    if v == 0 {
        return Err(Error::invalid(name, "must be at least 1"));
    }
    Ok(())
}

/// The bound from trial function f^{l/2} in mode m.
pub fn ray_bound(p: &MetricProfile, m: u32, l: u32, q: &QuadratureConfig) -> Result<f64> {
    check_index("m", m)?;
    check_index("l", l)?;
    Ok(Moments::new(p, l, q)?.ray(m, l))
}

pub fn sharp_bound(p: &MetricProfile, m: u32, q: &QuadratureConfig) -> Result<f64> {
    ray_bound(p, m, m, q)
}

pub fn rough_bound(p: &MetricProfile, m: u32, q: &QuadratureConfig) -> Result<f64> {
    ray_bound(p, m, 1, q)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativeCurvatureBound {
    pub m: u32,
    /// m² + ∫fK / (2∫f)
    pub value: f64,
    pub canonical: f64,
    /// m² + m minus the bound; grows without limit in m.
    pub canonical_gap: f64,
}

/// λ_m ≤ m² + ∫fK/(2∫f), available when ∫f ≥ 2.
pub fn negative_curvature_bound(
    p: &MetricProfile,
    m: u32,
    q: &QuadratureConfig,
) -> Result<NegativeCurvatureBound> {
    check_index("m", m)?;
    let ind = profile::curvature_sign_indicator(p, q)?;
    if !ind.implies_negative_curvature {
        return Err(Error::Inapplicable(format!(
            "the bound needs ∫f ≥ 2, but ∫f = {}",
            ind.f_integral
        )));
    }
    let mom = Moments::new(p, 1, q)?;
    let m2 = (m as f64) * (m as f64);
    let value = m2 + mom.curvature / (2.0 * mom.upper);
    let canonical = m2 + m as f64;
    Ok(NegativeCurvatureBound {
        m,
        value,
        canonical,
        canonical_gap: canonical - value,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub m: u32,
    pub sharp: Option<f64>,
    pub ray: BTreeMap<u32, f64>,
    pub rough: Option<f64>,
    pub neg_curv: Option<f64>,
    pub canonical: f64,
    pub computed_lambda: Option<f64>,
}

/// One row per m = 1..=m_max. `l_set` of `None` tests l ∈ {1, m}. Cells whose
/// evaluation fails are left empty.
pub fn bounds_table(
    p: &MetricProfile,
    m_max: u32,
    l_set: Option<&[u32]>,
    q: &QuadratureConfig,
    s: Option<&GlobalSpectrum>,
) -> Result<Vec<BoundsRow>> {
    check_index("m_max", m_max)?;
    if let Some(ls) = l_set {
        if ls.contains(&0) {
            return Err(Error::invalid("l_set", "every l must be at least 1"));
        }
    }
    // Moments depend on l only; evaluate each once.
    let mut ls: BTreeSet<u32> = (1..=m_max).collect();
    if let Some(extra) = l_set {
        ls.extend(extra);
    }
    let moments: BTreeMap<u32, Option<Moments>> =
        ls.into_iter().map(|l| (l, Moments::new(p, l, q).ok())).collect();
    let ray = |m: u32, l: u32| moments[&l].as_ref().map(|mo| mo.ray(m, l));
    let neg_ok = profile::curvature_sign_indicator(p, q)
        .map(|i| i.implies_negative_curvature)
        .unwrap_or(false);

    Ok((1..=m_max)
        .map(|m| {
            let tested: Vec<u32> = match l_set {
                Some(ls) => ls.to_vec(),
                None => vec![1, m],
            };
            BoundsRow {
                m,
                sharp: ray(m, m),
                ray: tested
                    .into_iter()
                    .filter_map(|l| ray(m, l).map(|v| (l, v)))
                    .collect(),
                rough: ray(m, 1),
                neg_curv: if neg_ok {
                    negative_curvature_bound(p, m, q).ok().map(|b| b.value)
                } else {
                    None
                },
                canonical: (m * m + m) as f64,
                computed_lambda: s.and_then(|s| s.value(m as usize)),
            }
        })
        .collect())
}

/// CSV with columns m,sharp,rough,neg_curv,canonical,computed_lambda; absent
/// cells are empty.
pub fn write_bounds_csv<W: Write>(rows: &[BoundsRow], out: W) -> Result<()> {
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "sharp", "rough", "neg_curv", "canonical", "computed_lambda"])?;
    for r in rows {
        w.write_record([
            r.m.to_string(),
            cell(r.sharp),
            cell(r.rough),
            cell(r.neg_curv),
            r.canonical.to_string(),
            cell(r.computed_lambda),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualDiagnostic {
    pub m: u32,
    pub residual_norm: f64,
    pub rayleigh_quotient: f64,
    /// |residual(N) - residual(N/2)|
    pub discretization_error_estimate: f64,
    pub grid: usize,
    pub note: String,
}

/// Residual of u = f^{m/2} against the discrete L_m on an `n`-cell grid, with
/// the Rayleigh quotient ρ. The norm is the discrete H^{-1} norm
/// sqrt(rᵀ M L⁻¹ r) for unit-mass u, which tends to zero exactly when u is an
/// eigenfunction of the continuous operator.
fn residual_on_grid(p: &MetricProfile, m: u32, n: usize) -> Result<(f64, f64)> {
    let op = ModeOperator::new(p, m, n)?;
    let mut u: Vec<f64> = op.nodes.iter().map(|&x| p.f(x).max(0.0).powf(0.5 * m as f64)).collect();
    let norm = u.iter().zip(&op.mass).map(|(v, w)| w * v * v).sum::<f64>().sqrt();
    u.iter_mut().for_each(|v| *v /= norm);
    let lu = op.apply(&u);
    let rho: f64 = u.iter().zip(&lu).zip(&op.mass).map(|((a, b), w)| w * a * b).sum();
    let r: Vec<f64> = lu.iter().zip(&u).map(|(a, b)| a - rho * b).collect();
    let y = op.solve(&r);
    let dual: f64 = r.iter().zip(&y).zip(&op.mass).map(|((a, b), w)| w * a * b).sum();
    Ok((dual.max(0.0).sqrt(), rho))
}

/// Trial residual on an explicit grid of `n` cells (n ≥ 8).
pub fn trial_residual_on_grid(p: &MetricProfile, m: u32, n: usize) -> Result<ResidualDiagnostic> {
    check_index("m", m)?;
    if n < 8 {
        return Err(Error::invalid("grid", "need at least 8 cells"));
    }
    let (fine, rho) = residual_on_grid(p, m, n)?;
    let (coarse, _) = residual_on_grid(p, m, n / 2)?;
    let estimate = (fine - coarse).abs();
    let note = if fine <= 10.0 * estimate {
        "residual is at discretization level: f^(m/2) behaves as an eigenfunction"
    } else {
        "residual stays above discretization level: f^(m/2) is not an eigenfunction"
    };
    Ok(ResidualDiagnostic {
        m,
        residual_norm: fine,
        rayleigh_quotient: rho,
        discretization_error_estimate: estimate,
        grid: n,
        note: note.to_string(),
    })
}

/// Trial residual on the solver's initial grid.
pub fn trial_residual(p: &MetricProfile, m: u32, cfg: &SolverConfig) -> Result<ResidualDiagnostic> {
    cfg.validate()?;
    trial_residual_on_grid(p, m, cfg.n_initial)
}
