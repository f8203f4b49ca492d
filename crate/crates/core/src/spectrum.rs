//! The Laplace spectrum as a union of mode spectra.
//!
//! Each eigenvalue λ_k^j of L_k with k ≥ 1 contributes the pair e^{±ikθ}, so
//! a distinct eigenvalue's multiplicity is twice the number of modes k ≥ 1 in
//! which it appears, plus one if the invariant mode k = 0 also has it.

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::profile::MetricProfile;
use crate::quadrature::QuadratureConfig;
use crate::slsolver::{self, SLSpectrumSlice, SolverConfig};

/// Relative error budget used by the verification checks.
pub const CHECK_BUDGET: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinctEigenvalue {
    pub m: usize,
    pub value: f64,
    /// Modes k ≥ 0 whose operator has this eigenvalue, ascending.
    pub modes: Vec<u32>,
    pub multiplicity: usize,
}

/// Multiplicity implied by a set of contributing modes.
pub fn multiplicity_of(modes: &[u32]) -> usize {
    modes
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|&k| if k == 0 { 1 } else { 2 })
        .sum()
}

/// Two neighbouring clusters (or one cluster holding a mode twice) that sit
/// too close to tell apart reliably.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ambiguity {
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalSpectrum {
    /// Ceiling Λ: every eigenvalue ≤ Λ is accounted for.
    pub truncation: f64,
    pub merge_tolerance: f64,
    pub entries: Vec<DistinctEigenvalue>,
    #[serde(default)]
    pub ambiguities: Vec<Ambiguity>,
    #[serde(default)]
    pub per_mode_slices: Vec<SLSpectrumSlice>,
}

impl GlobalSpectrum {
    /// Value of λ_m, if enumerated.
    pub fn value(&self, m: usize) -> Option<f64> {
        self.entries.get(m).map(|e| e.value)
    }

    /// CSV with columns m,value,multiplicity,modes; modes are `;`-separated.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "value", "multiplicity", "modes"])?;
        for e in &self.entries {
            let modes: Vec<String> = e.modes.iter().map(|k| k.to_string()).collect();
            w.write_record([
                e.m.to_string(),
                e.value.to_string(),
                e.multiplicity.to_string(),
                modes.join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub location: String,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

impl VerificationReport {
    pub fn new(checks: Vec<Check>) -> Self {
        let all_passed = checks.iter().all(|c| c.passed);
        Self { checks, all_passed }
    }

    pub fn merge(reports: impl IntoIterator<Item = VerificationReport>) -> Self {
        Self::new(reports.into_iter().flat_map(|r| r.checks).collect())
    }
}

struct Member {
    value: f64,
    k: u32,
}

/// Solves every mode that can reach below `ceiling`. Modes are scanned
/// upward until λ_k^1 exceeds the ceiling; by monotonicity of the first
/// eigenvalue in k no later mode contributes.
fn mode_slices(p: &MetricProfile, ceiling: f64, cfg: &SolverConfig) -> Result<Vec<SLSpectrumSlice>> {
    let mut k_last = 0u32;
    loop {
        let next = k_last + 1;
        if slsolver::first_eigenvalue(p, next as i64, cfg)? > ceiling {
            break;
        }
        k_last = next;
    }
    let modes: Vec<u32> = (0..=k_last).collect();
    modes
        .par_iter()
        .map(|&k| slsolver::eigenvalues_below(p, k, ceiling, cfg))
        .collect()
}

fn initial_ceiling(p: &MetricProfile, m_target: usize) -> f64 {
    let guess = bounds::rough_bound(p, m_target as u32, &QuadratureConfig::default())
        .unwrap_or((m_target * (m_target + 1)) as f64);
    guess.max(1.0)
}

/// Distinct eigenvalues of the Laplacian up to at least index `m_target`.
///
/// Without `merge_tol` the tolerance is max(1e-6·Λ, 10·largest retained error
/// estimate). A supplied tolerance must exceed every retained error estimate.
pub fn assemble_spectrum(
    p: &MetricProfile,
    m_target: usize,
    cfg: &SolverConfig,
    merge_tol: Option<f64>,
) -> Result<GlobalSpectrum> {
    cfg.validate()?;
    if let Some(t) = merge_tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid("merge_tol", "must be a positive finite number"));
        }
    }
    if m_target == 0 {
        return Ok(GlobalSpectrum {
            truncation: 0.0,
            merge_tolerance: merge_tol.unwrap_or(0.0),
            entries: vec![DistinctEigenvalue {
                m: 0,
                value: 0.0,
                modes: vec![0],
                multiplicity: 1,
            }],
            ambiguities: Vec::new(),
            per_mode_slices: Vec::new(),
        });
    }

    let mut ceiling = initial_ceiling(p, m_target);
    loop {
        // A small margin above Λ so clusters straddling it are seen whole.
        let reach = ceiling * 1.01;
        let slices = mode_slices(p, reach, cfg)?;
        let spectrum = cluster(slices, ceiling, reach, cfg, merge_tol)?;
        if spectrum.entries.len() > m_target {
            return Ok(spectrum);
        }
        ceiling *= 2.0;
    }
}

fn cluster(
    slices: Vec<SLSpectrumSlice>,
    ceiling: f64,
    reach: f64,
    cfg: &SolverConfig,
    merge_tol: Option<f64>,
) -> Result<GlobalSpectrum> {
    let mut max_err = 0.0f64;
    for s in &slices {
        for (j, (&v, &e)) in s.eigenvalues.iter().zip(&s.error_estimates).enumerate() {
            if v > reach {
                continue;
            }
            if !cfg.accepts(v, e) {
                return Err(Error::NotConverged {
                    k: s.k,
                    j: j + 1,
                    error: e,
                    required: cfg.rel_tol * v.abs().max(1.0),
                });
            }
            max_err = max_err.max(e);
        }
    }
    let tau = match merge_tol {
        Some(t) if t <= max_err => {
            return Err(Error::invalid(
                "merge_tol",
                format!("{t:e} does not exceed the largest error estimate {max_err:e}"),
            ))
        }
        Some(t) => t,
        None => (1e-6 * ceiling).max(10.0 * max_err),
    };
    let cut = ceiling + 3.0 * tau;
    if cut > reach {
        return Err(Error::invalid(
            "merge_tol",
            format!("{tau:e} is too coarse for the ceiling {ceiling}"),
        ));
    }

    let mut members: Vec<Member> = slices
        .iter()
        .flat_map(|s| {
            s.eigenvalues
                .iter()
                .filter(|&&v| v <= cut)
                .map(move |&v| Member { value: v, k: s.k })
        })
        .collect();
    members.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.k.cmp(&b.k)));

    let mut groups: Vec<Vec<Member>> = Vec::new();
    for mem in members {
        match groups.last_mut() {
            Some(g) if mem.value - g.last().unwrap().value <= tau => g.push(mem),
            _ => groups.push(vec![mem]),
        }
    }

    let mut ambiguities = Vec::new();
    for pair in groups.windows(2) {
        let lower = pair[0].last().unwrap().value;
        let upper = pair[1][0].value;
        if upper - lower <= 3.0 * tau {
            ambiguities.push(Ambiguity {
                lower,
                upper,
                gap: upper - lower,
                reason: "neighbouring clusters closer than 3 merge tolerances".to_string(),
            });
        }
    }

    let mut entries = Vec::new();
    for g in &groups {
        let value = g.iter().map(|m| m.value).sum::<f64>() / g.len() as f64;
        if value > ceiling {
            break;
        }
        let mut modes: Vec<u32> = g.iter().map(|m| m.k).collect();
        modes.sort_unstable();
        let before = modes.len();
        modes.dedup();
        if modes.len() != before {
            ambiguities.push(Ambiguity {
                lower: g[0].value,
                upper: g.last().unwrap().value,
                gap: g.last().unwrap().value - g[0].value,
                reason: "one mode contributes twice to a cluster".to_string(),
            });
        }
        let m = entries.len();
        // The invariant mode's constant eigenfunction gives exactly zero.
        let value = if m == 0 && modes == [0] && value.abs() <= tau { 0.0 } else { value };
        entries.push(DistinctEigenvalue {
            m,
            value,
            multiplicity: multiplicity_of(&modes),
            modes,
        });
    }

    Ok(GlobalSpectrum {
        truncation: ceiling,
        merge_tolerance: tau,
        entries,
        ambiguities,
        per_mode_slices: slices,
    })
}

/// dim E_{λ_m} ≤ 2m + 1 for every entry.
pub fn verify_multiplicity_bound(s: &GlobalSpectrum) -> VerificationReport {
    VerificationReport::new(
        s.entries
            .iter()
            .map(|e| Check {
                name: "multiplicity_bound".to_string(),
                location: format!("m={}", e.m),
                lhs: e.multiplicity as f64,
                rhs: (2 * e.m + 1) as f64,
                passed: e.multiplicity <= 2 * e.m + 1,
            })
            .collect(),
    )
}

/// λ_{k+j} ≤ λ_k^{j+1} (within the check budget) for 1 ≤ k ≤ k_max and
/// 0 ≤ j ≤ j_max.
pub fn verify_interlacing(
    p: &MetricProfile,
    k_max: u32,
    j_max: usize,
    cfg: &SolverConfig,
) -> Result<VerificationReport> {
    if k_max < 1 || j_max < 1 {
        return Err(Error::invalid("k_max/j_max", "both must be at least 1"));
    }
    let s = assemble_spectrum(p, k_max as usize + j_max, cfg, None)?;
    let modes: Vec<u32> = (1..=k_max).collect();
    let slices = slsolver::solve_modes(p, &modes, j_max + 1, cfg)?;
    let mut checks = Vec::new();
    for slice in &slices {
        let k = slice.k as usize;
        for j in 0..=j_max {
            let rhs = slice.eigenvalues[j];
            let lhs = s.value(k + j).expect("spectrum assembled to depth k_max + j_max");
            checks.push(Check {
                name: "interlacing".to_string(),
                location: format!("k={k},j={j}"),
                lhs,
                rhs,
                passed: lhs <= rhs + CHECK_BUDGET * rhs.abs(),
            });
        }
    }
    Ok(VerificationReport::new(checks))
}

/// λ_k^1 < λ_{k+1}^1 for k = 1..k_max-1.
pub fn verify_monotonicity(p: &MetricProfile, k_max: u32, cfg: &SolverConfig) -> Result<VerificationReport> {
    if k_max < 2 {
        return Err(Error::invalid("k_max", "must be at least 2"));
    }
    let modes: Vec<u32> = (1..=k_max).collect();
    let firsts: Vec<f64> = slsolver::solve_modes(p, &modes, 1, cfg)?
        .iter()
        .map(|s| s.eigenvalues[0])
        .collect();
    let checks = firsts
        .windows(2)
        .enumerate()
        .map(|(i, w)| Check {
            name: "monotonicity".to_string(),
            location: format!("k={}", i + 1),
            lhs: w[0],
            rhs: w[1],
            passed: w[0] < w[1],
        })
        .collect();
    Ok(VerificationReport::new(checks))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalRow {
    pub m: usize,
    pub value: f64,
    pub canonical_value: f64,
    pub below_canonical: bool,
}

/// For index k, the smallest m ≥ k with λ_m ≤ m(m+1), if any was computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub k: usize,
    pub m: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalComparison {
    pub rows: Vec<CanonicalRow>,
    pub witnesses: Vec<Witness>,
}

/// Compares λ_m against the round-sphere value m(m+1). Values within the
/// spectrum's merge tolerance of m(m+1) count as below.
pub fn canonical_comparison(s: &GlobalSpectrum) -> CanonicalComparison {
    let rows: Vec<CanonicalRow> = s
        .entries
        .iter()
        .map(|e| {
            let canonical_value = (e.m * (e.m + 1)) as f64;
            CanonicalRow {
                m: e.m,
                value: e.value,
                canonical_value,
                below_canonical: e.value <= canonical_value + s.merge_tolerance,
            }
        })
        .collect();
    let witnesses = (0..rows.len())
        .map(|k| Witness {
            k,
            m: rows[k..].iter().find(|r| r.below_canonical).map(|r| r.m),
        })
        .collect();
    CanonicalComparison { rows, witnesses }
}
