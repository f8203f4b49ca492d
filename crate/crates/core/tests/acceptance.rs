//! End-to-end acceptance criteria. Each test prints one `PASS`/`FAIL` line
//! (visible with `--nocapture`) before asserting.

use std::f64::consts::PI;
use std::time::Instant;

use sorspec::bounds::{negative_curvature_bound, ray_bound, rough_bound, trial_residual, trial_residual_on_grid};
use sorspec::profile::{curvature_sign_indicator, curvature_zeros, integrate_curvature_moment, integrate_moment, min_curvature};
use sorspec::slsolver::{eigenvalues, trace_check};
use sorspec::spectrum::{assemble_spectrum, verify_interlacing, verify_monotonicity, verify_multiplicity_bound};
use sorspec::{build_profile, MetricProfile, ProfileSpec, QuadratureConfig, SolverConfig};

const FAMILY: [f64; 5] = [-0.5, 0.5, 1.0, 2.0, 4.0];

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn family() -> Vec<(String, MetricProfile)> {
    FAMILY
        .iter()
        .map(|&c| (format!("c={c}"), build_profile(&ProfileSpec::bulged(c)).unwrap()))
        .collect()
}

fn report(id: u32, title: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("PASS {id:>2} {title}");
    } else {
        println!("FAIL {id:>2} {title}");
        for f in failures {
            println!("       {f}");
        }
    }
    assert!(failures.is_empty(), "criterion {id} failed: {failures:?}");
}

#[test]
fn criterion_01_round_sphere_mode_spectra() {
    let start = Instant::now();
    let c = MetricProfile::canonical();
    let mut failures = Vec::new();
    for k in 0..=8u32 {
        let s = eigenvalues(&c, k as i64, 8, &cfg()).unwrap();
        let tol = if k == 0 { 1e-6 } else { 1e-4 };
        for j in 1..=8usize {
            let exact = ((k as usize + j - 1) * (k as usize + j)) as f64;
            let got = s.eigenvalues[j - 1];
            let err = if exact == 0.0 { got.abs() } else { (got - exact).abs() / exact };
            if err > tol {
                failures.push(format!("k={k} j={j}: {got} vs {exact} (rel {err:.2e})"));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed > 60.0 {
        failures.push(format!("took {elapsed:.1}s"));
    }
    report(1, "round-sphere mode spectra", &failures);
}

#[test]
fn criterion_02_round_sphere_global_spectrum() {
    let s = assemble_spectrum(&MetricProfile::canonical(), 6, &cfg(), None).unwrap();
    let mut failures = Vec::new();
    for m in 0..=6usize {
        match s.entries.get(m) {
            Some(e) => {
                let exact = (m * (m + 1)) as f64;
                if (e.value - exact).abs() > s.merge_tolerance || e.multiplicity != 2 * m + 1 {
                    failures.push(format!("m={m}: value {} multiplicity {}", e.value, e.multiplicity));
                }
            }
            None => failures.push(format!("m={m}: missing")),
        }
    }
    report(2, "round-sphere global spectrum", &failures);
}

#[test]
fn criterion_03_trace_identity() {
    let mut failures = Vec::new();
    for (name, p) in [("canonical", MetricProfile::canonical()), ("example", MetricProfile::example())] {
        for k in 1..=5i64 {
            let r = trace_check(&p, k, 200, &cfg()).unwrap();
            if r.deviation > 1e-2 {
                failures.push(format!("{name} k={k}: deviation {:.3e}", r.deviation));
            }
            let sums: Vec<f64> = [1usize, 2, 5, 10, 25, 50, 100, 200]
                .iter()
                .map(|&t| if t == 200 { r.partial_sum } else { trace_check(&p, k, t, &cfg()).unwrap().partial_sum })
                .collect();
            if !sums.windows(2).all(|w| w[0] < w[1]) {
                failures.push(format!("{name} k={k}: partial sums not increasing {sums:?}"));
            }
            if r.partial_sum >= r.target {
                failures.push(format!("{name} k={k}: partial sum {} ≥ {}", r.partial_sum, r.target));
            }
        }
    }
    report(3, "trace identity", &failures);
}

#[test]
fn criterion_04_example_constants() {
    let e = MetricProfile::example();
    let mut failures = Vec::new();
    let checks = [
        ("∫f", integrate_moment(&e, 1, &q()).unwrap(), 2.0 * PI - 4.0),
        ("∫fK", integrate_curvature_moment(&e, 1, &q()).unwrap(), PI + 4.0 / 3.0),
    ];
    for (name, got, exact) in checks {
        if (got - exact).abs() > 1e-9 {
            failures.push(format!("{name}: {got} vs {exact}"));
        }
    }
    let z = curvature_zeros(&e, 1001).unwrap();
    let r = 1.0 / 3f64.sqrt();
    if z.len() != 2 || (z[0] + r).abs() > 1e-9 || (z[1] - r).abs() > 1e-9 {
        failures.push(format!("curvature zeros {z:?}"));
    }
    report(4, "example constants", &failures);
}

#[test]
fn criterion_05_example_below_shifted_squares() {
    let e = MetricProfile::example();
    let mut failures = Vec::new();
    let s = assemble_spectrum(&e, 10, &cfg(), None).unwrap();
    for m in 1..=10usize {
        let v = s.value(m).unwrap();
        if v >= (m * m + 1) as f64 {
            failures.push(format!("λ_{m} = {v}"));
        }
    }
    for m in 1..=50u32 {
        let b = rough_bound(&e, m, &q()).unwrap();
        if b >= (m * m + 1) as f64 {
            failures.push(format!("rough({m}) = {b}"));
        }
    }
    report(5, "example eigenvalues below m²+1", &failures);
}

#[test]
fn criterion_06_ray_bounds_hold() {
    let mut failures = Vec::new();
    for (name, p) in family() {
        let s = assemble_spectrum(&p, 6, &cfg(), None).unwrap();
        for m in 1..=6u32 {
            let lambda = s.value(m as usize).unwrap();
            for l in [1, m] {
                let b = ray_bound(&p, m, l, &q()).unwrap();
                if lambda > b + 1e-3 * lambda {
                    failures.push(format!("{name} m={m} l={l}: λ = {lambda} > {b}"));
                }
            }
        }
    }
    report(6, "ray bounds dominate computed eigenvalues", &failures);
}

#[test]
fn criterion_07_multiplicity_bound() {
    let mut failures = Vec::new();
    let mut profiles = family();
    profiles.push(("example".to_string(), MetricProfile::example()));
    for (name, p) in profiles {
        let s = assemble_spectrum(&p, 6, &cfg(), None).unwrap();
        let r = verify_multiplicity_bound(&s);
        for c in r.checks.iter().filter(|c| !c.passed) {
            failures.push(format!("{name} {}: {} > {}", c.location, c.lhs, c.rhs));
        }
        if r.checks.len() < 7 {
            failures.push(format!("{name}: only {} entries", r.checks.len()));
        }
    }
    report(7, "multiplicity bound", &failures);
}

#[test]
fn criterion_08_interlacing_and_monotonicity() {
    let mut failures = Vec::new();
    for (name, p) in family() {
        let reports = [
            verify_interlacing(&p, 5, 5, &cfg()).unwrap(),
            verify_monotonicity(&p, 5, &cfg()).unwrap(),
        ];
        for c in reports.iter().flat_map(|r| &r.checks).filter(|c| !c.passed) {
            failures.push(format!("{name} {} {}: {} vs {}", c.name, c.location, c.lhs, c.rhs));
        }
    }
    report(8, "interlacing and monotonicity", &failures);
}

#[test]
fn criterion_09_negative_curvature_chain() {
    let e = MetricProfile::example();
    let mut failures = Vec::new();
    let ind = curvature_sign_indicator(&e, &q()).unwrap();
    if !ind.implies_negative_curvature {
        failures.push(format!("∫f = {} not detected as ≥ 2", ind.f_integral));
    }
    let k_min = min_curvature(&e, 1001).unwrap();
    if k_min >= 0.0 {
        failures.push(format!("min K = {k_min}"));
    }
    let mut last = f64::NEG_INFINITY;
    for m in 1..=20u32 {
        match negative_curvature_bound(&e, m, &q()) {
            Ok(b) => {
                if b.canonical_gap <= last {
                    failures.push(format!("gap at m={m}: {} ≤ {last}", b.canonical_gap));
                }
                last = b.canonical_gap;
            }
            Err(err) => failures.push(format!("m={m}: {err}")),
        }
    }
    report(9, "negative curvature chain", &failures);
}

#[test]
fn criterion_10_rigidity_diagnostics() {
    let mut failures = Vec::new();
    let c = MetricProfile::canonical();
    for m in 1..=4u32 {
        let r = trial_residual(&c, m, &cfg()).unwrap();
        if r.residual_norm > 10.0 * r.discretization_error_estimate {
            failures.push(format!(
                "canonical m={m}: residual {:.3e} vs estimate {:.3e}",
                r.residual_norm, r.discretization_error_estimate
            ));
        }
    }
    let e = MetricProfile::example();
    let mut n = 1024;
    while n <= cfg().n_max {
        let r = trial_residual_on_grid(&e, 1, n).unwrap();
        if r.residual_norm <= 10.0 * r.discretization_error_estimate {
            failures.push(format!(
                "example n={n}: residual {:.3e} vs estimate {:.3e}",
                r.residual_norm, r.discretization_error_estimate
            ));
        }
        n *= 2;
    }
    report(10, "rigidity diagnostics", &failures);
}
