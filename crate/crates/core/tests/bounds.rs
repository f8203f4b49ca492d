mod common;

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use common::*;
use proptest::prelude::*;
use sorspec::bounds::{
    bounds_table, negative_curvature_bound, ray_bound, rough_bound, sharp_bound, trial_residual,
    trial_residual_on_grid, write_bounds_csv,
};
use sorspec::spectrum::assemble_spectrum;
use sorspec::{build_profile, BoundsRow, Error, MetricProfile, ProfileSpec, QuadratureConfig, SolverConfig};

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// Independent ray bound from composite Gauss–Legendre moments.
fn reference_ray(f: impl Fn(f64) -> f64, k: impl Fn(f64) -> f64, m: u32, l: u32) -> f64 {
    let lo = composite_gauss(|x| f(x).powi(l as i32 - 1), 200, 10);
    let hi = composite_gauss(|x| f(x).powi(l as i32), 200, 10);
    let fk = composite_gauss(|x| f(x).powi(l as i32) * k(x), 200, 10);
    (m * m) as f64 * lo / hi + l as f64 * fk / (2.0 * hi)
}

#[test]
fn example_constants() {
    let e = MetricProfile::example();
    let constant = (3.0 * PI + 4.0) / (12.0 * PI - 24.0);
    assert_abs_diff_eq!(constant, 0.9799743308, epsilon = 1e-10);
    assert_abs_diff_eq!(rough_bound(&e, 1, &q()).unwrap(), 1.0 / (PI - 2.0) + constant, epsilon = 1e-10);
    assert_abs_diff_eq!(rough_bound(&e, 1, &q()).unwrap(), 1.8559435277, epsilon = 1e-9);
    assert_abs_diff_eq!(rough_bound(&e, 3, &q()).unwrap(), 9.0 / (PI - 2.0) + constant, epsilon = 1e-9);
    assert!(rough_bound(&e, 3, &q()).unwrap() < 10.0);
    assert_eq!(ray_bound(&e, 1, 1, &q()).unwrap(), rough_bound(&e, 1, &q()).unwrap());
    assert_abs_diff_eq!(sharp_bound(&e, 2, &q()).unwrap(), 5.12800458, epsilon = 1e-7);
}

#[test]
fn ray_bound_against_independent_quadrature() {
    let k = |x: f64| (4.0 - 12.0 * x * x) / (1.0 + x * x).powi(3);
    let e = MetricProfile::example();
    for (m, l) in [(1u32, 1u32), (2, 3), (5, 5), (3, 12)] {
        let r = reference_ray(example_f, k, m, l);
        assert_abs_diff_eq!(ray_bound(&e, m, l, &q()).unwrap(), r, epsilon = 1e-8 * r);
    }
}

#[test]
fn round_sphere_sharp_bound_is_exact() {
    let c = MetricProfile::canonical();
    assert_abs_diff_eq!(sharp_bound(&c, 1, &q()).unwrap(), 2.0, epsilon = 1e-10);
    assert_abs_diff_eq!(sharp_bound(&c, 4, &q()).unwrap(), 20.0, epsilon = 1e-9);
    assert_abs_diff_eq!(rough_bound(&c, 1, &q()).unwrap(), 2.0, epsilon = 1e-10);
    for m in 1..=10u32 {
        // ∫(1-x²)^{m-1} / ∫(1-x²)^m = 1 + 1/(2m)
        let ratio = canonical_moment(m - 1) / canonical_moment(m);
        assert_abs_diff_eq!(ratio, 1.0 + 0.5 / m as f64, epsilon = 1e-14);
        assert_abs_diff_eq!(sharp_bound(&c, m, &q()).unwrap(), (m * m + m) as f64, epsilon = 1e-8);
    }
}

#[test]
fn high_moments_stay_accurate() {
    let c = MetricProfile::canonical();
    assert_abs_diff_eq!(sharp_bound(&c, 50, &q()).unwrap(), 2550.0, epsilon = 1e-6);
    let e = MetricProfile::example();
    for m in [20u32, 50] {
        let v = sharp_bound(&e, m, &q()).unwrap();
        assert!(v.is_finite() && v > (m * m) as f64 * 0.5);
    }
}

#[test]
fn negative_curvature_chain() {
    let e = MetricProfile::example();
    let b1 = negative_curvature_bound(&e, 1, &q()).unwrap();
    assert_abs_diff_eq!(b1.value, 1.97997433, epsilon = 1e-7);
    let b10 = negative_curvature_bound(&e, 10, &q()).unwrap();
    assert_abs_diff_eq!(b10.value, 100.97997433, epsilon = 1e-7);
    assert_abs_diff_eq!(b10.canonical_gap, 9.0200257, epsilon = 1e-6);
    match negative_curvature_bound(&MetricProfile::canonical(), 3, &q()) {
        Err(Error::Inapplicable(msg)) => assert!(msg.contains("∫f")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn table_columns() {
    let c = MetricProfile::canonical();
    let rows = bounds_table(&c, 3, Some(&[1]), &q(), None).unwrap();
    for (row, v) in rows.iter().zip([2.0, 6.0, 12.0]) {
        assert_abs_diff_eq!(row.sharp.unwrap(), v, epsilon = 1e-8);
        assert_eq!(row.canonical, v);
        assert!(row.neg_curv.is_none());
        assert!(row.computed_lambda.is_none());
    }
    let rows = bounds_table(&c, 1, Some(&[1, 2, 3]), &q(), None).unwrap();
    assert_abs_diff_eq!(rows[0].ray[&1], 2.0, epsilon = 1e-10);
    assert!(rows[0].ray.values().all(|&v| v >= 2.0 - 1e-10));

    let e = MetricProfile::example();
    let rows = bounds_table(&e, 10, None, &q(), None).unwrap();
    for r in &rows {
        assert!(r.rough.unwrap() < (r.m * r.m + 1) as f64);
        assert_eq!(r.sharp, Some(r.ray[&r.m]));
        assert_eq!(r.rough, Some(r.ray[&1]));
        assert!(r.neg_curv.is_some());
    }
}

#[test]
fn table_with_spectrum_and_csv() {
    let e = MetricProfile::example();
    let s = assemble_spectrum(&e, 4, &SolverConfig::default(), None).unwrap();
    let rows = bounds_table(&e, 4, None, &q(), Some(&s)).unwrap();
    for r in &rows {
        let lambda = r.computed_lambda.unwrap();
        assert!(lambda <= r.sharp.unwrap() && lambda <= r.rough.unwrap());
    }
    let mut buf = Vec::new();
    write_bounds_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("m,sharp,rough,neg_curv,canonical,computed_lambda\n"));
    assert_eq!(text.lines().count(), 5);

    let json = serde_json::to_string(&rows).unwrap();
    let back: Vec<BoundsRow> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, rows);
}

#[test]
fn sampled_profile_cells() {
    let n = 201;
    let x: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let f: Vec<f64> = x.iter().map(|t| 1.0 - t * t).collect();
    let p = build_profile(&ProfileSpec::Sampled { x, f }).unwrap();
    let rows = bounds_table(&p, 2, None, &q(), None).unwrap();
    assert_abs_diff_eq!(rows[1].sharp.unwrap(), 6.0, epsilon = 1e-6);
}

#[test]
fn trial_residuals() {
    let cfg = SolverConfig::default();
    let c = MetricProfile::canonical();
    for m in 1..=4 {
        let r = trial_residual(&c, m, &cfg).unwrap();
        assert!(r.residual_norm <= 10.0 * r.discretization_error_estimate, "{r:?}");
        assert_abs_diff_eq!(r.rayleigh_quotient, (m * m + m) as f64, epsilon = 1e-2 * (m * m + m) as f64);
    }
    let e = MetricProfile::example();
    for n in [1024usize, 4096, 16384] {
        let r = trial_residual_on_grid(&e, 1, n).unwrap();
        assert!(r.residual_norm > 10.0 * r.discretization_error_estimate, "{r:?}");
        assert!(r.residual_norm > 0.4);
    }
    // Refinement drives the round-sphere residual down.
    let a = trial_residual_on_grid(&c, 1, 1024).unwrap().residual_norm;
    let b = trial_residual_on_grid(&c, 1, 4096).unwrap().residual_norm;
    assert!(b < 0.6 * a);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn consistency_of_named_bounds(c in -0.8f64..5.0, m in 1u32..8) {
        let p = build_profile(&ProfileSpec::bulged(c)).unwrap();
        prop_assert_eq!(sharp_bound(&p, m, &q()).unwrap(), ray_bound(&p, m, m, &q()).unwrap());
        prop_assert_eq!(rough_bound(&p, m, &q()).unwrap(), ray_bound(&p, m, 1, &q()).unwrap());
        // rough = 2m²/∫f + ∫fK/(2∫f) with ∫f = 4/3 + 16c/15.
        let area = 4.0 / 3.0 + 16.0 * c / 15.0;
        let fk = composite_gauss(|x| {
            let s = 1.0 - x * x;
            let f = s * (1.0 + c * s);
            // f = s + c s², f'' = -2 + c(12x² - 4)
            f * -0.5 * (-2.0 + c * (12.0 * x * x - 4.0))
        }, 100, 10);
        let expected = 2.0 * (m * m) as f64 / area + fk / (2.0 * area);
        prop_assert!((rough_bound(&p, m, &q()).unwrap() - expected).abs() < 1e-8 * expected.abs().max(1.0));
    }
}
