//! Command-line front end.
//!
//! Exit status: 0 success, 1 a verification check failed, 2 usage or input
//! error, 3 numerical non-convergence.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds;
use crate::error::{Error, Result};
use crate::profile::{self, build_profile, MetricProfile, ProfileSpec};
use crate::quadrature::QuadratureConfig;
use crate::slsolver::{self, SolverConfig};
use crate::spectrum::{self, Check, VerificationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "sorspec", version, about = "Laplace spectra of rotationally symmetric metrics on the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the pole conditions and positivity of a profile.
    Validate(Common),
    /// Curvature summary; CSV output samples K on a uniform grid.
    Curvature {
        #[command(flatten)]
        common: Common,
        /// Number of sample points.
        #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..))]
        count: u64,
    },
    /// Lowest eigenvalues of one Fourier mode operator.
    Sl {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverArgs,
        /// Mode index; negative values fold to |k|.
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        k: i64,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
    },
    /// Distinct eigenvalues with multiplicities.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverArgs,
        /// Enumerate at least up to this index.
        #[arg(long, default_value_t = 6)]
        m_max: u64,
        /// Merge tolerance [default: max(1e-6·ceiling, 10·largest error estimate)].
        #[arg(long)]
        merge_tol: Option<f64>,
    },
    /// Upper bounds for λ_m, m = 1..m-max.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
        m_max: u32,
        /// Comma-separated trial exponents l [default: 1 and m].
        #[arg(long, value_delimiter = ',')]
        l_set: Option<Vec<u32>>,
        /// Also compute λ_m for comparison.
        #[arg(long)]
        with_eigenvalues: bool,
    },
    /// Partial sums of Σ_j 1/λ_k^j against 1/|k|.
    Trace {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        k: i64,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        terms: u64,
    },
    /// Multiplicity bound, interlacing, monotonicity, upper bounds and the
    /// round-sphere comparison in one run.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        m_max: u64,
        #[arg(long)]
        merge_tol: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Common {
    /// Builtin name (canonical, paper-example) or path to a JSON profile.
    #[arg(long)]
    profile: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    quad_tol: f64,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Relative eigenvalue tolerance.
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
    /// Finest grid (cells) for grid doubling.
    #[arg(long, default_value_t = 65536)]
    grid_max: usize,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            rel_tol: self.rel_tol,
            n_max: self.grid_max,
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl Common {
    fn quadrature(&self) -> Result<QuadratureConfig> {
        let q = QuadratureConfig::with_tol(self.quad_tol);
        q.validate()?;
        Ok(q)
    }

    fn load(&self) -> Result<MetricProfile> {
        let spec = match ProfileSpec::builtin(&self.profile) {
            Some(spec) => spec,
            None => ProfileSpec::from_json(&fs::read_to_string(&self.profile)?)?,
        };
        build_profile(&spec)
    }
}

/// A rendered report plus the exit status it implies.
struct Report {
    text: String,
    status: i32,
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn checks_csv(report: &VerificationReport) -> Result<String> {
    csv_text(
        &["name", "location", "lhs", "rhs", "passed"],
        report
            .checks
            .iter()
            .map(|c| {
                vec![
                    c.name.clone(),
                    c.location.clone(),
                    c.lhs.to_string(),
                    c.rhs.to_string(),
                    c.passed.to_string(),
                ]
            })
            .collect(),
    )
}

fn count_to_usize(v: u64) -> usize {
    usize::try_from(v).unwrap_or(usize::MAX)
}

#[derive(Serialize)]
struct ValidateOutput {
    profile: ProfileSpec,
    chart: &'static str,
    #[serde(flatten)]
    report: profile::ValidationReport,
}

#[derive(Serialize)]
struct CurvatureOutput {
    #[serde(flatten)]
    indicator: profile::CurvatureSignIndicator,
    curvature_integral: f64,
    min_curvature: f64,
    zeros: Vec<f64>,
    samples: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct VerifyOutput {
    multiplicities: Vec<usize>,
    spectrum: spectrum::GlobalSpectrum,
    canonical: spectrum::CanonicalComparison,
    report: VerificationReport,
}

fn execute(command: &Command) -> Result<(Report, &Common)> {
    match command {
        Command::Validate(common) => {
            let p = common.load()?;
            let report = profile::validate_profile(&p, 1001)?;
            let status = if report.passed { EXIT_OK } else { EXIT_CHECK_FAILED };
            let text = match common.format {
                Format::Json => json(&ValidateOutput {
                    profile: p.spec().clone(),
                    chart: p.chart_note(),
                    report,
                })?,
                Format::Csv => csv_text(
                    &["field", "value"],
                    vec![
                        vec!["passed".into(), report.passed.to_string()],
                        vec!["f_left".into(), report.endpoint_values[0].to_string()],
                        vec!["f_right".into(), report.endpoint_values[1].to_string()],
                        vec!["df_left".into(), report.endpoint_derivatives[0].to_string()],
                        vec!["df_right".into(), report.endpoint_derivatives[1].to_string()],
                        vec!["min_f_interior".into(), report.min_f_interior.to_string()],
                        vec!["area".into(), report.area.to_string()],
                        vec![
                            "curvature_integral".into(),
                            report.curvature_integral.map(|v| v.to_string()).unwrap_or_default(),
                        ],
                        vec!["messages".into(), report.messages.join("; ")],
                    ],
                )?,
            };
            Ok((Report { text, status }, common))
        }
        Command::Curvature { common, count } => {
            let p = common.load()?;
            let q = common.quadrature()?;
            let n = count_to_usize(*count);
            let samples: Vec<[f64; 2]> = (0..n)
                .map(|i| {
                    let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                    profile::curvature_at(&p, x).map(|k| [x, k])
                })
                .collect::<Result<_>>()?;
            let text = match common.format {
                Format::Json => json(&CurvatureOutput {
                    indicator: profile::curvature_sign_indicator(&p, &q)?,
                    curvature_integral: profile::integrate_curvature_moment(&p, 0, &q)?,
                    min_curvature: profile::min_curvature(&p, 1001)?,
                    zeros: profile::curvature_zeros(&p, 1001)?,
                    samples,
                })?,
                Format::Csv => csv_text(
                    &["x", "K"],
                    samples
                        .iter()
                        .map(|s| vec![s[0].to_string(), s[1].to_string()])
                        .collect(),
                )?,
            };
            Ok((Report { text, status: EXIT_OK }, common))
        }
        Command::Sl { common, solver, k, count } => {
            let p = common.load()?;
            let cfg = solver.config()?;
            let slice = slsolver::eigenvalues(&p, *k, count_to_usize(*count), &cfg)?;
            let status = if slice.converged { EXIT_OK } else { EXIT_NOT_CONVERGED };
            let text = match common.format {
                Format::Json => json(&slice)?,
                Format::Csv => csv_text(
                    &["k", "j", "eigenvalue", "error_estimate"],
                    slice
                        .eigenvalues
                        .iter()
                        .zip(&slice.error_estimates)
                        .enumerate()
                        .map(|(j, (v, e))| {
                            vec![slice.k.to_string(), (j + 1).to_string(), v.to_string(), e.to_string()]
                        })
                        .collect(),
                )?,
            };
            Ok((Report { text, status }, common))
        }
        Command::Spectrum {
            common,
            solver,
            m_max,
            merge_tol,
        } => {
            let p = common.load()?;
            let cfg = solver.config()?;
            let s = spectrum::assemble_spectrum(&p, count_to_usize(*m_max), &cfg, *merge_tol)?;
            let text = match common.format {
                Format::Json => json(&s)?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    s.write_csv(&mut buf)?;
                    String::from_utf8(buf).expect("csv output is UTF-8")
                }
            };
            Ok((Report { text, status: EXIT_OK }, common))
        }
        Command::Bounds {
            common,
            solver,
            m_max,
            l_set,
            with_eigenvalues,
        } => {
            let p = common.load()?;
            let q = common.quadrature()?;
            let cfg = solver.config()?;
            let s = if *with_eigenvalues {
                Some(spectrum::assemble_spectrum(&p, *m_max as usize, &cfg, None)?)
            } else {
                None
            };
            let rows = bounds::bounds_table(&p, *m_max, l_set.as_deref(), &q, s.as_ref())?;
            let text = match common.format {
                Format::Json => json(&rows)?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    bounds::write_bounds_csv(&rows, &mut buf)?;
                    String::from_utf8(buf).expect("csv output is UTF-8")
                }
            };
            Ok((Report { text, status: EXIT_OK }, common))
        }
        Command::Trace {
            common,
            solver,
            k,
            terms,
        } => {
            let p = common.load()?;
            let cfg = solver.config()?;
            let r = slsolver::trace_check(&p, *k, count_to_usize(*terms), &cfg)?;
            let text = match common.format {
                Format::Json => json(&r)?,
                Format::Csv => csv_text(
                    &["k", "terms", "partial_sum", "tail_estimate", "target", "deviation"],
                    vec![vec![
                        r.k.to_string(),
                        r.terms_used.to_string(),
                        r.partial_sum.to_string(),
                        r.tail_estimate.to_string(),
                        r.target.to_string(),
                        r.deviation.to_string(),
                    ]],
                )?,
            };
            Ok((Report { text, status: EXIT_OK }, common))
        }
        Command::Verify {
            common,
            solver,
            m_max,
            merge_tol,
        } => {
            let p = common.load()?;
            let q = common.quadrature()?;
            let cfg = solver.config()?;
            let out = verify(&p, count_to_usize(*m_max), &cfg, &q, *merge_tol)?;
            let status = if out.report.all_passed { EXIT_OK } else { EXIT_CHECK_FAILED };
            let text = match common.format {
                Format::Json => json(&out)?,
                Format::Csv => checks_csv(&out.report)?,
            };
            Ok((Report { text, status }, common))
        }
    }
}

fn verify(
    p: &MetricProfile,
    m_max: usize,
    cfg: &SolverConfig,
    q: &QuadratureConfig,
    merge_tol: Option<f64>,
) -> Result<VerifyOutput> {
    let half = (m_max as u32).div_ceil(2).max(1);
    let s = spectrum::assemble_spectrum(p, m_max, cfg, merge_tol)?;
    let canonical = spectrum::canonical_comparison(&s);

    let mut reports = vec![
        spectrum::verify_multiplicity_bound(&s),
        spectrum::verify_monotonicity(p, (m_max as u32).max(2), cfg)?,
        spectrum::verify_interlacing(p, half, half as usize, cfg)?,
    ];

    let rows = bounds::bounds_table(p, m_max as u32, None, q, Some(&s))?;
    let mut bound_checks = Vec::new();
    for row in &rows {
        let Some(lambda) = row.computed_lambda else { continue };
        let budget = spectrum::CHECK_BUDGET * lambda;
        for (name, value) in [("sharp_bound", row.sharp), ("rough_bound", row.rough), ("neg_curv_bound", row.neg_curv)] {
            if let Some(v) = value {
                bound_checks.push(Check {
                    name: name.to_string(),
                    location: format!("m={}", row.m),
                    lhs: lambda,
                    rhs: v,
                    passed: lambda <= v + budget,
                });
            }
        }
    }
    reports.push(VerificationReport::new(bound_checks));

    // Every index k ≥ 1 needs some m ≥ k with λ_m ≤ m(m+1); only indices
    // that leave room for a later witness are meaningful at finite depth.
    let witness_checks = canonical
        .witnesses
        .iter()
        .filter(|w| w.k >= 1 && w.k <= m_max)
        .map(|w| Check {
            name: "canonical_witness".to_string(),
            location: format!("k={}", w.k),
            lhs: w.k as f64,
            rhs: w.m.map(|m| m as f64).unwrap_or(f64::NAN),
            passed: w.m.is_some(),
        })
        .collect();
    reports.push(VerificationReport::new(witness_checks));

    Ok(VerifyOutput {
        multiplicities: s.entries.iter().map(|e| e.multiplicity).collect(),
        spectrum: s,
        canonical,
        report: VerificationReport::merge(reports),
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotConverged { .. } | Error::Accuracy { .. } => EXIT_NOT_CONVERGED,
        _ => EXIT_USAGE,
    }
}

/// Runs the CLI on `argv` (program name first). Reports go to `out` unless
/// `--out` names a file; diagnostics go to `err`.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli.command) {
        Ok((report, common)) => {
            let written = match &common.out {
                Some(path) => fs::write(path, &report.text),
                None => out.write_all(report.text.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return EXIT_USAGE;
            }
            report.status
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main_exit() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
