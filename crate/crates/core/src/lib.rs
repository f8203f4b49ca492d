//! Laplace spectra of rotationally symmetric metrics on the 2-sphere.
//!
//! A metric `dx²/f + f dθ²` on (-1, 1) × [0, 2π) splits, mode by mode in θ,
//! into one-dimensional Sturm–Liouville problems. This crate solves those
//! problems, assembles the distinct eigenvalues of the surface with their
//! multiplicities, and evaluates the variational upper bounds built from
//! moments of f.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod profile;
pub mod quadrature;
pub mod slsolver;
pub mod spectrum;
mod spline;
pub mod tridiag;

pub use error::{Error, Result};
pub use profile::{build_profile, MetricProfile, ProfileSpec};
pub use quadrature::{QuadratureConfig, QuadratureRule};
pub use slsolver::{SLSpectrumSlice, SolverConfig, TraceReport};
pub use spectrum::{GlobalSpectrum, VerificationReport};
pub use bounds::{BoundsRow, ResidualDiagnostic};
