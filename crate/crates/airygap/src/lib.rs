//! Gap probabilities of the Airy point process on unions of bulk intervals.
//!
//! The crate has three layers:
//!
//! * numerical evaluation of `log det(I - K^Ai χ_I)` over a finite union of
//!   intervals by Nyström discretization with Gauss–Legendre quadrature
//!   ([`fredholm`]),
//! * the large-gap expansion `c r³ - (3g/8) log r + log θ(ν(r)) + C` built
//!   from hyperelliptic surface data (branch points, A-cycle matrix, period
//!   matrix τ, frequencies Ω) attached to the gap configuration
//!   ([`riemann`], [`asympt`], [`specialfn`]),
//! * an end-to-end verification harness that fits the constant `C` against
//!   the Fredholm numerics and measures the residual decay and the θ
//!   oscillation ([`verify`]).
//!
//! Everything is plain `f64`; all operations are pure functions and safe to
//! call concurrently.

// Frozen reference literals keep their full decimal expansions, and negated
// comparisons like `!(x > 0.0)` are deliberate NaN guards.
#![allow(clippy::excessive_precision)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::manual_is_multiple_of)]

pub mod asympt;
pub mod fredholm;
pub mod quad;
pub mod riemann;
pub mod specialfn;
pub mod verify;

/// Crate-wide error type.
///
/// Variants mirror the failure modes of the numerical pipeline:
/// input-validation errors (`Domain`, `Inadmissible`, `Degenerate`,
/// `Unsupported`, `InsufficientData`, `Aliasing`) versus numerical failures
/// (`NoSolution`, `Ambiguous`, `Convergence`, `NearSingular`,
/// `InconsistentHomology`, `SolverInconsistency`). `Stage` wraps an error
/// with the pipeline stage that produced it.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("inadmissible configuration: {0}")]
    Inadmissible(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("grid aliasing: {0}")]
    Aliasing(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("ambiguous solution: sign changes bracket roots at x0 = {roots:?}")]
    Ambiguous { roots: Vec<f64> },
    #[error("quadrature did not converge: {0}")]
    Convergence(String),
    #[error("near-singular Fredholm matrix: {0}")]
    NearSingular(String),
    #[error("inconsistent homology: {0}")]
    InconsistentHomology(String),
    #[error("solver inconsistency: {0}")]
    SolverInconsistency(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Annotate an error with the pipeline stage it came from.
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// `true` for errors caused by invalid input rather than by a numerical
    /// failure. CLI front ends map the former to exit code 2 and the latter
    /// to exit code 3.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Domain(_)
            | Error::Inadmissible(_)
            | Error::Degenerate(_)
            | Error::Unsupported(_)
            | Error::InsufficientData(_)
            | Error::Aliasing(_) => true,
            Error::Stage { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub use asympt::{is_admissible, leading_coeff, nu_vector, predicted_logf, solve_system,
                 solve_x0_g1, IntervalConfig, SurfaceData};
pub use fredholm::{airy_kernel, gap_probability_scaled, log_gap_probability, NystromResult};
pub use riemann::{abel_map_g1, a_cycle_matrix, moments, omega_frequencies, period_matrix,
                  sqrt_r, BranchPoints, Sheet};
pub use specialfn::{airy_ai, airy_ai_prime, ellint_e, ellint_k, ThetaEvaluator};
pub use verify::{check_oscillation, fit_constant, run_verification, safe_r_window,
                 VerificationReport};
