//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter violates its domain (negative rate, zero dipole, …).
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// The closed-form susceptibility denominator vanished. Only reachable
    /// when every dephasing rate is zero and the detuning sits exactly on a
    /// dressed resonance.
    #[error("degenerate susceptibility denominator at delta = {delta} rad/s")]
    DegenerateDenominator { delta: f64 },

    /// Two poles coincide to better than the relative separation threshold;
    /// a partial-fraction decomposition would produce meaningless residues.
    #[error("near-degenerate poles (min separation {separation:.3e} of scale {scale:.3e})")]
    DegeneratePoles { separation: f64, scale: f64 },

    /// The adiabatic-elimination validity gate failed.
    #[error("validity gate violated: {0}")]
    GateViolation(String),

    /// The Liouvillian nullspace is not one-dimensional or the linear solve
    /// left a residual above tolerance.
    #[error("steady state not unique or ill-conditioned: {0}")]
    SteadyState(String),

    /// Two spectra that must share a grid do not.
    #[error("spectrum grids do not match")]
    GridMismatch,

    /// A pipeline stage needed a specific number of dips.
    #[error("expected {expected} transmission dips, found {found}")]
    DipCount { expected: usize, found: usize },

    /// An iterative fit ran out of iterations without meeting its tolerance.
    #[error("fit did not converge after {iterations} iterations (residual rms {residual_rms:.3e})")]
    NonConvergence { iterations: usize, residual_rms: f64 },

    /// A spectrum CSV line failed to parse.
    #[error("CSV parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
