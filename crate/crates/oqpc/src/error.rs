use thiserror::Error;

/// Errors raised by the numerical pipeline and the scenario runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureNotConverged(String),
    #[error("series did not converge: partial sum {partial:e}, tail bound {tail_bound:e}")]
    SeriesNotConverged { partial: f64, tail_bound: f64 },
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("spectral phase undefined: amplitude {0:e}")]
    PhaseUndefined(f64),
    #[error("root finding failed: {0}")]
    RootFindingFailed(String),
    #[error("time {t} outside tabulated grid [0, {t_max}]")]
    OutOfGrid { t: f64, t_max: f64 },
    #[error("denominator too small at t = {t}: |G+| = {value:e}")]
    NearZeroDenominator { t: f64, value: f64 },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("Fock truncation too small: leakage {leakage:e} at n_max = {n_max}")]
    TruncationTooSmall { leakage: f64, n_max: usize },
    #[error("missing propagator element for initial index ({0}, {1})")]
    MissingElement(usize, usize),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("config validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
