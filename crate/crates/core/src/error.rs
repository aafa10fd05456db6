use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("quadrature did not converge (partial estimate {estimate}, error {error})")]
    QuadratureNotConverged { estimate: f64, error: f64 },

    #[error("root scan exhausted at N = {cap} (f(N) - N = {gap} at the cap)")]
    ScanExhausted { cap: f64, gap: f64 },

    #[error("no bracket for g(b) = -1 found in [{lo}, {hi}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("no 2-cycle found (only the fixed point N* = {n_star}; b >= b*?)")]
    NoCycleFound { n_star: f64 },

    #[error("monotonicity violated at index {index}")]
    MonotonicityViolation { index: usize },

    #[error("profile mass outside the grid: tail mass {deficit} left of v_min")]
    ProfileMassDeficit { deficit: f64 },

    #[error("initial condition truncated at V_F: analytic mass {excess} beyond threshold")]
    TruncatedInitialCondition { excess: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("numerical instability at t = {t}: {reason}")]
    Instability { t: f64, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
