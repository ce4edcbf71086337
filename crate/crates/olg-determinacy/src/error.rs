use thiserror::Error;

/// Errors surfaced by solvers, model constructors, and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("capital must be positive, got k = {0}")]
    NonpositiveCapital(f64),

    #[error("degenerate economy: wage {w} <= 0 at k = {k}")]
    NonpositiveWage { k: f64, w: f64 },

    #[error("no sign change on [{lo}, {hi}]; cannot bracket a root")]
    NoBracket { lo: f64, hi: f64 },

    #[error("root finder stopped after {max_iter} iterations with residual {residual}")]
    NoConvergence { residual: f64, max_iter: usize },

    #[error("({k}, {p}) is not a steady state: residual {residual}")]
    NotSteadyState { k: f64, p: f64, residual: f64 },

    #[error("implicit system is singular at the steady state: 1 - s_R f'' = {0}")]
    SingularSystem(f64),

    #[error("steady state is not monetary: P = {0}")]
    NotMonetary(f64),

    #[error("no successor state: {0}")]
    StepFailed(String),

    #[error("shooting bracket does not straddle the stable manifold")]
    NoSignChange,

    #[error("successor-map derivative vanishes at P = {0}; no local classification")]
    BorderlineDerivative(f64),

    #[error("successor map is multivalued near z = {z}: gamma_v(b+z) > 1 + b/z")]
    MultivaluedSuccessor { z: f64 },

    #[error("sweep grid has {cells} cells, above the cap of {cap}")]
    GridCapExceeded { cells: u64, cap: u64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
