use std::path::PathBuf;

use thiserror::Error;

use crate::fnspace::GridFunction;
use crate::solver::SolveResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid function value at cell (space {space}, time {time}) is not finite: {value}")]
    NonFinite { space: usize, time: usize, value: f64 },

    #[error("grid mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `j2` at the origin with a residual outside the dual unit ball. Carries the
    /// best-aligned admissible multiplier (the residual scaled back onto the ball).
    #[error("degenerate case: |-residual/mu| in L2(0,T;Linf) is {norm} > 1")]
    DegenerateCase { norm: f64, lambda: Box<GridFunction> },

    #[error("pairing test and pointwise characterization disagree: {0}")]
    InconsistentCharacterization(String),

    #[error("prox did not converge (residual {residual:e})")]
    ProxNoConvergence { residual: f64 },

    #[error("base point violates the control bounds by {violation:e}")]
    InfeasibleBase { violation: f64 },

    #[error("first-order conditions violated (residual {residual:e})")]
    NotStationary { residual: f64 },

    #[error("second subderivative is not known for j2 at the origin")]
    UnknownValue,

    #[error("base point is zero where a nonzero point is required")]
    ZeroBase,

    #[error("direction is not in the critical cone")]
    NotCritical,

    #[error("Newton iteration diverged at time step {step} (residual {residual:e})")]
    NewtonDiverged { step: usize, residual: f64 },

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("maximum number of iterations reached (kkt residual {:e})", .0.kkt_residual)]
    MaxIterReached(Box<SolveResult>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed grid function file: {0}")]
    Format(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
