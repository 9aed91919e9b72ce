use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A thermodynamic or geometric input outside its admissible range.
    #[error("domain error: {field} must be positive, got {value}")]
    Domain { field: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("positivity failure: {quantity} = {value:e} in cell {cell} at t = {time}")]
    Positivity {
        quantity: &'static str,
        cell: usize,
        time: f64,
        value: f64,
    },

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("system is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("SSPRK3 stage {stage} failed: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("maximum step count {0} exceeded")]
    MaxSteps(usize),

    #[error("non-positive maximum wave speed {0:e}")]
    ZeroWaveSpeed(f64),

    #[error("phase fit failed: {0}")]
    PhaseFit(String),

    #[error("empty window [{lo}, {hi}]")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("csv error in {path}: {message}")]
    Csv { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics (positivity, solvers, time stepping)
    /// as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Positivity { .. }
            | Error::SolverDiverged { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::Singular(_)
            | Error::MaxSteps(_)
            | Error::ZeroWaveSpeed(_)
            | Error::PhaseFit(_) => true,
            Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
