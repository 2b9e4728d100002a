use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state tracking failed between E = {e_from} and {e_to} kV/cm (overlap {overlap:.3}); refine the grid")]
    Tracking { e_from: f64, e_to: f64, overlap: f64 },

    #[error("state labeling failed: {0}")]
    Labeling(String),

    #[error("no gap minimum inside [{lo}, {hi}] kV/cm")]
    NoMinimum { lo: f64, hi: f64 },

    #[error("no |J_perp| maximum inside [{lo}, {hi}] kV/cm")]
    NoMaximum { lo: f64, hi: f64 },

    #[error("J_z/J_perp never reaches {ratio} inside [{lo}, {hi}] kV/cm")]
    RatioNotReached { ratio: f64, lo: f64, hi: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("initial-state sign is ambiguous for qubit {0}: intra-qubit J_z vanishes")]
    AmbiguousSign(usize),

    #[error("size limit exceeded: {what} = {size} > {limit}")]
    SizeLimit { what: String, size: usize, limit: usize },

    #[error("norm drift {drift:.3e} at step {step}")]
    NormDrift { step: usize, drift: f64 },

    #[error("Krylov propagation did not converge: {0}")]
    Convergence(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("empty table: {0}")]
    EmptyTable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => 2,
            Error::SizeLimit { .. } => 4,
            Error::Io(_) | Error::EmptyTable(_) => 1,
            _ => 3,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Tracking { .. } => "tracking",
            Error::Labeling(_) => "labeling",
            Error::NoMinimum { .. } => "no_minimum",
            Error::NoMaximum { .. } => "no_maximum",
            Error::RatioNotReached { .. } => "ratio_not_reached",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Geometry(_) => "geometry",
            Error::AmbiguousSign(_) => "ambiguous_sign",
            Error::SizeLimit { .. } => "size_limit",
            Error::NormDrift { .. } => "norm_drift",
            Error::Convergence(_) => "convergence",
            Error::Config(_) => "config",
            Error::EmptyTable(_) => "empty_table",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
