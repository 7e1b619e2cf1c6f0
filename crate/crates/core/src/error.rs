use thiserror::Error;

/// Errors raised anywhere in the detection pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("infeasible geometry: excess path {excess:.3} m is below twice the range resolution {delta_r} m")]
    InfeasibleGeometry { excess: f64, delta_r: f64 },

    #[error("window of {window} bins is too small for the double-bounce echo at bin {m}")]
    WindowTooSmall { m: usize, window: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cyclic estimation decreased the likelihood at pair ({n}, {m}), update {update}: log-det {before} -> {after}")]
    NonMonotonic {
        n: usize,
        m: usize,
        update: usize,
        before: f64,
        after: f64,
    },

    #[error("insufficient trials: {trials} trials cannot resolve pfa {pfa}")]
    InsufficientTrials { trials: usize, pfa: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
