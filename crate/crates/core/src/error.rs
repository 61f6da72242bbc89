use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("discretization error: {0}")]
    Discretization(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("point is outside the sphere chart: {0}")]
    OutOfChart(String),

    #[error("degenerate direction: {0}")]
    DegenerateDirection(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("kernel normalization failed: residual {residual:e}")]
    KernelNormalization { residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("functional failed at direction {direction}, t = {t}: {source}")]
    AtNode {
        direction: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },
}
