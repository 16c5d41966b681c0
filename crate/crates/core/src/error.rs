use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("subsystem label `{0}` appears more than once")]
    DuplicateLabel(String),

    #[error("subsystem `{0}` must have dimension at least 1")]
    ZeroDimension(String),

    #[error("projector is not idempotent (max deviation {0:e})")]
    NotIdempotent(f64),

    #[error("partial trace must keep at least one subsystem")]
    EmptyKeep,

    #[error("zero vector cannot be normalized")]
    ZeroNorm,

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("parameter {name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("degenerate denominator in {0}")]
    Degenerate(&'static str),

    #[error("unknown figure id {0}")]
    UnknownFigure(u32),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("detector index {0} out of range")]
    DetectorIndex(u8),
}
