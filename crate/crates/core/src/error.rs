use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("weight length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid bundle: {0}")]
    InvalidBundle(String),
    #[error("index structure violation: {0}")]
    IndexArity(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("operator is not well-defined; residual slots: {}", residual.join(", "))]
    NotWellDefined { residual: Vec<String> },
    #[error("eigenvalue coincidence below `{slot}` with `{with}`; use an induced operator instead")]
    Coincidence { slot: String, with: String },
    #[error("unknown slot `{0}`")]
    UnknownSlot(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
