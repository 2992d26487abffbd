use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UafError {
    #[error("parameter {name} is not finite ({value})")]
    NonFiniteParameter { name: &'static str, value: f64 },

    #[error("input {0} is not finite")]
    NonFiniteInput(f64),

    #[error("exponent argument {argument} overflows exp()")]
    Overflow { argument: f64 },

    #[error("leaky relu slope {0} outside (0, 0.1]")]
    InvalidAlpha(f64),

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("no characteristic equation for {0}")]
    NoCharacteristicEquation(String),

    #[error("invalid fit spec: {0}")]
    InvalidFitSpec(String),

    #[error("invalid network config: {0}")]
    InvalidConfig(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("unknown activation kind `{0}`")]
    UnknownKind(String),
}

pub type Result<T> = std::result::Result<T, UafError>;
