use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum BanditError {
    #[error("degenerate weight vector")]
    DegenerateWeights,

    #[error("invalid action distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("action {action} out of range for {arms} arms")]
    ActionOutOfRange { action: usize, arms: usize },

    #[error("non-finite context feature at index {0}")]
    NonFiniteFeature(usize),

    #[error("loss {0} outside [0, 1]")]
    LossOutOfRange(f64),

    #[error("ill-posed least squares; set λ>0")]
    IllPosed,

    #[error("no snapshot for predictor {requested} (store holds predictors 1..={available})")]
    MissingSnapshot { requested: usize, available: usize },

    #[error("diagnostic requires synthetic environment")]
    NoGroundTruth,

    #[error("supervised learner needs labelled feedback; the environment provides none")]
    LabelsUnavailable,

    #[error("row index {index} out of range ({rows} rows)")]
    RowOutOfRange { index: usize, rows: usize },

    #[error("{0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl BanditError {
    pub fn config(msg: impl Into<String>) -> Self {
        BanditError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BanditError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures reading or writing files, including malformed
    /// input files.
    pub fn is_io(&self) -> bool {
        matches!(self, BanditError::Io { .. } | BanditError::Parse { .. })
    }
}

pub type Result<T> = std::result::Result<T, BanditError>;
