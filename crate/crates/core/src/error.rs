use thiserror::Error;

/// One violated config invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub field: &'static str,
    pub reason: String,
}

impl ConfigIssue {
    pub fn new(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigIssue {
            field,
            reason: reason.into(),
        }
    }
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("`{}`: {}", i.field, i.reason))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Everything that can go wrong while building scenarios, synthesizing data,
/// evaluating detectors or running experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {}", format_issues(.0))]
    InvalidConfig(Vec<ConfigIssue>),

    #[error("matrix is not Hermitian positive definite: {context}")]
    NotPositiveDefinite { context: String },

    #[error("sample-starved: {l_train} training samples for data dimension {n_dim}; ordinary detectors need L >= N")]
    SampleStarved { l_train: usize, n_dim: usize },

    #[error("rank deficient {what}: smallest/largest singular value ratio {ratio:e}")]
    RankDeficient { what: &'static str, ratio: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: String,
        got: String,
    },

    #[error("cannot scale coordinates: {0}")]
    DegenerateScaling(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig(vec![ConfigIssue::new(field, reason)])
    }

    /// Short machine-readable tag used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::SampleStarved { .. } => "sample_starved",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::DegenerateScaling(_) => "degenerate_scaling",
            Error::Precondition(_) => "precondition",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
