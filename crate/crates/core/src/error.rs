use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid cache file: {0}")]
    Cache(String),

    #[error("class maps cover different author sets: {0}")]
    AuthorSetMismatch(String),

    #[error("invalid model specification: {0}")]
    ModelSpec(String),

    #[error("no usable rows for model {0}")]
    EmptyDesign(String),

    #[error("outcome is constant ({value}) for model {model}; nothing to fit")]
    ConstantOutcome { model: String, value: bool },

    #[error("design matrix is rank deficient: column `{column}` is a linear combination of {dependent_on:?}")]
    RankDeficient {
        column: String,
        dependent_on: Vec<String>,
    },

    #[error("perfect separation suspected: |coefficient| of `{column}` exceeded {limit}; drop or merge the separating predictor")]
    Separation { column: String, limit: f64 },

    #[error("collinearity diagnostics need at least two predictors, got {0}")]
    TooFewPredictors(usize),

    #[error("predictor `{0}` is constant")]
    ConstantPredictor(String),

    #[error("singular correlation matrix: `{first}` and `{second}` have r = {r:.6}")]
    SingularCorrelation {
        first: String,
        second: String,
        r: f64,
    },

    #[error("persistence target {target}% is outside the achievable range [{low:.2}%, {high:.2}%]")]
    CalibrationRange { target: f64, low: f64, high: f64 },

    #[error("manifest verification failed for {0}")]
    Manifest(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
