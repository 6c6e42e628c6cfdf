//! Classifiers: a random forest over feature vectors and a convolutional
//! network over token embeddings.

pub mod cnn;
pub mod forest;

use serde::{Deserialize, Serialize};

pub use cnn::{
    cnn_train, tune_random_search, CnnModel, LangTables, SearchSpace, TrainConfig, TrainLog, Trial,
};
pub use forest::{rf_train, ForestParams, RandomForestModel};

use crate::corpus::Label;
use crate::embeddings::EmbeddingError;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("empty training set")]
    Empty,
    #[error("{features} feature vectors but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("expected {expected} features, found {found}")]
    Dim { expected: usize, found: usize },
    #[error("feature slots differ from the model's: expected [{expected}], found [{found}]")]
    SlotMismatch { expected: String, found: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite value in {param}")]
    NonFinite { param: String },
    #[error("training diverged at epoch {epoch} (last stable epoch: {last_stable:?})")]
    Diverged {
        epoch: usize,
        last_stable: Option<usize>,
    },
    #[error("no embedding table for {0}")]
    MissingTable(crate::corpus::Lang),
    #[error("all {0} tuning trials diverged")]
    AllTrialsDiverged(usize),
    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// One classifier decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub p_ironic: f64,
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String, ModelError> {
    std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_file(path: &std::path::Path, text: &str) -> Result<(), ModelError> {
    std::fs::write(path, text).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })
}
