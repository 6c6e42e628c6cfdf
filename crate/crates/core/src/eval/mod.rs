//! Metrics and the experiment runner for monolingual and cross-lingual
//! train/test configurations.

mod experiment;
mod matrix;
mod metrics;
mod report;

pub use experiment::{
    run_experiment, run_experiment_traced, write_artifacts, write_predictions, Access, AccessLog,
    ExperimentData, ExperimentLog, ExperimentResult, ModelLog, PredictionRow, SealedTest,
};
pub use matrix::{
    load_matrix, parse_matrix, CorpusPaths, ExperimentSpec, MapSource, Matrix, MatrixError,
    ModelFamily, RfSettings, Settings,
};
pub use metrics::{confusion, macro_f1, metrics, ConfusionMatrix, Metrics};
pub use report::{read_results, report_csv, report_text, ResultRecord};

pub use matrix::{crosslingual_specs, monolingual_specs};

use crate::align::AlignError;
use crate::corpus::{CorpusError, Lang};
use crate::embeddings::EmbeddingError;
use crate::features::FeatureError;
use crate::models::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{gold} gold labels but {pred} predictions")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("no alignment map from {from} to {to}")]
    MissingMap { from: Lang, to: Lang },
    #[error("no corpus for {0}")]
    MissingCorpus(Lang),
    #[error("no embeddings for {0}")]
    MissingEmbeddings(Lang),
    #[error("invalid experiment {id}: {message}")]
    Spec { id: String, message: String },
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.display().to_string(),
        source,
    }
}
