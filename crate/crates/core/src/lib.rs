//! Cross-lingual irony detection for short texts.
//!
//! The crate covers the whole pipeline: corpus loading and tweet cleaning,
//! surface and lexicon features, pretrained embedding tables, orthogonal
//! alignment of embedding spaces with CSLS retrieval, a random forest and a
//! convolutional classifier, and an experiment runner that evaluates
//! monolingual and cross-lingual train/test configurations.
//!
//! See the guide in `book/` for a walk-through of each stage.

pub mod align;
pub mod corpus;
pub mod embeddings;
pub mod eval;
pub mod features;
pub mod models;
pub mod rng;
pub mod synthetic;

mod script;

pub use corpus::{Dataset, Label, Lang, Tweet};
