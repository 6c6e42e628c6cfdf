//! Seeded random search over CNN hyperparameters.

use rand::seq::IndexedRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cnn_train, LangTables, TrainConfig};
use crate::corpus::Dataset;
use crate::models::ModelError;
use crate::rng;

/// Candidate values per hyperparameter; each trial picks one of each
/// uniformly. Unlisted fields come from the base configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpace {
    pub learning_rate: Vec<f64>,
    pub dropout_rate: Vec<f64>,
    pub batch_size: Vec<usize>,
    pub n_filters: Vec<usize>,
    pub widths: Vec<Vec<usize>>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            learning_rate: vec![3e-4, 1e-3, 3e-3],
            dropout_rate: vec![0.3, 0.5],
            batch_size: vec![16, 32, 64],
            n_filters: vec![50, 100],
            widths: vec![vec![3, 4, 5], vec![2, 3, 4], vec![1, 2, 3]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub config: TrainConfig,
    /// `None` when the trial failed.
    pub val_macro_f1: Option<f64>,
    pub epochs_run: usize,
    pub error: Option<String>,
}

fn pick<T: Clone>(values: &[T], base: &T, r: &mut rng::Rng) -> T {
    values.choose(r).cloned().unwrap_or_else(|| base.clone())
}

/// Draws `budget` configurations, trains each with early stopping, and
/// returns the one with the best validation macro-F (earliest on ties)
/// together with the full trial log.
pub fn tune_random_search(
    ds: &Dataset,
    tables: &LangTables,
    base: &TrainConfig,
    space: &SearchSpace,
    budget: usize,
    seed: u64,
) -> Result<(TrainConfig, Vec<Trial>), ModelError> {
    if budget == 0 {
        return Err(ModelError::Config(
            "tuning budget must be at least 1".into(),
        ));
    }
    let mut r = rng::seeded(seed);
    let configs: Vec<TrainConfig> = (0..budget)
        .map(|_| {
            let mut c = base.clone();
            c.learning_rate = pick(&space.learning_rate, &c.learning_rate, &mut r);
            c.dropout_rate = pick(&space.dropout_rate, &c.dropout_rate, &mut r);
            c.batch_size = pick(&space.batch_size, &c.batch_size, &mut r);
            c.n_filters = pick(&space.n_filters, &c.n_filters, &mut r);
            c.widths = pick(&space.widths, &c.widths, &mut r);
            if c.val_fraction.is_none() {
                c.val_fraction = Some(0.2);
            }
            if c.early_stop_patience.is_none() {
                c.early_stop_patience = TrainConfig::default().early_stop_patience;
            }
            c.seed = seed;
            c
        })
        .collect();
    let trials: Vec<Trial> = configs
        .into_par_iter()
        .enumerate()
        .map(|(index, config)| match cnn_train(ds, tables, &config) {
            Ok((_, log)) => Trial {
                index,
                val_macro_f1: log.best_val_macro_f1,
                epochs_run: log.epochs.len(),
                error: None,
                config,
            },
            Err(e) => {
                log::warn!("trial {index} failed: {e}");
                Trial {
                    index,
                    config,
                    val_macro_f1: None,
                    epochs_run: 0,
                    error: Some(e.to_string()),
                }
            }
        })
        .collect();
    let mut best: Option<&Trial> = None;
    for t in &trials {
        if let Some(f) = t.val_macro_f1 {
            if best.is_none_or(|b| f > b.val_macro_f1.unwrap_or(f64::NEG_INFINITY)) {
                best = Some(t);
            }
        }
    }
    match best {
        Some(b) => Ok((b.config.clone(), trials)),
        None => Err(ModelError::AllTrialsDiverged(trials.len())),
    }
}
