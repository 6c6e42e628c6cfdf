use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Architecture, CnnModel, Grads, LangTables, Vocab};
use crate::corpus::{Dataset, Label};
use crate::eval::macro_f1;
use crate::models::ModelError;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub dropout_rate: f64,
    pub widths: Vec<usize>,
    pub n_filters: usize,
    pub max_seq_len: usize,
    /// Epochs without validation improvement before stopping; `None`
    /// trains for all `epochs` and returns the final model.
    pub early_stop_patience: Option<usize>,
    /// Share of the training data held out for validation; `None` trains
    /// on everything.
    pub val_fraction: Option<f64>,
    pub stratify: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 25,
            batch_size: 32,
            learning_rate: 1e-3,
            dropout_rate: 0.5,
            widths: vec![3, 4, 5],
            n_filters: 100,
            max_seq_len: 40,
            early_stop_patience: Some(5),
            val_fraction: Some(0.2),
            stratify: true,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Config(m));
        if self.epochs == 0 || self.batch_size == 0 || self.n_filters == 0 || self.max_seq_len == 0
        {
            return bad("epochs, batch_size, n_filters and max_seq_len must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate {} must be positive",
                self.learning_rate
            ));
        }
        if self.widths.is_empty() || self.widths.contains(&0) {
            return bad("widths must be non-empty and positive".into());
        }
        if self.early_stop_patience == Some(0) {
            return bad("early_stop_patience must be positive".into());
        }
        if let Some(f) = self.val_fraction {
            if !(f > 0.0 && f < 1.0) {
                return bad(format!("val_fraction {f} outside (0, 1)"));
            }
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad(format!("dropout_rate {} outside [0, 1)", self.dropout_rate));
        }
        Ok(())
    }

    pub fn architecture(&self, dim: usize) -> Architecture {
        Architecture {
            dim,
            widths: self.widths.clone(),
            n_filters: self.n_filters,
            max_seq_len: self.max_seq_len,
            dropout: self.dropout_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub val_macro_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub n_train: usize,
    pub n_val: usize,
    pub epochs: Vec<EpochLog>,
    /// Epoch whose parameters were returned.
    pub returned_epoch: usize,
    pub best_val_macro_f1: Option<f64>,
    pub stopped_early: bool,
}

/// Splits indices `0..labels.len()` into training and validation parts.
/// The validation size is `round(n · fraction)` (at most `n − 1`); when
/// stratified, class quotas follow the largest-remainder rule.
pub fn holdout_split(
    labels: &[Label],
    fraction: f64,
    stratify: bool,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let n = labels.len();
    let n_val = ((n as f64 * fraction).round() as usize).min(n.saturating_sub(1));
    let mut r = rng::seeded(seed);
    let mut val = Vec::with_capacity(n_val);
    if stratify {
        let classes: [Vec<usize>; 2] =
            [Label::NonIronic, Label::Ironic].map(|c| (0..n).filter(|&i| labels[i] == c).collect());
        let exact: Vec<f64> = classes
            .iter()
            .map(|c| c.len() as f64 * n_val as f64 / n as f64)
            .collect();
        let mut quota: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
        let mut left = n_val - quota.iter().sum::<usize>();
        let mut by_rem: Vec<usize> = vec![0, 1];
        by_rem.sort_by(|&a, &b| {
            (exact[b] - quota[b] as f64).total_cmp(&(exact[a] - quota[a] as f64))
        });
        for c in by_rem {
            if left > 0 && quota[c] < classes[c].len() {
                quota[c] += 1;
                left -= 1;
            }
        }
        for (c, members) in classes.into_iter().enumerate() {
            let mut m = members;
            m.shuffle(&mut r);
            val.extend_from_slice(&m[..quota[c]]);
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut r);
        val.extend_from_slice(&all[..n_val]);
    }
    val.sort_unstable();
    let mut is_val = vec![false; n];
    val.iter().for_each(|&i| is_val[i] = true);
    let train = (0..n).filter(|&i| !is_val[i]).collect();
    (train, val)
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// Adam with lazy updates for embedding rows: only rows present in a
/// gradient have their moments and values touched.
struct Adam {
    lr: f64,
    t: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    emb_m: BTreeMap<usize, Vec<f64>>,
    emb_v: BTreeMap<usize, Vec<f64>>,
}

impl Adam {
    fn new(model: &CnnModel, lr: f64) -> Adam {
        let sizes: Vec<usize> = model.param_groups().iter().skip(1).map(|g| g.len).collect();
        Adam {
            lr,
            t: 0,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            emb_m: BTreeMap::new(),
            emb_v: BTreeMap::new(),
        }
    }

    fn update(lr_t: f64, p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], bc2: f64) {
        for i in 0..p.len() {
            m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
            v[i] = BETA2 * v[i] + (1.0 - BETA2) * g[i] * g[i];
            p[i] -= lr_t * m[i] / ((v[i] / bc2).sqrt() + EPS);
        }
    }

    fn step(&mut self, model: &mut CnnModel, g: &Grads) {
        self.t += 1;
        let bc1 = 1.0 - BETA1.powi(self.t);
        let bc2 = 1.0 - BETA2.powi(self.t);
        let lr_t = self.lr / bc1;
        let dim = model.arch.dim;
        for (&row, gr) in &g.emb {
            let m = self.emb_m.entry(row).or_insert_with(|| vec![0.0; dim]);
            let v = self.emb_v.entry(row).or_insert_with(|| vec![0.0; dim]);
            Adam::update(
                lr_t,
                &mut model.emb[row * dim..(row + 1) * dim],
                gr,
                m,
                v,
                bc2,
            );
        }
        let mut k = 0;
        for w in 0..model.filters.len() {
            Adam::update(
                lr_t,
                &mut model.filters[w],
                &g.filters[w],
                &mut self.m[k],
                &mut self.v[k],
                bc2,
            );
            Adam::update(
                lr_t,
                &mut model.filter_bias[w],
                &g.filter_bias[w],
                &mut self.m[k + 1],
                &mut self.v[k + 1],
                bc2,
            );
            k += 2;
        }
        Adam::update(
            lr_t,
            &mut model.dense,
            &g.dense,
            &mut self.m[k],
            &mut self.v[k],
            bc2,
        );
        Adam::update(
            lr_t,
            &mut model.dense_bias,
            &g.dense_bias,
            &mut self.m[k + 1],
            &mut self.v[k + 1],
            bc2,
        );
    }
}

/// Trains a CNN on `ds`. The vocabulary is every token of `ds`; rows are
/// initialised from the table of each tweet's language in `tables`.
///
/// Deterministic for a given configuration: one generator seeded from
/// `cfg.seed` draws the initial weights and another the batch order and
/// dropout masks, and gradients are summed in a fixed order.
pub fn cnn_train(
    ds: &Dataset,
    tables: &LangTables,
    cfg: &TrainConfig,
) -> Result<(CnnModel, TrainLog), ModelError> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(ModelError::Empty);
    }
    let dim = tables
        .dim()
        .ok_or_else(|| ModelError::Config("no embedding tables given".into()))?;
    for t in ds {
        if tables.get(t.lang).is_none() {
            return Err(ModelError::MissingTable(t.lang));
        }
    }
    let labels = ds.labels();
    let (train_idx, val_idx) = match cfg.val_fraction {
        Some(f) => holdout_split(&labels, f, cfg.stratify, cfg.seed),
        None => ((0..ds.len()).collect(), Vec::new()),
    };
    if val_idx.is_empty() && cfg.val_fraction.is_some() {
        log::warn!("validation split is empty; training without early stopping");
    }
    let train_ds = ds.select(&train_idx);
    let vocab = Vocab::build(&train_ds);
    let mut model = CnnModel::init(vocab, cfg.architecture(dim), tables, cfg.seed)?;

    let encode = |idx: &[usize], model: &CnnModel| -> Vec<(Vec<usize>, Label)> {
        idx.iter()
            .map(|&i| {
                let t = &ds.tweets()[i];
                (model.encode(&t.text, t.lang), t.label)
            })
            .collect()
    };
    let train = encode(&train_idx, &model);
    let val = encode(&val_idx, &model);
    let val_refs: Vec<(&[usize], Label)> =
        val.iter().map(|(ids, l)| (ids.as_slice(), *l)).collect();
    let val_gold: Vec<Label> = val.iter().map(|(_, l)| *l).collect();

    let mut adam = Adam::new(&model, cfg.learning_rate);
    let mut r = rng::seeded(cfg.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut log = TrainLog {
        n_train: train.len(),
        n_val: val.len(),
        epochs: Vec::new(),
        returned_epoch: 0,
        best_val_macro_f1: None,
        stopped_early: false,
    };
    let mut best: Option<(f64, usize, CnnModel)> = None;
    let mut since_improvement = 0;
    let mut last_stable: Option<usize> = None;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut r);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&[usize], Label)> = chunk
                .iter()
                .map(|&i| (train[i].0.as_slice(), train[i].1))
                .collect();
            let masks: Vec<Vec<f64>> = chunk.iter().map(|_| model.dropout_mask(&mut r)).collect();
            let (loss, grads) = model.loss_and_grads(&batch, Some(&masks));
            if !loss.is_finite() {
                log::error!("loss became {loss} in epoch {epoch}");
                return Err(ModelError::Diverged { epoch, last_stable });
            }
            if let Some(param) = grads.non_finite() {
                log::error!("non-finite {param} in epoch {epoch}");
                return Err(ModelError::Diverged { epoch, last_stable });
            }
            adam.step(&mut model, &grads);
            if let Some(param) = model.all_finite() {
                log::error!("non-finite {param} after update in epoch {epoch}");
                return Err(ModelError::Diverged { epoch, last_stable });
            }
            loss_sum += loss * chunk.len() as f64;
        }
        last_stable = Some(epoch);
        let train_loss = loss_sum / train.len() as f64;
        let (val_loss, val_f) = if val.is_empty() {
            (None, None)
        } else {
            let pred: Vec<Label> = val
                .iter()
                .map(|(ids, _)| model.predict_ids(ids).label)
                .collect();
            (
                Some(model.loss(&val_refs)),
                Some(macro_f1(&val_gold, &pred)),
            )
        };
        log::debug!("epoch {epoch}: train loss {train_loss:.5} val F {val_f:?}");
        log.epochs.push(EpochLog {
            epoch,
            train_loss,
            val_loss,
            val_macro_f1: val_f,
        });
        if let Some(f) = val_f {
            // Later epochs win ties; only strict improvements reset patience.
            match &best {
                Some((bf, _, _)) if f < *bf => since_improvement += 1,
                Some((bf, _, _)) if f == *bf => {
                    since_improvement += 1;
                    best = Some((f, epoch, model.clone()));
                }
                _ => {
                    since_improvement = 0;
                    best = Some((f, epoch, model.clone()));
                }
            }
            if cfg
                .early_stop_patience
                .is_some_and(|p| since_improvement >= p)
            {
                log.stopped_early = epoch < cfg.epochs;
                break;
            }
        }
    }
    log.best_val_macro_f1 = best.as_ref().map(|b| b.0);
    let final_epoch = log.epochs.last().map_or(0, |e| e.epoch);
    match best {
        Some((_, epoch, checkpoint)) if cfg.early_stop_patience.is_some() => {
            log.returned_epoch = epoch;
            Ok((checkpoint, log))
        }
        _ => {
            log.returned_epoch = final_epoch;
            Ok((model, log))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Lang, Tweet};
    use crate::embeddings::EmbeddingTable;
    use proptest::prelude::*;

    #[test]
    fn twenty_percent_of_one_hundred() {
        let labels: Vec<Label> = (0..100).map(|i| Label::from_index(i % 3 % 2)).collect();
        for stratify in [true, false] {
            let (train, val) = holdout_split(&labels, 0.2, stratify, 1);
            assert_eq!((train.len(), val.len()), (80, 20));
        }
    }

    proptest! {
        #[test]
        fn holdout_partitions_and_stratifies(
            labels in prop::collection::vec(prop_oneof![Just(Label::Ironic), Just(Label::NonIronic)], 2..60),
            frac in 0.05f64..0.95,
            seed in any::<u64>(),
        ) {
            let (train, val) = holdout_split(&labels, frac, true, seed);
            let mut all: Vec<usize> = train.iter().chain(&val).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            prop_assert!(!train.is_empty());
            let n = labels.len() as f64;
            let n_val = val.len() as f64;
            for c in [Label::Ironic, Label::NonIronic] {
                let total = labels.iter().filter(|&&l| l == c).count() as f64;
                let in_val = val.iter().filter(|&&i| labels[i] == c).count() as f64;
                prop_assert!((in_val - total * n_val / n).abs() < 1.0 + 1e-9);
            }
        }
    }

    fn toy() -> (Dataset, EmbeddingTable) {
        let mut tweets = Vec::new();
        for i in 0..20 {
            let (text, label) = if i % 2 == 0 {
                (format!("great w{i} yeah right"), Label::Ironic)
            } else {
                (format!("plain w{i} report today"), Label::NonIronic)
            };
            tweets.push(Tweet::new(i.to_string(), text, Lang::En, label).unwrap());
        }
        let words = ["great", "yeah", "right", "plain", "report", "today"];
        let table = EmbeddingTable::from_rows(
            4,
            words
                .iter()
                .enumerate()
                .map(|(i, w)| (*w, (0..4).map(|d| ((i * 4 + d) as f64).sin()).collect())),
        )
        .unwrap();
        (Dataset::from_tweets(tweets).unwrap(), table)
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            epochs: 30,
            batch_size: 4,
            learning_rate: 1e-2,
            dropout_rate: 0.5,
            widths: vec![1, 2],
            n_filters: 4,
            max_seq_len: 6,
            early_stop_patience: None,
            val_fraction: None,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_losses() {
        let (ds, table) = toy();
        let tables = LangTables::single(Lang::En, &table);
        let (m1, l1) = cnn_train(&ds, &tables, &small_cfg()).unwrap();
        let (m2, l2) = cnn_train(&ds, &tables, &small_cfg()).unwrap();
        assert_eq!(l1, l2);
        assert_eq!(m1, m2);
        assert_eq!(l1.epochs.len(), 30);
        assert_eq!(l1.returned_epoch, 30);
    }

    #[test]
    fn early_stopping_returns_best_checkpoint() {
        let (ds, table) = toy();
        let tables = LangTables::single(Lang::En, &table);
        let cfg = TrainConfig {
            epochs: 40,
            early_stop_patience: Some(2),
            val_fraction: Some(0.2),
            ..small_cfg()
        };
        let (_, log) = cnn_train(&ds, &tables, &cfg).unwrap();
        assert_eq!((log.n_train, log.n_val), (16, 4));
        let best = log
            .epochs
            .iter()
            .filter_map(|e| e.val_macro_f1)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(log.best_val_macro_f1, Some(best));
        let returned = &log.epochs[log.returned_epoch - 1];
        assert_eq!(returned.val_macro_f1, Some(best));
    }

    #[test]
    fn config_errors() {
        let (ds, table) = toy();
        let tables = LangTables::single(Lang::En, &table);
        for bad in [
            TrainConfig {
                val_fraction: Some(1.0),
                ..small_cfg()
            },
            TrainConfig {
                learning_rate: 0.0,
                ..small_cfg()
            },
            TrainConfig {
                widths: vec![],
                ..small_cfg()
            },
            TrainConfig {
                max_seq_len: 1,
                ..small_cfg()
            },
        ] {
            assert!(cnn_train(&ds, &tables, &bad).is_err());
        }
        let fr = LangTables::single(Lang::Fr, &table);
        assert!(matches!(
            cnn_train(&ds, &fr, &small_cfg()),
            Err(ModelError::MissingTable(Lang::En))
        ));
    }

    #[test]
    fn divergence_is_reported() {
        let (ds, table) = toy();
        let tables = LangTables::single(Lang::En, &table);
        let cfg = TrainConfig {
            learning_rate: f64::MAX,
            ..small_cfg()
        };
        match cnn_train(&ds, &tables, &cfg) {
            Err(ModelError::Diverged { epoch, .. }) => assert!(epoch >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
