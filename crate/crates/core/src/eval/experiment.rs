//! Runs one experiment: build the training set, train, then (and only then)
//! open the test set and evaluate.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::matrix::{ExperimentSpec, MapSource, Matrix, ModelFamily, Settings};
use super::metrics::{confusion, metrics, ConfusionMatrix, Metrics};
use super::report::ResultRecord;
use super::{io_err, EvalError};
use crate::align::{fit_procrustes, load_dictionary, map_table, refine, LinearMap, RefineConfig};
use crate::corpus::{load_corpus, Dataset, Label, Lang};
use crate::embeddings::{load_embeddings, EmbeddingTable, LoadOptions};
use crate::features::{extract, load_lexicons, FeatureSet, LexiconSet};
use crate::models::cnn::{cnn_train, LangTables, TrainLog};
use crate::models::{rf_train, Prediction};

/// Everything experiments read, loaded once.
#[derive(Debug, Clone, Default)]
pub struct ExperimentData {
    pub train: BTreeMap<Lang, Dataset>,
    pub test: BTreeMap<Lang, Dataset>,
    pub embeddings: BTreeMap<Lang, EmbeddingTable>,
    /// Keyed by (source, target).
    pub maps: BTreeMap<(Lang, Lang), LinearMap>,
    pub lexicons: BTreeMap<Lang, LexiconSet>,
    pub settings: Settings,
}

impl ExperimentData {
    /// Loads the corpora, embeddings and maps the matrix's experiments
    /// need. Maps given as dictionaries are fitted here.
    pub fn load(m: &Matrix) -> Result<ExperimentData, EvalError> {
        let mut data = ExperimentData {
            settings: m.settings.clone(),
            ..Default::default()
        };
        let mut corpus_langs = Vec::new();
        let mut emb_langs = Vec::new();
        let mut map_pairs = Vec::new();
        for e in &m.experiments {
            corpus_langs.extend(e.train_langs.iter().chain(&e.test_langs).copied());
            if e.model.is_cnn() {
                emb_langs.extend(e.train_langs.iter().chain(&e.test_langs).copied());
            }
            if e.model == ModelFamily::CnnCrosslingual {
                for &s in &e.train_langs {
                    for &t in &e.test_langs {
                        map_pairs.push((s, t));
                    }
                }
            }
        }
        for v in [&mut corpus_langs, &mut emb_langs] {
            v.sort();
            v.dedup();
        }
        map_pairs.sort();
        map_pairs.dedup();
        for lang in corpus_langs {
            let paths = m.corpora.get(&lang).ok_or(EvalError::MissingCorpus(lang))?;
            data.train.insert(lang, load_corpus(&paths.train, lang)?);
            data.test.insert(lang, load_corpus(&paths.test, lang)?);
            let lex = match &m.lexicons {
                Some(dir) => load_lexicons(dir, lang)?,
                None => LexiconSet::bundled(lang),
            };
            data.lexicons.insert(lang, lex);
        }
        let opts = LoadOptions {
            max_vocab: m.settings.max_vocab,
        };
        for lang in emb_langs {
            let path = m
                .embeddings
                .get(&lang)
                .ok_or(EvalError::MissingEmbeddings(lang))?;
            data.embeddings.insert(lang, load_embeddings(path, opts)?);
        }
        for (s, t) in map_pairs {
            let source = m
                .maps
                .get(&(s, t))
                .ok_or(EvalError::MissingMap { from: s, to: t })?;
            let map = match source {
                MapSource::File(p) => LinearMap::load(p)?.with_langs(s, t),
                MapSource::Dictionary {
                    path,
                    refine_rounds,
                } => {
                    let src = data.embeddings[&s].normalize()?;
                    let tgt = data.embeddings[&t].normalize()?;
                    let dict = load_dictionary(path)?;
                    let mut map = fit_procrustes(&src, &tgt, &dict, Default::default())?;
                    if *refine_rounds > 0 {
                        map =
                            refine(&src, &tgt, &map, *refine_rounds, RefineConfig::default())?.map;
                    }
                    map.with_langs(s, t)
                }
            };
            data.maps.insert((s, t), map);
        }
        Ok(data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Access {
    TrainingStarted,
    TrainingFinished,
    TestOpened,
}

/// Records the order in which an experiment trains and reads its test set.
#[derive(Debug, Default)]
pub struct AccessLog(Mutex<Vec<Access>>);

impl AccessLog {
    pub fn record(&self, a: Access) {
        self.0.lock().expect("access log poisoned").push(a);
    }

    pub fn events(&self) -> Vec<Access> {
        self.0.lock().expect("access log poisoned").clone()
    }
}

/// Test sets that can only be read through [`SealedTest::open`], which
/// logs the access.
pub struct SealedTest<'a> {
    sets: Vec<(Lang, &'a Dataset)>,
}

impl<'a> SealedTest<'a> {
    pub fn new(sets: Vec<(Lang, &'a Dataset)>) -> SealedTest<'a> {
        SealedTest { sets }
    }

    pub fn open(self, log: &AccessLog) -> Vec<(Lang, &'a Dataset)> {
        log.record(Access::TestOpened);
        self.sets
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub id: String,
    pub gold: Label,
    pub pred: Label,
    pub p_ironic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelLog {
    Forest {
        slots: Vec<String>,
        n_trees: usize,
    },
    Cnn {
        /// Embedding space the model was trained in.
        space: Lang,
        train: TrainLog,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentLog {
    pub id: String,
    pub label: String,
    pub n_train: usize,
    pub n_test: usize,
    pub models: Vec<ModelLog>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub predictions: Vec<PredictionRow>,
    pub log: ExperimentLog,
}

impl ExperimentResult {
    pub fn record(&self) -> ResultRecord {
        ResultRecord {
            id: self.spec.id(),
            label: self.spec.label(),
            spec: self.spec.clone(),
            confusion: self.confusion,
            metrics: self.metrics,
        }
    }
}

pub fn run_experiment(
    spec: &ExperimentSpec,
    data: &ExperimentData,
) -> Result<ExperimentResult, EvalError> {
    run_experiment_traced(spec, data, &AccessLog::default())
}

/// A test language, the training languages' tables mapped into its space,
/// and its own normalised table.
type MappedSpace = (Lang, Vec<(Lang, EmbeddingTable)>, EmbeddingTable);

type Predictor<'a> = Box<dyn Fn(&Dataset) -> Result<Vec<Prediction>, EvalError> + 'a>;

/// [`run_experiment`] recording training and test-set access in `log`.
pub fn run_experiment_traced(
    spec: &ExperimentSpec,
    data: &ExperimentData,
    log: &AccessLog,
) -> Result<ExperimentResult, EvalError> {
    spec.validate()?;
    let id = spec.id();
    let mut tests = Vec::new();
    for &l in &spec.test_langs {
        tests.push((l, data.test.get(&l).ok_or(EvalError::MissingCorpus(l))?));
    }
    let sealed = SealedTest::new(tests);
    let parts = spec
        .train_langs
        .iter()
        .map(|l| data.train.get(l).ok_or(EvalError::MissingCorpus(*l)))
        .collect::<Result<Vec<_>, _>>()?;
    let train = Dataset::concat(parts)?;
    if train.is_empty() {
        return Err(EvalError::Spec {
            id,
            message: "empty training set".into(),
        });
    }

    log.record(Access::TrainingStarted);
    // Trained predictors per test language; tables they borrow live here.
    let mut owned_tables: Vec<MappedSpace> = Vec::new();
    let mut model_logs = Vec::new();
    let mut predictors: BTreeMap<Lang, Predictor> = BTreeMap::new();
    match spec.model {
        ModelFamily::RfFull | ModelFamily::RfSurface => {
            let set = if spec.model == ModelFamily::RfFull {
                FeatureSet::Full
            } else {
                FeatureSet::Surface
            };
            let featurize = move |ds: &Dataset| -> Result<Vec<Vec<f64>>, EvalError> {
                ds.iter()
                    .map(|t| {
                        let lex = data
                            .lexicons
                            .get(&t.lang)
                            .ok_or(EvalError::MissingCorpus(t.lang))?;
                        Ok(extract(t, lex, set)?.select(set))
                    })
                    .collect()
            };
            let x = featurize(&train)?;
            let slots = set.slot_names();
            let params = data.settings.rf.into();
            let model = rf_train(&x, &train.labels(), &slots, params, spec.seed)?;
            model_logs.push(ModelLog::Forest {
                slots: slots.clone(),
                n_trees: model.n_trees,
            });
            let model = std::sync::Arc::new(model);
            for &l in &spec.test_langs {
                let (model, slots) = (model.clone(), slots.clone());
                predictors.insert(
                    l,
                    Box::new(move |ds| Ok(model.predict(&featurize(ds)?, &slots)?)),
                );
            }
        }
        ModelFamily::CnnMono => {
            let lang = spec.test_langs[0];
            let table = data
                .embeddings
                .get(&lang)
                .ok_or(EvalError::MissingEmbeddings(lang))?;
            let tables = LangTables::single(lang, table);
            let cfg = cnn_config(data, spec);
            let (model, tlog) = cnn_train(&train, &tables, &cfg)?;
            model_logs.push(ModelLog::Cnn {
                space: lang,
                train: tlog,
            });
            predictors.insert(
                lang,
                Box::new(move |ds| Ok(model.predict(ds, Some(&tables)))),
            );
        }
        ModelFamily::CnnCrosslingual => {
            // One model per test language, trained in that language's space:
            // each training language is mapped by its own map.
            for &t in &spec.test_langs {
                let target = data
                    .embeddings
                    .get(&t)
                    .ok_or(EvalError::MissingEmbeddings(t))?
                    .normalize()?;
                let mut mapped = Vec::new();
                for &s in &spec.train_langs {
                    let map = data
                        .maps
                        .get(&(s, t))
                        .ok_or(EvalError::MissingMap { from: s, to: t })?;
                    let src = data
                        .embeddings
                        .get(&s)
                        .ok_or(EvalError::MissingEmbeddings(s))?;
                    mapped.push((s, map_table(&src.normalize()?, map)?));
                }
                owned_tables.push((t, mapped, target));
            }
        }
    }
    if spec.model == ModelFamily::CnnCrosslingual {
        for (t, mapped, target) in &owned_tables {
            let mut tables = LangTables::new();
            for (s, table) in mapped {
                tables.insert(*s, table);
            }
            let cfg = cnn_config(data, spec);
            let (model, tlog) = cnn_train(&train, &tables, &cfg)?;
            model_logs.push(ModelLog::Cnn {
                space: *t,
                train: tlog,
            });
            let fallback = LangTables::single(*t, target);
            predictors.insert(
                *t,
                Box::new(move |ds| Ok(model.predict(ds, Some(&fallback)))),
            );
        }
    }
    log.record(Access::TrainingFinished);

    let tests = sealed.open(log);
    let mut rows = Vec::new();
    for (lang, ds) in &tests {
        let preds = predictors[lang](ds)?;
        for (t, p) in ds.iter().zip(preds) {
            rows.push(PredictionRow {
                id: t.id.clone(),
                gold: t.label,
                pred: p.label,
                p_ironic: p.p_ironic,
            });
        }
    }
    let gold: Vec<Label> = rows.iter().map(|r| r.gold).collect();
    let pred: Vec<Label> = rows.iter().map(|r| r.pred).collect();
    let cm = confusion(&gold, &pred)?;
    let m = metrics(&cm)?;
    log::info!("{id}: macro-F {:.1}", m.macro_f1);
    Ok(ExperimentResult {
        log: ExperimentLog {
            id,
            label: spec.label(),
            n_train: train.len(),
            n_test: rows.len(),
            models: model_logs,
        },
        spec: spec.clone(),
        confusion: cm,
        metrics: m,
        predictions: rows,
    })
}

fn cnn_config(data: &ExperimentData, spec: &ExperimentSpec) -> crate::models::cnn::TrainConfig {
    let mut cfg = data.settings.cnn.clone();
    cfg.seed = spec.seed;
    cfg
}

/// Writes `<id>.predictions.csv`, `<id>.metrics.json` and `<id>.log.json`
/// into `dir`. The files hold no timestamps, so identical runs produce
/// identical bytes.
pub fn write_artifacts(result: &ExperimentResult, dir: &Path) -> Result<(), EvalError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let id = result.spec.id();
    write_predictions(
        &result.predictions,
        &dir.join(format!("{id}.predictions.csv")),
    )?;

    for (suffix, body) in [
        ("metrics.json", pretty(&result.record())),
        ("log.json", pretty(&result.log)),
    ] {
        let path = dir.join(format!("{id}.{suffix}"));
        std::fs::write(&path, body).map_err(io_err(&path))?;
    }
    Ok(())
}

/// Writes an `id,gold,pred,p_ironic` CSV with probabilities to six places.
pub fn write_predictions(rows: &[PredictionRow], path: &Path) -> Result<(), EvalError> {
    let csv_err = |e: csv::Error| EvalError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["id", "gold", "pred", "p_ironic"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.id.as_str(),
            r.gold.as_str(),
            r.pred.as_str(),
            &format!("{:.6}", r.p_ironic),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub(crate) fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
