use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use irony::align::{
    csls_neighbors, fit_procrustes, load_dictionary, map_table, refine, CslsConfig, LinearMap,
    ProcrustesConfig, RefineConfig,
};
use irony::corpus::{
    load_corpus, load_corpus_any, preprocess_dataset, save_corpus, split, stats, PreprocessConfig,
};
use irony::embeddings::{coverage, load_embeddings, save_embeddings, EmbeddingTable, LoadOptions};
use irony::eval::{
    load_matrix, read_results, report_csv, report_text, run_experiment, write_artifacts,
    write_predictions, ExperimentData, MapSource, Matrix, PredictionRow, RfSettings,
};
use irony::features::{extract, load_lexicons, FeatureSet, LexiconSet};
use irony::models::{
    cnn_train, rf_train, tune_random_search, CnnModel, LangTables, RandomForestModel, SearchSpace,
    TrainConfig,
};
use irony::synthetic::{SyntheticConfig, SyntheticWorld};
use irony::{Dataset, Lang};

use crate::args::*;
use crate::manifest::{beside, manifest_path, RunManifest};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Corpus(c) => corpus(cli, c),
        Command::Features(FeaturesCmd::Extract {
            corpus,
            lexicons,
            set,
            out,
        }) => features_extract(cli, corpus, lexicons.as_deref(), (*set).into(), out),
        Command::Embeddings(EmbeddingsCmd::Coverage {
            corpus,
            embeddings,
            max_vocab,
            out,
        }) => embeddings_coverage(cli, corpus, embeddings, *max_vocab, out.as_deref()),
        Command::Align(a) => align(cli, a),
        Command::Train(a) => train(cli, a),
        Command::Predict(a) => predict(cli, a),
        Command::Tune(a) => tune(cli, a),
        Command::Experiment(ExperimentCmd::Run {
            matrix,
            out_dir,
            from_manifest,
        }) => experiment_run(cli, matrix.as_deref(), out_dir, from_manifest.as_deref()),
        Command::Experiment(ExperimentCmd::Report {
            in_dir,
            format,
            out,
        }) => experiment_report(cli, in_dir, *format, out.as_deref()),
        Command::Synth(a) => synth(cli, a),
    }
}

fn save_manifest(
    cli: &Cli,
    default: Option<PathBuf>,
    m: impl FnOnce() -> Result<RunManifest>,
) -> Result<()> {
    match manifest_path(&cli.manifest_out, default) {
        Some(path) => m()?.save(&path),
        None => Ok(()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn corpus(cli: &Cli, c: &CorpusCmd) -> Result<()> {
    match c {
        CorpusCmd::Stats { input, lang, json } => {
            let ds = match lang {
                Some(l) => load_corpus(input, *l)?,
                None => load_corpus_any(input)?,
            };
            let s = stats(&ds);
            if *json {
                println!("{}", serde_json::to_string_pretty(&s)?);
            } else {
                println!(
                    "{:<10}{:>10}{:>12}{:>10}",
                    "Language", "Ironic", "Non-ironic", "Total"
                );
                for (l, c) in &s.per_language {
                    println!(
                        "{:<10}{:>10}{:>12}{:>10}",
                        l.short_name(),
                        c.n_ironic,
                        c.n_non_ironic,
                        c.total()
                    );
                }
                if s.per_language.len() > 1 {
                    println!(
                        "{:<10}{:>10}{:>12}{:>10}",
                        "All", s.n_ironic, s.n_non_ironic, s.n_total
                    );
                }
            }
            save_manifest(cli, None, || {
                RunManifest::new(
                    "corpus stats",
                    json!({ "in": input, "lang": lang }),
                    std::slice::from_ref(input),
                    cli.seed(),
                )
            })
        }
        CorpusCmd::Preprocess { input, out, config } => {
            let ds = load_corpus_any(input)?;
            let cfg = match config {
                Some(p) => PreprocessConfig::load(p)?,
                None => PreprocessConfig::default(),
            };
            let (clean, dropped) = preprocess_dataset(&ds, &cfg)?;
            save_corpus(&clean, out)?;
            log::info!("{} tweets kept, {dropped} dropped", clean.len());
            let mut inputs = vec![input.clone()];
            inputs.extend(config.clone());
            save_manifest(cli, Some(beside(out)), || {
                RunManifest::new(
                    "corpus preprocess",
                    json!({ "in": input, "out": out, "config": config, "resolved": cfg }),
                    &inputs,
                    cli.seed(),
                )
            })
        }
        CorpusCmd::Split {
            input,
            n_train,
            n_test,
            train_out,
            test_out,
        } => {
            let ds = load_corpus_any(input)?;
            let s = split(&ds, *n_train, *n_test, cli.seed())?;
            save_corpus(&s.train, train_out)?;
            save_corpus(&s.test, test_out)?;
            save_manifest(cli, Some(beside(train_out)), || {
                RunManifest::new(
                    "corpus split",
                    json!({ "in": input, "n_train": n_train, "n_test": n_test,
                            "train_out": train_out, "test_out": test_out }),
                    std::slice::from_ref(input),
                    cli.seed(),
                )
            })
        }
    }
}

fn lexicons_for(dir: Option<&Path>, lang: Lang) -> Result<LexiconSet> {
    Ok(match dir {
        Some(d) => load_lexicons(d, lang)?,
        None => LexiconSet::bundled(lang),
    })
}

fn lexicon_files(dir: Option<&Path>) -> Vec<PathBuf> {
    let Some(dir) = dir else { return Vec::new() };
    let mut files = Vec::new();
    for lang in Lang::ALL {
        if let Ok(entries) = std::fs::read_dir(dir.join(lang.code())) {
            files.extend(entries.flatten().map(|e| e.path()).filter(|p| p.is_file()));
        }
    }
    files
}

fn feature_matrix(ds: &Dataset, dir: Option<&Path>, set: FeatureSet) -> Result<Vec<Vec<f64>>> {
    let mut lex = BTreeMap::new();
    ds.iter()
        .map(|t| {
            if let std::collections::btree_map::Entry::Vacant(e) = lex.entry(t.lang) {
                e.insert(lexicons_for(dir, t.lang)?);
            }
            Ok(extract(t, &lex[&t.lang], set)?.select(set))
        })
        .collect()
}

fn features_extract(
    cli: &Cli,
    corpus: &Path,
    lexicons: Option<&Path>,
    set: FeatureSet,
    out: &Path,
) -> Result<()> {
    let ds = load_corpus_any(corpus)?;
    let x = feature_matrix(&ds, lexicons, set)?;
    let mut text = format!("id,label,{}\n", set.slot_names().join(","));
    for (t, row) in ds.iter().zip(&x) {
        let id = if t.id.contains([',', '"', '\n']) {
            format!("\"{}\"", t.id.replace('"', "\"\""))
        } else {
            t.id.clone()
        };
        write!(text, "{id},{}", t.label.as_str()).unwrap();
        for v in row {
            write!(text, ",{v}").unwrap();
        }
        text.push('\n');
    }
    write_text(out, &text)?;
    let mut inputs = vec![corpus.to_path_buf()];
    inputs.extend(lexicon_files(lexicons));
    save_manifest(cli, Some(beside(out)), || {
        RunManifest::new(
            "features extract",
            json!({ "corpus": corpus, "lexicons": lexicons, "set": format!("{set:?}"), "out": out }),
            &inputs,
            cli.seed(),
        )
    })
}

fn embeddings_coverage(
    cli: &Cli,
    corpus: &Path,
    embeddings: &Path,
    max_vocab: Option<usize>,
    out: Option<&Path>,
) -> Result<()> {
    let ds = load_corpus_any(corpus)?;
    let table = load_embeddings(embeddings, LoadOptions { max_vocab })?;
    let report = coverage(&ds, &table)?;
    match out {
        Some(p) => {
            write_text(p, &report.oov_csv())?;
            println!("{}", report.summary());
        }
        None => {
            print!("{}", report.oov_csv());
            eprintln!("{}", report.summary());
        }
    }
    save_manifest(cli, out.map(beside), || {
        RunManifest::new(
            "embeddings coverage",
            json!({ "corpus": corpus, "embeddings": embeddings, "max_vocab": max_vocab, "out": out }),
            &[corpus.to_path_buf(), embeddings.to_path_buf()],
            cli.seed(),
        )
    })
}

fn load_table(path: &Path, max_vocab: Option<usize>) -> Result<EmbeddingTable> {
    load_embeddings(path, LoadOptions { max_vocab })
        .with_context(|| format!("loading {}", path.display()))
}

fn align(cli: &Cli, a: &AlignCmd) -> Result<()> {
    match a {
        AlignCmd::Fit {
            src,
            tgt,
            dict,
            out,
            refine: rounds,
            center,
            max_vocab,
        } => {
            let s = load_table(src, *max_vocab)?.normalize()?;
            let t = load_table(tgt, *max_vocab)?.normalize()?;
            let d = load_dictionary(dict)?;
            let cfg = ProcrustesConfig { center: *center };
            let mut map = fit_procrustes(&s, &t, &d, cfg)?;
            let mut residuals = Vec::new();
            if *rounds > 0 {
                let outcome = refine(
                    &s,
                    &t,
                    &map,
                    *rounds,
                    RefineConfig {
                        procrustes: cfg,
                        ..Default::default()
                    },
                )?;
                residuals = outcome.residuals;
                map = outcome.map;
            }
            let st = &map.fit_stats;
            log::info!(
                "fitted on {} pairs, residual {:.6}",
                st.n_pairs_used,
                st.residual
            );
            map.save(out)?;
            save_manifest(cli, Some(beside(out)), || {
                RunManifest::new(
                    "align fit",
                    json!({ "src": src, "tgt": tgt, "dict": dict, "out": out, "refine": rounds,
                            "center": center, "max_vocab": max_vocab, "refine_residuals": residuals }),
                    &[src.clone(), tgt.clone(), dict.clone()],
                    cli.seed(),
                )
            })
        }
        AlignCmd::Apply {
            map,
            embeddings,
            out,
            max_vocab,
        } => {
            let m = LinearMap::load(map)?;
            let table = load_table(embeddings, *max_vocab)?.normalize()?;
            save_embeddings(&map_table(&table, &m)?, out)?;
            save_manifest(cli, Some(beside(out)), || {
                RunManifest::new(
                    "align apply",
                    json!({ "map": map, "embeddings": embeddings, "out": out, "max_vocab": max_vocab }),
                    &[map.clone(), embeddings.clone()],
                    cli.seed(),
                )
            })
        }
        AlignCmd::Neighbors {
            map,
            src,
            tgt,
            word,
            k,
            csls_k,
            max_vocab,
        } => {
            let m = LinearMap::load(map)?;
            let s = load_table(src, *max_vocab)?.normalize()?;
            let t = load_table(tgt, *max_vocab)?.normalize()?;
            let Some(v) = s.lookup(word) else {
                bail!("{word:?} is not in {}", src.display())
            };
            let mapped = map_table(&s, &m)?;
            let cfg = CslsConfig {
                k: *csls_k,
                ..Default::default()
            };
            let ranked = csls_neighbors(&m.apply(v), &t, &mapped, cfg)?;
            for (w, score) in ranked.iter().take(*k) {
                println!("{w}\t{score:.6}");
            }
            save_manifest(cli, None, || {
                RunManifest::new(
                    "align neighbors",
                    json!({ "map": map, "src": src, "tgt": tgt, "word": word, "k": k, "csls_k": csls_k }),
                    &[map.clone(), src.clone(), tgt.clone()],
                    cli.seed(),
                )
            })
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelConfig {
    #[serde(default)]
    cnn: TrainConfig,
    #[serde(default)]
    rf: RfSettings,
}

fn model_config(path: Option<&Path>) -> Result<ModelConfig> {
    let Some(p) = path else {
        return Ok(ModelConfig::default());
    };
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))
}

/// Tables keyed by language; unlabelled paths belong to the corpus
/// language.
fn load_tables(
    args: &[EmbeddingArg],
    ds: &Dataset,
    max_vocab: Option<usize>,
) -> Result<BTreeMap<Lang, EmbeddingTable>> {
    let mut out = BTreeMap::new();
    for a in args {
        let lang = match (a.lang, ds.lang()) {
            (Some(l), _) => l,
            (None, irony::corpus::DatasetLang::Single(l)) => l,
            (None, _) => bail!("corpus mixes languages; give embeddings as LANG=PATH"),
        };
        if out.insert(lang, load_table(&a.path, max_vocab)?).is_some() {
            bail!("two embedding tables for {lang}");
        }
    }
    Ok(out)
}

fn lang_tables(tables: &BTreeMap<Lang, EmbeddingTable>) -> LangTables<'_> {
    let mut t = LangTables::new();
    for (l, table) in tables {
        t.insert(*l, table);
    }
    t
}

fn train(cli: &Cli, a: &TrainArgs) -> Result<()> {
    let ds = load_corpus_any(&a.corpus)?;
    let mut cfg = model_config(a.config.as_deref())?;
    let mut inputs = vec![a.corpus.clone()];
    inputs.extend(a.config.clone());
    inputs.extend(a.embeddings.iter().map(|e| e.path.clone()));
    let resolved = match a.model {
        ModelKind::Rf => {
            if let Some(n) = a.n_trees {
                cfg.rf.n_trees = n;
            }
            if a.max_depth.is_some() {
                cfg.rf.max_depth = a.max_depth;
            }
            let set: FeatureSet = a.features.into();
            let x = feature_matrix(&ds, a.lexicons.as_deref(), set)?;
            let model = rf_train(
                &x,
                &ds.labels(),
                &set.slot_names(),
                cfg.rf.into(),
                cli.seed(),
            )?;
            model.save(&a.out)?;
            inputs.extend(lexicon_files(a.lexicons.as_deref()));
            json!({ "rf": cfg.rf, "features": format!("{set:?}"), "lexicons": a.lexicons })
        }
        ModelKind::Cnn => {
            if a.embeddings.is_empty() {
                bail!("--embeddings is required for the CNN");
            }
            if let Some(e) = a.epochs {
                cfg.cnn.epochs = e;
            }
            if let Some(lr) = a.learning_rate {
                cfg.cnn.learning_rate = lr;
            }
            cfg.cnn.seed = cli.seed();
            let tables = load_tables(&a.embeddings, &ds, a.max_vocab)?;
            let (model, log) = cnn_train(&ds, &lang_tables(&tables), &cfg.cnn)?;
            model.save(&a.out)?;
            let mut log_json = serde_json::to_string_pretty(&log)?;
            log_json.push('\n');
            write_text(&with_suffix(&a.out, ".log.json"), &log_json)?;
            json!({ "cnn": cfg.cnn, "max_vocab": a.max_vocab })
        }
    };
    save_manifest(cli, Some(beside(&a.out)), || {
        RunManifest::new(
            "train",
            json!({ "model": format!("{:?}", a.model).to_lowercase(), "corpus": a.corpus,
                    "embeddings": a.embeddings.iter().map(|e| (e.lang, &e.path)).collect::<Vec<_>>(),
                    "config": a.config, "resolved": resolved, "out": a.out }),
            &inputs,
            cli.seed(),
        )
    })
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut name = p.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    p.with_file_name(name)
}

fn predict(cli: &Cli, a: &PredictArgs) -> Result<()> {
    let ds = load_corpus_any(&a.corpus)?;
    let text = std::fs::read_to_string(&a.model_file)
        .with_context(|| format!("reading {}", a.model_file.display()))?;
    let mut inputs = vec![a.corpus.clone(), a.model_file.clone()];
    let preds = if text.starts_with("irony-rf ") {
        let model = RandomForestModel::from_text(&text)?;
        let set = if model.slot_names == FeatureSet::Full.slot_names() {
            FeatureSet::Full
        } else {
            FeatureSet::Surface
        };
        let x = feature_matrix(&ds, a.lexicons.as_deref(), set)?;
        inputs.extend(lexicon_files(a.lexicons.as_deref()));
        model.predict(&x, &model.slot_names)?
    } else if text.starts_with("irony-cnn ") {
        let model = CnnModel::from_text(&text)?;
        let tables = load_tables(&a.embeddings, &ds, a.max_vocab)?;
        inputs.extend(a.embeddings.iter().map(|e| e.path.clone()));
        let fallback = lang_tables(&tables);
        model.predict(&ds, (!tables.is_empty()).then_some(&fallback))
    } else {
        bail!("{} is not a model file", a.model_file.display());
    };
    let rows: Vec<PredictionRow> = ds
        .iter()
        .zip(&preds)
        .map(|(t, p)| PredictionRow {
            id: t.id.clone(),
            gold: t.label,
            pred: p.label,
            p_ironic: p.p_ironic,
        })
        .collect();
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_predictions(&rows, &a.out)?;
    let gold: Vec<_> = rows.iter().map(|r| r.gold).collect();
    let pred: Vec<_> = rows.iter().map(|r| r.pred).collect();
    let m = irony::eval::metrics(&irony::eval::confusion(&gold, &pred)?)?;
    log::info!("accuracy {:.1}, macro-F {:.1}", m.accuracy, m.macro_f1);
    save_manifest(cli, Some(beside(&a.out)), || {
        RunManifest::new(
            "predict",
            json!({ "model_file": a.model_file, "corpus": a.corpus,
                    "embeddings": a.embeddings.iter().map(|e| (e.lang, &e.path)).collect::<Vec<_>>(),
                    "lexicons": a.lexicons, "max_vocab": a.max_vocab, "out": a.out }),
            &inputs,
            cli.seed(),
        )
    })
}

fn tune(cli: &Cli, a: &TuneArgs) -> Result<()> {
    let ds = load_corpus_any(&a.corpus)?;
    let base = model_config(a.config.as_deref())?.cnn;
    let space: SearchSpace = match &a.space {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => SearchSpace::default(),
    };
    let tables = load_tables(&a.embeddings, &ds, a.max_vocab)?;
    let (best, trials) = tune_random_search(
        &ds,
        &lang_tables(&tables),
        &base,
        &space,
        a.budget,
        cli.seed(),
    )?;
    #[derive(Serialize)]
    struct Out<'a> {
        cnn: &'a TrainConfig,
    }
    write_text(&a.out, &toml::to_string(&Out { cnn: &best })?)?;
    if let Some(p) = &a.trials_out {
        let mut text = serde_json::to_string_pretty(&trials)?;
        text.push('\n');
        write_text(p, &text)?;
    }
    let mut inputs = vec![a.corpus.clone()];
    inputs.extend(a.config.clone());
    inputs.extend(a.space.clone());
    inputs.extend(a.embeddings.iter().map(|e| e.path.clone()));
    save_manifest(cli, Some(beside(&a.out)), || {
        RunManifest::new(
            "tune",
            json!({ "corpus": a.corpus, "config": a.config, "space": space, "budget": a.budget,
                    "embeddings": a.embeddings.iter().map(|e| (e.lang, &e.path)).collect::<Vec<_>>(),
                    "out": a.out, "trials_out": a.trials_out }),
            &inputs,
            cli.seed(),
        )
    })
}

/// Every file an experiment matrix reads.
fn matrix_inputs(path: &Path, m: &Matrix) -> Vec<PathBuf> {
    let mut files = vec![path.to_path_buf()];
    for c in m.corpora.values() {
        files.push(c.train.clone());
        files.push(c.test.clone());
    }
    files.extend(m.embeddings.values().cloned());
    for src in m.maps.values() {
        match src {
            MapSource::File(p) => files.push(p.clone()),
            MapSource::Dictionary { path, .. } => files.push(path.clone()),
        }
    }
    files.extend(lexicon_files(m.lexicons.as_deref()));
    files
}

fn experiment_run(
    cli: &Cli,
    matrix: Option<&Path>,
    out_dir: &Path,
    from_manifest: Option<&Path>,
) -> Result<()> {
    let (matrix_path, seed) = match from_manifest {
        Some(mp) => {
            let m = RunManifest::load(mp)?;
            if m.command != "experiment run" {
                bail!(
                    "{} records `{}`, not `experiment run`",
                    mp.display(),
                    m.command
                );
            }
            m.verify_inputs()?;
            (PathBuf::from(m.config_str("matrix")?), Some(m.seed))
        }
        None => (
            matrix.expect("clap requires --matrix").to_path_buf(),
            cli.seed,
        ),
    };
    let mut m = load_matrix(&matrix_path)?;
    if let Some(s) = seed {
        let old = m.seed;
        m.seed = s;
        m.settings.cnn.seed = s;
        for e in &mut m.experiments {
            if e.seed == old {
                e.seed = s;
            }
        }
    }
    let data = ExperimentData::load(&m)?;
    log::info!("running {} experiments", m.experiments.len());
    let results: Vec<_> = m
        .experiments
        .par_iter()
        .map(|spec| (spec, run_experiment(spec, &data)))
        .collect();
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut records = Vec::new();
    let mut failed = Vec::new();
    for (spec, r) in results {
        match r {
            Ok(r) => {
                write_artifacts(&r, out_dir)?;
                records.push(r.record());
            }
            Err(e) => {
                log::error!("{}: {e}", spec.id());
                failed.push(spec.id());
            }
        }
    }
    if !records.is_empty() {
        write_text(&out_dir.join("results.csv"), &report_csv(&records)?)?;
        let table = report_text(&records)?;
        write_text(&out_dir.join("results.txt"), &table)?;
        if !cli.quiet {
            print!("{table}");
        }
    }
    let matrix_abs = std::path::absolute(&matrix_path).unwrap_or(matrix_path.clone());
    save_manifest(cli, Some(out_dir.join("manifest.json")), || {
        RunManifest::new(
            "experiment run",
            json!({ "matrix": matrix_abs, "out_dir": out_dir,
                    "experiments": m.experiments.iter().map(|e| e.id()).collect::<Vec<_>>() }),
            &matrix_inputs(&matrix_abs, &m),
            m.seed,
        )
    })?;
    if !failed.is_empty() {
        bail!(
            "{} experiment(s) failed: {}",
            failed.len(),
            failed.join(", ")
        );
    }
    Ok(())
}

fn experiment_report(
    cli: &Cli,
    in_dir: &Path,
    format: ReportFormat,
    out: Option<&Path>,
) -> Result<()> {
    let records = read_results(in_dir)?;
    if records.is_empty() {
        bail!("no *.metrics.json files in {}", in_dir.display());
    }
    let text = match format {
        ReportFormat::Csv => report_csv(&records)?,
        ReportFormat::Txt => report_text(&records)?,
    };
    match out {
        Some(p) => write_text(p, &text)?,
        None => print!("{text}"),
    }
    let inputs: Vec<PathBuf> = records
        .iter()
        .map(|r| in_dir.join(format!("{}.metrics.json", r.id)))
        .collect();
    save_manifest(cli, out.map(beside), || {
        RunManifest::new(
            "experiment report",
            json!({ "in_dir": in_dir, "format": format!("{format:?}").to_lowercase(), "out": out }),
            &inputs,
            cli.seed(),
        )
    })
}

fn synth(cli: &Cli, a: &SynthArgs) -> Result<()> {
    let world = SyntheticWorld::generate(SyntheticConfig {
        n_train: a.n_train,
        n_test: a.n_test,
        seed: cli.seed(),
        ..Default::default()
    });
    let path = world.write(&a.out_dir, &a.mono, &a.cross, a.epochs)?;
    println!("{}", path.display());
    save_manifest(cli, Some(a.out_dir.join("synth.manifest.json")), || {
        RunManifest::new(
            "synth",
            json!({ "out_dir": a.out_dir, "mono": a.mono, "cross": a.cross, "epochs": a.epochs,
                    "n_train": a.n_train, "n_test": a.n_test }),
            &[],
            cli.seed(),
        )
    })
}
