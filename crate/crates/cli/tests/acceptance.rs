//! Acceptance checks, one PASS/FAIL/SKIP line each, printed even when
//! libtest captures output.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use irony::align::{
    fit_procrustes, map_table, procrustes, random_orthogonal, BilingualDictionary, CslsConfig,
    CslsIndex, LinearMap, ProcrustesConfig, ORTHOGONALITY_TOLERANCE,
};
use irony::corpus::{load_corpus, split, stats, DatasetLang};
use irony::embeddings::{load_embeddings, EmbeddingTable, LoadOptions};
use irony::eval::{confusion, metrics, read_results, ConfusionMatrix, EvalError};
use irony::models::cnn::{Architecture, Vocab, PAD};
use irony::models::{cnn_train, rf_train, CnnModel, ForestParams, LangTables, TrainConfig};
use irony::rng::{seeded, Rng};
use irony::synthetic::{SyntheticConfig, SyntheticWorld};
use irony::{Dataset, Label, Lang, Tweet};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

struct Sheet {
    rows: Vec<(&'static str, Outcome)>,
    /// Every map fitted anywhere in this suite, for the orthogonality check.
    maps: Vec<(String, f64)>,
}

impl Sheet {
    fn record(&mut self, name: &'static str, outcome: Outcome) {
        let line = match &outcome {
            Outcome::Pass(d) => format!("PASS  {name}: {d}"),
            Outcome::Fail(d) => format!("FAIL  {name}: {d}"),
            Outcome::Skip(d) => format!("SKIP  {name}: {d}"),
        };
        // Straight to the process stdout: the sheet should show up in a plain
        // `cargo test` log, not only under --nocapture.
        let _ = writeln!(std::io::stdout().lock(), "{line}");
        self.rows.push((name, outcome));
    }

    fn check(&mut self, name: &'static str, ok: bool, detail: String) {
        self.record(
            name,
            if ok {
                Outcome::Pass(detail)
            } else {
                Outcome::Fail(detail)
            },
        );
    }

    fn map(&mut self, what: String, m: &LinearMap) {
        self.maps.push((what, m.orthogonality_error()));
    }
}

fn gaussian(r: &mut Rng) -> f64 {
    StandardNormal.sample(r)
}

fn unit_rows(n: usize, dim: usize, r: &mut Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| gaussian(r)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect()
}

fn table(prefix: &str, rows: &[Vec<f64>]) -> EmbeddingTable {
    let dim = rows[0].len();
    EmbeddingTable::from_rows(
        dim,
        rows.iter()
            .enumerate()
            .map(|(i, v)| (format!("{prefix}{i}"), v.clone())),
    )
    .unwrap()
    .normalize()
    .unwrap()
}

fn matvec(q: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..q.nrows())
        .map(|i| (0..q.ncols()).map(|j| q[(i, j)] * v[j]).sum())
        .collect()
}

fn rows(v: &[Vec<f64>]) -> Vec<&[f64]> {
    v.iter().map(|x| x.as_slice()).collect()
}

/// Exact targets go through both the raw solver and the table route;
/// noisy targets use points with unit-variance coordinates, so σ = 0.01 is
/// noise relative to a signal of scale 1 per coordinate.
fn procrustes_recovery(sheet: &mut Sheet) {
    let start = Instant::now();
    let (mut worst_exact, mut worst_noisy) = (0.0f64, 0.0f64);
    let n = 100;
    for dim in [2, 5, 20, 50] {
        for seed in 0..5 {
            let mut r = seeded(1000 + seed);
            let q = random_orthogonal(dim, &mut r);
            let xs: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| gaussian(&mut r)).collect())
                .collect();
            let exact: Vec<Vec<f64>> = xs.iter().map(|x| matvec(&q, x)).collect();
            let noisy: Vec<Vec<f64>> = exact
                .iter()
                .map(|y| y.iter().map(|v| v + 0.01 * gaussian(&mut r)).collect())
                .collect();
            for (ys, worst) in [(&exact, &mut worst_exact), (&noisy, &mut worst_noisy)] {
                let map = LinearMap::new(procrustes(&rows(&xs), &rows(ys)).unwrap()).unwrap();
                *worst = worst.max((map.matrix() - &q).norm());
                sheet.map(format!("planted dim {dim} seed {seed}"), &map);
            }
            let dict = BilingualDictionary::new(
                (0..n).map(|i| (format!("s{i}"), format!("t{i}"))).collect(),
            );
            let map = fit_procrustes(
                &table("s", &xs),
                &table("t", &exact),
                &dict,
                ProcrustesConfig::default(),
            )
            .unwrap();
            worst_exact = worst_exact.max((map.matrix() - &q).norm());
            sheet.map(format!("planted table dim {dim} seed {seed}"), &map);
        }
    }
    let elapsed = start.elapsed();
    sheet.check(
        "procrustes planted-map recovery",
        worst_exact <= 1e-8 && worst_noisy <= 0.1 && elapsed < Duration::from_secs(5),
        format!(
            "dims 2/5/20/50 x 5 seeds, {n} pairs: max |W-Q|_F exact {worst_exact:.2e} (<= 1e-8), \
             noisy {worst_noisy:.4} (<= 0.1), {:.2}s (< 5s)",
            elapsed.as_secs_f64()
        ),
    );
}

/// Direct evaluation of 2cos(Wx, y) - r_T(Wx) - r_S(y), ties broken by
/// word.
fn csls_brute(
    query: &[f64],
    tgt: &EmbeddingTable,
    mapped: &EmbeddingTable,
    k: usize,
) -> Vec<(String, f64)> {
    let cos = |a: &[f64], b: &[f64]| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    };
    let mean_top = |v: &[f64], pool: &EmbeddingTable| {
        let mut sims: Vec<f64> = (0..pool.len()).map(|i| cos(v, pool.row(i))).collect();
        sims.sort_by(|a, b| b.total_cmp(a));
        sims[..k.min(sims.len())].iter().sum::<f64>() / k.min(sims.len()) as f64
    };
    let r_t = mean_top(query, tgt);
    let mut scored: Vec<(String, f64)> = (0..tgt.len())
        .map(|j| {
            let y = tgt.row(j);
            (
                tgt.word(j).to_owned(),
                2.0 * cos(query, y) - r_t - mean_top(y, mapped),
            )
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored
}

fn csls_oracle(sheet: &mut Sheet) {
    let start = Instant::now();
    let mut r = seeded(77);
    let (mut mismatches, mut max_diff, mut ties) = (0usize, 0.0f64, 0usize);
    for case in 0..20 {
        let dim = r.random_range(2..=10);
        let n_src = r.random_range(5..=50);
        let n_tgt = r.random_range(5..=50);
        let mut tgt_rows = unit_rows(n_tgt, dim, &mut r);
        // Duplicate vectors under different words force exact ties.
        if case % 2 == 0 {
            for i in 0..3.min(n_tgt / 2) {
                tgt_rows[n_tgt - 1 - i] = tgt_rows[i].clone();
                ties += 1;
            }
        }
        let src = table("s", &unit_rows(n_src, dim, &mut r));
        let tgt = table("t", &tgt_rows);
        let map = LinearMap::new(random_orthogonal(dim, &mut r)).unwrap();
        sheet.map(format!("csls case {case}"), &map);
        let mapped = map_table(&src, &map).unwrap();
        let k = r.random_range(1..=12);
        let index = CslsIndex::new(
            &tgt,
            &mapped,
            CslsConfig {
                k,
                ..Default::default()
            },
        )
        .unwrap();
        for i in 0..mapped.len() {
            let q = mapped.row(i);
            let got = index.rank(q).unwrap();
            let want = csls_brute(q, &tgt, &mapped, k);
            let words = |v: &[(String, f64)]| v.iter().map(|(w, _)| w.clone()).collect::<Vec<_>>();
            if words(&got) != words(&want) {
                mismatches += 1;
            }
            for (a, b) in got.iter().zip(&want) {
                max_diff = max_diff.max((a.1 - b.1).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    sheet.check(
        "csls oracle equivalence",
        mismatches == 0 && max_diff < 1e-12 && elapsed < Duration::from_secs(5),
        format!(
            "20 tables, {mismatches} ranking mismatches, max score diff {max_diff:.1e}, {ties} planted ties, {:.2}s (< 5s)",
            elapsed.as_secs_f64()
        ),
    );
}

fn gradient_check(sheet: &mut Sheet) {
    let start = Instant::now();
    let eps = 1e-5;
    let mut worst = (0.0f64, String::new());
    let mut n_checked = 0usize;
    for b in 0..5u64 {
        let mut r = seeded(500 + b);
        let n_words = 12;
        let vocab = Vocab::from_keys((0..n_words).map(|i| (Lang::En, format!("w{i}"))));
        let arch = Architecture {
            dim: 4,
            widths: vec![1, 2, 3],
            n_filters: 3,
            max_seq_len: 6,
            dropout: 0.5,
        };
        let mut model = CnnModel::init(vocab, arch.clone(), &LangTables::new(), b).unwrap();
        // Move every parameter off its initial value so biases and the
        // unknown row are exercised too. The padding row stays zero.
        let groups = model.param_groups();
        for (g, group) in groups.iter().enumerate() {
            for i in 0..group.len {
                if g == 0 && i / arch.dim == PAD {
                    continue;
                }
                model.set_param(g, i, r.random_range(-0.8..0.8));
            }
        }
        let n_rows = n_words + 2;
        let examples: Vec<(Vec<usize>, Label)> = (0..4)
            .map(|_| {
                let len = r.random_range(1..=8);
                let ids = (0..len).map(|_| r.random_range(1..n_rows)).collect();
                let label = if r.random::<bool>() {
                    Label::Ironic
                } else {
                    Label::NonIronic
                };
                (ids, label)
            })
            .collect();
        let batch: Vec<(&[usize], Label)> = examples
            .iter()
            .map(|(ids, l)| (ids.as_slice(), *l))
            .collect();
        let total = arch.widths.len() * arch.n_filters;
        let masks: Vec<Vec<f64>> = (0..batch.len())
            .map(|_| {
                (0..total)
                    .map(|_| if r.random::<f64>() < 0.5 { 0.0 } else { 2.0 })
                    .collect()
            })
            .collect();
        let masks = (b % 2 == 1).then_some(masks);
        let (_, grads) = model.loss_and_grads(&batch, masks.as_deref());
        for (g, group) in groups.iter().enumerate() {
            for i in 0..group.len {
                if g == 0 && i / arch.dim == PAD {
                    continue;
                }
                let orig = model.param(g, i);
                model.set_param(g, i, orig + eps);
                let up = model.loss_and_grads(&batch, masks.as_deref()).0;
                model.set_param(g, i, orig - eps);
                let down = model.loss_and_grads(&batch, masks.as_deref()).0;
                model.set_param(g, i, orig);
                let numeric = (up - down) / (2.0 * eps);
                let analytic = grads.get(arch.dim, g, i);
                let scale = numeric.abs().max(analytic.abs());
                let err = if scale < 1e-7 {
                    0.0
                } else {
                    (numeric - analytic).abs() / scale
                };
                if err > worst.0 {
                    worst = (err, format!("{}[{i}] batch {b}", group.name));
                }
                n_checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    sheet.check(
        "cnn gradient check",
        worst.0 <= 1e-4 && elapsed < Duration::from_secs(30),
        format!(
            "{n_checked} parameters over 5 batches, max relative error {:.2e} ({}) (<= 1e-4), {:.2}s (< 30s)",
            worst.0,
            if worst.1.is_empty() { "-" } else { &worst.1 },
            elapsed.as_secs_f64()
        ),
    );
}

fn capacity_check(sheet: &mut Sheet) {
    let mut r = seeded(2024);
    let words: Vec<String> = (0..30).map(|i| format!("tok{i}")).collect();
    let tweets: Vec<Tweet> = (0..20)
        .map(|i| {
            let len = r.random_range(3..=6);
            let text: Vec<&str> = (0..len)
                .map(|_| words[r.random_range(0..words.len())].as_str())
                .collect();
            let label = if i % 2 == 0 {
                Label::Ironic
            } else {
                Label::NonIronic
            };
            Tweet::new(format!("toy{i}"), text.join(" "), Lang::En, label).unwrap()
        })
        .collect();
    let ds = Dataset::new(tweets, DatasetLang::Single(Lang::En)).unwrap();
    let rows = unit_rows(words.len(), 8, &mut r);
    let table = EmbeddingTable::from_rows(8, words.iter().cloned().zip(rows)).unwrap();
    let tables = LangTables::single(Lang::En, &table);
    let cfg = TrainConfig {
        epochs: 200,
        batch_size: 4,
        learning_rate: 0.01,
        dropout_rate: 0.2,
        widths: vec![1, 2],
        n_filters: 16,
        max_seq_len: 8,
        early_stop_patience: None,
        val_fraction: None,
        seed: 3,
        ..Default::default()
    };
    let (m1, log1) = cnn_train(&ds, &tables, &cfg).unwrap();
    let (m2, log2) = cnn_train(&ds, &tables, &cfg).unwrap();
    let correct = ds
        .iter()
        .zip(m1.predict(&ds, None))
        .filter(|(t, p)| t.label == p.label)
        .count();
    let final_loss = log1.epochs.last().map_or(f64::NAN, |e| e.train_loss);
    let same = m1.to_text() == m2.to_text() && log1 == log2;
    sheet.check(
        "cnn capacity check",
        correct == ds.len() && same,
        format!(
            "train accuracy {correct}/20 after 200 epochs (final train loss {final_loss:.2e}), \
             repeated run identical: {same}"
        ),
    );
}

fn forest_checks(sheet: &mut Sheet) {
    let slots = vec!["a".to_owned(), "b".to_owned()];
    let mut x = Vec::new();
    let mut y = Vec::new();
    for _ in 0..25 {
        for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            x.push(vec![a, b]);
            y.push(if (a == 1.0) != (b == 1.0) {
                Label::Ironic
            } else {
                Label::NonIronic
            });
        }
    }
    let params = ForestParams {
        n_trees: 50,
        max_depth: Some(2),
        ..Default::default()
    };
    let xor = rf_train(&x, &y, &slots, params, 11).unwrap();
    let xor_acc = xor
        .predict(&x, &slots)
        .unwrap()
        .iter()
        .zip(&y)
        .filter(|(p, l)| p.label == **l)
        .count();

    // Points on either side of a random hyperplane, with a small margin.
    let mut r = seeded(99);
    let dim = 2;
    let w: Vec<f64> = (0..dim).map(|_| gaussian(&mut r)).collect();
    let mut pts = Vec::new();
    while pts.len() < 700 {
        let p: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
        let s: f64 = p.iter().zip(&w).map(|(a, b)| a * b).sum();
        if s.abs() > 0.05 {
            pts.push((
                p,
                if s > 0.0 {
                    Label::Ironic
                } else {
                    Label::NonIronic
                },
            ));
        }
    }
    let (train, test) = pts.split_at(500);
    let names: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    let tx: Vec<Vec<f64>> = train.iter().map(|p| p.0.clone()).collect();
    let ty: Vec<Label> = train.iter().map(|p| p.1).collect();
    let lin_params = ForestParams {
        n_trees: 100,
        ..Default::default()
    };
    let m1 = rf_train(&tx, &ty, &names, lin_params, 5).unwrap();
    let m2 = rf_train(&tx, &ty, &names, lin_params, 5).unwrap();
    let ex: Vec<Vec<f64>> = test.iter().map(|p| p.0.clone()).collect();
    let test_acc = m1
        .predict(&ex, &names)
        .unwrap()
        .iter()
        .zip(test)
        .filter(|(p, t)| p.label == t.1)
        .count() as f64
        / test.len() as f64
        * 100.0;
    let dir = tempfile::tempdir().unwrap();
    m1.save(dir.path().join("a.rf")).unwrap();
    m2.save(dir.path().join("b.rf")).unwrap();
    let bytes_equal = std::fs::read(dir.path().join("a.rf")).unwrap()
        == std::fs::read(dir.path().join("b.rf")).unwrap();
    sheet.check(
        "random forest correctness",
        xor_acc == 100 && test_acc >= 95.0 && bytes_equal,
        format!(
            "XOR depth 2 train accuracy {xor_acc}/100, separable 500/200 test accuracy {test_acc:.1}% (>= 95), \
             serialization bit-identical: {bytes_equal}"
        ),
    );
}

fn metrics_oracle(sheet: &mut Sheet) {
    let mut failures = Vec::new();
    // Hand-derived: P+ = 50/60, R+ = 50/70, P- = 20/40, R- = 20/30.
    let m = metrics(&ConfusionMatrix {
        tp: 50,
        fp: 10,
        fn_: 20,
        tn: 20,
    })
    .unwrap();
    let f = |p: f64, r: f64| 2.0 * p * r / (p + r);
    let f_pos = f(50.0 / 60.0, 50.0 / 70.0);
    let f_neg = f(20.0 / 40.0, 20.0 / 30.0);
    let expect = [
        ("precision_pos", m.precision_pos, 83.3),
        ("recall_pos", m.recall_pos, 71.4),
        ("f1_pos", m.f1_pos, 76.9),
        ("precision_neg", m.precision_neg, 50.0),
        ("recall_neg", m.recall_neg, 66.7),
        ("f1_neg", m.f1_neg, 57.1),
        ("macro_f1", m.macro_f1, 67.0),
    ];
    for (name, got, want) in expect {
        if (got - want).abs() > 0.1 {
            failures.push(format!("{name} {got:.2} != {want}"));
        }
    }
    if (m.macro_f1 - 50.0 * (f_pos + f_neg)).abs() > 1e-9 {
        failures.push("macro_f1 disagrees with the closed form".into());
    }

    let l = |ironic: bool| {
        if ironic {
            Label::Ironic
        } else {
            Label::NonIronic
        }
    };
    let gold: Vec<Label> = (0..10).map(|i| l(i < 6)).collect();
    let cm = confusion(&gold, &gold).unwrap();
    if cm
        != (ConfusionMatrix {
            tp: 6,
            fp: 0,
            fn_: 0,
            tn: 4,
        })
    {
        failures.push(format!("identity confusion {cm:?}"));
    }
    let p = metrics(&cm).unwrap();
    for v in [
        p.accuracy,
        p.precision_pos,
        p.recall_pos,
        p.f1_pos,
        p.precision_neg,
        p.recall_neg,
        p.f1_neg,
        p.macro_precision,
        p.macro_recall,
        p.macro_f1,
    ] {
        if v != 100.0 {
            failures.push(format!("perfect predictions gave {v}"));
        }
    }
    let balanced: Vec<Label> = (0..10).map(|i| l(i % 2 == 0)).collect();
    let all_pos = vec![Label::Ironic; 10];
    let cm = confusion(&balanced, &all_pos).unwrap();
    if cm
        != (ConfusionMatrix {
            tp: 5,
            fp: 5,
            fn_: 0,
            tn: 0,
        })
    {
        failures.push(format!("all-positive confusion {cm:?}"));
    }
    let a = metrics(&cm).unwrap();
    if (a.f1_pos - 200.0 / 3.0).abs() > 1e-9
        || a.f1_neg != 0.0
        || (a.macro_f1 - 100.0 / 3.0).abs() > 1e-9
    {
        failures.push(format!(
            "all-positive f1 {:.2}/{:.2}/{:.2}",
            a.f1_pos, a.f1_neg, a.macro_f1
        ));
    }
    if !matches!(
        confusion(&balanced, &all_pos[..9]),
        Err(EvalError::LengthMismatch { .. })
    ) {
        failures.push("length mismatch accepted".into());
    }
    sheet.check(
        "metrics oracle",
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "50/10/20/20 -> macro-F {:.2}; identity, all-positive and mismatch cases exact",
                m.macro_f1
            )
        } else {
            failures.join("; ")
        },
    );
}

fn irony_bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_irony"));
    c.arg("--quiet");
    c
}

fn run_ok(cmd: &mut Command) {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "{cmd:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn synthetic_end_to_end(sheet: &mut Sheet) {
    let world = SyntheticWorld::generate(SyntheticConfig::default());
    // Library route: align with the seed dictionary, map, train on one
    // language, test on another.
    let (l1, l2) = (Lang::Fr, Lang::Ar);
    let (src, tgt) = (&world.languages[&l1], &world.languages[&l2]);
    let map = fit_procrustes(
        &src.table,
        &tgt.table,
        &world.dictionary(l1, l2),
        ProcrustesConfig::default(),
    )
    .unwrap();
    sheet.map("synthetic fr->ar".into(), &map);
    let map_err = (map.matrix() - world.true_map(l1, l2)).norm();
    let mapped = map_table(&src.table, &map).unwrap();
    let cfg = TrainConfig {
        epochs: 10,
        batch_size: 16,
        learning_rate: 0.003,
        dropout_rate: 0.3,
        widths: vec![1, 2],
        n_filters: 16,
        max_seq_len: 20,
        early_stop_patience: Some(3),
        ..Default::default()
    };
    let (model, _) = cnn_train(&src.train, &LangTables::single(l1, &mapped), &cfg).unwrap();
    let preds = model.predict(&tgt.test, Some(&LangTables::single(l2, &tgt.table)));
    let gold = tgt.test.labels();
    let pred: Vec<Label> = preds.iter().map(|p| p.label).collect();
    let direct = metrics(&confusion(&gold, &pred).unwrap()).unwrap().macro_f1;

    // Binary route: the full 8-row cross-lingual matrix.
    let dir = tempfile::tempdir().unwrap();
    let matrix = world
        .write(
            dir.path(),
            &[],
            &[irony::eval::ModelFamily::CnnCrosslingual],
            10,
        )
        .unwrap();
    let out = dir.path().join("out");
    let start = Instant::now();
    run_ok(
        irony_bin()
            .args(["experiment", "run", "--matrix"])
            .arg(&matrix)
            .arg("--out-dir")
            .arg(&out),
    );
    let elapsed = start.elapsed();
    let records = read_results(&out).unwrap();
    let worst = records
        .iter()
        .map(|r| r.metrics.macro_f1)
        .fold(f64::INFINITY, f64::min);
    let rows: Vec<String> = records
        .iter()
        .map(|r| format!("{} {:.1}", r.label, r.metrics.macro_f1))
        .collect();
    sheet.check(
        "synthetic cross-lingual end to end",
        direct >= 70.0 && records.len() == 8 && worst >= 70.0 && elapsed < Duration::from_secs(300),
        format!(
            "Fr->Ar pipeline macro-F {direct:.1} (map error {map_err:.3}); 8-row matrix min macro-F {worst:.1} \
             [{}] in {:.1}s (< 300s)",
            rows.join(", "),
            elapsed.as_secs_f64()
        ),
    );
}

fn env_path(name: &str) -> Option<PathBuf> {
    std::env::var_os(name)
        .map(PathBuf::from)
        .filter(|p| p.exists())
}

/// Needs `IRONY_AR_CORPUS` (the full public Arabic corpus as
/// `id,lang,label,text` CSV). The CNN part additionally needs
/// `IRONY_AR_EMBEDDINGS`; it uses `IRONY_AR_TRAIN`/`IRONY_AR_TEST` when
/// given and a seeded 80/20 split otherwise.
fn arabic_corpus(sheet: &mut Sheet) {
    let Some(corpus) = env_path("IRONY_AR_CORPUS") else {
        sheet.record(
            "arabic corpus (conditional)",
            Outcome::Skip("IRONY_AR_CORPUS not set".into()),
        );
        return;
    };
    let ds = match load_corpus(&corpus, Lang::Ar) {
        Ok(ds) => ds,
        Err(e) => {
            sheet.record(
                "arabic corpus (conditional)",
                Outcome::Fail(format!("loading failed: {e}")),
            );
            return;
        }
    };
    let s = stats(&ds);
    let counts_ok = s.n_total == 11_225 && s.n_ironic == 6_005 && s.n_non_ironic == 5_220;
    let counts = format!(
        "n_total={} n_ironic={} n_non_ironic={}",
        s.n_total, s.n_ironic, s.n_non_ironic
    );
    let Some(emb) = env_path("IRONY_AR_EMBEDDINGS") else {
        let detail = format!("{counts}; CNN part skipped, IRONY_AR_EMBEDDINGS not set");
        sheet.check("arabic corpus (conditional)", counts_ok, detail);
        return;
    };
    let (train, test) = match (env_path("IRONY_AR_TRAIN"), env_path("IRONY_AR_TEST")) {
        (Some(a), Some(b)) => (
            load_corpus(a, Lang::Ar).unwrap(),
            load_corpus(b, Lang::Ar).unwrap(),
        ),
        _ => {
            let n_train = ds.len() * 4 / 5;
            let sp = split(&ds, n_train, ds.len() - n_train, 42).unwrap();
            (sp.train, sp.test)
        }
    };
    let table = load_embeddings(emb, LoadOptions::default()).unwrap();
    let tables = LangTables::single(Lang::Ar, &table);
    let (model, _) = cnn_train(&train, &tables, &TrainConfig::default()).unwrap();
    let pred: Vec<Label> = model
        .predict(&test, Some(&tables))
        .iter()
        .map(|p| p.label)
        .collect();
    let f = metrics(&confusion(&test.labels(), &pred).unwrap())
        .unwrap()
        .macro_f1;
    sheet.check(
        "arabic corpus (conditional)",
        counts_ok && f >= 70.0,
        format!("{counts}; monolingual CNN macro-F {f:.1} (>= 70)"),
    );
}

fn artifact_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .flatten()
        .map(|e| e.path())
        .filter(|p| {
            let n = p.file_name().unwrap().to_string_lossy().into_owned();
            n.ends_with(".predictions.csv")
                || n.ends_with(".metrics.json")
                || n.ends_with(".log.json")
                || n == "results.csv"
        })
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

fn reproducibility(sheet: &mut Sheet) {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("ws");
    run_ok(
        irony_bin()
            .args([
                "synth",
                "--seed",
                "5",
                "--n-train",
                "200",
                "--n-test",
                "80",
                "--mono",
                "rf_full,rf_surface,cnn_mono",
                "--cross",
                "cnn_crosslingual,rf_surface",
                "--out-dir",
            ])
            .arg(&ws),
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_ok(
        irony_bin()
            .args(["--jobs", "1", "experiment", "run", "--matrix"])
            .arg(ws.join("matrix.toml"))
            .arg("--out-dir")
            .arg(&a),
    );
    run_ok(
        irony_bin()
            .args(["experiment", "run", "--from-manifest"])
            .arg(a.join("manifest.json"))
            .arg("--out-dir")
            .arg(&b),
    );
    let (fa, fb) = (artifact_files(&a), artifact_files(&b));
    let differing: Vec<&String> = fa.keys().filter(|k| fa.get(*k) != fb.get(*k)).collect();
    let n_predictions = fa
        .keys()
        .filter(|k| k.ends_with(".predictions.csv"))
        .count();
    sheet.check(
        "reproducibility from manifest",
        !fa.is_empty() && fa.len() == fb.len() && differing.is_empty() && n_predictions == 25,
        format!(
            "{} artifacts from {n_predictions} experiments, {} differ after re-running from the manifest",
            fa.len(),
            differing.len()
        ),
    );
}

#[test]
fn acceptance() {
    let mut sheet = Sheet {
        rows: Vec::new(),
        maps: Vec::new(),
    };
    procrustes_recovery(&mut sheet);
    csls_oracle(&mut sheet);
    gradient_check(&mut sheet);
    capacity_check(&mut sheet);
    forest_checks(&mut sheet);
    metrics_oracle(&mut sheet);
    synthetic_end_to_end(&mut sheet);
    arabic_corpus(&mut sheet);
    reproducibility(&mut sheet);

    let worst =
        sheet.maps.iter().cloned().fold(
            (String::new(), 0.0f64),
            |a, b| if b.1 > a.1 { b } else { a },
        );
    let n_maps = sheet.maps.len();
    sheet.check(
        "orthogonality invariant",
        worst.1 <= ORTHOGONALITY_TOLERANCE,
        format!(
            "{n_maps} fitted maps, max |W W^T - I|_F {:.2e} ({}) (<= 1e-8)",
            worst.1, worst.0
        ),
    );

    let failed: Vec<&str> = sheet
        .rows
        .iter()
        .filter(|(_, o)| matches!(o, Outcome::Fail(_)))
        .map(|(n, _)| *n)
        .collect();
    assert!(failed.is_empty(), "failed: {failed:?}");
}
