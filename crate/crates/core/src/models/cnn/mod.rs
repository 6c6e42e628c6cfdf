//! Sentence CNN over token embeddings: convolutions of several widths,
//! ReLU, max-over-time pooling, dropout, and a 2-way softmax.
//!
//! Embedding row 0 is padding and stays the zero vector; row 1 stands for
//! unknown tokens; vocabulary words follow from row 2.

mod io;
mod train;
mod tune;

use std::collections::{BTreeMap, HashMap};

use rand::Rng as _;
use rand_distr::{Distribution, Uniform};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use train::{cnn_train, holdout_split, EpochLog, TrainConfig, TrainLog};
pub use tune::{tune_random_search, SearchSpace, Trial};

use super::{ModelError, Prediction};
use crate::corpus::{Dataset, Label, Lang, Tweet};
use crate::embeddings::EmbeddingTable;
use crate::features::Tokenizer;
use crate::rng;

pub const PAD: usize = 0;
pub const UNK: usize = 1;

/// Embedding tables by language, used to initialise the embedding layer
/// and to look up words unseen in training at prediction time.
#[derive(Debug, Clone, Default)]
pub struct LangTables<'a> {
    by_lang: BTreeMap<Lang, &'a EmbeddingTable>,
}

impl<'a> LangTables<'a> {
    pub fn new() -> LangTables<'a> {
        LangTables::default()
    }

    pub fn single(lang: Lang, table: &'a EmbeddingTable) -> LangTables<'a> {
        let mut t = LangTables::new();
        t.insert(lang, table);
        t
    }

    pub fn insert(&mut self, lang: Lang, table: &'a EmbeddingTable) {
        self.by_lang.insert(lang, table);
    }

    pub fn get(&self, lang: Lang) -> Option<&'a EmbeddingTable> {
        self.by_lang.get(&lang).copied()
    }

    pub fn dim(&self) -> Option<usize> {
        self.by_lang.values().next().map(|t| t.dim())
    }
}

/// Lookup keys of a tweet's tokens: every token, case-folded for Latin
/// scripts.
pub fn token_keys(text: &str, lang: Lang) -> Vec<(String, String)> {
    match Tokenizer::bundled().tokenize(text, lang) {
        Ok(tokens) => tokens
            .iter()
            .map(|t| (lang.fold(&t.text), t.text.clone()))
            .collect(),
        Err(_) => Vec::new(),
    }
}

/// Training vocabulary keyed by `(language, folded token)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocab {
    keys: Vec<(Lang, String)>,
    index: HashMap<(Lang, String), usize>,
}

impl Vocab {
    pub fn from_keys(keys: impl IntoIterator<Item = (Lang, String)>) -> Vocab {
        let mut v = Vocab::default();
        for k in keys {
            v.push(k);
        }
        v
    }

    /// Tokens of `ds` in order of first appearance.
    pub fn build(ds: &Dataset) -> Vocab {
        let mut v = Vocab::default();
        for t in ds {
            for (key, _) in token_keys(&t.text, t.lang) {
                v.push((t.lang, key));
            }
        }
        v
    }

    fn push(&mut self, k: (Lang, String)) {
        if !self.index.contains_key(&k) {
            self.index.insert(k.clone(), self.keys.len() + 2);
            self.keys.push(k);
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[(Lang, String)] {
        &self.keys
    }

    /// Embedding row of a key, if known.
    pub fn id(&self, lang: Lang, key: &str) -> Option<usize> {
        self.index.get(&(lang, key.to_owned())).copied()
    }

    /// SHA-256 over the `lang<TAB>key` lines.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (l, k) in &self.keys {
            h.update(l.code().as_bytes());
            h.update(b"\t");
            h.update(k.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}

/// Shape of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    pub dim: usize,
    pub widths: Vec<usize>,
    pub n_filters: usize,
    pub max_seq_len: usize,
    pub dropout: f64,
}

impl Architecture {
    pub fn total_filters(&self) -> usize {
        self.widths.len() * self.n_filters
    }

    fn validate(&self) -> Result<(), ModelError> {
        let max_w = self.widths.iter().copied().max().unwrap_or(0);
        if self.dim == 0
            || self.n_filters == 0
            || self.widths.is_empty()
            || self.widths.contains(&0)
        {
            return Err(ModelError::Config(
                "dim, n_filters and widths must be positive".into(),
            ));
        }
        if self.max_seq_len < max_w {
            return Err(ModelError::Config(format!(
                "max_seq_len {} is shorter than the widest filter {max_w}",
                self.max_seq_len
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ModelError::Config(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    pub arch: Architecture,
    pub seed: u64,
    vocab: Vocab,
    /// `(vocab + 2) × dim`, row-major.
    emb: Vec<f64>,
    /// Per width: `n_filters × (width · dim)`.
    filters: Vec<Vec<f64>>,
    /// Per width: `n_filters`.
    filter_bias: Vec<Vec<f64>>,
    /// `2 × total_filters`, row `c` scores class `c` (0 = non_ironic).
    dense: Vec<f64>,
    dense_bias: [f64; 2],
}

/// Name and size of one parameter group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamGroup {
    pub name: String,
    pub len: usize,
}

/// Gradients for every parameter group; embedding gradients are kept only
/// for rows that occurred in the batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub emb: BTreeMap<usize, Vec<f64>>,
    pub filters: Vec<Vec<f64>>,
    pub filter_bias: Vec<Vec<f64>>,
    pub dense: Vec<f64>,
    pub dense_bias: [f64; 2],
}

impl Grads {
    fn zeros(m: &CnnModel) -> Grads {
        Grads {
            emb: BTreeMap::new(),
            filters: m.filters.iter().map(|f| vec![0.0; f.len()]).collect(),
            filter_bias: m.filter_bias.iter().map(|b| vec![0.0; b.len()]).collect(),
            dense: vec![0.0; m.dense.len()],
            dense_bias: [0.0; 2],
        }
    }

    /// Gradient of parameter `i` in group `g` (see [`CnnModel::param_groups`]).
    pub fn get(&self, dim: usize, g: usize, i: usize) -> f64 {
        let n_w = self.filters.len();
        match g {
            0 => self.emb.get(&(i / dim)).map_or(0.0, |r| r[i % dim]),
            g if g <= 2 * n_w => {
                let w = (g - 1) / 2;
                if (g - 1) % 2 == 0 {
                    self.filters[w][i]
                } else {
                    self.filter_bias[w][i]
                }
            }
            g if g == 2 * n_w + 1 => self.dense[i],
            _ => self.dense_bias[i],
        }
    }

    /// Name of the first group holding a non-finite value.
    fn non_finite(&self) -> Option<String> {
        if self.emb.values().flatten().any(|v| !v.is_finite()) {
            return Some("embedding gradient".into());
        }
        for (w, f) in self.filters.iter().enumerate() {
            if f.iter().any(|v| !v.is_finite()) {
                return Some(format!("filter gradient (width index {w})"));
            }
        }
        for (w, f) in self.filter_bias.iter().enumerate() {
            if f.iter().any(|v| !v.is_finite()) {
                return Some(format!("filter bias gradient (width index {w})"));
            }
        }
        if self
            .dense
            .iter()
            .chain(&self.dense_bias)
            .any(|v| !v.is_finite())
        {
            return Some("dense gradient".into());
        }
        None
    }
}

/// Per-example forward results needed for backpropagation.
struct Cache {
    /// Per width, per filter: (window start of the max, max pre-activation).
    pooled: Vec<Vec<(usize, f64)>>,
    /// Dropped-out pooled features.
    z: Vec<f64>,
    probs: [f64; 2],
}

fn softmax(l: [f64; 2]) -> [f64; 2] {
    let m = l[0].max(l[1]);
    let e = [(l[0] - m).exp(), (l[1] - m).exp()];
    let s = e[0] + e[1];
    [e[0] / s, e[1] / s]
}

fn log_softmax(l: [f64; 2], c: usize) -> f64 {
    let m = l[0].max(l[1]);
    l[c] - m - ((l[0] - m).exp() + (l[1] - m).exp()).ln()
}

fn glorot(fan_in: usize, fan_out: usize) -> Uniform<f64> {
    let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Uniform::new_inclusive(-s, s).expect("finite bound")
}

impl CnnModel {
    /// All parameters zero.
    pub fn zeros(vocab: Vocab, arch: Architecture) -> Result<CnnModel, ModelError> {
        arch.validate()?;
        let rows = vocab.len() + 2;
        let f = arch.total_filters();
        Ok(CnnModel {
            emb: vec![0.0; rows * arch.dim],
            filters: arch
                .widths
                .iter()
                .map(|w| vec![0.0; arch.n_filters * w * arch.dim])
                .collect(),
            filter_bias: arch
                .widths
                .iter()
                .map(|_| vec![0.0; arch.n_filters])
                .collect(),
            dense: vec![0.0; 2 * f],
            dense_bias: [0.0; 2],
            vocab,
            arch,
            seed: 0,
        })
    }

    /// Random initialisation. Vocabulary rows come from `tables` when the
    /// word is there and are otherwise drawn uniformly at the scale of the
    /// tables' rows; the unknown row starts at zero. Weights use Glorot
    /// uniform, biases zero.
    pub fn init(
        vocab: Vocab,
        arch: Architecture,
        tables: &LangTables,
        seed: u64,
    ) -> Result<CnnModel, ModelError> {
        let mut m = CnnModel::zeros(vocab, arch)?;
        m.seed = seed;
        let dim = m.arch.dim;
        if let Some(d) = tables.dim() {
            if d != dim {
                return Err(ModelError::Config(format!(
                    "embedding dim {d} differs from model dim {dim}"
                )));
            }
        }
        let mut r = rng::seeded(seed);
        let mean_norm = {
            let norms: Vec<f64> = tables
                .by_lang
                .values()
                .flat_map(|t| {
                    (0..t.len().min(10_000))
                        .map(move |i| t.row(i).iter().map(|x| x * x).sum::<f64>().sqrt())
                })
                .collect();
            if norms.is_empty() {
                1.0
            } else {
                norms.iter().sum::<f64>() / norms.len() as f64
            }
        };
        let a = mean_norm * (3.0 / dim as f64).sqrt();
        let unif = Uniform::new_inclusive(-a, a).expect("finite bound");
        let mut found = 0usize;
        for (k, (lang, key)) in m.vocab.keys.iter().enumerate() {
            let row = &mut m.emb[(k + 2) * dim..(k + 3) * dim];
            match tables.get(*lang).and_then(|t| t.lookup(key)) {
                Some(v) => {
                    row.copy_from_slice(v);
                    found += 1;
                }
                None => row.iter_mut().for_each(|x| *x = unif.sample(&mut r)),
            }
        }
        log::info!(
            "embedding init: {found} of {} vocabulary words found in tables",
            m.vocab.len()
        );
        for (w, f) in m.arch.widths.clone().into_iter().zip(m.filters.iter_mut()) {
            let g = glorot(w * dim, m.arch.n_filters);
            f.iter_mut().for_each(|x| *x = g.sample(&mut r));
        }
        let g = glorot(m.arch.total_filters(), 2);
        m.dense.iter_mut().for_each(|x| *x = g.sample(&mut r));
        Ok(m)
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn n_rows(&self) -> usize {
        self.vocab.len() + 2
    }

    /// Parameter groups in a fixed order: embedding, then filters and bias
    /// for each width, then the dense weights and bias.
    pub fn param_groups(&self) -> Vec<ParamGroup> {
        let mut g = vec![ParamGroup {
            name: "embedding".into(),
            len: self.emb.len(),
        }];
        for (w, (f, b)) in self
            .arch
            .widths
            .iter()
            .zip(self.filters.iter().zip(&self.filter_bias))
        {
            g.push(ParamGroup {
                name: format!("filters[{w}]"),
                len: f.len(),
            });
            g.push(ParamGroup {
                name: format!("filter_bias[{w}]"),
                len: b.len(),
            });
        }
        g.push(ParamGroup {
            name: "dense".into(),
            len: self.dense.len(),
        });
        g.push(ParamGroup {
            name: "dense_bias".into(),
            len: 2,
        });
        g
    }

    fn group_mut(&mut self, g: usize) -> &mut [f64] {
        let n_w = self.filters.len();
        match g {
            0 => &mut self.emb,
            g if g <= 2 * n_w => {
                let w = (g - 1) / 2;
                if (g - 1) % 2 == 0 {
                    &mut self.filters[w]
                } else {
                    &mut self.filter_bias[w]
                }
            }
            g if g == 2 * n_w + 1 => &mut self.dense,
            _ => &mut self.dense_bias,
        }
    }

    pub fn param(&mut self, g: usize, i: usize) -> f64 {
        self.group_mut(g)[i]
    }

    pub fn set_param(&mut self, g: usize, i: usize, v: f64) {
        self.group_mut(g)[i] = v;
    }

    fn all_finite(&self) -> Option<String> {
        let groups = self.param_groups();
        let slices: Vec<&[f64]> = std::iter::once(self.emb.as_slice())
            .chain(
                self.filters
                    .iter()
                    .zip(&self.filter_bias)
                    .flat_map(|(f, b)| [f.as_slice(), b.as_slice()]),
            )
            .chain([self.dense.as_slice(), self.dense_bias.as_slice()])
            .collect();
        groups
            .into_iter()
            .zip(slices)
            .find(|(_, s)| s.iter().any(|v| !v.is_finite()))
            .map(|(g, _)| g.name)
    }

    /// Row ids of a tweet's first `max_seq_len` tokens; unknown tokens map
    /// to [`UNK`]. Padding is implicit.
    pub fn encode(&self, text: &str, lang: Lang) -> Vec<usize> {
        let mut ids: Vec<usize> = token_keys(text, lang)
            .into_iter()
            .map(|(k, _)| self.vocab.id(lang, &k).unwrap_or(UNK))
            .collect();
        ids.truncate(self.arch.max_seq_len);
        ids
    }

    /// `max_seq_len × dim` input with zero rows for padding. Ids at or past
    /// `n_rows()` index into `extra`.
    fn gather(&self, ids: &[usize], extra: &[f64]) -> Vec<f64> {
        let dim = self.arch.dim;
        let mut x = vec![0.0; self.arch.max_seq_len * dim];
        for (t, &id) in ids.iter().take(self.arch.max_seq_len).enumerate() {
            let src = if id < self.n_rows() {
                &self.emb[id * dim..(id + 1) * dim]
            } else {
                let e = id - self.n_rows();
                &extra[e * dim..(e + 1) * dim]
            };
            x[t * dim..(t + 1) * dim].copy_from_slice(src);
        }
        x
    }

    fn forward_cached(&self, ids: &[usize], extra: &[f64], mask: Option<&[f64]>) -> Cache {
        let dim = self.arch.dim;
        let len = self.arch.max_seq_len;
        let n_real = ids.len().min(len);
        let x = self.gather(ids, extra);
        let mut pooled = Vec::with_capacity(self.arch.widths.len());
        let mut z = Vec::with_capacity(self.arch.total_filters());
        for (wi, &w) in self.arch.widths.iter().enumerate() {
            let windows = len - w + 1;
            let real = n_real.min(windows);
            let span = w * dim;
            let mut per_filter = Vec::with_capacity(self.arch.n_filters);
            for f in 0..self.arch.n_filters {
                let kernel = &self.filters[wi][f * span..(f + 1) * span];
                let bias = self.filter_bias[wi][f];
                let mut best = (0, f64::NEG_INFINITY);
                for t in 0..real {
                    let window = &x[t * dim..t * dim + span];
                    let a = bias + kernel.iter().zip(window).map(|(k, v)| k * v).sum::<f64>();
                    if a > best.1 {
                        best = (t, a);
                    }
                }
                // Every window from `real` on covers padding only, where the
                // activation is the bias; the first of them stands for all.
                if real < windows && bias > best.1 {
                    best = (real, bias);
                }
                per_filter.push(best);
                z.push(best.1.max(0.0));
            }
            pooled.push(per_filter);
        }
        if let Some(mask) = mask {
            z.iter_mut().zip(mask).for_each(|(v, m)| *v *= m);
        }
        let probs = softmax(self.logits(&z));
        Cache { pooled, z, probs }
    }

    fn logits(&self, z: &[f64]) -> [f64; 2] {
        let f = z.len();
        let mut l = self.dense_bias;
        for (c, lc) in l.iter_mut().enumerate() {
            *lc += self.dense[c * f..(c + 1) * f]
                .iter()
                .zip(z)
                .map(|(w, v)| w * v)
                .sum::<f64>();
        }
        l
    }

    /// Class probabilities `[p(non_ironic), p(ironic)]` without dropout.
    pub fn forward(&self, ids: &[usize]) -> [f64; 2] {
        self.forward_cached(ids, &[], None).probs
    }

    /// Mean cross-entropy over `batch` and its gradients. `masks` holds one
    /// dropout mask (already scaled) per example; `None` disables dropout.
    pub fn loss_and_grads(
        &self,
        batch: &[(&[usize], Label)],
        masks: Option<&[Vec<f64>]>,
    ) -> (f64, Grads) {
        let mut g = Grads::zeros(self);
        let mut loss = 0.0;
        let scale = 1.0 / batch.len() as f64;
        let dim = self.arch.dim;
        let f_total = self.arch.total_filters();
        for (e, (ids, label)) in batch.iter().enumerate() {
            let mask = masks.map(|m| m[e].as_slice());
            let cache = self.forward_cached(ids, &[], mask);
            let y = label.index();
            loss -= log_softmax(self.logits(&cache.z), y);
            let mut dl = cache.probs;
            dl[y] -= 1.0;
            dl.iter_mut().for_each(|v| *v *= scale);
            for (c, &d) in dl.iter().enumerate() {
                g.dense_bias[c] += d;
                for (gd, zv) in g.dense[c * f_total..(c + 1) * f_total]
                    .iter_mut()
                    .zip(&cache.z)
                {
                    *gd += d * zv;
                }
            }
            for (wi, &w) in self.arch.widths.iter().enumerate() {
                let span = w * dim;
                for (f, &(t, a)) in cache.pooled[wi].iter().enumerate() {
                    if a <= 0.0 {
                        continue;
                    }
                    let j = wi * self.arch.n_filters + f;
                    let mut dz = dl[0] * self.dense[j] + dl[1] * self.dense[f_total + j];
                    if let Some(m) = mask {
                        dz *= m[j];
                    }
                    if dz == 0.0 {
                        continue;
                    }
                    g.filter_bias[wi][f] += dz;
                    let kernel = &self.filters[wi][f * span..(f + 1) * span];
                    let gk = &mut g.filters[wi][f * span..(f + 1) * span];
                    for o in 0..w {
                        let Some(&id) = ids.get(t + o) else { continue };
                        if id == PAD || t + o >= self.arch.max_seq_len {
                            continue;
                        }
                        let row = &self.emb[id * dim..(id + 1) * dim];
                        for d in 0..dim {
                            gk[o * dim + d] += dz * row[d];
                        }
                        let ge = g.emb.entry(id).or_insert_with(|| vec![0.0; dim]);
                        for d in 0..dim {
                            ge[d] += dz * kernel[o * dim + d];
                        }
                    }
                }
            }
        }
        (loss * scale, g)
    }

    /// Mean cross-entropy without dropout.
    pub fn loss(&self, batch: &[(&[usize], Label)]) -> f64 {
        let total: f64 = batch
            .iter()
            .map(|(ids, l)| {
                let c = self.forward_cached(ids, &[], None);
                -log_softmax(self.logits(&c.z), l.index())
            })
            .sum();
        total / batch.len() as f64
    }

    /// Draws an inverted-dropout mask.
    pub(crate) fn dropout_mask(&self, r: &mut rng::Rng) -> Vec<f64> {
        let p = self.arch.dropout;
        let keep = 1.0 / (1.0 - p);
        (0..self.arch.total_filters())
            .map(|_| if r.random::<f64>() < p { 0.0 } else { keep })
            .collect()
    }

    fn decide(probs: [f64; 2]) -> Prediction {
        // An exact tie goes to non_ironic.
        let label = if probs[1] > probs[0] {
            Label::Ironic
        } else {
            Label::NonIronic
        };
        Prediction {
            label,
            p_ironic: probs[1],
        }
    }

    pub fn predict_ids(&self, ids: &[usize]) -> Prediction {
        CnnModel::decide(self.forward(ids))
    }

    pub fn predict_tweet(&self, t: &Tweet) -> Prediction {
        let ids = self.encode(&t.text, t.lang);
        if ids.is_empty() {
            log::warn!("tweet {} has no tokens; predicting from padding", t.id);
        }
        self.predict_ids(&ids)
    }

    /// Predicts every tweet. Words missing from the training vocabulary are
    /// looked up in `fallback` (the table of the tweet's language) and get
    /// temporary embedding rows; words found nowhere use the unknown row.
    pub fn predict(&self, ds: &Dataset, fallback: Option<&LangTables>) -> Vec<Prediction> {
        let dim = self.arch.dim;
        let mut extra_ids: HashMap<(Lang, String), usize> = HashMap::new();
        let mut extra: Vec<f64> = Vec::new();
        let mut n_fallback = 0usize;
        let encoded: Vec<Vec<usize>> = ds
            .iter()
            .map(|t| {
                let mut ids = Vec::new();
                for (key, surface) in token_keys(&t.text, t.lang)
                    .into_iter()
                    .take(self.arch.max_seq_len)
                {
                    if let Some(id) = self.vocab.id(t.lang, &key) {
                        ids.push(id);
                        continue;
                    }
                    let table = fallback
                        .and_then(|f| f.get(t.lang))
                        .filter(|tb| tb.dim() == dim);
                    let id = match table.and_then(|tb| tb.lookup(&surface)) {
                        Some(v) => *extra_ids.entry((t.lang, key)).or_insert_with(|| {
                            extra.extend_from_slice(v);
                            n_fallback += 1;
                            self.n_rows() + n_fallback - 1
                        }),
                        None => UNK,
                    };
                    ids.push(id);
                }
                if ids.is_empty() {
                    log::warn!("tweet {} has no tokens; predicting from padding", t.id);
                }
                ids
            })
            .collect();
        if n_fallback > 0 {
            log::info!("{n_fallback} unseen word types embedded from the fallback table");
        }
        encoded
            .par_iter()
            .map(|ids| CnnModel::decide(self.forward_cached(ids, &extra, None).probs))
            .collect()
    }
}
