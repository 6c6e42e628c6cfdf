//! Random forest with Gini splits on bootstrap samples.
//!
//! Text format (one item per line):
//!
//! ```text
//! irony-rf 1
//! params <n_trees> <max_depth|none> <min_leaf> <features_per_split> <seed>
//! slots <name> <name> ...
//! tree <n_nodes>
//! S <feature> <threshold> <left> <right>
//! L <non_ironic count> <ironic count>
//! ```
//!
//! Nodes are listed root first; `x[feature] <= threshold` goes left.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;

use super::{read_file, write_file, ModelError, Prediction};
use crate::corpus::Label;
use crate::rng;

const MAGIC: &str = "irony-rf 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features tried per split; `None` means `⌈√d⌉`.
    pub features_per_split: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 200,
            max_depth: None,
            min_leaf: 1,
            features_per_split: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: [usize; 2],
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn vote(&self, x: &[f64]) -> Label {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
                // A tied leaf votes non_ironic.
                Node::Leaf { counts } => {
                    return if counts[1] > counts[0] {
                        Label::Ironic
                    } else {
                        Label::NonIronic
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForestModel {
    trees: Vec<Tree>,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: usize,
    pub seed: u64,
    pub slot_names: Vec<String>,
}

/// Trains a forest; tree `t` draws from a generator seeded with `seed + t`.
/// Single-class input yields a constant predictor.
pub fn rf_train(
    x: &[Vec<f64>],
    y: &[Label],
    slot_names: &[String],
    params: ForestParams,
    seed: u64,
) -> Result<RandomForestModel, ModelError> {
    if x.is_empty() {
        return Err(ModelError::Empty);
    }
    if x.len() != y.len() {
        return Err(ModelError::LengthMismatch {
            features: x.len(),
            labels: y.len(),
        });
    }
    let d = slot_names.len();
    if let Some(bad) = x.iter().find(|v| v.len() != d) {
        return Err(ModelError::Dim {
            expected: d,
            found: bad.len(),
        });
    }
    if params.n_trees == 0 || params.min_leaf == 0 || params.features_per_split == Some(0) {
        return Err(ModelError::Config(
            "n_trees, min_leaf and features_per_split must be positive".into(),
        ));
    }
    if y.iter().all(|&l| l == y[0]) {
        log::warn!(
            "training labels are all {}; the forest is a constant predictor",
            y[0]
        );
    }
    let m = params
        .features_per_split
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d.max(1));
    let labels: Vec<usize> = y.iter().map(|l| l.index()).collect();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::seeded(seed.wrapping_add(t as u64));
            let sample: Vec<usize> = (0..x.len()).map(|_| r.random_range(0..x.len())).collect();
            let mut grower = Grower {
                x,
                y: &labels,
                d,
                m,
                max_depth: params.max_depth,
                min_leaf: params.min_leaf,
                rng: r,
                nodes: Vec::new(),
            };
            grower.grow(sample, 0);
            Tree {
                nodes: grower.nodes,
            }
        })
        .collect();
    Ok(RandomForestModel {
        trees,
        n_trees: params.n_trees,
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        features_per_split: m,
        seed,
        slot_names: slot_names.to_vec(),
    })
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    d: usize,
    m: usize,
    max_depth: Option<usize>,
    min_leaf: usize,
    rng: rng::Rng,
    nodes: Vec<Node>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

fn gini(c: [usize; 2]) -> f64 {
    let n = (c[0] + c[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (c[0] as f64 / n, c[1] as f64 / n);
    1.0 - p0 * p0 - p1 * p1
}

impl Grower<'_> {
    fn counts(&self, idx: &[usize]) -> [usize; 2] {
        let mut c = [0, 0];
        for &i in idx {
            c[self.y[i]] += 1;
        }
        c
    }

    /// Grows the subtree for `idx` and returns its node index.
    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&idx);
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { counts });
        let pure = counts[0] == 0 || counts[1] == 0;
        if pure || self.max_depth.is_some_and(|md| depth >= md) || idx.len() < 2 * self.min_leaf {
            return at;
        }
        let Some(best) = self.best_split(&idx) else {
            return at;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x[i][best.feature] <= best.threshold);
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[at] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        at
    }

    /// Best Gini split over `m` randomly chosen features. When none of them
    /// can separate the samples the remaining features are tried in the
    /// same random order. Zero-gain splits are accepted so that patterns
    /// such as XOR, where no single split helps, can still be learned.
    fn best_split(&mut self, idx: &[usize]) -> Option<Candidate> {
        let mut order: Vec<usize> = (0..self.d).collect();
        order.shuffle(&mut self.rng);
        let mut best: Option<Candidate> = None;
        for (k, &f) in order.iter().enumerate() {
            if k >= self.m && best.is_some() {
                break;
            }
            if let Some(c) = self.best_threshold(idx, f) {
                if best.as_ref().is_none_or(|b| c.impurity < b.impurity) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn best_threshold(&self, idx: &[usize], f: usize) -> Option<Candidate> {
        let mut sorted: Vec<(f64, usize)> =
            idx.iter().map(|&i| (self.x[i][f], self.y[i])).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total = self.counts(idx);
        let n = sorted.len();
        let mut left = [0usize; 2];
        let mut best: Option<Candidate> = None;
        for i in 0..n - 1 {
            left[sorted[i].1] += 1;
            let (a, b) = (sorted[i].0, sorted[i + 1].0);
            if a == b || i + 1 < self.min_leaf || n - i - 1 < self.min_leaf {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let nl = (i + 1) as f64;
            let impurity = (nl * gini(left) + (n as f64 - nl) * gini(right)) / n as f64;
            if best.as_ref().is_none_or(|c| impurity < c.impurity) {
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Candidate {
                    feature: f,
                    threshold,
                    impurity,
                });
            }
        }
        best
    }
}

impl RandomForestModel {
    pub fn n_features(&self) -> usize {
        self.slot_names.len()
    }

    /// Number of trees voting ironic.
    fn ironic_votes(&self, x: &[f64]) -> usize {
        self.trees
            .iter()
            .filter(|t| t.vote(x) == Label::Ironic)
            .count()
    }

    /// Majority vote; `p_ironic` is the fraction of trees voting ironic and
    /// a tie goes to non_ironic.
    pub fn predict_one(&self, x: &[f64]) -> Result<Prediction, ModelError> {
        if x.len() != self.n_features() {
            return Err(ModelError::Dim {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        let votes = self.ironic_votes(x);
        let p_ironic = votes as f64 / self.trees.len() as f64;
        let label = if 2 * votes > self.trees.len() {
            Label::Ironic
        } else {
            Label::NonIronic
        };
        Ok(Prediction { label, p_ironic })
    }

    /// Predicts a batch after checking that `slot_names` match the model's.
    pub fn predict(
        &self,
        x: &[Vec<f64>],
        slot_names: &[String],
    ) -> Result<Vec<Prediction>, ModelError> {
        if slot_names != self.slot_names.as_slice() {
            return Err(ModelError::SlotMismatch {
                expected: self.slot_names.join(" "),
                found: slot_names.join(" "),
            });
        }
        x.iter().map(|v| self.predict_one(v)).collect()
    }

    /// Whether every tree casts the same vote for `x`.
    pub fn unanimous(&self, x: &[f64]) -> bool {
        let v = self.ironic_votes(x);
        v == 0 || v == self.trees.len()
    }

    /// The first `n` trees as a forest of their own.
    pub fn prefix(&self, n: usize) -> RandomForestModel {
        let mut m = self.clone();
        m.trees.truncate(n);
        m.n_trees = m.trees.len();
        m
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC}\n");
        let depth = self.max_depth.map_or("none".to_owned(), |d| d.to_string());
        writeln!(
            out,
            "params {} {depth} {} {} {}",
            self.n_trees, self.min_leaf, self.features_per_split, self.seed
        )
        .unwrap();
        writeln!(out, "slots {}", self.slot_names.join(" ")).unwrap();
        for t in &self.trees {
            writeln!(out, "tree {}", t.nodes.len()).unwrap();
            for n in &t.nodes {
                match n {
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => writeln!(out, "S {feature} {threshold} {left} {right}").unwrap(),
                    Node::Leaf { counts } => {
                        writeln!(out, "L {} {}", counts[0], counts[1]).unwrap()
                    }
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<RandomForestModel, ModelError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| ModelError::Parse {
                line: 0,
                message: format!("unexpected end of file, expected {what}"),
            })
        };
        let err = |line: usize, message: String| ModelError::Parse { line, message };

        let (ln, magic) = next("header")?;
        if magic != MAGIC {
            return Err(err(ln, format!("expected {MAGIC:?}, found {magic:?}")));
        }
        let (ln, params) = next("params")?;
        let p: Vec<&str> = params.split_whitespace().collect();
        if p.len() != 6 || p[0] != "params" {
            return Err(err(ln, "malformed params line".into()));
        }
        let num = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| err(ln, format!("bad number {s:?}")))
        };
        let n_trees = num(p[1])? as usize;
        let max_depth = if p[2] == "none" {
            None
        } else {
            Some(num(p[2])? as usize)
        };
        let min_leaf = num(p[3])? as usize;
        let features_per_split = num(p[4])? as usize;
        let seed = num(p[5])?;
        let (ln, slots) = next("slots")?;
        let slot_names: Vec<String> = match slots.strip_prefix("slots") {
            Some(rest) => rest.split_whitespace().map(str::to_owned).collect(),
            None => return Err(err(ln, "expected slots line".into())),
        };
        let d = slot_names.len();
        let mut trees = Vec::with_capacity(n_trees);
        for _ in 0..n_trees {
            let (ln, head) = next("tree")?;
            let n_nodes = head
                .strip_prefix("tree ")
                .and_then(|n| n.trim().parse::<usize>().ok())
                .ok_or_else(|| err(ln, "expected tree header".into()))?;
            let mut nodes = Vec::with_capacity(n_nodes);
            for _ in 0..n_nodes {
                let (ln, line) = next("node")?;
                let f: Vec<&str> = line.split_whitespace().collect();
                let us = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| err(ln, format!("bad integer {s:?}")))
                };
                let node = match f.as_slice() {
                    ["S", feat, thr, l, r] => {
                        let feature = us(feat)?;
                        let (left, right) = (us(l)?, us(r)?);
                        if feature >= d || left >= n_nodes || right >= n_nodes {
                            return Err(err(ln, "split refers outside the model".into()));
                        }
                        Node::Split {
                            feature,
                            threshold: thr
                                .parse()
                                .map_err(|_| err(ln, format!("bad threshold {thr:?}")))?,
                            left,
                            right,
                        }
                    }
                    ["L", a, b] => {
                        let counts = [us(a)?, us(b)?];
                        if counts[0] + counts[1] == 0 {
                            return Err(err(ln, "empty leaf".into()));
                        }
                        Node::Leaf { counts }
                    }
                    _ => return Err(err(ln, format!("malformed node {line:?}"))),
                };
                nodes.push(node);
            }
            trees.push(Tree { nodes });
        }
        Ok(RandomForestModel {
            trees,
            n_trees,
            max_depth,
            min_leaf,
            features_per_split,
            seed,
            slot_names,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        write_file(path.as_ref(), &self.to_text())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RandomForestModel, ModelError> {
        RandomForestModel::from_text(&read_file(path.as_ref())?)
    }
}
