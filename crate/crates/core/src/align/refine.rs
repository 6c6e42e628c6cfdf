//! Iterative refinement: induce a dictionary from mutual CSLS nearest
//! neighbours among the most frequent words, then refit.

use rayon::prelude::*;

use super::csls::{clamp_k, dot, top_k_mean};
use super::{fit_pairs, AlignError, LinearMap, ProcrustesConfig};
use crate::embeddings::EmbeddingTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefineConfig {
    /// Size of the top-frequency slice taken from each table.
    pub top_n: usize,
    pub k: usize,
    pub procrustes: ProcrustesConfig,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            top_n: 10_000,
            k: 10,
            procrustes: ProcrustesConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub map: LinearMap,
    /// Per completed round: root-mean-square pair residual
    /// `‖W·X − Y‖_F / √n` over that round's induced dictionary.
    pub residuals: Vec<f64>,
    pub dictionary_sizes: Vec<usize>,
    pub stopped_early: bool,
}

/// Runs `rounds` refinement rounds from `m`. Both tables must be normalized
/// and ordered most frequent first.
pub fn refine(
    src: &EmbeddingTable,
    tgt: &EmbeddingTable,
    m: &LinearMap,
    rounds: usize,
    cfg: RefineConfig,
) -> Result<RefineOutcome, AlignError> {
    if rounds == 0 {
        return Err(AlignError::NoRounds);
    }
    if cfg.k == 0 {
        return Err(AlignError::ZeroK);
    }
    if !src.is_normalized() {
        return Err(AlignError::NotNormalized("source"));
    }
    if !tgt.is_normalized() {
        return Err(AlignError::NotNormalized("target"));
    }
    if src.dim() != tgt.dim() || src.dim() != m.dim() {
        return Err(AlignError::Dim(src.dim(), tgt.dim()));
    }
    if tgt.is_empty() {
        return Err(AlignError::EmptyTarget);
    }
    let n_s = cfg.top_n.min(src.len());
    let n_t = cfg.top_n.min(tgt.len());
    let k_s = clamp_k(cfg.k, n_s, "source slice");
    let k_t = clamp_k(cfg.k, n_t, "target slice");

    let mut current = m.clone();
    let mut residuals = Vec::new();
    let mut sizes = Vec::new();
    let mut stopped_early = false;
    for round in 0..rounds {
        let pairs = mutual_neighbours(src, tgt, &current, n_s, n_t, k_s, k_t);
        if pairs.is_empty() {
            log::warn!(
                "refinement round {} induced an empty dictionary; stopping",
                round + 1
            );
            stopped_early = true;
            break;
        }
        let mut next = fit_pairs(src, tgt, &pairs, cfg.procrustes)?;
        next.src_lang = m.src_lang;
        next.tgt_lang = m.tgt_lang;
        let rms = next.fit_stats.residual / (pairs.len() as f64).sqrt();
        residuals.push(rms);
        sizes.push(pairs.len());
        log::info!(
            "refinement round {}: {} pairs, rms residual {rms:.6}",
            round + 1,
            pairs.len()
        );
        current = next;
    }
    Ok(RefineOutcome {
        map: current,
        residuals,
        dictionary_sizes: sizes,
        stopped_early,
    })
}

fn mutual_neighbours(
    src: &EmbeddingTable,
    tgt: &EmbeddingTable,
    m: &LinearMap,
    n_s: usize,
    n_t: usize,
    k_s: usize,
    k_t: usize,
) -> Vec<(usize, usize)> {
    let mapped: Vec<Vec<f64>> = (0..n_s)
        .into_par_iter()
        .map(|i| {
            let v = m.apply(src.row(i));
            let n = dot(&v, &v).sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
        .collect();
    let cos_row =
        |i: usize| -> Vec<f64> { (0..n_t).map(|j| dot(&mapped[i], tgt.row(j))).collect() };
    let cos_col =
        |j: usize| -> Vec<f64> { (0..n_s).map(|i| dot(&mapped[i], tgt.row(j))).collect() };

    let r_t: Vec<f64> = (0..n_s)
        .into_par_iter()
        .map(|i| top_k_mean(&mut cos_row(i), k_t))
        .collect();
    let r_s: Vec<f64> = (0..n_t)
        .into_par_iter()
        .map(|j| top_k_mean(&mut cos_col(j), k_s))
        .collect();

    // Ties go to the lexicographically smaller word.
    let forward: Vec<usize> = (0..n_s)
        .into_par_iter()
        .map(|i| {
            let c = cos_row(i);
            argmax((0..n_t).map(|j| (2.0 * c[j] - r_s[j], tgt.word(j))))
        })
        .collect();
    let backward: Vec<usize> = (0..n_t)
        .into_par_iter()
        .map(|j| {
            let c = cos_col(j);
            argmax((0..n_s).map(|i| (2.0 * c[i] - r_t[i], src.word(i))))
        })
        .collect();
    (0..n_s)
        .filter(|&i| backward[forward[i]] == i)
        .map(|i| (i, forward[i]))
        .collect()
}

fn argmax<'w>(scores: impl Iterator<Item = (f64, &'w str)>) -> usize {
    let mut best: Option<(usize, f64, &str)> = None;
    for (idx, (s, w)) in scores.enumerate() {
        let better = match best {
            None => true,
            Some((_, bs, bw)) => s > bs || (s == bs && w < bw),
        };
        if better {
            best = Some((idx, s, w));
        }
    }
    best.map_or(0, |b| b.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::random_orthogonal;
    use crate::rng;
    use nalgebra::DVector;
    use rand_distr::{Distribution, Normal, StandardNormal};

    fn planted(
        n: usize,
        dim: usize,
        sigma: f64,
        seed: u64,
    ) -> (EmbeddingTable, EmbeddingTable, LinearMap) {
        let mut r = rng::seeded(seed);
        let q = random_orthogonal(dim, &mut r);
        let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
        let mut src_rows = Vec::new();
        let mut tgt_rows = Vec::new();
        for i in 0..n {
            let x: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut r)).collect();
            let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let x: Vec<f64> = x.iter().map(|v| v / nx).collect();
            let mut y: Vec<f64> = (&q * DVector::from_column_slice(&x))
                .iter()
                .copied()
                .collect();
            if sigma > 0.0 {
                y.iter_mut().for_each(|v| *v += noise.sample(&mut r));
            }
            src_rows.push((format!("s{i:04}"), x));
            tgt_rows.push((format!("t{i:04}"), y));
        }
        let src = EmbeddingTable::from_rows(dim, src_rows)
            .unwrap()
            .normalize()
            .unwrap();
        let tgt = EmbeddingTable::from_rows(dim, tgt_rows)
            .unwrap()
            .normalize()
            .unwrap();
        (src, tgt, LinearMap::new(q).unwrap())
    }

    #[test]
    fn exact_planted_map_is_a_fixed_point() {
        let (src, tgt, q) = planted(300, 20, 0.0, 1);
        let out = refine(&src, &tgt, &q, 1, RefineConfig::default()).unwrap();
        assert_eq!(out.dictionary_sizes, vec![300]);
        assert!((out.map.matrix() - q.matrix()).norm() <= 1e-8);
    }

    #[test]
    fn residual_non_increasing_under_noise() {
        let (src, tgt, q) = planted(400, 20, 0.01, 2);
        // Start from a map fitted on a small seed dictionary.
        let seed: Vec<(usize, usize)> = (0..40).map(|i| (i, i)).collect();
        let start = fit_pairs(&src, &tgt, &seed, ProcrustesConfig::default()).unwrap();
        let out = refine(&src, &tgt, &start, 4, RefineConfig::default()).unwrap();
        assert_eq!(out.residuals.len(), 4);
        for w in out.residuals.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{:?}", out.residuals);
        }
        assert!((out.map.matrix() - q.matrix()).norm() < 0.1);
    }

    #[test]
    fn zero_rounds_rejected() {
        let (src, tgt, q) = planted(10, 3, 0.0, 3);
        assert!(matches!(
            refine(&src, &tgt, &q, 0, RefineConfig::default()),
            Err(AlignError::NoRounds)
        ));
    }

    #[test]
    fn argmax_breaks_ties_by_word() {
        assert_eq!(argmax([(1.0, "b"), (1.0, "a"), (0.5, "0")].into_iter()), 1);
        assert_eq!(argmax([(0.1, "z"), (2.0, "y")].into_iter()), 1);
    }
}
