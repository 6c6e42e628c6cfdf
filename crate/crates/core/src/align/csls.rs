//! Cross-domain similarity local scaling.
//!
//! `score(x, y) = 2·cos(x, y) − r_T(x) − r_S(y)`, where `r_T(x)` is the mean
//! cosine of `x` to its `k` nearest target vectors and `r_S(y)` the mean
//! cosine of `y` to its `k` nearest mapped source vectors.

use rayon::prelude::*;

use super::AlignError;
use crate::embeddings::EmbeddingTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CslsConfig {
    pub k: usize,
    /// Restrict candidates to the first `n` target words; `None` for all.
    pub candidate_pool: Option<usize>,
    /// `r_S` is computed against the first `source_sample` mapped source
    /// words.
    pub source_sample: usize,
}

impl Default for CslsConfig {
    fn default() -> Self {
        CslsConfig {
            k: 10,
            candidate_pool: None,
            source_sample: 50_000,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean of the `k` largest values (`k` ≤ `values.len()`, `k` ≥ 1). The top
/// values are summed in descending order so the result does not depend on
/// how the selection permuted them.
pub(crate) fn top_k_mean(values: &mut [f64], k: usize) -> f64 {
    let k = k.min(values.len());
    if k == 0 {
        return 0.0;
    }
    if k < values.len() {
        values.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    }
    let top = &mut values[..k];
    top.sort_unstable_by(|a, b| b.total_cmp(a));
    top.iter().sum::<f64>() / k as f64
}

pub(crate) fn clamp_k(k: usize, n: usize, what: &str) -> usize {
    if k > n {
        log::warn!("CSLS k={k} exceeds {what} size {n}; clamping");
        n
    } else {
        k
    }
}

/// Precomputed `r_S` for a fixed target table and mapped source sample.
#[derive(Debug, Clone)]
pub struct CslsIndex<'a> {
    tgt: &'a EmbeddingTable,
    pool: usize,
    k_t: usize,
    r_s: Vec<f64>,
}

impl<'a> CslsIndex<'a> {
    pub fn new(
        tgt: &'a EmbeddingTable,
        mapped_src: &EmbeddingTable,
        cfg: CslsConfig,
    ) -> Result<CslsIndex<'a>, AlignError> {
        if cfg.k == 0 {
            return Err(AlignError::ZeroK);
        }
        if tgt.is_empty() {
            return Err(AlignError::EmptyTarget);
        }
        if !tgt.is_normalized() {
            return Err(AlignError::NotNormalized("target"));
        }
        if mapped_src.dim() != tgt.dim() {
            return Err(AlignError::Dim(mapped_src.dim(), tgt.dim()));
        }
        let pool = cfg.candidate_pool.unwrap_or(tgt.len()).clamp(1, tgt.len());
        let k_t = clamp_k(cfg.k, pool, "target vocabulary");
        let n_src = cfg.source_sample.min(mapped_src.len());
        let k_s = if n_src == 0 {
            0
        } else {
            clamp_k(cfg.k, n_src, "source sample")
        };
        let src_norm: Vec<Vec<f64>> = (0..n_src).map(|i| unit(mapped_src.row(i))).collect();
        let r_s = (0..pool)
            .into_par_iter()
            .map(|j| {
                let y = tgt.row(j);
                let mut cos: Vec<f64> = src_norm.iter().map(|x| dot(x, y)).collect();
                top_k_mean(&mut cos, k_s)
            })
            .collect();
        Ok(CslsIndex {
            tgt,
            pool,
            k_t,
            r_s,
        })
    }

    /// `r_S(y)` for target row `j` (within the candidate pool).
    pub fn r_s(&self, j: usize) -> f64 {
        self.r_s[j]
    }

    /// `r_T(x)` for a query vector.
    pub fn r_t(&self, query: &[f64]) -> Result<f64, AlignError> {
        let x = self.check_query(query)?;
        let mut cos = self.cosines(&x);
        Ok(top_k_mean(&mut cos, self.k_t))
    }

    fn check_query(&self, query: &[f64]) -> Result<Vec<f64>, AlignError> {
        if query.len() != self.tgt.dim() {
            return Err(AlignError::Dim(query.len(), self.tgt.dim()));
        }
        if query.iter().all(|v| *v == 0.0) {
            return Err(AlignError::ZeroQuery);
        }
        Ok(unit(query))
    }

    fn cosines(&self, x: &[f64]) -> Vec<f64> {
        (0..self.pool).map(|j| dot(x, self.tgt.row(j))).collect()
    }

    /// All candidates ranked by descending CSLS score, ties broken by word.
    pub fn rank(&self, query: &[f64]) -> Result<Vec<(String, f64)>, AlignError> {
        let x = self.check_query(query)?;
        let cos = self.cosines(&x);
        let r_t = top_k_mean(&mut cos.clone(), self.k_t);
        let mut scored: Vec<(usize, f64)> = cos
            .iter()
            .enumerate()
            .map(|(j, c)| (j, 2.0 * c - r_t - self.r_s[j]))
            .collect();
        scored.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.tgt.word(a.0).cmp(self.tgt.word(b.0)))
        });
        Ok(scored
            .into_iter()
            .map(|(j, s)| (self.tgt.word(j).to_owned(), s))
            .collect())
    }

    pub fn top(&self, query: &[f64], n: usize) -> Result<Vec<(String, f64)>, AlignError> {
        let mut ranked = self.rank(query)?;
        ranked.truncate(n);
        Ok(ranked)
    }
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = dot(v, v).sqrt();
    if n == 0.0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / n).collect()
    }
}

/// Ranks every target word for `query`; `mapped_src` supplies the `r_S`
/// sample.
pub fn csls_neighbors(
    query: &[f64],
    tgt: &EmbeddingTable,
    mapped_src: &EmbeddingTable,
    cfg: CslsConfig,
) -> Result<Vec<(String, f64)>, AlignError> {
    CslsIndex::new(tgt, mapped_src, cfg)?.rank(query)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(rows: &[(&str, [f64; 2])]) -> EmbeddingTable {
        EmbeddingTable::from_rows(2, rows.iter().map(|(w, v)| (*w, v.to_vec())))
            .unwrap()
            .normalize()
            .unwrap()
    }

    fn brute(
        query: &[f64],
        tgt: &EmbeddingTable,
        src: &EmbeddingTable,
        k: usize,
    ) -> Vec<(String, f64)> {
        let q = unit(query);
        let mean_top = |mut v: Vec<f64>| {
            v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let k = k.min(v.len());
            v[..k].iter().sum::<f64>() / k as f64
        };
        let r_t = mean_top((0..tgt.len()).map(|j| dot(&q, tgt.row(j))).collect());
        let mut out: Vec<(String, f64)> = (0..tgt.len())
            .map(|j| {
                let y = tgt.row(j);
                let r_s = mean_top((0..src.len()).map(|i| dot(src.row(i), y)).collect());
                (tgt.word(j).to_owned(), 2.0 * dot(&q, y) - r_t - r_s)
            })
            .collect();
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        out
    }

    #[test]
    fn exact_match_ranks_first() {
        let tgt = table(&[("a", [1.0, 0.0]), ("b", [0.0, 1.0]), ("c", [0.7, 0.7])]);
        let cfg = CslsConfig {
            k: 1,
            ..Default::default()
        };
        let ranked = csls_neighbors(&[0.0, 2.0], &tgt, &tgt, cfg).unwrap();
        assert_eq!(ranked[0].0, "b");
    }

    #[test]
    fn toy_table_matches_brute_force() {
        let tgt = table(&[("x", [1.0, 0.2]), ("y", [-0.3, 1.0]), ("z", [0.6, 0.6])]);
        let src = table(&[("p", [0.9, 0.1]), ("q", [0.1, 0.9]), ("r", [-1.0, 0.4])]);
        for k in 1..=3 {
            let cfg = CslsConfig {
                k,
                ..Default::default()
            };
            let got = csls_neighbors(&[0.8, 0.5], &tgt, &src, cfg).unwrap();
            let want = brute(&[0.8, 0.5], &tgt, &src, k);
            assert_eq!(
                got.iter().map(|p| &p.0).collect::<Vec<_>>(),
                want.iter().map(|p| &p.0).collect::<Vec<_>>()
            );
            for (g, w) in got.iter().zip(&want) {
                assert!((g.1 - w.1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn k_larger_than_vocab_is_clamped() {
        let tgt = table(&[("a", [1.0, 0.0]), ("b", [0.0, 1.0])]);
        let cfg = CslsConfig {
            k: 50,
            ..Default::default()
        };
        let got = csls_neighbors(&[1.0, 0.1], &tgt, &tgt, cfg).unwrap();
        let want = brute(&[1.0, 0.1], &tgt, &tgt, 2);
        assert_eq!(got, want);
    }

    #[test]
    fn ties_break_lexicographically() {
        let tgt = table(&[("b", [1.0, 0.0]), ("a", [1.0, 0.0])]);
        let got = csls_neighbors(&[1.0, 0.0], &tgt, &tgt, CslsConfig::default()).unwrap();
        assert_eq!(got[0].0, "a");
        assert_eq!(got[0].1, got[1].1);
    }

    #[test]
    fn errors() {
        let tgt = table(&[("a", [1.0, 0.0])]);
        let empty = EmbeddingTable::from_rows(2, Vec::<(&str, Vec<f64>)>::new()).unwrap();
        assert!(matches!(
            csls_neighbors(&[1.0, 0.0], &empty, &tgt, CslsConfig::default()),
            Err(AlignError::EmptyTarget)
        ));
        assert!(matches!(
            csls_neighbors(&[0.0, 0.0], &tgt, &tgt, CslsConfig::default()),
            Err(AlignError::ZeroQuery)
        ));
        let cfg = CslsConfig {
            k: 0,
            ..Default::default()
        };
        assert!(csls_neighbors(&[1.0, 0.0], &tgt, &tgt, cfg).is_err());
    }

    proptest! {
        // With r-terms forced equal, CSLS and cosine pick the same word.
        #[test]
        fn constant_r_terms_preserve_cosine_argmax(
            angles in prop::collection::vec(0.0f64..std::f64::consts::TAU, 2..12),
            q in 0.0f64..std::f64::consts::TAU,
        ) {
            let words: Vec<String> = (0..angles.len()).map(|i| format!("w{i:02}")).collect();
            let tgt = EmbeddingTable::from_rows(
                2,
                words.iter().zip(&angles).map(|(w, a)| (w.as_str(), vec![a.cos(), a.sin()])),
            ).unwrap().normalize().unwrap();
            // k = |vocab| makes r_T and r_S the mean over everything; using the
            // uniform circle as source makes r_S the same for every target.
            let n = 360;
            let circle = EmbeddingTable::from_rows(
                2,
                (0..n).map(|i| {
                    let a = i as f64 * std::f64::consts::TAU / n as f64;
                    (format!("s{i}"), vec![a.cos(), a.sin()])
                }),
            ).unwrap();
            let cfg = CslsConfig { k: n, ..Default::default() };
            let idx = CslsIndex::new(&tgt, &circle, cfg).unwrap();
            let r0 = idx.r_s(0);
            for j in 0..tgt.len() {
                prop_assert!((idx.r_s(j) - r0).abs() < 1e-9);
            }
            let query = [q.cos(), q.sin()];
            let best_cos = (0..tgt.len())
                .map(|j| dot(&query, tgt.row(j)))
                .fold(f64::NEG_INFINITY, f64::max);
            let top = &idx.rank(&query).unwrap()[0];
            let j = tgt.index_of(&top.0).unwrap();
            prop_assert!((dot(&query, tgt.row(j)) - best_cos).abs() < 1e-9);
        }
    }
}
