//! Linear alignment of a source embedding space onto a target space.
//!
//! The map is the orthogonal matrix `W` minimizing `‖W·X − Y‖_F`, where the
//! columns of `X` and `Y` are source and target vectors of dictionary pairs.
//! Its closed form is `W = U·Vᵀ` for the singular value decomposition
//! `U·Σ·Vᵀ = Y·Xᵀ`. Retrieval in the aligned space uses CSLS, which corrects
//! cosine similarity for hubness, and the map can be refined by refitting on
//! mutual CSLS nearest neighbours.

mod csls;
mod dictionary;
mod refine;

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

pub use csls::{csls_neighbors, CslsConfig, CslsIndex};
pub use dictionary::{load_dictionary, BilingualDictionary};
pub use refine::{refine, RefineConfig, RefineOutcome};

use crate::corpus::Lang;
use crate::embeddings::{EmbeddingError, EmbeddingTable};

/// Maximum tolerated `‖W·Wᵀ − I‖_F` for a [`LinearMap`].
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum AlignError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dim(usize, usize),
    #[error("no usable dictionary pairs ({filtered} filtered as out of vocabulary)")]
    NoPairs { filtered: usize },
    #[error("{0} embeddings must be normalized first")]
    NotNormalized(&'static str),
    #[error("matrix is not orthogonal: ‖W·Wᵀ − I‖_F = {0:e}")]
    NotOrthogonal(f64),
    #[error("target table is empty")]
    EmptyTarget,
    #[error("CSLS k must be at least 1")]
    ZeroK,
    #[error("query vector is zero")]
    ZeroQuery,
    #[error("refinement needs at least one round")]
    NoRounds,
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitStats {
    pub n_pairs_used: usize,
    /// `‖W·X − Y‖_F` over the pairs used for fitting.
    pub residual: f64,
}

/// An orthogonal `dim × dim` map from a source to a target space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    w: DMatrix<f64>,
    pub src_lang: Option<Lang>,
    pub tgt_lang: Option<Lang>,
    pub fit_stats: FitStats,
}

impl LinearMap {
    /// Wraps `w`, rejecting non-square or non-orthogonal matrices.
    pub fn new(w: DMatrix<f64>) -> Result<LinearMap, AlignError> {
        if w.nrows() != w.ncols() {
            return Err(AlignError::Dim(w.nrows(), w.ncols()));
        }
        let err = orthogonality_error(&w);
        if err.is_nan() || err > ORTHOGONALITY_TOLERANCE {
            return Err(AlignError::NotOrthogonal(err));
        }
        Ok(LinearMap {
            w,
            src_lang: None,
            tgt_lang: None,
            fit_stats: FitStats::default(),
        })
    }

    pub fn identity(dim: usize) -> LinearMap {
        LinearMap::new(DMatrix::identity(dim, dim)).expect("identity is orthogonal")
    }

    pub fn with_langs(mut self, src: Lang, tgt: Lang) -> LinearMap {
        self.src_lang = Some(src);
        self.tgt_lang = Some(tgt);
        self
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn orthogonality_error(&self) -> f64 {
        orthogonality_error(&self.w)
    }

    /// `W·v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(v, &mut out);
        out
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..n).map(|c| self.w[(r, c)] * v[c]).sum();
        }
    }

    /// Text form: a `dim` line, then `dim` rows of `dim` space-separated
    /// values. Values round-trip exactly.
    pub fn to_text(&self) -> String {
        let n = self.dim();
        let mut out = format!("{n}\n");
        for r in 0..n {
            for c in 0..n {
                if c > 0 {
                    out.push(' ');
                }
                write!(out, "{}", self.w[(r, c)]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<LinearMap, AlignError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(AlignError::Parse {
            line: 1,
            message: "missing dimension line".into(),
        })?;
        let dim: usize = first.trim().parse().map_err(|_| AlignError::Parse {
            line: 1,
            message: format!("bad dimension {first:?}"),
        })?;
        let mut data = Vec::with_capacity(dim * dim);
        let mut rows = 0;
        for (i, line) in lines {
            let parse_err = |message: String| AlignError::Parse {
                line: i + 1,
                message,
            };
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|_| parse_err(format!("bad value {x:?}")))
                })
                .collect::<Result<_, _>>()?;
            if row.len() != dim {
                return Err(parse_err(format!(
                    "expected {dim} values, found {}",
                    row.len()
                )));
            }
            data.extend(row);
            rows += 1;
        }
        if rows != dim {
            return Err(AlignError::Parse {
                line: rows + 2,
                message: format!("expected {dim} rows, found {rows}"),
            });
        }
        LinearMap::new(DMatrix::from_row_slice(dim, dim, &data))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), AlignError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|source| AlignError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<LinearMap, AlignError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| AlignError::Io {
            path: path.display().to_string(),
            source,
        })?;
        LinearMap::from_text(&text)
    }
}

fn orthogonality_error(w: &DMatrix<f64>) -> f64 {
    let n = w.nrows();
    (w * w.transpose() - DMatrix::<f64>::identity(n, n)).norm()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProcrustesConfig {
    /// Subtract the mean of the paired source and target vectors before
    /// fitting.
    pub center: bool,
}

/// Orthogonal Procrustes on explicit vector pairs: the orthogonal `W`
/// minimizing `Σ ‖W·xᵢ − yᵢ‖²`.
pub fn procrustes(xs: &[&[f64]], ys: &[&[f64]]) -> Result<DMatrix<f64>, AlignError> {
    let dim = xs.first().map_or(0, |x| x.len());
    if xs.is_empty() {
        return Err(AlignError::NoPairs { filtered: 0 });
    }
    if xs.len() != ys.len() {
        return Err(AlignError::Dim(xs.len(), ys.len()));
    }
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (x, y) in xs.iter().zip(ys) {
        if x.len() != dim || y.len() != dim {
            return Err(AlignError::Dim(x.len(), y.len()));
        }
        m += DVector::from_column_slice(y) * DVector::from_column_slice(x).transpose();
    }
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    Ok(u * v_t)
}

/// `‖W·X − Y‖_F` over explicit pairs.
pub fn residual(w: &DMatrix<f64>, xs: &[&[f64]], ys: &[&[f64]]) -> f64 {
    let mut sum = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let wx = w * DVector::from_column_slice(x);
        sum += wx
            .iter()
            .zip(y.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    sum.sqrt()
}

/// Fits the source→target map from dictionary pairs. Both tables must be
/// normalized and share a dimension; pairs with an out-of-vocabulary word
/// are dropped first.
pub fn fit_procrustes(
    src: &EmbeddingTable,
    tgt: &EmbeddingTable,
    dict: &BilingualDictionary,
    cfg: ProcrustesConfig,
) -> Result<LinearMap, AlignError> {
    let (pairs, filtered) = dict.resolve(src, tgt)?;
    if filtered > 0 {
        log::info!("{filtered} dictionary pairs filtered as out of vocabulary");
    }
    if pairs.is_empty() {
        return Err(AlignError::NoPairs { filtered });
    }
    fit_pairs(src, tgt, &pairs, cfg)
}

pub(crate) fn fit_pairs(
    src: &EmbeddingTable,
    tgt: &EmbeddingTable,
    pairs: &[(usize, usize)],
    cfg: ProcrustesConfig,
) -> Result<LinearMap, AlignError> {
    if !src.is_normalized() {
        return Err(AlignError::NotNormalized("source"));
    }
    if !tgt.is_normalized() {
        return Err(AlignError::NotNormalized("target"));
    }
    if src.dim() != tgt.dim() {
        return Err(AlignError::Dim(src.dim(), tgt.dim()));
    }
    if pairs.len() < src.dim() {
        log::warn!(
            "only {} dictionary pairs for dimension {}",
            pairs.len(),
            src.dim()
        );
    }
    let xs: Vec<&[f64]> = pairs.iter().map(|&(s, _)| src.row(s)).collect();
    let ys: Vec<&[f64]> = pairs.iter().map(|&(_, t)| tgt.row(t)).collect();
    let w = if cfg.center {
        let xc = centered(&xs);
        let yc = centered(&ys);
        let xr: Vec<&[f64]> = xc.iter().map(Vec::as_slice).collect();
        let yr: Vec<&[f64]> = yc.iter().map(Vec::as_slice).collect();
        procrustes(&xr, &yr)?
    } else {
        procrustes(&xs, &ys)?
    };
    let res = residual(&w, &xs, &ys);
    let mut map = LinearMap::new(w)?;
    map.fit_stats = FitStats {
        n_pairs_used: pairs.len(),
        residual: res,
    };
    Ok(map)
}

fn centered(rows: &[&[f64]]) -> Vec<Vec<f64>> {
    let dim = rows[0].len();
    let mut mean = vec![0.0; dim];
    for r in rows {
        mean.iter_mut().zip(r.iter()).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= rows.len() as f64);
    rows.iter()
        .map(|r| r.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect()
}

/// Replaces every vector `v` by `W·v` and re-normalizes.
pub fn map_table(src: &EmbeddingTable, m: &LinearMap) -> Result<EmbeddingTable, AlignError> {
    if src.dim() != m.dim() {
        return Err(AlignError::Dim(src.dim(), m.dim()));
    }
    let mapped = src.map_rows(|v, out| m.apply_into(v, out));
    Ok(mapped.normalize()?)
}

/// A Haar-distributed random orthogonal matrix: QR of a Gaussian matrix with
/// the signs of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal(dim: usize, rng: &mut impl rand::Rng) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..dim {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn unit_table(words: &[&str], rows: &[Vec<f64>]) -> EmbeddingTable {
        EmbeddingTable::from_rows(
            rows[0].len(),
            words.iter().copied().zip(rows.iter().cloned()),
        )
        .unwrap()
        .normalize()
        .unwrap()
    }

    #[test]
    fn identity_dictionary_gives_identity() {
        let mut r = rng::seeded(3);
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..4).map(|_| StandardNormal.sample(&mut r)).collect())
            .collect();
        let words: Vec<String> = (0..8).map(|i| format!("w{i}")).collect();
        let refs: Vec<&str> = words.iter().map(String::as_str).collect();
        let t = unit_table(&refs, &rows);
        let dict = BilingualDictionary::new(words.iter().map(|w| (w.clone(), w.clone())).collect());
        let m = fit_procrustes(&t, &t, &dict, ProcrustesConfig::default()).unwrap();
        assert!((m.matrix() - DMatrix::identity(4, 4)).norm() <= 1e-10);
        assert_eq!(m.fit_stats.n_pairs_used, 8);
        assert!(m.fit_stats.residual <= 1e-10);
    }

    #[test]
    fn quarter_turn() {
        let src = unit_table(&["a", "b"], &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let tgt = unit_table(&["a'", "b'"], &[vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let dict =
            BilingualDictionary::new(vec![("a".into(), "a'".into()), ("b".into(), "b'".into())]);
        let m = fit_procrustes(&src, &tgt, &dict, ProcrustesConfig::default()).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((m.matrix() - expected).norm() <= 1e-10);

        let mapped = map_table(&src, &m).unwrap();
        assert!((mapped.row(0)[0] - 0.0).abs() <= 1e-12 && (mapped.row(0)[1] - 1.0).abs() <= 1e-12);
        assert!((mapped.row(1)[0] + 1.0).abs() <= 1e-12 && mapped.row(1)[1].abs() <= 1e-12);
    }

    #[test]
    fn identity_map_leaves_table_unchanged() {
        let t = unit_table(&["x", "y"], &[vec![0.6, 0.8], vec![-1.0, 0.0]]);
        let mapped = map_table(&t, &LinearMap::identity(2)).unwrap();
        for i in 0..2 {
            for (a, b) in t.row(i).iter().zip(mapped.row(i)) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn errors() {
        let a = unit_table(&["a"], &[vec![1.0, 0.0]]);
        let b = unit_table(&["b"], &[vec![1.0, 0.0, 0.0]]);
        let dict = BilingualDictionary::new(vec![("a".into(), "b".into())]);
        assert!(matches!(
            fit_procrustes(&a, &b, &dict, Default::default()),
            Err(AlignError::Dim(2, 3))
        ));
        let none = BilingualDictionary::new(vec![("zz".into(), "b".into())]);
        assert!(matches!(
            fit_procrustes(&a, &a, &none, Default::default()),
            Err(AlignError::NoPairs { filtered: 1 })
        ));
        let raw = EmbeddingTable::from_rows(2, [("a", vec![2.0, 0.0])]).unwrap();
        let same = BilingualDictionary::new(vec![("a".into(), "a".into())]);
        assert!(matches!(
            fit_procrustes(&raw, &a, &same, Default::default()),
            Err(AlignError::NotNormalized(_))
        ));
        assert!(matches!(
            map_table(&b, &LinearMap::identity(2)),
            Err(AlignError::Dim(3, 2))
        ));
        assert!(matches!(
            LinearMap::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0])),
            Err(AlignError::NotOrthogonal(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        let q = random_orthogonal(5, &mut rng::seeded(11));
        let m = LinearMap::new(q).unwrap();
        let back = LinearMap::from_text(&m.to_text()).unwrap();
        assert_eq!(back.matrix(), m.matrix());
        assert!(LinearMap::from_text("2\n1 0\n").is_err());
        assert!(LinearMap::from_text("2\n1 0\n0 x\n").is_err());
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut r = rng::seeded(0);
        for dim in [1, 2, 7, 30] {
            let q = random_orthogonal(dim, &mut r);
            assert!(orthogonality_error(&q) < 1e-12);
        }
    }

    #[test]
    fn centered_fit_recovers_rotation_of_shifted_cloud() {
        let mut r = rng::seeded(5);
        let q = random_orthogonal(3, &mut r);
        let xs: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..3).map(|_| StandardNormal.sample(&mut r)).collect())
            .collect();
        let ys: Vec<Vec<f64>> = xs
            .iter()
            .map(|x| {
                (&q * DVector::from_column_slice(x))
                    .iter()
                    .copied()
                    .collect()
            })
            .collect();
        let xr: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let yr: Vec<&[f64]> = ys.iter().map(Vec::as_slice).collect();
        let w = procrustes(&xr, &yr).unwrap();
        assert!((w - &q).norm() < 1e-10);
        let xc = centered(&xr);
        let yc = centered(&yr);
        let w = procrustes(
            &xc.iter().map(Vec::as_slice).collect::<Vec<_>>(),
            &yc.iter().map(Vec::as_slice).collect::<Vec<_>>(),
        )
        .unwrap();
        assert!((w - q).norm() < 1e-10);
    }
}
