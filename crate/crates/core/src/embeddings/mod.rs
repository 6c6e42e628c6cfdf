//! Pretrained word-embedding tables.
//!
//! Tables are read from the plain-text interchange format: a header line
//! `<vocab_count> <dim>` followed by one line per word, `word v1 ... vdim`,
//! single-space separated. Vectors are held in memory as `f64` rows.

mod coverage;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub use coverage::{coverage, CoverageReport};

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("cannot read embeddings {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad header: {0}")]
    Header(String),
    #[error("row {row} ({word:?}): expected {expected} components, found {found}")]
    DimMismatch {
        row: usize,
        word: String,
        expected: usize,
        found: usize,
    },
    #[error("row {row} ({word:?}): non-numeric component {value:?}")]
    NonNumeric {
        row: usize,
        word: String,
        value: String,
    },
    #[error("row {row}: more vectors than the {declared} declared in the header")]
    TooManyRows { row: usize, declared: usize },
    #[error("cannot normalize zero vector for {word:?}")]
    ZeroNorm { word: String },
    #[error("dimension mismatch: {0} vs {1}")]
    Dim(usize, usize),
    #[error("coverage of an empty dataset")]
    EmptyDataset,
}

/// Vocabulary plus a dense row-major matrix of `len() × dim()` values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    normalized: bool,
}

impl EmbeddingTable {
    /// Builds a table from `(word, vector)` rows. Later duplicates of a word
    /// are skipped with a warning.
    pub fn from_rows<I, S>(dim: usize, rows: I) -> Result<EmbeddingTable, EmbeddingError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        if dim == 0 {
            return Err(EmbeddingError::Header("dimension must be positive".into()));
        }
        let mut table = EmbeddingTable::with_dim(dim);
        for (i, (word, v)) in rows.into_iter().enumerate() {
            let word = word.into();
            if v.len() != dim {
                return Err(EmbeddingError::DimMismatch {
                    row: i + 1,
                    word,
                    expected: dim,
                    found: v.len(),
                });
            }
            table.push(word, &v);
        }
        Ok(table)
    }

    fn with_dim(dim: usize) -> EmbeddingTable {
        EmbeddingTable {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            normalized: false,
        }
    }

    fn push(&mut self, word: String, v: &[f64]) -> bool {
        if self.index.contains_key(&word) {
            log::warn!("duplicate embedding for {word:?}; keeping the first");
            return false;
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(v);
        true
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Words in file order (most frequent first for the usual sources).
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[f64])> + '_ {
        self.words
            .iter()
            .zip(self.data.chunks_exact(self.dim))
            .map(|(w, v)| (w.as_str(), v))
    }

    /// Row index of `word`: exact match first, then the lowercased form.
    /// Lowercasing is a no-op for caseless scripts such as Arabic.
    pub fn index_of(&self, word: &str) -> Option<usize> {
        if let Some(&i) = self.index.get(word) {
            return Some(i);
        }
        let lower = word.to_lowercase();
        if lower != word {
            return self.index.get(&lower).copied();
        }
        None
    }

    /// Vector of `word`, or `None` when it is out of vocabulary.
    pub fn lookup(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row(i))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index_of(word).is_some()
    }

    /// Rows divided by their Euclidean norm. Idempotent.
    pub fn normalize(&self) -> Result<EmbeddingTable, EmbeddingError> {
        let mut out = self.clone();
        for (i, row) in out.data.chunks_exact_mut(self.dim).enumerate() {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(EmbeddingError::ZeroNorm {
                    word: self.words[i].clone(),
                });
            }
            row.iter_mut().for_each(|x| *x /= norm);
        }
        out.normalized = true;
        Ok(out)
    }

    /// Applies `f` to every row, returning a new (unnormalized) table with
    /// the same vocabulary.
    pub fn map_rows(&self, mut f: impl FnMut(&[f64], &mut [f64])) -> EmbeddingTable {
        let mut data = vec![0.0; self.data.len()];
        for (src, dst) in self
            .data
            .chunks_exact(self.dim)
            .zip(data.chunks_exact_mut(self.dim))
        {
            f(src, dst);
        }
        EmbeddingTable {
            data,
            normalized: false,
            ..self.clone()
        }
    }

    /// The first `n` rows.
    pub fn truncated(&self, n: usize) -> EmbeddingTable {
        let n = n.min(self.len());
        let words = self.words[..n].to_vec();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        EmbeddingTable {
            dim: self.dim,
            words,
            index,
            data: self.data[..n * self.dim].to_vec(),
            normalized: self.normalized,
        }
    }

    /// Component-wise mean of all rows (zero for an empty table).
    pub fn mean_vector(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for row in self.data.chunks_exact(self.dim) {
            mean.iter_mut().zip(row).for_each(|(m, x)| *m += x);
        }
        if !self.is_empty() {
            let n = self.len() as f64;
            mean.iter_mut().for_each(|m| *m /= n);
        }
        mean
    }
}

/// Load options for [`load_embeddings`].
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Keep only the first N vectors of the file.
    pub max_vocab: Option<usize>,
}

pub fn load_embeddings(
    path: impl AsRef<Path>,
    opts: LoadOptions,
) -> Result<EmbeddingTable, EmbeddingError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_embeddings(BufReader::new(file), opts)
}

pub fn read_embeddings<R: BufRead>(
    reader: R,
    opts: LoadOptions,
) -> Result<EmbeddingTable, EmbeddingError> {
    let io = |source| EmbeddingError::Io {
        path: "<reader>".into(),
        source,
    };
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| EmbeddingError::Header("missing header line".into()))?
        .map_err(io)?;
    let (declared, dim) = parse_header(&header)?;
    let mut table = EmbeddingTable::with_dim(dim);
    let limit = opts.max_vocab.unwrap_or(usize::MAX);
    let mut seen = 0usize;

    for (i, line) in lines.enumerate() {
        let row = i + 2;
        let line = line.map_err(io)?;
        let line = line.trim_end_matches(['\r', '\n', ' ']);
        if line.is_empty() {
            continue;
        }
        if seen >= limit {
            break;
        }
        if seen >= declared {
            return Err(EmbeddingError::TooManyRows { row, declared });
        }
        let mut parts = line.split(' ').filter(|p| !p.is_empty());
        let word = parts.next().unwrap_or_default().to_owned();
        let mut v = Vec::with_capacity(dim);
        for p in parts {
            let x: f64 = p.parse().map_err(|_| EmbeddingError::NonNumeric {
                row,
                word: word.clone(),
                value: p.to_owned(),
            })?;
            v.push(x);
        }
        if v.len() != dim {
            return Err(EmbeddingError::DimMismatch {
                row,
                word,
                expected: dim,
                found: v.len(),
            });
        }
        table.push(word, &v);
        seen += 1;
    }
    if seen < declared && seen < limit {
        log::warn!("header declares {declared} vectors but the file holds {seen}");
    }
    Ok(table)
}

fn parse_header(line: &str) -> Result<(usize, usize), EmbeddingError> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(EmbeddingError::Header(format!(
            "expected `<count> <dim>`, found {line:?}"
        )));
    }
    let count: usize = parts[0]
        .parse()
        .map_err(|_| EmbeddingError::Header(format!("bad vocabulary count {:?}", parts[0])))?;
    let dim: i64 = parts[1]
        .parse()
        .map_err(|_| EmbeddingError::Header(format!("bad dimension {:?}", parts[1])))?;
    if dim <= 0 {
        return Err(EmbeddingError::Header(format!(
            "dimension must be positive, found {dim}"
        )));
    }
    Ok((count, dim as usize))
}

/// Writes the text format. Components use the shortest representation that
/// parses back to the identical `f64`.
pub fn write_embeddings<W: Write>(table: &EmbeddingTable, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {}", table.len(), table.dim())?;
    for (word, v) in table.rows() {
        w.write_all(word.as_bytes())?;
        for x in v {
            write!(w, " {x}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn save_embeddings(
    table: &EmbeddingTable,
    path: impl AsRef<Path>,
) -> Result<(), EmbeddingError> {
    let path = path.as_ref();
    let io = |source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    write_embeddings(table, BufWriter::new(file)).map_err(io)
}
