use std::collections::HashSet;
use std::path::Path;

use super::AlignError;
use crate::embeddings::EmbeddingTable;

/// Seed translation pairs, one `source<TAB>target` per line.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BilingualDictionary {
    pub pairs: Vec<(String, String)>,
    /// Keep only the first pair listed for each source word.
    pub unique_source: bool,
}

impl BilingualDictionary {
    pub fn new(pairs: Vec<(String, String)>) -> BilingualDictionary {
        BilingualDictionary {
            pairs,
            unique_source: false,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn parse(text: &str) -> Result<BilingualDictionary, AlignError> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: &str| AlignError::Parse {
                line: i + 1,
                message: message.to_owned(),
            };
            let (s, t) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected source<TAB>target"))?;
            let (s, t) = (s.trim(), t.trim());
            if s.is_empty() || t.is_empty() || t.contains('\t') {
                return Err(parse_err("expected exactly two non-empty fields"));
            }
            pairs.push((s.to_owned(), t.to_owned()));
        }
        Ok(BilingualDictionary::new(pairs))
    }

    /// Row indices of pairs whose words are in both tables, plus the number
    /// of pairs dropped.
    pub fn resolve(
        &self,
        src: &EmbeddingTable,
        tgt: &EmbeddingTable,
    ) -> Result<(Vec<(usize, usize)>, usize), AlignError> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut filtered = 0;
        for (s, t) in &self.pairs {
            if self.unique_source && !seen.insert(s.as_str()) {
                continue;
            }
            match (src.index_of(s), tgt.index_of(t)) {
                (Some(i), Some(j)) => out.push((i, j)),
                _ => filtered += 1,
            }
        }
        Ok((out, filtered))
    }
}

pub fn load_dictionary(path: impl AsRef<Path>) -> Result<BilingualDictionary, AlignError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| AlignError::Io {
        path: path.display().to_string(),
        source,
    })?;
    BilingualDictionary::parse(&text)
}
