//! Vocabulary coverage of a corpus by an embedding table.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::{EmbeddingError, EmbeddingTable};
use crate::corpus::Dataset;
use crate::features::{TokenKind, Tokenizer};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub token_coverage: f64,
    pub type_coverage: f64,
    /// Out-of-vocabulary word types with their frequency, most frequent
    /// first (ties in lexicographic order).
    pub oov_types: Vec<(String, usize)>,
    pub n_tokens: usize,
    pub n_types: usize,
}

impl CoverageReport {
    /// `word,frequency` rows for the OOV types.
    pub fn oov_csv(&self) -> String {
        let mut out = String::from("word,frequency\n");
        for (w, f) in &self.oov_types {
            let w = if w.contains([',', '"', '\n']) {
                format!("\"{}\"", w.replace('"', "\"\""))
            } else {
                w.clone()
            };
            writeln!(out, "{w},{f}").unwrap();
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "tokens={} types={} token_coverage={:.4} type_coverage={:.4} oov_types={}",
            self.n_tokens,
            self.n_types,
            self.token_coverage,
            self.type_coverage,
            self.oov_types.len()
        )
    }
}

/// Word-token coverage. Punctuation and emoticon tokens are excluded from
/// both numerator and denominator. Types are case-folded for Latin scripts;
/// a type is covered when any of its surface forms is found.
pub fn coverage(ds: &Dataset, table: &EmbeddingTable) -> Result<CoverageReport, EmbeddingError> {
    if ds.is_empty() {
        return Err(EmbeddingError::EmptyDataset);
    }
    let tokenizer = Tokenizer::bundled();
    let mut n_tokens = 0usize;
    let mut covered_tokens = 0usize;
    // key -> (frequency, covered)
    let mut types: HashMap<String, (usize, bool)> = HashMap::new();
    for t in ds {
        let Ok(tokens) = tokenizer.tokenize(&t.text, t.lang) else {
            continue;
        };
        for tok in tokens.iter() {
            if matches!(tok.kind, TokenKind::Punctuation | TokenKind::Emoticon) {
                continue;
            }
            let hit = table.contains(&tok.text);
            n_tokens += 1;
            covered_tokens += hit as usize;
            let entry = types.entry(t.lang.fold(&tok.text)).or_insert((0, false));
            entry.0 += 1;
            entry.1 |= hit;
        }
    }
    let n_types = types.len();
    let covered_types = types.values().filter(|(_, c)| *c).count();
    let mut oov_types: Vec<(String, usize)> = types
        .into_iter()
        .filter(|(_, (_, c))| !c)
        .map(|(w, (f, _))| (w, f))
        .collect();
    oov_types.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    Ok(CoverageReport {
        token_coverage: ratio(covered_tokens, n_tokens),
        type_coverage: ratio(covered_types, n_types),
        oov_types,
        n_tokens,
        n_types,
    })
}
