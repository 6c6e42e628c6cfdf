//! Labeled tweet corpora.
//!
//! A corpus file is UTF-8 CSV with the header `id,lang,label,text`. Loading
//! validates every row and reports problems with their 1-based row number
//! (the header is row 1).

mod io;
mod preprocess;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use io::{load_corpus, load_corpus_any, read_corpus, save_corpus, write_corpus};
pub use preprocess::{preprocess, preprocess_dataset, PreprocessConfig, PreprocessError};

use crate::rng;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("empty corpus")]
    Empty,
    #[error("duplicate tweet id {id:?}")]
    DuplicateId { id: String },
    #[error("tweet {id:?} has empty text")]
    EmptyText { id: String },
    #[error("tweet {id:?} is {found}, dataset is {expected}")]
    LangMismatch {
        id: String,
        expected: Lang,
        found: Lang,
    },
    #[error("split asks for {requested} tweets but the dataset has {available}")]
    SplitTooLarge { requested: usize, available: usize },
    #[error("invalid preprocess config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// The three corpus languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lang {
    Ar,
    Fr,
    En,
}

impl Lang {
    pub const ALL: [Lang; 3] = [Lang::Ar, Lang::Fr, Lang::En];

    pub fn code(self) -> &'static str {
        match self {
            Lang::Ar => "ar",
            Lang::Fr => "fr",
            Lang::En => "en",
        }
    }

    /// Display name used in report tables ("Ar", "Fr", "En").
    pub fn short_name(self) -> &'static str {
        match self {
            Lang::Ar => "Ar",
            Lang::Fr => "Fr",
            Lang::En => "En",
        }
    }

    /// Whether the language is written in Latin script (and therefore
    /// case-folded for lexicon and embedding lookup).
    pub fn is_latin(self) -> bool {
        matches!(self, Lang::Fr | Lang::En)
    }

    /// Lookup key for a word: lowercased for Latin-script languages, as-is
    /// for Arabic.
    pub fn fold(self, word: &str) -> String {
        if self.is_latin() {
            word.to_lowercase()
        } else {
            word.to_owned()
        }
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Lang {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ar" => Ok(Lang::Ar),
            "fr" => Ok(Lang::Fr),
            "en" => Ok(Lang::En),
            other => Err(format!(
                "unknown language {other:?} (expected ar, fr or en)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Ironic,
    NonIronic,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Ironic => "ironic",
            Label::NonIronic => "non_ironic",
        }
    }

    /// Class index used by the classifiers: non_ironic = 0, ironic = 1.
    pub fn index(self) -> usize {
        match self {
            Label::NonIronic => 0,
            Label::Ironic => 1,
        }
    }

    pub fn from_index(i: usize) -> Label {
        if i == 1 {
            Label::Ironic
        } else {
            Label::NonIronic
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ironic" => Ok(Label::Ironic),
            "non_ironic" => Ok(Label::NonIronic),
            other => Err(format!(
                "unknown label {other:?} (expected ironic or non_ironic)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub text: String,
    pub lang: Lang,
    pub label: Label,
}

impl Tweet {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        lang: Lang,
        label: Label,
    ) -> Result<Tweet, CorpusError> {
        let tweet = Tweet {
            id: id.into(),
            text: text.into(),
            lang,
            label,
        };
        if tweet.text.trim().is_empty() {
            return Err(CorpusError::EmptyText { id: tweet.id });
        }
        Ok(tweet)
    }
}

/// Language of a dataset. `Mixed` is used for concatenated multi-language
/// training sets such as (En/Fr).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DatasetLang {
    Single(Lang),
    Mixed,
}

impl fmt::Display for DatasetLang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetLang::Single(l) => l.fmt(f),
            DatasetLang::Mixed => f.write_str("mixed"),
        }
    }
}

/// An ordered collection of tweets with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    tweets: Vec<Tweet>,
    lang: DatasetLang,
}

impl Dataset {
    /// Builds a dataset, checking id uniqueness and (for single-language
    /// datasets) that every tweet carries that language.
    pub fn new(tweets: Vec<Tweet>, lang: DatasetLang) -> Result<Dataset, CorpusError> {
        let mut seen = HashSet::with_capacity(tweets.len());
        for t in &tweets {
            if let DatasetLang::Single(expected) = lang {
                if t.lang != expected {
                    return Err(CorpusError::LangMismatch {
                        id: t.id.clone(),
                        expected,
                        found: t.lang,
                    });
                }
            }
            if !seen.insert(t.id.as_str()) {
                return Err(CorpusError::DuplicateId { id: t.id.clone() });
            }
        }
        Ok(Dataset { tweets, lang })
    }

    /// Builds a dataset whose language is inferred from its tweets: a single
    /// language if all agree, `Mixed` otherwise. An empty list is `Mixed`.
    pub fn from_tweets(tweets: Vec<Tweet>) -> Result<Dataset, CorpusError> {
        let lang = infer_lang(&tweets);
        Dataset::new(tweets, lang)
    }

    pub fn empty(lang: DatasetLang) -> Dataset {
        Dataset {
            tweets: Vec::new(),
            lang,
        }
    }

    /// Concatenates datasets in order. Ids must stay unique across parts.
    pub fn concat<'a>(
        parts: impl IntoIterator<Item = &'a Dataset>,
    ) -> Result<Dataset, CorpusError> {
        let tweets: Vec<Tweet> = parts
            .into_iter()
            .flat_map(|d| d.tweets.iter().cloned())
            .collect();
        Dataset::from_tweets(tweets)
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn lang(&self) -> DatasetLang {
        self.lang
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.tweets.iter().map(|t| t.label).collect()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Tweet> {
        self.tweets.iter()
    }

    pub fn into_tweets(self) -> Vec<Tweet> {
        self.tweets
    }

    /// Subset by positions, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let tweets = indices.iter().map(|&i| self.tweets[i].clone()).collect();
        Dataset {
            tweets,
            lang: self.lang,
        }
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a Tweet;
    type IntoIter = std::slice::Iter<'a, Tweet>;

    fn into_iter(self) -> Self::IntoIter {
        self.tweets.iter()
    }
}

fn infer_lang(tweets: &[Tweet]) -> DatasetLang {
    match tweets.first() {
        Some(first) if tweets.iter().all(|t| t.lang == first.lang) => {
            DatasetLang::Single(first.lang)
        }
        _ => DatasetLang::Mixed,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
}

/// Shuffles the dataset uniformly with `seed` and assigns the first
/// `n_train` tweets to train and the next `n_test` to test. No
/// stratification. Tweets beyond `n_train + n_test` are left out.
pub fn split(ds: &Dataset, n_train: usize, n_test: usize, seed: u64) -> Result<Split, CorpusError> {
    let requested = n_train + n_test;
    if requested > ds.len() {
        return Err(CorpusError::SplitTooLarge {
            requested,
            available: ds.len(),
        });
    }
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(&mut rng::seeded(seed));
    Ok(Split {
        train: ds.select(&order[..n_train]),
        test: ds.select(&order[n_train..requested]),
        seed,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub n_ironic: usize,
    pub n_non_ironic: usize,
}

impl LabelCounts {
    pub fn total(&self) -> usize {
        self.n_ironic + self.n_non_ironic
    }

    fn add(&mut self, label: Label) {
        match label {
            Label::Ironic => self.n_ironic += 1,
            Label::NonIronic => self.n_non_ironic += 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_ironic: usize,
    pub n_non_ironic: usize,
    pub n_total: usize,
    pub per_language: BTreeMap<Lang, LabelCounts>,
}

pub fn stats(ds: &Dataset) -> CorpusStats {
    let mut overall = LabelCounts::default();
    let mut per_language: BTreeMap<Lang, LabelCounts> = BTreeMap::new();
    for t in ds {
        overall.add(t.label);
        per_language.entry(t.lang).or_default().add(t.label);
    }
    CorpusStats {
        n_ironic: overall.n_ironic,
        n_non_ironic: overall.n_non_ironic,
        n_total: overall.total(),
        per_language,
    }
}
