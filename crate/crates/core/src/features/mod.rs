//! Surface and lexicon features.
//!
//! A [`FeatureVector`] has sixteen named slots in a fixed order
//! ([`Slot::ALL`]). Twelve are surface slots computable from the text and
//! closed-class word lists; four count hits in language-specific lexicons.
//! Counts are raw, not length-normalized.

pub mod emoticons;
mod lexicon;
mod tokenize;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use lexicon::{load_lexicons, Category, LexiconSet, WordList};
pub use tokenize::{tokenize, Token, TokenKind, TokenList, Tokenizer};

use crate::corpus::{Lang, Tweet};

/// Version tag of the slot layout. Persisted with models.
pub const SCHEMA: &str = "irony-features/1";

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("cannot tokenize empty text")]
    EmptyText,
    #[error("lexicon is for {lexicon}, tweet {id:?} is {tweet}")]
    LangMismatch {
        id: String,
        lexicon: Lang,
        tweet: Lang,
    },
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    ExclamationCount,
    QuestionCount,
    EllipsisCount,
    OtherPunctCount,
    QuotationCount,
    PosEmoticonCount,
    NegEmoticonCount,
    PersonalPronounCount,
    InterjectionCount,
    LengthTokens,
    LengthChars,
    NamedEntityCount,
    NegationCount,
    OpinionPosCount,
    OpinionNegCount,
    OppositionCount,
}

impl Slot {
    pub const ALL: [Slot; 16] = [
        Slot::ExclamationCount,
        Slot::QuestionCount,
        Slot::EllipsisCount,
        Slot::OtherPunctCount,
        Slot::QuotationCount,
        Slot::PosEmoticonCount,
        Slot::NegEmoticonCount,
        Slot::PersonalPronounCount,
        Slot::InterjectionCount,
        Slot::LengthTokens,
        Slot::LengthChars,
        Slot::NamedEntityCount,
        Slot::NegationCount,
        Slot::OpinionPosCount,
        Slot::OpinionNegCount,
        Slot::OppositionCount,
    ];

    pub const SURFACE: [Slot; 12] = [
        Slot::ExclamationCount,
        Slot::QuestionCount,
        Slot::EllipsisCount,
        Slot::OtherPunctCount,
        Slot::QuotationCount,
        Slot::PosEmoticonCount,
        Slot::NegEmoticonCount,
        Slot::PersonalPronounCount,
        Slot::InterjectionCount,
        Slot::LengthTokens,
        Slot::LengthChars,
        Slot::NamedEntityCount,
    ];

    pub const LEXICON: [Slot; 4] = [
        Slot::NegationCount,
        Slot::OpinionPosCount,
        Slot::OpinionNegCount,
        Slot::OppositionCount,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Slot::ExclamationCount => "exclamation_count",
            Slot::QuestionCount => "question_count",
            Slot::EllipsisCount => "ellipsis_count",
            Slot::OtherPunctCount => "other_punct_count",
            Slot::QuotationCount => "quotation_count",
            Slot::PosEmoticonCount => "pos_emoticon_count",
            Slot::NegEmoticonCount => "neg_emoticon_count",
            Slot::PersonalPronounCount => "personal_pronoun_count",
            Slot::InterjectionCount => "interjection_count",
            Slot::LengthTokens => "length_tokens",
            Slot::LengthChars => "length_chars",
            Slot::NamedEntityCount => "named_entity_count",
            Slot::NegationCount => "negation_count",
            Slot::OpinionPosCount => "opinion_pos_count",
            Slot::OpinionNegCount => "opinion_neg_count",
            Slot::OppositionCount => "opposition_count",
        }
    }

    pub fn from_name(name: &str) -> Option<Slot> {
        Slot::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn is_surface(self) -> bool {
        self.index() < Slot::SURFACE.len()
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which slots a classifier consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    /// All sixteen slots.
    Full,
    /// Surface slots that transfer across languages: the named-entity
    /// heuristic is dropped because it is meaningless for Arabic.
    Surface,
}

impl FeatureSet {
    pub fn slots(self) -> Vec<Slot> {
        match self {
            FeatureSet::Full => Slot::ALL.to_vec(),
            FeatureSet::Surface => Slot::SURFACE
                .into_iter()
                .filter(|&s| s != Slot::NamedEntityCount)
                .collect(),
        }
    }

    pub fn slot_names(self) -> Vec<String> {
        self.slots()
            .into_iter()
            .map(|s| s.name().to_owned())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: [f64; 16],
    pub surface_only: bool,
}

impl FeatureVector {
    pub fn get(&self, slot: Slot) -> f64 {
        self.values[slot.index()]
    }

    fn set(&mut self, slot: Slot, value: usize) {
        self.values[slot.index()] = value as f64;
    }

    pub fn values(&self) -> &[f64; 16] {
        &self.values
    }

    /// Values of `slots`, in that order.
    pub fn project(&self, slots: &[Slot]) -> Vec<f64> {
        slots.iter().map(|&s| self.get(s)).collect()
    }

    pub fn select(&self, set: FeatureSet) -> Vec<f64> {
        self.project(&set.slots())
    }
}

/// Surface slots only; lexicon slots stay zero.
pub fn extract_surface(tweet: &Tweet, lex: &LexiconSet) -> Result<FeatureVector, FeatureError> {
    let (fv, _) = surface(tweet, lex)?;
    Ok(fv)
}

/// Surface slots plus lexicon counts.
pub fn extract_full(tweet: &Tweet, lex: &LexiconSet) -> Result<FeatureVector, FeatureError> {
    let (mut fv, keys) = surface(tweet, lex)?;
    fv.set(Slot::NegationCount, lex.negation.count_matches(&keys));
    fv.set(
        Slot::OpinionPosCount,
        lex.opinion_positive.count_matches(&keys),
    );
    fv.set(
        Slot::OpinionNegCount,
        lex.opinion_negative.count_matches(&keys),
    );
    fv.set(Slot::OppositionCount, lex.opposition.count_matches(&keys));
    fv.surface_only = false;
    Ok(fv)
}

pub fn extract(
    tweet: &Tweet,
    lex: &LexiconSet,
    set: FeatureSet,
) -> Result<FeatureVector, FeatureError> {
    match set {
        FeatureSet::Full => extract_full(tweet, lex),
        FeatureSet::Surface => extract_surface(tweet, lex),
    }
}

fn surface(tweet: &Tweet, lex: &LexiconSet) -> Result<(FeatureVector, Vec<String>), FeatureError> {
    if lex.lang != tweet.lang {
        return Err(FeatureError::LangMismatch {
            id: tweet.id.clone(),
            lexicon: lex.lang,
            tweet: tweet.lang,
        });
    }
    let tokenizer =
        Tokenizer::with_extra(lex.emoticons_positive.iter().chain(&lex.emoticons_negative));
    let tokens = tokenizer.tokenize(&tweet.text, tweet.lang)?;
    let keys = tokens.word_keys(tweet.lang);

    let mut fv = FeatureVector {
        values: [0.0; 16],
        surface_only: true,
    };
    let punct = count_punctuation(&tokens);
    fv.set(Slot::ExclamationCount, punct.exclamation);
    fv.set(Slot::QuestionCount, punct.question);
    fv.set(Slot::EllipsisCount, punct.ellipsis);
    fv.set(Slot::OtherPunctCount, punct.other);
    fv.set(Slot::QuotationCount, punct.quotations);

    let emoticons = tokens.iter().filter(|t| t.kind == TokenKind::Emoticon);
    let (mut pos, mut neg) = (0, 0);
    for t in emoticons {
        pos += lex.emoticons_positive.contains(&t.text) as usize;
        neg += lex.emoticons_negative.contains(&t.text) as usize;
    }
    fv.set(Slot::PosEmoticonCount, pos);
    fv.set(Slot::NegEmoticonCount, neg);
    fv.set(
        Slot::PersonalPronounCount,
        lex.personal_pronouns.count_matches(&keys),
    );
    fv.set(
        Slot::InterjectionCount,
        lex.interjections.count_matches(&keys),
    );
    fv.set(Slot::LengthTokens, tokens.len());
    fv.set(Slot::LengthChars, tweet.text.chars().count());
    fv.set(
        Slot::NamedEntityCount,
        named_entities(&tokens, tweet.lang, lex),
    );
    Ok((fv, keys))
}

#[derive(Debug, Default, PartialEq, Eq)]
struct PunctCounts {
    exclamation: usize,
    question: usize,
    ellipsis: usize,
    other: usize,
    quotations: usize,
}

#[derive(Clone, Copy)]
enum Quote {
    /// Same glyph opens and closes: `"` and `'`.
    Straight(usize),
    Open(usize),
    Close(usize),
}

fn quote_kind(c: char) -> Option<Quote> {
    match c {
        '"' => Some(Quote::Straight(0)),
        '\'' => Some(Quote::Straight(1)),
        '“' | '„' => Some(Quote::Open(2)),
        '”' => Some(Quote::Close(2)),
        '«' => Some(Quote::Open(3)),
        '»' => Some(Quote::Close(3)),
        '‘' => Some(Quote::Open(4)),
        '’' => Some(Quote::Close(4)),
        _ => None,
    }
}

/// Counts punctuation over all punctuation tokens. Each run of three or more
/// dots (or each '…') is one ellipsis. Quotes are paired per family in
/// order of appearance; a balanced pair is one quotation and unpaired marks
/// fall back to other punctuation.
fn count_punctuation(tokens: &TokenList) -> PunctCounts {
    let mut c = PunctCounts::default();
    let mut straight = [0usize; 2];
    let mut open = [0usize; 5];
    let mut unmatched_close = 0;
    for tok in tokens.iter().filter(|t| t.kind == TokenKind::Punctuation) {
        let chars: Vec<char> = tok.text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let ch = chars[i];
            if ch == '.' {
                let mut j = i;
                while j < chars.len() && chars[j] == '.' {
                    j += 1;
                }
                if j - i >= 3 {
                    c.ellipsis += 1;
                } else {
                    c.other += j - i;
                }
                i = j;
                continue;
            }
            match ch {
                '!' | '¡' => c.exclamation += 1,
                '?' | '¿' | '؟' => c.question += 1,
                '…' => c.ellipsis += 1,
                _ => match quote_kind(ch) {
                    Some(Quote::Straight(f)) => straight[f] += 1,
                    Some(Quote::Open(f)) => open[f] += 1,
                    Some(Quote::Close(f)) => {
                        if open[f] > 0 {
                            open[f] -= 1;
                            c.quotations += 1;
                        } else {
                            unmatched_close += 1;
                        }
                    }
                    None => c.other += 1,
                },
            }
            i += 1;
        }
    }
    for n in straight {
        c.quotations += n / 2;
        c.other += n % 2;
    }
    c.other += unmatched_close + open.iter().sum::<usize>();
    c
}

/// Capitalization heuristic for Latin scripts: title-case words of at least
/// two letters that do not start a sentence and are not pronouns. Always 0
/// for Arabic.
fn named_entities(tokens: &TokenList, lang: Lang, lex: &LexiconSet) -> usize {
    if !lang.is_latin() {
        return 0;
    }
    let mut count = 0;
    let mut sentence_start = true;
    for tok in tokens.iter() {
        match tok.kind {
            TokenKind::Punctuation => {
                if tok.text.contains(['.', '!', '?', '…']) {
                    sentence_start = true;
                }
            }
            TokenKind::Word | TokenKind::HashtagResidue => {
                let mut chars = tok.text.chars();
                let first_upper = chars.next().is_some_and(char::is_uppercase);
                let rest: Vec<char> = chars.collect();
                let title =
                    first_upper && !rest.is_empty() && rest.iter().any(|c| c.is_lowercase());
                if title
                    && !sentence_start
                    && !lex.personal_pronouns.contains(&lang.fold(&tok.text))
                {
                    count += 1;
                }
                sentence_start = false;
            }
            TokenKind::Number => sentence_start = false,
            TokenKind::Emoticon => {}
        }
    }
    count
}
