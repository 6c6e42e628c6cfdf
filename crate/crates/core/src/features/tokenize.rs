//! Whitespace-and-punctuation tokenizer for tweets.
//!
//! Text is split on Unicode whitespace, then each chunk is scanned left to
//! right. Known emoticons are matched first (longest match), so `:)` stays a
//! single token instead of two punctuation marks. Words keep single internal
//! apostrophes, hyphens, periods and commas (`don't`, `l'homme`, `3.5`).
//! Arabic is handled by the same rules; there is no morphological
//! segmentation.

use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::emoticons;
use super::FeatureError;
use crate::corpus::Lang;
use crate::script;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Word,
    Punctuation,
    Emoticon,
    HashtagResidue,
    Number,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
}

impl Token {
    /// Words, numbers and hashtag bodies.
    pub fn is_wordlike(&self) -> bool {
        matches!(
            self.kind,
            TokenKind::Word | TokenKind::HashtagResidue | TokenKind::Number
        )
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenList {
    pub tokens: Vec<Token>,
}

impl TokenList {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.tokens.iter()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    /// Lookup keys of the word-like tokens, in order.
    pub fn word_keys(&self, lang: Lang) -> Vec<String> {
        self.tokens
            .iter()
            .filter(|t| t.is_wordlike())
            .map(|t| lang.fold(&t.text))
            .collect()
    }
}

/// Tokenizer with a fixed emoticon inventory.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    emoticons: HashSet<String>,
    max_emoticon_chars: usize,
}

impl Tokenizer {
    pub fn new<I, S>(emoticons: I) -> Tokenizer
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let emoticons: HashSet<String> = emoticons.into_iter().map(Into::into).collect();
        let max_emoticon_chars = emoticons
            .iter()
            .map(|e| e.chars().count())
            .max()
            .unwrap_or(0);
        Tokenizer {
            emoticons,
            max_emoticon_chars,
        }
    }

    /// Tokenizer over the bundled emoticon inventory.
    pub fn bundled() -> &'static Tokenizer {
        static BUNDLED: OnceLock<Tokenizer> = OnceLock::new();
        BUNDLED.get_or_init(|| {
            Tokenizer::new(
                emoticons::POSITIVE
                    .iter()
                    .chain(emoticons::NEGATIVE)
                    .copied(),
            )
        })
    }

    /// Tokenizer recognizing the bundled emoticons plus `extra`.
    pub fn with_extra<'a>(extra: impl IntoIterator<Item = &'a String>) -> Tokenizer {
        let bundled = Tokenizer::bundled().emoticons.iter().cloned();
        Tokenizer::new(bundled.chain(extra.into_iter().cloned()))
    }

    pub fn tokenize(&self, text: &str, _lang: Lang) -> Result<TokenList, FeatureError> {
        if text.trim().is_empty() {
            return Err(FeatureError::EmptyText);
        }
        let mut tokens = Vec::new();
        for chunk in text.split_whitespace() {
            self.scan_chunk(chunk, &mut tokens);
        }
        Ok(TokenList { tokens })
    }

    fn scan_chunk(&self, chunk: &str, out: &mut Vec<Token>) {
        let chars: Vec<char> = chunk.chars().collect();
        let n = chars.len();
        let push = |out: &mut Vec<Token>, cs: &[char], kind| {
            out.push(Token {
                text: cs.iter().collect(),
                kind,
            })
        };
        let mut i = 0;
        while i < n {
            if let Some(len) = self.emoticon_at(&chars, i) {
                let j = if script::is_emoji(chars[i + len - 1]) {
                    emoji_end(&chars, i + len)
                } else {
                    i + len
                };
                push(out, &chars[i..j], TokenKind::Emoticon);
                i = j;
                continue;
            }
            let c = chars[i];
            if script::is_emoji(c) {
                let j = emoji_end(&chars, i + 1);
                push(out, &chars[i..j], TokenKind::Emoticon);
                i = j;
            } else if is_hashtag_start(&chars, i) {
                let j = word_end(&chars, i + 1);
                push(out, &chars[i + 1..j], TokenKind::HashtagResidue);
                i = j;
            } else if script::is_word_char(c) {
                let j = word_end(&chars, i);
                let kind = if is_number(&chars[i..j]) {
                    TokenKind::Number
                } else {
                    TokenKind::Word
                };
                push(out, &chars[i..j], kind);
                i = j;
            } else {
                let mut j = i + 1;
                while j < n
                    && !script::is_word_char(chars[j])
                    && !script::is_emoji(chars[j])
                    && !is_hashtag_start(&chars, j)
                    && self.emoticon_at(&chars, j).is_none()
                {
                    j += 1;
                }
                push(out, &chars[i..j], TokenKind::Punctuation);
                i = j;
            }
        }
    }

    /// Length in chars of the longest known emoticon starting at `i`. An
    /// emoticon that begins (ends) with a word character must start (end) at
    /// a word boundary, so "boxDrop" never yields "xD".
    fn emoticon_at(&self, chars: &[char], i: usize) -> Option<usize> {
        let max = self.max_emoticon_chars.min(chars.len() - i);
        (1..=max).rev().find(|&len| {
            let cand = &chars[i..i + len];
            let first_ok =
                !script::is_word_char(cand[0]) || i == 0 || !script::is_word_char(chars[i - 1]);
            let last_ok = !script::is_word_char(cand[len - 1])
                || chars.get(i + len).is_none_or(|&c| !script::is_word_char(c));
            first_ok && last_ok && self.emoticons.contains(&cand.iter().collect::<String>())
        })
    }
}

/// Tokenizes with the bundled emoticon inventory.
/// End of an emoji cluster whose base ends just before `j`: modifiers,
/// variation selectors and zero-width-joined emoji are absorbed.
fn emoji_end(chars: &[char], mut j: usize) -> usize {
    while j < chars.len()
        && (script::is_emoji_component(chars[j])
            || (chars[j - 1] == '\u{200D}' && script::is_emoji(chars[j])))
    {
        j += 1;
    }
    j
}

pub fn tokenize(text: &str, lang: Lang) -> Result<TokenList, FeatureError> {
    Tokenizer::bundled().tokenize(text, lang)
}

fn is_hashtag_start(chars: &[char], i: usize) -> bool {
    chars[i] == '#'
        && (i == 0 || !script::is_word_char(chars[i - 1]))
        && chars.get(i + 1).is_some_and(|&c| script::is_word_char(c))
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '’' | '-' | '.' | ',')
}

fn word_end(chars: &[char], start: usize) -> usize {
    let mut j = start;
    loop {
        while j < chars.len() && script::is_word_char(chars[j]) {
            j += 1;
        }
        if j + 1 < chars.len() && is_joiner(chars[j]) && script::is_word_char(chars[j + 1]) {
            j += 1;
        } else {
            return j;
        }
    }
}

fn is_number(cs: &[char]) -> bool {
    cs.iter().any(|c| c.is_numeric()) && cs.iter().all(|&c| c.is_numeric() || c == '.' || c == ',')
}
