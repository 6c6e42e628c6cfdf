//! Tweet cleaning: irony hashtags, mentions, URLs and foreign-script tokens.
//!
//! Cleaning works token by token on whitespace-separated chunks and is
//! applied until the text stops changing, so `preprocess` is idempotent by
//! construction.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Dataset, Lang, Tweet};
use crate::features::emoticons;
use crate::script;

/// Cleaning options. Serialized as TOML:
///
/// ```toml
/// strip_mentions = true
/// strip_urls = true
/// strip_foreign_chars = true
/// lowercase_latin = true
///
/// [irony_hashtags]
/// fr = ["#ironie", "#sarcasme"]
/// en = ["#sarcasm", "#irony"]
/// ```
///
/// `lowercase_latin` never touches the stored text; it selects case folding
/// of Latin-script tokens when they are turned into lookup keys for lexicons,
/// embeddings and model vocabularies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessConfig {
    pub irony_hashtags: BTreeMap<Lang, BTreeSet<String>>,
    #[serde(default = "yes")]
    pub strip_mentions: bool,
    #[serde(default = "yes")]
    pub strip_urls: bool,
    #[serde(default = "yes")]
    pub strip_foreign_chars: bool,
    #[serde(default = "yes")]
    pub lowercase_latin: bool,
}

fn yes() -> bool {
    true
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        let set = |tags: &[&str]| tags.iter().map(|t| t.to_string()).collect::<BTreeSet<_>>();
        let mut irony_hashtags = BTreeMap::new();
        irony_hashtags.insert(Lang::Ar, set(&["#سخرية", "#مسخرة", "#تهكم", "#استهزاء"]));
        irony_hashtags.insert(Lang::Fr, set(&["#ironie", "#sarcasme"]));
        irony_hashtags.insert(Lang::En, set(&["#sarcasm", "#irony"]));
        PreprocessConfig {
            irony_hashtags,
            strip_mentions: true,
            strip_urls: true,
            strip_foreign_chars: true,
            lowercase_latin: true,
        }
    }
}

impl PreprocessConfig {
    pub fn from_toml(text: &str) -> Result<PreprocessConfig, CorpusError> {
        let cfg: PreprocessConfig =
            toml::from_str(text).map_err(|e| CorpusError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg.normalized())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PreprocessConfig, CorpusError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        PreprocessConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        for (lang, tags) in &self.irony_hashtags {
            if tags.is_empty() {
                return Err(CorpusError::Config(format!(
                    "irony hashtag set for {lang} is empty"
                )));
            }
        }
        Ok(())
    }

    /// Hashtags gain a leading '#' and Latin ones are lowercased, so lookups
    /// can fold the candidate the same way.
    fn normalized(mut self) -> Self {
        for (lang, tags) in self.irony_hashtags.iter_mut() {
            *tags = tags
                .iter()
                .map(|t| {
                    let t = t.trim();
                    let t = if t.starts_with('#') {
                        t.to_owned()
                    } else {
                        format!("#{t}")
                    };
                    lang.fold(&t)
                })
                .collect();
        }
        self
    }

    /// Lookup key for a token under this config.
    pub fn key(&self, lang: Lang, token: &str) -> String {
        if self.lowercase_latin {
            lang.fold(token)
        } else {
            token.to_owned()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PreprocessError {
    #[error("tweet {id:?}: empty-after-preprocess")]
    EmptyAfterPreprocess { id: String },
    #[error("no irony hashtags configured for {0}")]
    NotConfigured(Lang),
}

pub fn preprocess(tweet: &Tweet, cfg: &PreprocessConfig) -> Result<Tweet, PreprocessError> {
    let tags = cfg
        .irony_hashtags
        .get(&tweet.lang)
        .ok_or(PreprocessError::NotConfigured(tweet.lang))?;
    let mut text = clean_text(&tweet.text, tweet.lang, tags, cfg);
    for _ in 0..8 {
        let next = clean_text(&text, tweet.lang, tags, cfg);
        if next == text {
            break;
        }
        text = next;
    }
    if text.is_empty() {
        return Err(PreprocessError::EmptyAfterPreprocess {
            id: tweet.id.clone(),
        });
    }
    Ok(Tweet {
        text,
        ..tweet.clone()
    })
}

/// Cleans every tweet, dropping those left empty. Returns the cleaned
/// dataset and the number of dropped tweets.
pub fn preprocess_dataset(
    ds: &Dataset,
    cfg: &PreprocessConfig,
) -> Result<(Dataset, usize), PreprocessError> {
    let mut kept = Vec::with_capacity(ds.len());
    let mut dropped = 0;
    for t in ds {
        match preprocess(t, cfg) {
            Ok(t) => kept.push(t),
            Err(PreprocessError::EmptyAfterPreprocess { .. }) => dropped += 1,
            Err(e) => return Err(e),
        }
    }
    if dropped > 0 {
        log::info!("dropped {dropped} tweets that were empty after preprocessing");
    }
    let ds = Dataset::new(kept, ds.lang()).expect("subset of a valid dataset");
    Ok((ds, dropped))
}

fn clean_text(text: &str, lang: Lang, tags: &BTreeSet<String>, cfg: &PreprocessConfig) -> String {
    let mut out = String::with_capacity(text.len());
    for chunk in text.split_whitespace() {
        let cleaned = clean_chunk(chunk, lang, tags, cfg);
        if cleaned.is_empty() {
            continue;
        }
        if cfg.strip_foreign_chars && is_foreign(&cleaned, lang) && !emoticons::is_known(&cleaned) {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&cleaned);
    }
    out
}

fn clean_chunk(chunk: &str, lang: Lang, tags: &BTreeSet<String>, cfg: &PreprocessConfig) -> String {
    let chars: Vec<(usize, char)> = chunk.char_indices().collect();
    let mut out = String::with_capacity(chunk.len());
    let mut i = 0;
    while i < chars.len() {
        let (at, c) = chars[i];
        let boundary = i == 0 || !script::is_word_char(chars[i - 1].1);
        if cfg.strip_urls && is_url_start(&chunk[at..], boundary) {
            break;
        }
        let next_is_word = chars
            .get(i + 1)
            .is_some_and(|&(_, n)| script::is_word_char(n));
        // Hashtags may be glued to a preceding word; mentions may not
        // (that would catch e-mail addresses).
        if (c == '#' || (c == '@' && boundary)) && next_is_word {
            let mut j = i + 1;
            while j < chars.len() && script::is_word_char(chars[j].1) {
                j += 1;
            }
            let end = chars.get(j).map_or(chunk.len(), |&(b, _)| b);
            let tag = &chunk[at..end];
            if c == '@' {
                if !cfg.strip_mentions {
                    out.push_str(tag);
                }
            } else if !tags.contains(&lang.fold(tag)) {
                out.push_str(&tag[1..]);
            }
            i = j;
            continue;
        }
        out.push(c);
        i += 1;
    }
    out
}

fn is_url_start(s: &str, boundary: bool) -> bool {
    let head: String = s.chars().take(8).flat_map(char::to_lowercase).collect();
    head.starts_with("http://")
        || head.starts_with("https://")
        || (boundary && head.starts_with("www."))
}

/// A token is foreign when all of its letters belong to a script that is not
/// native to `lang`. Tokens without letters (digits, punctuation, emoji) are
/// never foreign.
fn is_foreign(token: &str, lang: Lang) -> bool {
    let mut native = false;
    let mut foreign = false;
    for c in token.chars() {
        match lang {
            Lang::Ar => {
                native |= script::is_arabic_letter(c);
                foreign |= script::is_latin_letter(c);
            }
            Lang::Fr | Lang::En => {
                native |= script::is_latin_letter(c);
                foreign |= script::is_arabic_letter(c) || script::is_cjk(c);
            }
        }
    }
    foreign && !native
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use proptest::prelude::*;

    fn clean(text: &str, lang: Lang) -> Result<String, PreprocessError> {
        let t = Tweet::new("x", text, lang, Label::Ironic).unwrap();
        preprocess(&t, &PreprocessConfig::default()).map(|t| t.text)
    }

    #[test]
    fn strips_irony_tag_mention_and_url() {
        assert_eq!(
            clean("Great plan #sarcasm @user http://t.co/x", Lang::En).unwrap(),
            "Great plan"
        );
    }

    #[test]
    fn nothing_to_remove() {
        assert_eq!(clean("Great plan", Lang::En).unwrap(), "Great plan");
    }

    #[test]
    fn arabic_irony_hashtags() {
        for tag in ["#سخرية", "#مسخرة", "#تهكم", "#استهزاء"] {
            let text = format!("هذا قرار عظيم {tag}");
            assert_eq!(clean(&text, Lang::Ar).unwrap(), "هذا قرار عظيم");
        }
    }

    #[test]
    fn topic_hashtags_keep_their_text() {
        assert_eq!(
            clean("vote #Brexit now", Lang::En).unwrap(),
            "vote Brexit now"
        );
        assert_eq!(clean("#topic#sarcasm!!", Lang::En).unwrap(), "topic!!");
    }

    #[test]
    fn irony_tags_match_case_insensitively() {
        assert_eq!(clean("oh sure #SARCASM", Lang::En).unwrap(), "oh sure");
        assert_eq!(clean("Bravo #Ironie", Lang::Fr).unwrap(), "Bravo");
    }

    #[test]
    fn emails_are_not_mentions() {
        assert_eq!(
            clean("mail me a@b.com", Lang::En).unwrap(),
            "mail me a@b.com"
        );
    }

    #[test]
    fn foreign_tokens() {
        assert_eq!(
            clean("مرحبا hello :D 2018", Lang::Ar).unwrap(),
            "مرحبا :D 2018"
        );
        assert_eq!(
            clean("bonjour مرحبا 漢字 ok", Lang::Fr).unwrap(),
            "bonjour ok"
        );
    }

    #[test]
    fn whitespace_is_collapsed() {
        assert_eq!(clean("  a \n\t b  ", Lang::En).unwrap(), "a b");
    }

    #[test]
    fn link_only_tweet_is_flagged() {
        assert_eq!(
            clean("@someone https://t.co/abc #sarcasm", Lang::En),
            Err(PreprocessError::EmptyAfterPreprocess { id: "x".into() })
        );
    }

    #[test]
    fn unconfigured_language() {
        let mut cfg = PreprocessConfig::default();
        cfg.irony_hashtags.remove(&Lang::Fr);
        let t = Tweet::new("1", "salut", Lang::Fr, Label::Ironic).unwrap();
        assert_eq!(
            preprocess(&t, &cfg),
            Err(PreprocessError::NotConfigured(Lang::Fr))
        );
    }

    #[test]
    fn config_toml_round_trip() {
        let cfg = PreprocessConfig::default();
        let back = PreprocessConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_normalizes_tags_and_rejects_empty_sets() {
        let cfg = PreprocessConfig::from_toml("[irony_hashtags]\nen = [\"Sarcasm\"]\n").unwrap();
        assert!(cfg.irony_hashtags[&Lang::En].contains("#sarcasm"));
        assert!(cfg.strip_urls);
        assert!(PreprocessConfig::from_toml("[irony_hashtags]\nen = []\n").is_err());
    }

    #[test]
    fn dataset_drops_empty_tweets() {
        let tweets = vec![
            Tweet::new("1", "fine", Lang::En, Label::Ironic).unwrap(),
            Tweet::new("2", "#sarcasm", Lang::En, Label::Ironic).unwrap(),
        ];
        let ds = Dataset::from_tweets(tweets).unwrap();
        let (clean, dropped) = preprocess_dataset(&ds, &PreprocessConfig::default()).unwrap();
        assert_eq!(dropped, 1);
        assert_eq!(clean.len(), 1);
    }

    fn tweet_text() -> impl Strategy<Value = String> {
        let piece = prop::sample::select(vec![
            "hello",
            "World",
            "#sarcasm",
            "#Topic",
            "@user",
            "http://t.co/x",
            "www.x.org",
            "!!",
            "?!",
            "...",
            ":)",
            ":D",
            "😂",
            "مرحبا",
            "#سخرية",
            "漢字",
            "#",
            "@",
            "##tag",
            "#a#b",
            "x@y",
            "(http://z)",
            "don't",
            "«",
            "\"",
        ]);
        prop::collection::vec(
            (piece, prop::sample::select(vec!["", " ", "  ", "\n"])),
            1..12,
        )
        .prop_map(|parts| parts.into_iter().map(|(p, s)| format!("{p}{s}")).collect())
    }

    proptest! {
        #[test]
        fn preprocess_is_idempotent(text in tweet_text(), lang in prop::sample::select(Lang::ALL.to_vec())) {
            prop_assume!(!text.trim().is_empty());
            let cfg = PreprocessConfig::default();
            let t = Tweet::new("p", text, lang, Label::NonIronic).unwrap();
            if let Ok(once) = preprocess(&t, &cfg) {
                let twice = preprocess(&once, &cfg).unwrap();
                prop_assert_eq!(&twice, &once);
                prop_assert!(!once.text.contains("http://"));
                prop_assert!(!once.text.contains("  "));
                let tags = &cfg.irony_hashtags[&lang];
                for tok in once.text.split(' ') {
                    prop_assert!(!tags.contains(&lang.fold(tok)));
                    prop_assert!(!(tok.starts_with('@') && tok.chars().nth(1).is_some_and(script::is_word_char)));
                }
            }
        }
    }
}
