//! Word lists for lexicon and closed-class features.
//!
//! On disk a lexicon is a directory `lexicons/<lang>/` holding one UTF-8
//! file per category with one entry per line. Entries may be multi-word
//! phrases ("even though"); Latin-script entries are lowercased at load.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use super::FeatureError;
use crate::corpus::Lang;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Negation,
    OpinionPositive,
    OpinionNegative,
    Opposition,
    Pronouns,
    Interjections,
    EmoticonsPositive,
    EmoticonsNegative,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Negation,
        Category::OpinionPositive,
        Category::OpinionNegative,
        Category::Opposition,
        Category::Pronouns,
        Category::Interjections,
        Category::EmoticonsPositive,
        Category::EmoticonsNegative,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            Category::Negation => "negation.txt",
            Category::OpinionPositive => "opinion_pos.txt",
            Category::OpinionNegative => "opinion_neg.txt",
            Category::Opposition => "opposition.txt",
            Category::Pronouns => "pronouns.txt",
            Category::Interjections => "interjections.txt",
            Category::EmoticonsPositive => "emoticons_pos.txt",
            Category::EmoticonsNegative => "emoticons_neg.txt",
        }
    }

    fn is_emoticon(self) -> bool {
        matches!(
            self,
            Category::EmoticonsPositive | Category::EmoticonsNegative
        )
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_name().trim_end_matches(".txt"))
    }
}

/// A set of single words plus multi-word phrases.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordList {
    words: HashSet<String>,
    phrases: Vec<Vec<String>>,
}

impl WordList {
    pub fn from_entries<I, S>(entries: I, lang: Lang) -> WordList
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut list = WordList::default();
        for e in entries {
            list.insert(e.as_ref(), lang);
        }
        list
    }

    fn insert(&mut self, entry: &str, lang: Lang) {
        let parts: Vec<String> = entry.split_whitespace().map(|w| lang.fold(w)).collect();
        match parts.len() {
            0 => {}
            1 => {
                self.words.insert(parts.into_iter().next().unwrap());
            }
            _ => {
                if !self.phrases.contains(&parts) {
                    self.phrases.push(parts);
                }
            }
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.words.contains(key)
    }

    pub fn len(&self) -> usize {
        self.words.len() + self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterates over all entries; phrases are joined with single spaces.
    pub fn entries(&self) -> impl Iterator<Item = String> + '_ {
        self.words
            .iter()
            .cloned()
            .chain(self.phrases.iter().map(|p| p.join(" ")))
    }

    /// Number of positions in `keys` where an entry matches. At each position
    /// the longest matching phrase is consumed, so the count never exceeds
    /// `keys.len()`.
    pub fn count_matches(&self, keys: &[String]) -> usize {
        let mut count = 0;
        let mut i = 0;
        while i < keys.len() {
            let phrase_len = self
                .phrases
                .iter()
                .filter(|p| keys[i..].starts_with(p))
                .map(Vec::len)
                .max();
            match phrase_len {
                Some(len) => {
                    count += 1;
                    i += len;
                }
                None => {
                    if self.words.contains(&keys[i]) {
                        count += 1;
                    }
                    i += 1;
                }
            }
        }
        count
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconSet {
    pub lang: Lang,
    pub negation: WordList,
    pub opinion_positive: WordList,
    pub opinion_negative: WordList,
    pub opposition: WordList,
    pub personal_pronouns: WordList,
    pub interjections: WordList,
    pub emoticons_positive: HashSet<String>,
    pub emoticons_negative: HashSet<String>,
    /// Categories whose file was absent at load time.
    pub missing: Vec<Category>,
}

impl LexiconSet {
    pub fn empty(lang: Lang) -> LexiconSet {
        LexiconSet {
            lang,
            negation: WordList::default(),
            opinion_positive: WordList::default(),
            opinion_negative: WordList::default(),
            opposition: WordList::default(),
            personal_pronouns: WordList::default(),
            interjections: WordList::default(),
            emoticons_positive: HashSet::new(),
            emoticons_negative: HashSet::new(),
            missing: Vec::new(),
        }
    }

    /// The lists shipped in `crates/core/lexicons/<lang>/`.
    pub fn bundled(lang: Lang) -> LexiconSet {
        let mut set = LexiconSet::empty(lang);
        for cat in Category::ALL {
            set.fill(cat, bundled_text(lang, cat));
        }
        set
    }

    pub fn category(&self, cat: Category) -> Option<&WordList> {
        match cat {
            Category::Negation => Some(&self.negation),
            Category::OpinionPositive => Some(&self.opinion_positive),
            Category::OpinionNegative => Some(&self.opinion_negative),
            Category::Opposition => Some(&self.opposition),
            Category::Pronouns => Some(&self.personal_pronouns),
            Category::Interjections => Some(&self.interjections),
            Category::EmoticonsPositive | Category::EmoticonsNegative => None,
        }
    }

    fn fill(&mut self, cat: Category, text: &str) {
        let lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if cat.is_emoticon() {
            let set = match cat {
                Category::EmoticonsPositive => &mut self.emoticons_positive,
                _ => &mut self.emoticons_negative,
            };
            set.extend(lines.map(str::to_owned));
            return;
        }
        let lang = self.lang;
        let list = match cat {
            Category::Negation => &mut self.negation,
            Category::OpinionPositive => &mut self.opinion_positive,
            Category::OpinionNegative => &mut self.opinion_negative,
            Category::Opposition => &mut self.opposition,
            Category::Pronouns => &mut self.personal_pronouns,
            _ => &mut self.interjections,
        };
        for l in lines {
            list.insert(l, lang);
        }
    }
}

/// Loads `dir/<lang>/*.txt`. A missing category file yields an empty set and
/// a warning; a missing or unreadable language directory is an error.
pub fn load_lexicons(dir: impl AsRef<Path>, lang: Lang) -> Result<LexiconSet, FeatureError> {
    let root = dir.as_ref().join(lang.code());
    let io_err = |source| FeatureError::Io {
        path: root.display().to_string(),
        source,
    };
    let meta = std::fs::metadata(&root).map_err(io_err)?;
    if !meta.is_dir() {
        return Err(FeatureError::Io {
            path: root.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotADirectory, "not a directory"),
        });
    }
    std::fs::read_dir(&root).map_err(io_err)?;

    let mut set = LexiconSet::empty(lang);
    for cat in Category::ALL {
        let path = root.join(cat.file_name());
        match std::fs::read_to_string(&path) {
            Ok(text) => set.fill(cat, &text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                log::warn!(
                    "lexicon {} missing for {lang}; using an empty set",
                    cat.file_name()
                );
                set.missing.push(cat);
            }
            Err(source) => {
                return Err(FeatureError::Io {
                    path: path.display().to_string(),
                    source,
                })
            }
        }
    }
    Ok(set)
}

macro_rules! bundled {
    ($lang:literal) => {
        [
            include_str!(concat!("../../lexicons/", $lang, "/negation.txt")),
            include_str!(concat!("../../lexicons/", $lang, "/opinion_pos.txt")),
            include_str!(concat!("../../lexicons/", $lang, "/opinion_neg.txt")),
            include_str!(concat!("../../lexicons/", $lang, "/opposition.txt")),
            include_str!(concat!("../../lexicons/", $lang, "/pronouns.txt")),
            include_str!(concat!("../../lexicons/", $lang, "/interjections.txt")),
            include_str!(concat!("../../lexicons/", $lang, "/emoticons_pos.txt")),
            include_str!(concat!("../../lexicons/", $lang, "/emoticons_neg.txt")),
        ]
    };
}

const BUNDLED_AR: [&str; 8] = bundled!("ar");
const BUNDLED_FR: [&str; 8] = bundled!("fr");
const BUNDLED_EN: [&str; 8] = bundled!("en");

fn bundled_text(lang: Lang, cat: Category) -> &'static str {
    let idx = Category::ALL.iter().position(|&c| c == cat).unwrap();
    match lang {
        Lang::Ar => BUNDLED_AR[idx],
        Lang::Fr => BUNDLED_FR[idx],
        Lang::En => BUNDLED_EN[idx],
    }
}
