//! Synthetic three-language corpora with known ground truth.
//!
//! A set of latent concepts is shared by all languages. Each language gets
//! its own random orthogonal rotation `Q_L`, its own pseudo-word for every
//! concept, and an embedding table whose row for concept `c` is
//! `normalize(Q_L (u_c + noise))`. A third of the concepts lean ironic, a
//! third lean non-ironic and the rest are neutral, so a classifier trained
//! in one language transfers to another once the spaces are aligned.
//!
//! Used by the end-to-end tests and by `irony synth`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::align::{random_orthogonal, BilingualDictionary};
use crate::corpus::{save_corpus, Dataset, DatasetLang, Label, Lang, Tweet};
use crate::embeddings::{save_embeddings, EmbeddingTable};
use crate::eval::ModelFamily;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub dim: usize,
    /// Word concepts; a handful of punctuation and emoticon concepts are
    /// added on top.
    pub n_concepts: usize,
    /// Standard deviation of the per-language noise added in latent space.
    pub noise: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Seed dictionary size per language pair.
    pub dict_size: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Weight of the shared ironic / non-ironic direction in a leaning
    /// concept's latent vector (the random part has unit norm).
    pub cluster: f64,
    /// Probability that a word is drawn from the label's concept pool
    /// rather than the neutral pool.
    pub signal: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            dim: 20,
            n_concepts: 300,
            noise: 0.02,
            n_train: 400,
            n_test: 150,
            dict_size: 120,
            min_len: 6,
            max_len: 12,
            cluster: 0.8,
            signal: 0.3,
            seed: 7,
        }
    }
}

/// Which label a concept is drawn for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lean {
    Ironic,
    NonIronic,
    Neutral,
}

/// Punctuation and emoticon tokens shared by all languages, with the
/// probability that an ironic / non-ironic tweet ends with them.
const MARKS: [(&str, f64, f64); 3] = [("!!", 0.5, 0.1), (":)", 0.3, 0.05), (".", 0.2, 0.6)];

#[derive(Debug, Clone)]
pub struct SyntheticLanguage {
    pub lang: Lang,
    /// Surface form per concept, marks last.
    pub words: Vec<String>,
    pub rotation: DMatrix<f64>,
    pub table: EmbeddingTable,
    pub train: Dataset,
    pub test: Dataset,
}

#[derive(Debug, Clone)]
pub struct SyntheticWorld {
    pub config: SyntheticConfig,
    pub leans: Vec<Lean>,
    pub languages: BTreeMap<Lang, SyntheticLanguage>,
}

fn unit(v: DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    v / n
}

/// A pseudo-word for index `i`, unique within a language.
fn pseudo_word(lang: Lang, mut i: usize) -> String {
    let (onsets, nuclei, n_syll): (&[&str], &[&str], usize) = match lang {
        Lang::En => (
            &[
                "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w",
            ],
            &["a", "e", "i", "o", "u", "y"],
            3,
        ),
        Lang::Fr => (
            &[
                "b", "ch", "d", "j", "l", "m", "n", "p", "qu", "r", "s", "t", "v",
            ],
            &["a", "é", "è", "i", "ou", "eau", "on"],
            3,
        ),
        Lang::Ar => (
            &[
                "ب", "ت", "ج", "ح", "د", "ر", "س", "ش", "ع", "ف", "ق", "ك", "ل", "م", "ن",
            ],
            &["ا", "و", "ي", ""],
            3,
        ),
    };
    let mut w = String::new();
    for _ in 0..n_syll {
        w.push_str(onsets[i % onsets.len()]);
        i /= onsets.len();
        w.push_str(nuclei[i % nuclei.len()]);
        i /= nuclei.len();
    }
    // Indices past the syllable space get a distinguishing tail.
    if i > 0 {
        write!(w, "{}", onsets[i % onsets.len()]).unwrap();
        w.push_str(&"a".repeat(i / onsets.len()));
    }
    w
}

impl SyntheticWorld {
    pub fn generate(config: SyntheticConfig) -> SyntheticWorld {
        let mut r = rng::seeded(config.seed);
        let n_words = config.n_concepts;
        let gaussian = |r: &mut rng::Rng| {
            unit(DVector::from_fn(config.dim, |_, _| {
                Distribution::<f64>::sample(&StandardNormal, r)
            }))
        };
        let directions = [gaussian(&mut r), gaussian(&mut r)];
        let mut leans: Vec<Lean> = (0..n_words)
            .map(|c| match c % 3 {
                0 => Lean::Ironic,
                1 => Lean::NonIronic,
                _ => Lean::Neutral,
            })
            .collect();
        leans.extend([Lean::Neutral; MARKS.len()]);
        let latent: Vec<DVector<f64>> = leans
            .iter()
            .map(|lean| {
                let u = gaussian(&mut r);
                match lean {
                    Lean::Ironic => unit(u + &directions[0] * config.cluster),
                    Lean::NonIronic => unit(u + &directions[1] * config.cluster),
                    Lean::Neutral => u,
                }
            })
            .collect();
        let pool = |l: Lean| (0..n_words).filter(|&c| leans[c] == l).collect::<Vec<_>>();
        let pools = [
            pool(Lean::Ironic),
            pool(Lean::NonIronic),
            pool(Lean::Neutral),
        ];

        let mut languages = BTreeMap::new();
        for lang in Lang::ALL {
            let rotation = random_orthogonal(config.dim, &mut r);
            // Distinct, shuffled pseudo-word indices so neighbouring concepts
            // do not share spelling patterns.
            let mut slots: Vec<usize> = (0..n_words).map(|c| c * 7 + 3).collect();
            slots.shuffle(&mut r);
            let mut words: Vec<String> = slots.iter().map(|&s| pseudo_word(lang, s)).collect();
            words.extend(MARKS.iter().map(|m| m.0.to_owned()));
            let rows: Vec<(String, Vec<f64>)> = latent
                .iter()
                .zip(&words)
                .map(|(u, w)| {
                    let noisy = u + DVector::from_fn(config.dim, |_, _| {
                        config.noise * Distribution::<f64>::sample(&StandardNormal, &mut r)
                    });
                    (w.clone(), unit(&rotation * noisy).iter().copied().collect())
                })
                .collect();
            let table = EmbeddingTable::from_rows(config.dim, rows)
                .and_then(|t| t.normalize())
                .expect("pseudo-words are unique");
            let mut tweets = |prefix: &str, count: usize| {
                let tweets: Vec<Tweet> = (0..count)
                    .map(|i| {
                        let label = if i % 2 == 0 {
                            Label::Ironic
                        } else {
                            Label::NonIronic
                        };
                        let own = if label == Label::Ironic {
                            &pools[0]
                        } else {
                            &pools[1]
                        };
                        let len = r.random_range(config.min_len..=config.max_len);
                        let mut toks: Vec<&str> = (0..len)
                            .map(|_| {
                                let p = if r.random::<f64>() < config.signal {
                                    own
                                } else {
                                    &pools[2]
                                };
                                words[p[r.random_range(0..p.len())]].as_str()
                            })
                            .collect();
                        for (mark, p_ir, p_non) in MARKS {
                            let p = if label == Label::Ironic { p_ir } else { p_non };
                            if r.random::<f64>() < p {
                                toks.push(mark);
                            }
                        }
                        Tweet::new(
                            format!("{}-{prefix}-{i}", lang.code()),
                            toks.join(" "),
                            lang,
                            label,
                        )
                        .expect("tweets are non-empty")
                    })
                    .collect();
                Dataset::new(tweets, DatasetLang::Single(lang)).expect("valid synthetic dataset")
            };
            let train = tweets("train", config.n_train);
            let test = tweets("test", config.n_test);
            languages.insert(
                lang,
                SyntheticLanguage {
                    lang,
                    words,
                    rotation,
                    table,
                    train,
                    test,
                },
            );
        }
        SyntheticWorld {
            config,
            leans,
            languages,
        }
    }

    /// The map taking `src` vectors onto `tgt` vectors up to noise:
    /// `Q_tgt · Q_srcᵀ`.
    pub fn true_map(&self, src: Lang, tgt: Lang) -> DMatrix<f64> {
        &self.languages[&tgt].rotation * self.languages[&src].rotation.transpose()
    }

    /// Translation pairs for the first `dict_size` word concepts.
    pub fn dictionary(&self, src: Lang, tgt: Lang) -> BilingualDictionary {
        let (s, t) = (&self.languages[&src].words, &self.languages[&tgt].words);
        let n = self.config.dict_size.min(self.config.n_concepts);
        BilingualDictionary::new((0..n).map(|c| (s[c].clone(), t[c].clone())).collect())
    }

    /// Writes corpora, embedding tables, seed dictionaries for every
    /// ordered language pair, and a `matrix.toml` whose presets run the
    /// monolingual rows for `mono` and the cross-lingual rows for `cross`.
    /// Returns the matrix path.
    pub fn write(
        &self,
        dir: &Path,
        mono: &[ModelFamily],
        cross: &[ModelFamily],
        cnn_epochs: usize,
    ) -> io::Result<PathBuf> {
        let to_io = |e: &dyn std::fmt::Display| io::Error::other(e.to_string());
        for sub in ["corpora", "embeddings", "dicts"] {
            std::fs::create_dir_all(dir.join(sub))?;
        }
        let mut toml = format!("seed = {}\n\n", self.config.seed);
        for (lang, l) in &self.languages {
            let code = lang.code();
            save_corpus(&l.train, dir.join(format!("corpora/{code}.train.csv")))
                .map_err(|e| to_io(&e))?;
            save_corpus(&l.test, dir.join(format!("corpora/{code}.test.csv")))
                .map_err(|e| to_io(&e))?;
            save_embeddings(&l.table, dir.join(format!("embeddings/{code}.vec")))
                .map_err(|e| to_io(&e))?;
            writeln!(
                toml,
                "[corpora.{code}]\ntrain = \"corpora/{code}.train.csv\"\ntest = \"corpora/{code}.test.csv\"\n"
            )
            .unwrap();
        }
        toml.push_str("[embeddings]\n");
        for lang in self.languages.keys() {
            writeln!(toml, "{0} = \"embeddings/{0}.vec\"", lang.code()).unwrap();
        }
        toml.push('\n');
        for &s in self.languages.keys() {
            for &t in self.languages.keys() {
                if s == t {
                    continue;
                }
                let name = format!("dicts/{}-{}.tsv", s.code(), t.code());
                let mut body = String::new();
                for (a, b) in &self.dictionary(s, t).pairs {
                    writeln!(body, "{a}\t{b}").unwrap();
                }
                std::fs::write(dir.join(&name), body)?;
                writeln!(
                    toml,
                    "[maps.{}-{}]\ndict = \"{name}\"\nrefine_rounds = 1\n",
                    s.code(),
                    t.code()
                )
                .unwrap();
            }
        }
        writeln!(
            toml,
            "[cnn]\nepochs = {cnn_epochs}\nbatch_size = 16\nlearning_rate = 0.003\ndropout_rate = 0.3\n\
             widths = [1, 2]\nn_filters = 16\nmax_seq_len = 20\nearly_stop_patience = 3\nval_fraction = 0.2\n\n\
             [rf]\nn_trees = 50\n"
        )
        .unwrap();
        let list = |fs: &[ModelFamily]| {
            fs.iter()
                .map(|f| format!("\"{f}\""))
                .collect::<Vec<_>>()
                .join(", ")
        };
        writeln!(
            toml,
            "[presets]\nmonolingual = [{}]\ncrosslingual = [{}]",
            list(mono),
            list(cross)
        )
        .unwrap();
        let path = dir.join("matrix.toml");
        std::fs::write(&path, toml)?;
        Ok(path)
    }
}
