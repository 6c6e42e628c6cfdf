//! Experiment specifications and the matrix file that lists them.
//!
//! A matrix file is TOML; relative paths are resolved against the file's
//! directory:
//!
//! ```toml
//! seed = 42
//! lexicons = "lexicons"          # optional, bundled lists otherwise
//!
//! [corpora.ar]
//! train = "ar_train.csv"
//! test = "ar_test.csv"
//!
//! [embeddings]
//! ar = "ar.vec"
//!
//! [maps.fr-ar]                   # a fitted map file ...
//! file = "fr-ar.map"
//! [maps.en-ar]                   # ... or a dictionary to fit one from
//! dict = "en-ar.tsv"
//! refine_rounds = 1
//!
//! [cnn]                          # training configuration overrides
//! epochs = 10
//!
//! [rf]
//! n_trees = 100
//!
//! [presets]                      # generated rows
//! crosslingual = ["rf_surface", "cnn_crosslingual"]
//!
//! [[experiment]]                 # explicit rows
//! train = ["fr", "en"]
//! test = ["ar"]
//! model = "cnn_crosslingual"
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::Lang;
use crate::models::cnn::TrainConfig;
use crate::models::ForestParams;

#[derive(Debug, thiserror::Error)]
pub enum MatrixError {
    #[error("cannot read matrix {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("matrix: {0}")]
    Toml(String),
    #[error("matrix: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    RfFull,
    RfSurface,
    CnnMono,
    CnnCrosslingual,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 4] = [
        ModelFamily::RfFull,
        ModelFamily::RfSurface,
        ModelFamily::CnnMono,
        ModelFamily::CnnCrosslingual,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelFamily::RfFull => "rf_full",
            ModelFamily::RfSurface => "rf_surface",
            ModelFamily::CnnMono => "cnn_mono",
            ModelFamily::CnnCrosslingual => "cnn_crosslingual",
        }
    }

    pub fn is_cnn(self) -> bool {
        matches!(self, ModelFamily::CnnMono | ModelFamily::CnnCrosslingual)
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelFamily::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| MatrixError::Invalid(format!("unknown model family {s:?}")))
    }
}

/// One train/test configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub train_langs: Vec<Lang>,
    pub test_langs: Vec<Lang>,
    pub model: ModelFamily,
    pub seed: u64,
}

/// Order of languages inside a group label, e.g. "(En/Fr)".
const GROUP_ORDER: [Lang; 3] = [Lang::En, Lang::Fr, Lang::Ar];

/// Rows of the cross-lingual table in their conventional order.
const CROSSLINGUAL_ROWS: [(&[Lang], &[Lang]); 8] = [
    (&[Lang::Ar], &[Lang::Fr]),
    (&[Lang::Fr], &[Lang::Ar]),
    (&[Lang::Ar], &[Lang::En]),
    (&[Lang::En], &[Lang::Ar]),
    (&[Lang::Fr], &[Lang::En]),
    (&[Lang::En], &[Lang::Fr]),
    (&[Lang::En, Lang::Fr], &[Lang::Ar]),
    (&[Lang::Ar], &[Lang::En, Lang::Fr]),
];

fn normalize(langs: &[Lang]) -> Vec<Lang> {
    let mut v = langs.to_vec();
    v.sort_by_key(|l| GROUP_ORDER.iter().position(|g| g == l));
    v.dedup();
    v
}

impl ExperimentSpec {
    pub fn new(
        train: &[Lang],
        test: &[Lang],
        model: ModelFamily,
        seed: u64,
    ) -> Result<ExperimentSpec, MatrixError> {
        let spec = ExperimentSpec {
            train_langs: normalize(train),
            test_langs: normalize(test),
            model,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), MatrixError> {
        let bad = |m: &str| Err(MatrixError::Invalid(format!("{}: {m}", self.id())));
        if self.train_langs.is_empty() || self.test_langs.is_empty() {
            return bad("train and test languages must be non-empty");
        }
        if self.train_langs != normalize(&self.train_langs)
            || self.test_langs != normalize(&self.test_langs)
        {
            return bad("language lists must be deduplicated and in canonical order");
        }
        let mono = self.train_langs == self.test_langs && self.train_langs.len() == 1;
        let disjoint = self
            .train_langs
            .iter()
            .all(|l| !self.test_langs.contains(l));
        match self.model {
            ModelFamily::RfFull | ModelFamily::CnnMono if !mono => {
                bad("monolingual models need one language shared by train and test")
            }
            ModelFamily::CnnCrosslingual if !disjoint => {
                bad("cross-lingual CNN needs disjoint train and test languages")
            }
            ModelFamily::RfSurface if !mono && !disjoint => {
                bad("train and test languages overlap partially")
            }
            _ => Ok(()),
        }
    }

    pub fn is_crosslingual(&self) -> bool {
        self.train_langs != self.test_langs
    }

    fn group(langs: &[Lang], sep: &str, open: &str, close: &str) -> String {
        let names: Vec<&str> = langs.iter().map(|l| l.short_name()).collect();
        if names.len() == 1 {
            names[0].to_owned()
        } else {
            format!("{open}{}{close}", names.join(sep))
        }
    }

    /// Row label such as "Ar", "Fr→Ar" or "(En/Fr)→Ar".
    pub fn label(&self) -> String {
        if !self.is_crosslingual() {
            return Self::group(&self.test_langs, "/", "(", ")");
        }
        format!(
            "{}→{}",
            Self::group(&self.train_langs, "/", "(", ")"),
            Self::group(&self.test_langs, "/", "(", ")")
        )
    }

    /// File-system-safe identifier, e.g. `en+fr_to_ar.cnn_crosslingual`.
    pub fn id(&self) -> String {
        let codes = |ls: &[Lang]| ls.iter().map(|l| l.code()).collect::<Vec<_>>().join("+");
        format!(
            "{}_to_{}.{}",
            codes(&self.train_langs),
            codes(&self.test_langs),
            self.model
        )
    }

    /// Report order: monolingual rows (Ar, Fr, En) first, then the
    /// cross-lingual rows in their conventional order, then anything else;
    /// model family breaks ties.
    pub fn sort_key(&self) -> (usize, usize, ModelFamily, String) {
        let row = if !self.is_crosslingual() {
            Lang::ALL
                .iter()
                .position(|l| *l == self.test_langs[0])
                .unwrap_or(3)
        } else {
            CROSSLINGUAL_ROWS
                .iter()
                .position(|(tr, te)| {
                    *tr == self.train_langs.as_slice() && *te == self.test_langs.as_slice()
                })
                .map_or(100, |p| 10 + p)
        };
        (
            usize::from(self.is_crosslingual()),
            row,
            self.model,
            self.id(),
        )
    }
}

/// One row per language (Ar, Fr, En) and family.
pub fn monolingual_specs(
    families: &[ModelFamily],
    seed: u64,
) -> Result<Vec<ExperimentSpec>, MatrixError> {
    let mut out = Vec::new();
    for lang in Lang::ALL {
        for &f in families {
            out.push(ExperimentSpec::new(&[lang], &[lang], f, seed)?);
        }
    }
    Ok(out)
}

/// The eight cross-lingual rows per family: Ar→Fr, Fr→Ar, Ar→En, En→Ar,
/// Fr→En, En→Fr, (En/Fr)→Ar, Ar→(En/Fr).
pub fn crosslingual_specs(
    families: &[ModelFamily],
    seed: u64,
) -> Result<Vec<ExperimentSpec>, MatrixError> {
    let mut out = Vec::new();
    for (train, test) in CROSSLINGUAL_ROWS {
        for &f in families {
            out.push(ExperimentSpec::new(train, test, f, seed)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPaths {
    pub train: PathBuf,
    pub test: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapSource {
    File(PathBuf),
    Dictionary { path: PathBuf, refine_rounds: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfSettings {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: Option<usize>,
}

impl Default for RfSettings {
    fn default() -> Self {
        let p = ForestParams::default();
        RfSettings {
            n_trees: p.n_trees,
            max_depth: p.max_depth,
            min_leaf: p.min_leaf,
            features_per_split: p.features_per_split,
        }
    }
}

impl From<RfSettings> for ForestParams {
    fn from(s: RfSettings) -> ForestParams {
        ForestParams {
            n_trees: s.n_trees,
            max_depth: s.max_depth,
            min_leaf: s.min_leaf,
            features_per_split: s.features_per_split,
        }
    }
}

/// Model settings shared by every experiment of a matrix.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Settings {
    pub cnn: TrainConfig,
    pub rf: RfSettings,
    /// Read at most this many embedding rows per language.
    pub max_vocab: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub seed: u64,
    pub corpora: BTreeMap<Lang, CorpusPaths>,
    pub embeddings: BTreeMap<Lang, PathBuf>,
    pub maps: BTreeMap<(Lang, Lang), MapSource>,
    pub lexicons: Option<PathBuf>,
    pub settings: Settings,
    pub experiments: Vec<ExperimentSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    #[serde(default = "default_seed")]
    seed: u64,
    lexicons: Option<PathBuf>,
    max_vocab: Option<usize>,
    #[serde(default)]
    corpora: BTreeMap<Lang, RawCorpus>,
    #[serde(default)]
    embeddings: BTreeMap<Lang, PathBuf>,
    #[serde(default)]
    maps: BTreeMap<String, RawMap>,
    #[serde(default)]
    cnn: Option<TrainConfig>,
    #[serde(default)]
    rf: RfSettings,
    #[serde(default)]
    presets: RawPresets,
    #[serde(default)]
    experiment: Vec<RawExperiment>,
}

fn default_seed() -> u64 {
    42
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorpus {
    train: PathBuf,
    test: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    file: Option<PathBuf>,
    dict: Option<PathBuf>,
    #[serde(default)]
    refine_rounds: usize,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawPresets {
    #[serde(default)]
    monolingual: Vec<ModelFamily>,
    #[serde(default)]
    crosslingual: Vec<ModelFamily>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    train: Vec<Lang>,
    test: Vec<Lang>,
    model: ModelFamily,
    seed: Option<u64>,
}

fn parse_pair(key: &str) -> Result<(Lang, Lang), MatrixError> {
    let bad = || MatrixError::Invalid(format!("map key {key:?} must look like \"fr-ar\""));
    let (a, b) = key.split_once('-').ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
}

/// Parses matrix TOML; relative paths are joined onto `base`.
pub fn parse_matrix(text: &str, base: &Path) -> Result<Matrix, MatrixError> {
    let raw: RawMatrix = toml::from_str(text).map_err(|e| MatrixError::Toml(e.to_string()))?;
    let abs = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
    let mut maps = BTreeMap::new();
    for (key, m) in raw.maps {
        let pair = parse_pair(&key)?;
        let src = match (m.file, m.dict) {
            (Some(f), None) => MapSource::File(abs(f)),
            (None, Some(d)) => MapSource::Dictionary {
                path: abs(d),
                refine_rounds: m.refine_rounds,
            },
            _ => {
                return Err(MatrixError::Invalid(format!(
                    "map {key}: give exactly one of file or dict"
                )))
            }
        };
        maps.insert(pair, src);
    }
    let cnn = raw.cnn.map(|mut c| {
        c.seed = raw.seed;
        c
    });
    let settings = Settings {
        cnn: cnn.unwrap_or_else(|| TrainConfig {
            seed: raw.seed,
            ..Default::default()
        }),
        rf: raw.rf,
        max_vocab: raw.max_vocab,
    };
    settings
        .cnn
        .validate()
        .map_err(|e| MatrixError::Invalid(e.to_string()))?;
    let mut experiments = monolingual_specs(&raw.presets.monolingual, raw.seed)?;
    experiments.extend(crosslingual_specs(&raw.presets.crosslingual, raw.seed)?);
    for e in raw.experiment {
        experiments.push(ExperimentSpec::new(
            &e.train,
            &e.test,
            e.model,
            e.seed.unwrap_or(raw.seed),
        )?);
    }
    let mut seen = std::collections::HashSet::new();
    for e in &experiments {
        if !seen.insert(e.id()) {
            return Err(MatrixError::Invalid(format!(
                "experiment {} listed twice",
                e.id()
            )));
        }
    }
    if experiments.is_empty() {
        return Err(MatrixError::Invalid("no experiments listed".into()));
    }
    Ok(Matrix {
        seed: raw.seed,
        corpora: raw
            .corpora
            .into_iter()
            .map(|(l, c)| {
                (
                    l,
                    CorpusPaths {
                        train: abs(c.train),
                        test: abs(c.test),
                    },
                )
            })
            .collect(),
        embeddings: raw
            .embeddings
            .into_iter()
            .map(|(l, p)| (l, abs(p)))
            .collect(),
        maps,
        lexicons: raw.lexicons.map(abs),
        settings,
        experiments,
    })
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<Matrix, MatrixError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MatrixError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_matrix(&text, path.parent().unwrap_or(Path::new(".")))
}
