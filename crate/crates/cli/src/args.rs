use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use irony::eval::ModelFamily;
use irony::features::FeatureSet;
use irony::Lang;

#[derive(Debug, Parser)]
#[command(
    name = "irony",
    version,
    about = "Irony detection in short texts, within and across languages"
)]
#[command(arg_required_else_help = true, propagate_version = true)]
pub struct Cli {
    /// Seed for every random choice [default: 42; `experiment run` falls
    /// back to the matrix seed]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Only log warnings and errors
    #[arg(long, short, global = true)]
    pub quiet: bool,
    /// Write the run manifest here instead of next to the output
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest_out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

pub const DEFAULT_SEED: u64 = 42;

impl Cli {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect, clean and split corpus files
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Feature extraction for the random forest
    #[command(subcommand)]
    Features(FeaturesCmd),
    /// Embedding table utilities
    #[command(subcommand)]
    Embeddings(EmbeddingsCmd),
    /// Fit, apply and query cross-lingual maps
    #[command(subcommand)]
    Align(AlignCmd),
    /// Train a model on a corpus
    Train(TrainArgs),
    /// Predict a corpus with a trained model
    Predict(PredictArgs),
    /// Random search over CNN hyperparameters
    Tune(TuneArgs),
    /// Run and report experiment matrices
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Write a synthetic three-language workspace with an experiment matrix
    Synth(SynthArgs),
}

#[derive(Debug, Subcommand)]
pub enum CorpusCmd {
    /// Label counts per language
    Stats {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Require every row to be in this language
        #[arg(long)]
        lang: Option<Lang>,
        /// Print JSON instead of a table
        #[arg(long)]
        json: bool,
    },
    /// Strip irony hashtags, mentions, URLs and foreign characters
    Preprocess {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Preprocessing config (TOML)
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Seeded random train/test split
    Split {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        n_train: usize,
        #[arg(long)]
        n_test: usize,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FeatureSetArg {
    Full,
    Surface,
}

impl From<FeatureSetArg> for FeatureSet {
    fn from(f: FeatureSetArg) -> FeatureSet {
        match f {
            FeatureSetArg::Full => FeatureSet::Full,
            FeatureSetArg::Surface => FeatureSet::Surface,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum FeaturesCmd {
    /// One CSV row of feature values per tweet
    Extract {
        #[arg(long)]
        corpus: PathBuf,
        /// Directory with `<lang>/<category>.txt` word lists (default: bundled)
        #[arg(long)]
        lexicons: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "full")]
        set: FeatureSetArg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum EmbeddingsCmd {
    /// Share of corpus words found in an embedding table, plus the OOV list
    Coverage {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        max_vocab: Option<usize>,
        /// Write the OOV CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum AlignCmd {
    /// Fit an orthogonal map from a seed dictionary
    Fit {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        tgt: PathBuf,
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Refinement rounds with induced dictionaries
        #[arg(long, default_value_t = 0)]
        refine: usize,
        /// Center both sides before fitting
        #[arg(long)]
        center: bool,
        #[arg(long)]
        max_vocab: Option<usize>,
    },
    /// Map a table into the target space (rows are normalised first)
    Apply {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        max_vocab: Option<usize>,
    },
    /// CSLS nearest target words of a source word
    Neighbors {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        tgt: PathBuf,
        #[arg(long)]
        word: String,
        /// Number of neighbours to print
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Neighbourhood size inside the CSLS penalty terms
        #[arg(long, default_value_t = 10)]
        csls_k: usize,
        #[arg(long)]
        max_vocab: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Rf,
    Cnn,
}

/// `PATH` for the corpus language or `LANG=PATH`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingArg {
    pub lang: Option<Lang>,
    pub path: PathBuf,
}

impl FromStr for EmbeddingArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some((l, p)) = s.split_once('=') {
            if let Ok(lang) = l.parse() {
                return Ok(EmbeddingArg {
                    lang: Some(lang),
                    path: p.into(),
                });
            }
        }
        Ok(EmbeddingArg {
            lang: None,
            path: s.into(),
        })
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Embedding table, `PATH` or `LANG=PATH` (repeatable; CNN only)
    #[arg(long)]
    pub embeddings: Vec<EmbeddingArg>,
    /// TOML with `[cnn]` and/or `[rf]` tables
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub lexicons: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "full")]
    pub features: FeatureSetArg,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub max_vocab: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Tables for words the CNN never saw (repeatable)
    #[arg(long)]
    pub embeddings: Vec<EmbeddingArg>,
    #[arg(long)]
    pub lexicons: Option<PathBuf>,
    #[arg(long)]
    pub max_vocab: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, required = true)]
    pub embeddings: Vec<EmbeddingArg>,
    /// Base configuration, TOML with a `[cnn]` table
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Search space, TOML with candidate lists
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub budget: usize,
    #[arg(long)]
    pub max_vocab: Option<usize>,
    /// Best configuration as TOML
    #[arg(long)]
    pub out: PathBuf,
    /// All trials as JSON
    #[arg(long)]
    pub trials_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Txt,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCmd {
    /// Run every experiment of a matrix and write per-experiment artifacts
    Run {
        #[arg(long, required_unless_present = "from_manifest")]
        matrix: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Re-run exactly what an earlier manifest recorded
        #[arg(long, conflicts_with = "matrix")]
        from_manifest: Option<PathBuf>,
    },
    /// Tabulate the metrics files of a run directory
    Report {
        #[arg(long)]
        in_dir: PathBuf,
        #[arg(long, value_enum, default_value = "txt")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Model families for the monolingual rows
    #[arg(long, value_delimiter = ',', value_parser = parse_family)]
    pub mono: Vec<ModelFamily>,
    /// Model families for the cross-lingual rows
    #[arg(long, value_delimiter = ',', value_parser = parse_family, default_value = "cnn_crosslingual")]
    pub cross: Vec<ModelFamily>,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 400)]
    pub n_train: usize,
    #[arg(long, default_value_t = 150)]
    pub n_test: usize,
}

fn parse_family(s: &str) -> Result<ModelFamily, String> {
    s.parse()
        .map_err(|e: irony::eval::MatrixError| e.to_string())
}
