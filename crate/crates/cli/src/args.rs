use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fmt::Display;
use std::path::PathBuf;
use tagevo::ingest::{ColumnConfig, Grouping, ParseOptions, TagNormalization};
use tagevo::novelty::BirthNormalization;
use tagevo::semshift::CoWeighting;
use tagevo::BucketWidth;

/// Yule–Simon tag streams and open-ended-evolution statistics for social
/// tagging logs.
///
/// Options can also come from `--config FILE` (lines of `key = value`, keys
/// named like the long flags); flags on the command line win.
#[derive(Debug, Parser)]
#[command(name = "tagevo", version, args_override_self = true)]
pub struct Cli {
    /// Key-value file with default option values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

/// Echoes a value the way it is written on the command line.
fn as_text<T: Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic annotation log (TSV) from the Yule–Simon process.
    Simulate(SimulateArgs),
    /// Parse an annotation log into the binary corpus cache.
    Ingest(IngestArgs),
    /// Posts per time bucket and cumulative posts.
    Posts(AnalysisArgs),
    /// Share of posts introducing a first-ever tag, plus Heaps and Zipf fits.
    Novelty(NoveltyArgs),
    /// Share of tag pairs co-occurring for the first time.
    Pairs(AnalysisArgs),
    /// Where first-time pairs come from, by birth bucket of both tags.
    Birthmatrix(BirthArgs),
    /// Divergence between all weekly co-occurrence profiles of one tag.
    JsdMatrix(TagArgs),
    /// Divergence between successive weekly profiles of one tag.
    JsdConsec(TagArgs),
    /// Converging/wandering classification for frequent tags.
    Drift(DriftArgs),
    /// User similarity networks over a sweep of divergence thresholds.
    Usernet(UserNetArgs),
    /// Communities, k-cores and novelty rates on the user networks.
    Communities(CommunityArgs),
    /// Widely adopted tags introduced by each active user.
    NoveltyUsers(NoveltyUsersArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Ingest(_) => "ingest",
            Command::Posts(_) => "posts",
            Command::Novelty(_) => "novelty",
            Command::Pairs(_) => "pairs",
            Command::Birthmatrix(_) => "birthmatrix",
            Command::JsdMatrix(_) => "jsd-matrix",
            Command::JsdConsec(_) => "jsd-consec",
            Command::Drift(_) => "drift",
            Command::Usernet(_) => "usernet",
            Command::Communities(_) => "communities",
            Command::NoveltyUsers(_) => "novelty-users",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Process {
    /// Posts of `--set-size` tags, the pool updated after each post.
    Set,
    /// The original process: one token per step.
    Single,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Innovation probability.
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Posts (or tokens with `--process single`).
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Tags per post, or `size:weight,...` for a size histogram.
    #[arg(long, default_value = "3")]
    pub set_size: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Process::Set)]
    pub process: Process,
    /// Keep copies that repeat a tag already in the post (they collapse on ingest).
    #[arg(long)]
    pub allow_repeats: bool,
    /// Re-draw budget per slot before the slot is dropped.
    #[arg(long, default_value_t = 32)]
    pub max_redraws: u32,
    /// Distribute posts round-robin over this many users.
    #[arg(long, default_value_t = 1)]
    pub users: u32,
    /// Output TSV; `-` writes to stdout.
    #[arg(long, short, default_value = "-")]
    pub output: String,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct InputArgs {
    /// Annotation log (TSV, optionally gzipped) or binary cache; `-` reads stdin.
    #[arg(long, short, default_value = "-")]
    pub input: String,
    /// Field separator: a single character, or `tab`.
    #[arg(long, default_value = "tab")]
    pub delimiter: String,
    #[arg(long, default_value_t = 0)]
    pub time_col: usize,
    #[arg(long, default_value_t = 1)]
    pub item_col: usize,
    #[arg(long, default_value_t = 2)]
    pub user_col: usize,
    #[arg(long, default_value_t = 3)]
    pub tag_col: usize,
    /// Explicit post-ID column (needed by `--grouping post-id`).
    #[arg(long)]
    pub post_col: Option<usize>,
    /// The first line is a header.
    #[arg(long)]
    pub header: bool,
    /// How rows form posts: `exact`, `post-id` or `window:<seconds>`.
    #[arg(long, default_value = "exact")]
    #[serde(serialize_with = "as_text")]
    pub grouping: Grouping,
    /// Keep tags exactly as written (no trimming, case folding or NFC).
    #[arg(long)]
    pub verbatim_tags: bool,
}

impl InputArgs {
    pub fn parse_options(&self, width: BucketWidth) -> Result<ParseOptions, String> {
        let delimiter = match self.delimiter.as_str() {
            "tab" | "\\t" | "\t" => b'\t',
            s if s.len() == 1 => s.as_bytes()[0],
            s => return Err(format!("delimiter must be one byte or `tab`, got `{s}`")),
        };
        Ok(ParseOptions {
            columns: ColumnConfig {
                delimiter,
                time: self.time_col,
                item: self.item_col,
                user: self.user_col,
                tag: self.tag_col,
                post: self.post_col,
                has_header: self.header,
            },
            normalization: if self.verbatim_tags { TagNormalization::verbatim() } else { TagNormalization::default() },
            grouping: self.grouping,
            width,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Directory for the artifacts and the run manifest.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Table format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    /// Bucket width stored in the cache.
    #[arg(long, default_value = "week")]
    #[serde(serialize_with = "as_text")]
    pub width: BucketWidth,
    /// Output cache; `-` writes to stdout.
    #[arg(long, short, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalysisArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
    /// Time bucket: `day`, `week` or seconds.
    #[arg(long, default_value = "week")]
    #[serde(serialize_with = "as_text")]
    pub width: BucketWidth,
}

#[derive(Debug, Args, Serialize)]
pub struct NoveltyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: AnalysisArgs,
    /// Smallest tag frequency in the power-law tail fit.
    #[arg(long, default_value_t = 10)]
    pub f_min: u64,
    /// Leading fraction of annotations left out of the Heaps fit.
    #[arg(long, default_value_t = 0.01)]
    pub heaps_skip: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct BirthArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: AnalysisArgs,
    /// Observation window in buckets, `start:end` (end exclusive).
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long, value_enum, default_value_t = Normalization::Window)]
    pub normalization: Normalization,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Window,
    Row,
}

impl From<Normalization> for BirthNormalization {
    fn from(n: Normalization) -> Self {
        match n {
            Normalization::Window => BirthNormalization::Window,
            Normalization::Row => BirthNormalization::Row,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    Tokens,
    PerPost,
}

impl From<Weighting> for CoWeighting {
    fn from(w: Weighting) -> Self {
        match w {
            Weighting::Tokens => CoWeighting::Tokens,
            Weighting::PerPost => CoWeighting::PerPost,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ProfileArgs {
    /// Co-tags below this share of a week's co-occurrences are dropped.
    #[arg(long, default_value_t = 0.01)]
    pub min_share: f64,
    #[arg(long, value_enum, default_value_t = Weighting::Tokens)]
    pub weighting: Weighting,
}

#[derive(Debug, Args, Serialize)]
pub struct TagArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: AnalysisArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    /// Tag to follow (normalized like the input).
    #[arg(long)]
    pub tag: String,
}

#[derive(Debug, Args, Serialize)]
pub struct DriftArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: AnalysisArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    /// Comma-separated tags to classify; defaults to the `--top` most frequent.
    #[arg(long, action = clap::ArgAction::Set, value_delimiter = ',')]
    pub tag: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Trailing window, in series points.
    #[arg(long, default_value_t = 8)]
    pub drift_window: usize,
    /// Mean threshold; spikes are values above twice this.
    #[arg(long, default_value_t = 0.3)]
    pub drift_threshold: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct UserArgs {
    /// Users with fewer posts are left out.
    #[arg(long, default_value_t = 100)]
    pub min_posts: u64,
    /// A tag counts for its creator once more than this many other users adopt it.
    #[arg(long, default_value_t = 100)]
    pub adoption_threshold: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct UserNetArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: AnalysisArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub users: UserArgs,
    /// Divergence thresholds θ; an edge joins users within θ.
    #[arg(long, action = clap::ArgAction::Set, value_delimiter = ',', default_value = "0.4,0.35,0.3,0.25")]
    pub thresholds: Vec<f64>,
    /// Leave out users without any edge.
    #[arg(long)]
    pub drop_isolated: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct CommunityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub net: UserNetArgs,
    /// Tie-breaking seed for community detection.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct NoveltyUsersArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: AnalysisArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub users: UserArgs,
}
