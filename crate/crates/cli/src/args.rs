use std::path::PathBuf;

use cfskew_core::{Axis, InclusionModel, Metric, Mode, NeighborVariant};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "cfskew",
    version,
    about = "Popularity skew in collaborative-filtering similarity: measurement, expectation and simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a user/item/weight log and write it in canonical form.
    Ingest(IngestArgs),
    /// Write a synthetic Zipf interaction log.
    Generate(GenerateArgs),
    /// All pairwise similarity scores along one axis.
    Similarity(SimilarityArgs),
    /// Rank-binned similarity heatmap.
    Heatmap(HeatmapArgs),
    /// Neighbourhood size of every entity, by popularity rank.
    Profile(ProfileArgs),
    /// Evaluate one analytic expectation.
    Expect(ExpectArgs),
    /// Monte Carlo estimates with standard errors.
    Simulate(SimulateArgs),
    /// Emit the four similarity/neighbourhood figures and a skew report.
    Figures(FiguresArgs),
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Ingest(a) => &a.common,
            Command::Generate(a) => &a.common,
            Command::Similarity(a) => &a.common,
            Command::Heatmap(a) => &a.common,
            Command::Profile(a) => &a.common,
            Command::Expect(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Figures(a) => &a.common,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Cap on worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON file whose keys mirror flag names; flags on the command line win.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub users: usize,
    #[arg(long, default_value_t = 500)]
    pub items: usize,
    /// Clicks per user (the maximum when --user-exponent is set).
    #[arg(long, default_value_t = 20)]
    pub clicks: usize,
    /// Zipf exponent of item popularity.
    #[arg(long, default_value_t = 1.0)]
    pub exponent: f64,
    /// Give user r round(clicks / r^e) clicks instead of a fixed count.
    #[arg(long)]
    pub user_exponent: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// collapsed-draws (alias iid-draws), distinct-draws or bernoulli.
    #[arg(long, default_value = "collapsed-draws")]
    pub inclusion: InclusionModel,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimilarityArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// jaccard, l1 or l2.
    #[arg(long, default_value = "jaccard")]
    pub metric: Metric,
    /// user or item.
    #[arg(long, default_value = "user")]
    pub axis: Axis,
    /// Only the R most popular entities (0 = no cap).
    #[arg(long, default_value_t = 0)]
    pub top_r: usize,
    /// Defaults to the extension of --out, else csv.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, default_value = "jaccard")]
    pub metric: Metric,
    #[arg(long, default_value = "user")]
    pub axis: Axis,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    /// Only the R most popular entities (0 = no cap).
    #[arg(long, default_value_t = 0)]
    pub top_r: usize,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, default_value = "user")]
    pub axis: Axis,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Formula {
    /// N(i)/N(j) = j/i; needs --i, --j.
    ItemRatio,
    /// Click probability of rank --i.
    ClickProbability,
    /// Expected user-pair similarity sum_t t·e_t / |union|.
    UserPairSimilarity,
    /// Elementary symmetric terms and, in normalized mode, the overlap PMF.
    OverlapDistribution,
    /// Expected |intersection| and |union| (normalized mode).
    OverlapUnion,
    /// Expected cosine similarity of two items; needs --m, --n, --users.
    ItemSimilarity,
    /// Expected number of user neighbours.
    UserNeighbors,
    /// Expected number of item neighbours of rank --i.
    ItemNeighbors,
}

#[derive(Debug, Args)]
pub struct ExpectArgs {
    #[arg(long, value_enum)]
    pub formula: Formula,
    /// paper-raw or normalized.
    #[arg(long, default_value = "normalized")]
    pub mode: Mode,
    /// paper or exact.
    #[arg(long, default_value = "paper")]
    pub variant: NeighborVariant,
    #[arg(long)]
    pub i: Option<usize>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long, default_value_t = 20)]
    pub items: usize,
    #[arg(long, default_value_t = 10)]
    pub clicks_a: usize,
    /// Defaults to --clicks-a.
    #[arg(long)]
    pub clicks_b: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub users: usize,
    #[arg(long, default_value_t = 1.0)]
    pub exponent: f64,
    /// |I_A ∪ I_B| for user-pair-similarity (default N_A + N_B - round(E|∩|)).
    #[arg(long)]
    pub union: Option<usize>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub n: Option<f64>,
    /// Ranks clicked by the user, for the exact user-neighbour variant.
    #[arg(long, value_delimiter = ',')]
    pub item_set: Vec<usize>,
    /// Also write the report as JSON.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    UserPair,
    ItemPair,
    Neighborhoods,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub target: Target,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "bernoulli")]
    pub inclusion: InclusionModel,
    #[arg(long, default_value_t = 20)]
    pub items: usize,
    /// Clicks of user A (and of every user for neighborhoods).
    #[arg(long, default_value_t = 10)]
    pub clicks_a: usize,
    #[arg(long)]
    pub clicks_b: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub exponent: f64,
    #[arg(long, default_value_t = 1000)]
    pub users: usize,
    #[arg(long, default_value_t = 2.0)]
    pub m: f64,
    #[arg(long, default_value_t = 2.0)]
    pub n: f64,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    /// Metric of both similarity figures.
    #[arg(long, default_value = "jaccard")]
    pub metric: Metric,
    /// Rank cap of the item-axis similarity figure (0 = no cap).
    #[arg(long, default_value_t = 2000)]
    pub top_r: usize,
    #[command(flatten)]
    pub common: Common,
}
