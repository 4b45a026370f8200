use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "agp", version, about = "Approximate graph propagation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate a source node or signal file.
    Propagate(PropagateArgs),
    /// Exact propagation with many levels, for use as ground truth.
    Groundtruth(GroundtruthArgs),
    /// Sweep-cut local clustering around a source node.
    Cluster(ClusterArgs),
    /// Propagate every column of a feature matrix.
    Features(FeaturesArgs),
    /// Compare an estimate against ground truth.
    Eval(EvalArgs),
    /// Monte-Carlo heat-kernel PageRank baseline.
    Mc(McArgs),
    /// Convert between edge lists and the binary CSR format.
    Convert(ConvertArgs),
    /// MaxError against push count over a range of delta values.
    Tradeoff(TradeoffArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Edge list or binary CSR file.
    #[arg(long)]
    pub graph: PathBuf,
    /// Treat the edge list as directed.
    #[arg(long)]
    pub directed: bool,
    /// Attach a self-loop to every node when loading an edge list.
    #[arg(long)]
    pub self_loops: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureKind {
    Transition,
    Pagerank,
    Ppr,
    SingleTargetPpr,
    Hkpr,
    Katz,
    Custom,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long, value_enum)]
    pub measure: MeasureKind,
    /// Teleport probability for the PageRank family.
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Heat constant.
    #[arg(long, default_value_t = 5.0)]
    pub t: f64,
    /// Katz decay.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Largest adjacency eigenvalue, used to pick the Katz level count.
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Hop count for transition probabilities.
    #[arg(long, default_value_t = 2)]
    pub hops: usize,
    /// Comma-separated custom weights w0,w1,...
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
    /// Override the receiving-side exponent.
    #[arg(long)]
    pub a: Option<f64>,
    /// Override the sending-side exponent.
    #[arg(long)]
    pub b: Option<f64>,
    /// Level count; chosen from delta when absent.
    #[arg(long)]
    pub levels: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AccuracyArgs {
    /// Relative-error threshold.
    #[arg(long, default_value_t = 1e-4)]
    pub delta: f64,
    /// Per-push threshold; defaults to delta / (50 L (L + 1)). Zero gives the exact engine.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SignalArgs {
    /// Source node (original id).
    #[arg(long)]
    pub source: Option<u32>,
    /// "(node value)" file with a nonnegative signal.
    #[arg(long)]
    pub signal: Option<PathBuf>,
    /// Uniform signal 1/n on every node (global PageRank).
    #[arg(long)]
    pub uniform: bool,
}

#[derive(Debug, Args)]
pub struct PropagateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[command(flatten)]
    pub signal: SignalArgs,
    #[command(flatten)]
    pub accuracy: AccuracyArgs,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GroundtruthArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[command(flatten)]
    pub signal: SignalArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Seed node (original id).
    #[arg(long)]
    pub source: u32,
    #[command(flatten)]
    pub accuracy: AccuracyArgs,
    /// Scan at most this many prefixes.
    #[arg(long)]
    pub max_prefix: Option<usize>,
    /// Best set, one node per line; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the conductance of every scanned prefix as CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[command(flatten)]
    pub accuracy: AccuracyArgs,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// AGPMAT1 binary or CSV feature matrix.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output matrix; CSV when the name ends in .csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub est: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    /// Divide errors by node degree (needs --graph).
    #[arg(long, requires = "graph")]
    pub normalized: bool,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub directed: bool,
    #[arg(long)]
    pub self_loops: bool,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub source: u32,
    #[arg(long, default_value_t = 5.0)]
    pub t: f64,
    #[arg(long, default_value_t = 100_000)]
    pub walks: usize,
    /// Give every walk this many steps instead of a Poisson length.
    #[arg(long)]
    pub fixed_len: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub directed: bool,
    /// Store in-neighbour lists (single-target layout) for a directed graph.
    #[arg(long, requires = "directed")]
    pub reverse: bool,
    #[arg(long)]
    pub self_loops: bool,
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long)]
    pub source: u32,
    #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3,1e-4,1e-5,1e-6")]
    pub deltas: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    pub runs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Divide errors by node degree.
    #[arg(long)]
    pub normalized: bool,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
