use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Role discovery in graphs: constrained NMF, non-negative Tucker models and
/// the analyses built on them.
///
/// Any long flag can also be set from `--config FILE` (TOML). Top-level keys
/// apply to every subcommand that has the flag, `[subcommand]` tables to that
/// subcommand only; flags on the command line win.
#[derive(Debug, Parser)]
#[command(name = "rolekit", version)]
pub struct Cli {
    /// TOML file with default flag values; must precede the subcommand.
    #[arg(long, global = false, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// More log output on stderr (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural node features of a graph (CSV) or multigraph (COO tensor).
    Features(FeaturesArgs),
    /// Guided role discovery: constrained NMF of a feature matrix.
    Glrd(GlrdArgs),
    /// Multi-relational roles: non-negative Tucker model of a feature tensor.
    Mrd(MrdArgs),
    /// Refit a tensor with factors of an existing Tucker model held fixed.
    Transfer(TransferArgs),
    /// Cross-transfer fit matrix over an ordered list of tensors.
    Heatmap(HeatmapArgs),
    /// Core slices, interaction graph, metrics and embedding of a Tucker model.
    Analyze(AnalyzeArgs),
    /// Cross-graph identity resolution in a shared role space.
    Resolve(ResolveArgs),
    /// Jaccard comparison of role partitions and role-proportion dispersion.
    Compare(CompareArgs),
    /// Seeded synthetic instances with planted structure.
    Synth(SynthArgs),
}

pub fn parse_nonneg(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(format!("must be >= 0, got {s}"))
    }
}

pub fn parse_fraction(s: &str) -> Result<f64, String> {
    let x = parse_nonneg(s)?;
    if x <= 1.0 {
        Ok(x)
    } else {
        Err(format!("must be in [0, 1], got {s}"))
    }
}

pub fn parse_triple(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("expected three comma-separated integers, got {s:?}"))?;
    match parts[..] {
        [a, b, c] if a > 0 && b > 0 && c > 0 => Ok((a, b, c)),
        [_, _, _] => Err(format!("all three sizes must be positive, got {s:?}")),
        _ => Err(format!("expected three comma-separated integers, got {s:?}")),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct FeaturesArgs {
    /// Edge list `src<TAB>dst[<TAB>weight]`.
    #[arg(long, conflicts_with = "multigraph", required_unless_present = "multigraph")]
    pub graph: Option<PathBuf>,
    /// Multigraph `src<TAB>dst<TAB>relation[<TAB>weight]`; output is a COO tensor.
    #[arg(long)]
    pub multigraph: Option<PathBuf>,
    /// Learn the feature schema and scaling on this edge list and apply them to --graph.
    #[arg(long, requires = "graph")]
    pub schema_from: Option<PathBuf>,
    #[arg(long)]
    pub directed: bool,
    /// Recursion depth (0 = base features only).
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    /// Drop a recursive column correlated above this with a kept one.
    #[arg(long, default_value_t = 0.95, value_parser = parse_fraction)]
    pub prune_corr: f64,
    /// Comma-separated neighbor aggregators (sum, mean).
    #[arg(long, value_delimiter = ',', default_value = "sum,mean")]
    pub aggregators: Vec<String>,
    /// Keep raw feature values (no log1p + min-max scaling).
    #[arg(long)]
    pub no_log: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GlrdArgs {
    /// Feature matrix CSV (header row, first column = node id).
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub roles: u64,
    /// Comma-separated seeds; the lowest objective wins.
    #[arg(long = "seed", value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    /// L1 bound on every G column.
    #[arg(long, value_parser = parse_nonneg)]
    pub sparsity_g: Option<f64>,
    /// L1 bound on every F row.
    #[arg(long, value_parser = parse_nonneg)]
    pub sparsity_f: Option<f64>,
    /// Bound on inner products between distinct G columns.
    #[arg(long, value_parser = parse_nonneg)]
    pub diversity_g: Option<f64>,
    /// Bound on inner products between distinct F rows.
    #[arg(long, value_parser = parse_nonneg)]
    pub diversity_f: Option<f64>,
    /// Role model to steer away from (with --alt-eps-g and/or --alt-eps-f).
    #[arg(long)]
    pub prior: Option<PathBuf>,
    #[arg(long, value_parser = parse_nonneg, requires = "prior")]
    pub alt_eps_g: Option<f64>,
    #[arg(long, value_parser = parse_nonneg, requires = "prior")]
    pub alt_eps_f: Option<f64>,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_sweeps: u64,
    #[arg(long, default_value_t = 1e-6, value_parser = parse_nonneg)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TuckerOpts {
    #[arg(long = "seed", value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 1e-6, value_parser = parse_nonneg)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-9, value_parser = parse_nonneg)]
    pub fit_tol: f64,
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iters: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct MrdArgs {
    /// COO tensor (entities × features × relations).
    #[arg(long)]
    pub tensor: PathBuf,
    /// Label sidecar; defaults to `<tensor>.labels.json` when present.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Core dims p,q,s (E-groups, roles, R-groups).
    #[arg(long, value_parser = parse_triple)]
    pub dims: (usize, usize, usize),
    #[command(flatten)]
    pub opts: TuckerOpts,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorName {
    G,
    F,
    R,
}

#[derive(Debug, Args, Serialize)]
pub struct TransferArgs {
    /// Source Tucker model.
    #[arg(long)]
    pub model: PathBuf,
    /// Target COO tensor.
    #[arg(long)]
    pub tensor: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Factors taken from the source and held fixed.
    #[arg(long, value_delimiter = ',', default_value = "f")]
    pub fix: Vec<FactorName>,
    #[arg(long, default_value_t = 1e-6, value_parser = parse_nonneg)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-9, value_parser = parse_nonneg)]
    pub fit_tol: f64,
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iters: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct HeatmapArgs {
    /// Ordered COO tensors (comma-separated or repeated).
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub tensors: Vec<PathBuf>,
    #[arg(long, value_parser = parse_triple)]
    pub dims: (usize, usize, usize),
    #[command(flatten)]
    pub opts: TuckerOpts,
    /// Fit matrix CSV: row = role source, column = target.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphModeArg {
    Clique,
    Tripartite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityArg {
    RandomWalk,
    Laplacian,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Tucker model document.
    #[arg(long)]
    pub model: PathBuf,
    /// Keep core entries at or above this fraction of the largest one.
    #[arg(long, default_value_t = 0.1, value_parser = parse_fraction)]
    pub threshold_frac: f64,
    #[arg(long, value_enum, default_value_t = GraphModeArg::Clique)]
    pub graph_mode: GraphModeArg,
    #[arg(long, value_enum, default_value_t = StabilityArg::RandomWalk)]
    pub stability: StabilityArg,
    /// k-means clusters for the embedding.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub clusters: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for core.csv, patterns.csv, interaction.tsv, metrics.csv, embedding.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricArg {
    Euclidean,
    Cosine,
}

#[derive(Debug, Args, Serialize)]
pub struct ResolveArgs {
    /// Role model whose F defines the shared role space.
    #[arg(long)]
    pub model: PathBuf,
    /// Feature CSV of the first graph.
    #[arg(long)]
    pub source: PathBuf,
    /// Feature CSV of the second graph (same feature columns).
    #[arg(long)]
    pub target: PathBuf,
    /// Ids present in both graphs, one per line; default: all common ids.
    #[arg(long)]
    pub shared: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16", value_parser = clap::value_parser!(u64).range(1..))]
    pub k: Vec<u64>,
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    pub metric: MetricArg,
    /// Query target rows against the source instead.
    #[arg(long)]
    pub reverse: bool,
    /// Recall CSV (k, matches, shared, recall).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Role model whose dominant roles are compared.
    #[arg(long)]
    pub model: PathBuf,
    /// Second role model over the same nodes.
    #[arg(long, requires = "jaccard_out")]
    pub against: Option<PathBuf>,
    /// `node<TAB>community` lines.
    #[arg(long, requires = "stddev_out")]
    pub communities: Option<PathBuf>,
    #[arg(long, requires = "against")]
    pub jaccard_out: Option<PathBuf>,
    #[arg(long, requires = "communities")]
    pub stddev_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    /// Planted V = G F (CSV) plus the truth model.
    Nmf,
    /// Planted Tucker tensor (COO) plus the truth model.
    Tucker,
    /// Role-drift tensor sequence in a directory.
    Drift,
    /// Two noisy copies of one planted feature matrix in a directory.
    Twins,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    /// Matrix size n,f for nmf/twins.
    #[arg(long, default_value = "50,10", value_parser = parse_pair)]
    pub size: (usize, usize),
    /// Planted rank for nmf/twins.
    #[arg(long, default_value_t = 3)]
    pub roles: usize,
    #[arg(long, default_value_t = 0.5, value_parser = parse_fraction)]
    pub density: f64,
    #[arg(long, default_value_t = 0.2, value_parser = parse_fraction)]
    pub noise: f64,
    /// Tensor dims n,f,m for tucker/drift.
    #[arg(long, default_value = "20,10,4", value_parser = parse_triple)]
    pub dims: (usize, usize, usize),
    /// Core dims p,q,s for tucker/drift.
    #[arg(long, default_value = "3,3,2", value_parser = parse_triple)]
    pub core: (usize, usize, usize),
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,
    #[arg(long, default_value_t = 0.3, value_parser = parse_nonneg)]
    pub drift: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (nmf, tucker) or directory (drift, twins).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("expected two comma-separated integers, got {s:?}"))?;
    match parts[..] {
        [a, b] if a > 0 && b > 0 => Ok((a, b)),
        _ => Err(format!("expected two positive comma-separated integers, got {s:?}")),
    }
}
