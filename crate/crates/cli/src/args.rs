//! Command line arguments.

use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use diverse_cq_core::engine::DEFAULT_EXTENSION_LIMIT;
use diverse_cq_core::optimize::DEFAULT_MAX_SUBSETS;
use diverse_cq_core::volume::DEFAULT_UNIVERSE_CAP;
use diverse_cq_core::Rational;

use crate::io::parse_rational;

#[derive(Debug, Parser)]
#[command(name = "diverse-cq", version, about = "Diverse answers of conjunctive queries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a query and count its answers.
    Eval(EvalArgs),
    /// Select k diverse answers.
    Diversify(DiversifyArgs),
    /// Compare volume diversity with distance-based diversity.
    Compare(CompareArgs),
    /// Convert between volume, multi-attribute and ultrametric forms.
    Convert(ConvertArgs),
    /// Time combined greedy against materialize-then-greedy on path queries.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct QueryInput {
    /// Directory holding schema.txt and one <Relation>.csv per relation.
    #[arg(long)]
    pub data: PathBuf,
    /// File holding one rule such as `Q(x,y) <- R(x,z), S(z,y).`
    #[arg(long)]
    pub query: PathBuf,
    /// Tree decomposition as JSON `{nodes:[{id,bag,parent}]}`.
    #[arg(long)]
    pub td: Option<PathBuf>,
    /// Declared width of the tree decomposition.
    #[arg(long, value_parser = rational_arg, default_value = "1")]
    pub td_width: Rational,
}

/// Which ball function scores answers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VolumeSpec {
    Elem,
    Pos,
    ElemWeighted,
    PosWeighted,
    Provenance,
    Ball(f64),
}

impl VolumeSpec {
    pub fn as_string(self) -> String {
        match self {
            VolumeSpec::Elem => "elem".into(),
            VolumeSpec::Pos => "pos".into(),
            VolumeSpec::ElemWeighted => "elem-w".into(),
            VolumeSpec::PosWeighted => "pos-w".into(),
            VolumeSpec::Provenance => "provenance".into(),
            VolumeSpec::Ball(r) => format!("ball:r={r}"),
        }
    }
}

pub fn volume_arg(s: &str) -> Result<VolumeSpec, String> {
    match s {
        "elem" => Ok(VolumeSpec::Elem),
        "pos" => Ok(VolumeSpec::Pos),
        "elem-w" => Ok(VolumeSpec::ElemWeighted),
        "pos-w" => Ok(VolumeSpec::PosWeighted),
        "provenance" => Ok(VolumeSpec::Provenance),
        _ => {
            let r = s
                .strip_prefix("ball:r=")
                .ok_or_else(|| format!("unknown volume `{s}`; use elem, pos, elem-w, pos-w, provenance or ball:r=<r>"))?;
            let r: f64 = r.parse().map_err(|_| format!("`{r}` is not a radius"))?;
            if !(r.is_finite() && r > 0.0) {
                return Err("the radius must be positive".into());
            }
            Ok(VolumeSpec::Ball(r))
        }
    }
}

/// `weighted:<file>[:default=<w>]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSpec {
    pub file: PathBuf,
    pub default: Rational,
}

pub fn measure_arg(s: &str) -> Result<MeasureSpec, String> {
    let rest = s
        .strip_prefix("weighted:")
        .ok_or_else(|| format!("unknown measure `{s}`; use weighted:<file>[:default=<w>]"))?;
    let (file, default) = match rest.rsplit_once(":default=") {
        Some((f, w)) => (f, parse_rational(w).map_err(|e| e.to_string())?),
        None => (rest, Rational::from_integer(1)),
    };
    if file.is_empty() {
        return Err("the measure needs a weight file".into());
    }
    Ok(MeasureSpec {
        file: PathBuf::from(file),
        default,
    })
}

pub fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct VolumeArgs {
    /// elem | pos | elem-w | pos-w | provenance | ball:r=<r>
    #[arg(long, value_parser = volume_arg, default_value = "elem")]
    pub volume: VolumeSpec,
    /// Weights for elem-w and pos-w: weighted:<file>[:default=<w>]
    #[arg(long, value_parser = measure_arg)]
    pub measure: Option<MeasureSpec>,
    /// Monte-Carlo samples per ball volume estimate.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Homomorphism extensions allowed when computing provenance.
    #[arg(long, default_value_t = DEFAULT_EXTENSION_LIMIT)]
    pub max_extensions: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Greedy,
    Exact,
    GreedyCombined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Auto,
    Naive,
    Tropical,
    Provenance,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: QueryInput,
    /// Print the sorted answers.
    #[arg(long)]
    pub dump: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DiversifyArgs {
    #[command(flatten)]
    pub input: QueryInput,
    #[command(flatten)]
    pub volume: VolumeArgs,
    #[arg(short)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Greedy)]
    pub mode: ModeArg,
    /// Top-1 engine for greedy-combined.
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    pub engine: EngineArg,
    /// Largest number of k-subsets the exact mode may enumerate.
    #[arg(long, default_value_t = DEFAULT_MAX_SUBSETS)]
    pub max_subsets: u128,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: QueryInput,
    #[command(flatten)]
    pub volume: VolumeArgs,
    #[arg(short)]
    pub k: usize,
    /// hamming | matrix:<file>
    #[arg(long, default_value = "hamming")]
    pub distance: String,
    /// Largest set the Weitzman recursion may score.
    #[arg(long, default_value_t = diverse_cq_core::baselines::DEFAULT_WEITZMAN_CAP)]
    pub max_weitzman: usize,
    /// Extra sets to score, one per line as `Q(a,b);Q(c,d)`.
    #[arg(long)]
    pub sets: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["multiattr", "volume_dump", "ultrametric", "matrix"])))]
pub struct ConvertArgs {
    /// Multi-attribute weights, one `a;b,weight` per line, to a volume assignment.
    #[arg(long)]
    pub multiattr: Option<PathBuf>,
    /// Volume assignment over the answers of --query to multi-attribute weights.
    #[arg(long)]
    pub volume_dump: bool,
    /// Ultrametric tree JSON to a volume assignment.
    #[arg(long)]
    pub ultrametric: Option<PathBuf>,
    /// Distance matrix CSV to an ultrametric tree.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub query: Option<PathBuf>,
    #[command(flatten)]
    pub volume: VolumeArgs,
    /// Largest universe converted.
    #[arg(long, default_value_t = DEFAULT_UNIVERSE_CAP)]
    pub max_universe: usize,
    /// Largest universe checked exhaustively.
    #[arg(long, default_value_t = 10)]
    pub check_limit: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Atoms in the path query.
    #[arg(long, default_value_t = 6)]
    pub length: usize,
    #[arg(long, default_value_t = 300)]
    pub edges: usize,
    #[arg(long, default_value_t = 100)]
    pub nodes: usize,
    #[arg(short, default_value_t = 5)]
    pub k: usize,
    /// Size of the random answer sample greedy is also run on.
    #[arg(long, default_value_t = 10_000)]
    pub sample: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
