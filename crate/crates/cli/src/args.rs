use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "einstein-lab", version, about = "Potential theory on finite weighted graphs")]
pub struct Cli {
    /// Worker threads for sweeps and walks; output does not depend on it.
    #[arg(long, global = true, env = "EINSTEIN_LAB_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a fixture graph in the text format.
    Generate(GenerateArgs),
    /// Evaluate one quantity and print it as JSON.
    Compute(ComputeArgs),
    /// Run the inequality suite and condition sweep, writing JSON and CSV reports.
    Verify(VerifyArgs),
    /// Einstein records `E(x,2R) / (rho v)` over a grid.
    Einstein(GridCommand),
    /// Log-log exponent fits at one center.
    Fit(FitArgs),
    /// Monte Carlo exit time.
    Mc(McArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Lattice,
    Sierpinski,
    Vicsek,
    BinaryTree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WeightName {
    Unit,
    Radial,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    #[arg(long, default_value_t = 2)]
    pub dim: u32,
    #[arg(long)]
    pub side: Option<usize>,
    #[arg(long)]
    pub level: Option<u32>,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long = "weights", value_enum, default_value_t = WeightName::Unit)]
    pub weights: WeightName,
    /// Ratio for the radial weight rule.
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
}

/// A graph file or a generator spec.
#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    #[arg(long, conflicts_with = "family")]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Multiply the weight of edge U-V in one direction: `U,V,FACTOR`.
    #[arg(long, hide = true)]
    pub inject_asymmetry: Option<String>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Output path; the graph goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Exit,
    Resistance,
    Green,
    Lambda,
    Harnack,
    Hg,
}

#[derive(Args, Debug)]
pub struct ComputeArgs {
    #[arg(value_enum)]
    pub quantity: Quantity,
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Center vertex id or `center`.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long = "R")]
    pub radius: Option<u32>,
    /// Ball `X,R` for green and lambda.
    #[arg(long)]
    pub ball: Option<String>,
    /// Source ball `X,r` for resistance.
    #[arg(long = "A-ball")]
    pub a_ball: Option<String>,
    /// Ball `X,R` whose complement is the sink for resistance.
    #[arg(long = "B-ball")]
    pub b_ball: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// `auto5`, `center`, or a comma list of vertex ids.
    #[arg(long, default_value = "auto5")]
    pub centers: String,
    /// `a,b,c` or an inclusive range `a..b`; defaults to the dyadic ladder from 2.
    #[arg(long)]
    pub radii: Option<String>,
}

#[derive(Args, Debug)]
pub struct GridCommand {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also write one CSV row per record.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value = "center")]
    pub x: String,
    #[arg(long)]
    pub radii: Option<String>,
    /// Directory for the `(ln R, ln value)` CSV of each series.
    #[arg(long)]
    pub csv_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value = "center")]
    pub x: String,
    #[arg(long = "R")]
    pub radius: u32,
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Step cap per walk; defaults to `10^4 R^2`.
    #[arg(long)]
    pub cap: Option<u64>,
    /// Include exit-position counts.
    #[arg(long)]
    pub exits: bool,
}
