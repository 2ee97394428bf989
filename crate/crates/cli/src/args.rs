use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "casimir",
    version,
    about = "Curved Casimir operators: tables, derivations and numeric checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for random sections; recorded in every report.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Latex,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Composition series, eigenvalues, differences and coincidences.
    Table(TableArgs),
    /// Weights at which the top eigenvalue meets a lower one.
    Critical(FamilyArgs),
    /// Derive an induced operator between two slots.
    Derive(DeriveArgs),
    /// Flat principal part of an induced operator.
    Principal(DeriveArgs),
    /// Numeric verification suites.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Dimension-4 constructions: the square (symsq0) or the cube obstruction.
    #[command(name = "probe-dim4")]
    ProbeDim4(ProbeArgs),
    /// Dimension-6 cube operator T and its compositions (report only).
    #[command(name = "probe-dim6")]
    ProbeDim6(NumericArgs),
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    /// oneform, symsq0 or cube.
    #[arg(long)]
    pub family: String,
    /// Dimension: an even integer ≥ 4, or `sym`.
    #[arg(long, default_value = "sym")]
    pub n: String,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Weight `w`: `sym` or an expression in n such as `1-n/2`.
    #[arg(long, default_value = "sym", allow_hyphen_values = true)]
    pub w: String,
}

#[derive(Args, Debug)]
pub struct WeightArgs {
    /// Weight `w` of the family.
    #[arg(long, conflicts_with = "w_top", allow_hyphen_values = true)]
    pub w: Option<String>,
    /// Weight of the top slot instead of `w`.
    #[arg(long, allow_hyphen_values = true)]
    pub w_top: Option<String>,
}

#[derive(Args, Debug)]
pub struct DeriveArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub weight: WeightArgs,
    /// Source slot (default: top).
    #[arg(long)]
    pub source: Option<String>,
    /// Target slot name or `bottom` (default: deepest slot sharing the source eigenvalue).
    #[arg(long)]
    pub target: Option<String>,
    /// Named factor recipe; `dim4` is the symsq0 square in dimension 4.
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    /// Explicit comma-separated Casimir shifts, outermost first.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub factors: Option<Vec<String>>,
    /// Normalization regime (default: curved; flat for `--variant dim4`).
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Dim4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Curved,
    Flat,
}

#[derive(Args, Debug, Clone)]
pub struct NumericArgs {
    /// Grid resolutions per active axis.
    #[arg(
        long,
        alias = "resolution",
        value_delimiter = ',',
        env = "CASIMIR_RESOLUTIONS",
        default_value = "32,48,64"
    )]
    pub resolutions: Vec<usize>,
    /// Finite-difference order: 2, 4 or 6 (command-specific default).
    #[arg(long, env = "CASIMIR_FD_ORDER")]
    pub fd_order: Option<String>,
    /// Metric deformation size (suite-specific default).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Number of coordinate axes the fields depend on (1–3).
    #[arg(long, default_value_t = 2)]
    pub active_axes: usize,
    /// Also write the convergence table(s) as CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    /// symsq0 (the square) or cube (the obstruction).
    #[arg(long, default_value = "cube")]
    pub family: String,
    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Subcommand, Debug)]
pub enum Suite {
    /// Conformal invariance of an induced operator under metric rescaling.
    Invariance(InvarianceArgs),
    /// Vanishing of the dimension-specific compositions on conformally flat metrics.
    Vanishing(VanishingArgs),
    /// Casimir eigenvalues on the graded pieces of random grid sections.
    Eigenvalue(EigenvalueArgs),
    /// Convergence of the curvature pipeline against an analytic Schouten tensor.
    Convergence(ConvergenceArgs),
}

#[derive(Args, Debug)]
pub struct InvarianceArgs {
    #[command(flatten)]
    pub op: DeriveArgs,
    #[command(flatten)]
    pub numeric: NumericArgs,
    /// Negative control: compare against output weight `w_out + 1`.
    #[arg(long)]
    pub wrong_weight: bool,
}

#[derive(Args, Debug)]
pub struct VanishingArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Args, Debug)]
pub struct EigenvalueArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Weight `w` (a rational number or expression in n).
    #[arg(long, allow_hyphen_values = true)]
    pub w: String,
    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Args, Debug)]
pub struct ConvergenceArgs {
    /// Dimension of the test metric.
    #[arg(long, default_value = "4")]
    pub n: String,
    #[command(flatten)]
    pub numeric: NumericArgs,
}
