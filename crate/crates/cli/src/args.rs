use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Character-constancy neighborhoods and lattice-lemma checks over p-adic GL_n / SL_n.
#[derive(Debug, Parser)]
#[command(name = "charconst", version, propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Residue characteristic.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Absolute precision in valuation units [default: $CHARCONST_PRECISION or 24].
    #[arg(long, global = true)]
    pub precision: Option<i64>,
    #[arg(long, global = true, value_enum, ignore_case = true)]
    pub group: Option<GroupArg>,
    /// Rank parameter; checked against the size of every matrix given.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON object of settings, overridden by flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Pretty-print the JSON output.
    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GroupArg {
    #[value(name = "GL")]
    Gl,
    #[value(name = "SL")]
    Sl,
}

impl GroupArg {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupArg::Gl => "GL",
            GroupArg::Sl => "SL",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regular depth, constancy radius and neighborhood descriptor of gamma.
    Radius(RadiusArgs),
    /// Root values s_alpha and s(gamma) of a regular gamma.
    Sgamma(SgammaArgs),
    /// Randomized check of one lattice statement.
    Verify(VerifyArgs),
    /// Character cosets of G_{x,r}/G_{x,t}.
    #[command(subcommand)]
    Kirillov(KirillovCommand),
    /// Closed forms of the adjoint action against direct conjugation.
    ChevalleyCheck(ChevalleyArgs),
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    /// Matrix as a JSON array of rows of scalar literals.
    #[arg(long)]
    pub gamma: Option<String>,
    /// Splitting-field hint `e:f:c_0,...,c_e` (Eisenstein coefficients, low to high;
    /// `a|b|...` gives coordinates over the unramified step).
    #[arg(long)]
    pub extension: Option<String>,
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    #[command(flatten)]
    pub gamma: GammaArgs,
    /// Depth of the representation.
    #[arg(long, allow_hyphen_values = true)]
    pub rho_pi: Option<String>,
    /// Matrix to test against the neighborhood.
    #[arg(long)]
    pub candidate: Option<String>,
}

#[derive(Debug, Args)]
pub struct SgammaArgs {
    #[command(flatten)]
    pub gamma: GammaArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LemmaArg {
    Lemma32,
    Lemma33,
    Prop34,
    Deepness,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub lemma: LemmaArg,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Apartment point as a JSON array of rationals.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// JSON array of matrices.
    #[arg(long)]
    pub gammas: Option<String>,
    /// JSON array of rationals.
    #[arg(long, allow_hyphen_values = true)]
    pub depths: Option<String>,
    /// Include the wall time in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum KirillovCommand {
    /// Count the cosets and tabulate their triviality depths.
    Enumerate(CosetArgs),
    /// Classify every coset against the intertwining statement for gamma.
    CheckCor36(Cor36Args),
}

#[derive(Debug, Args)]
pub struct CosetArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Largest number of cosets to enumerate.
    #[arg(long)]
    pub cap: Option<u64>,
}

#[derive(Debug, Args)]
pub struct Cor36Args {
    #[command(flatten)]
    pub cosets: CosetArgs,
    #[arg(long)]
    pub gamma: Option<String>,
    /// Candidates tried by the fallback nilpotent search.
    #[arg(long)]
    pub search_bound: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ChevalleyArgs {
    /// Random parameters per root pair.
    #[arg(long)]
    pub samples: Option<usize>,
}
