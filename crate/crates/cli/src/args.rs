use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "tempoly", version, about = "Time-translation polynomials for post-selected scattering protocols")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write the result document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a closed-form polynomial.
    Construct(ConstructArgs),
    /// Randomized search for polynomials proportional to a target.
    Search(SearchArgs),
    /// Check a polynomial against a target operator on random inputs.
    Verify(VerifyArgs),
    /// Monte Carlo success probability of a polynomial or program.
    Simulate(SimulateArgs),
    /// Experiment card for a polynomial.
    Card(CardArgs),
    /// Feasibility, schedule and optional compilation of time translations.
    Plan(PlanArgs),
    /// Run the acceptance criteria and write a summary.
    ReproducePaper(ReproduceArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstructKind {
    Formanek,
    QubitCentral,
    Rewind,
    RewindVw,
    QubitRewind,
    SwapFixture,
    FastForward,
    FastRewind,
    SwapSymbolic,
    Perm,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    pub kind: ConstructKind,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Rewound or fast-forwarded steps.
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    /// Number of parties (fast-forward, fast-rewind, perm).
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Target party, 0-based.
    #[arg(long, default_value_t = 0)]
    pub j: usize,
    /// SWAP polynomial file (default: bundled fixture).
    #[arg(long)]
    pub swap: Option<PathBuf>,
    /// Permutation image list, e.g. 1,2,0.
    #[arg(long, value_delimiter = ',')]
    pub perm: Vec<usize>,
    /// Expand composition trees into explicit term lists.
    #[arg(long)]
    pub expand: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchTarget {
    Swap,
    Identity,
    Perm,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Dense,
    Mps,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Number of letters.
    #[arg(long = "D", visible_alias = "vars", default_value_t = 2)]
    pub vars: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 2)]
    pub parties: usize,
    #[arg(long, value_enum, default_value_t = SearchTarget::Swap)]
    pub target: SearchTarget,
    /// Image list for --target perm, e.g. 1,2,0.
    #[arg(long, value_delimiter = ',')]
    pub perm: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Dense)]
    pub mode: ModeArg,
    /// Directory for report.json and quotient basis polynomials.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Also produce a sparse verified polynomial from the quotient.
    #[arg(long)]
    pub sparsify: bool,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub poly: PathBuf,
    /// swap, identity, or perm:i,j,k
    #[arg(long, default_value = "swap")]
    pub target: String,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// haar, ginibre or mixed (alternating).
    #[arg(long, default_value = "mixed")]
    pub sampler: String,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchArg {
    Canonical,
    Compressed,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsiArg {
    Auto,
    Random,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, conflicts_with = "program", required_unless_present = "program")]
    pub poly: Option<PathBuf>,
    #[arg(long)]
    pub program: Option<PathBuf>,
    /// haar, ginibre or model:<file>
    #[arg(long, default_value = "haar")]
    pub sampler: String,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = BranchArg::Canonical)]
    pub mode: BranchArg,
    #[arg(long, value_enum, default_value_t = PsiArg::Auto)]
    pub psi: PsiArg,
    /// Per-trial probabilities as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CardArgs {
    #[arg(long)]
    pub poly: PathBuf,
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    #[arg(long)]
    pub d: usize,
    /// Number of systems (defaults to the number of targets).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub budget: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub targets: Vec<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Compile the schedule into a protocol program (needs --dt).
    #[arg(long)]
    pub compile: bool,
    /// Where to write the compiled program (default: embedded in the output).
    #[arg(long)]
    pub program_out: Option<PathBuf>,
    /// SWAP polynomial for multi-system compilation (default: bundled fixture, d = 2).
    #[arg(long)]
    pub swap: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    #[arg(long, default_value = "report")]
    pub report_dir: PathBuf,
    /// Use this SWAP fixture instead of the bundled one.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Only these criteria, e.g. 2,5.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
}
