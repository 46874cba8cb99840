//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use schelling_core::search::DEFAULT_BUDGET;

#[derive(Parser, Debug)]
#[command(name = "schelling", version, about = "Exact equilibria, welfare and dynamics for Schelling games on graphs")]
pub struct Cli {
    /// Largest number of assignments exhaustive search may visit.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET as u128)]
    pub budget: u128,
    /// Seed for random generation and random dynamics starts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file for generated instances and traces.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check an instance file against the game invariants.
    Validate { path: PathBuf },
    /// Write a generated instance.
    Gen(GenArgs),
    /// Find one equilibrium or prove there is none.
    Solve {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = SolveMethod::Brute)]
        method: SolveMethod,
        #[arg(long, value_enum, default_value_t = PolicyArg::Best)]
        policy: PolicyArg,
        /// Step limit for the dynamics method.
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// List every equilibrium with its welfare.
    Equilibria { path: PathBuf },
    /// Optimal welfare, or the best equilibrium welfare.
    Welfare {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = WelfareMethod::Brute)]
        method: WelfareMethod,
        /// Maximise over equilibria instead of all assignments.
        #[arg(long)]
        best_equilibrium: bool,
    },
    /// Price of anarchy or stability by exhaustive search.
    Ratio {
        path: PathBuf,
        #[arg(value_enum)]
        which: RatioKind,
    },
    /// Run improving-response dynamics and write a trace.
    Dynamics {
        path: PathBuf,
        /// `random:SEED` or a file of node ids, one per agent.
        #[arg(long, default_value = "random:0")]
        start: String,
        #[arg(long, value_enum, default_value_t = PolicyArg::Best)]
        policy: PolicyArg,
        #[arg(long)]
        max_steps: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    Brute,
    Treedp,
    Dynamics,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WelfareMethod {
    Brute,
    Treedp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RatioKind {
    Poa,
    Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Best,
    First,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Star,
    Path,
    Ring,
    NonexistenceTree,
    PoaCliques,
    PoaStubbornCliques,
    PoaStarStubborn,
    PoaStarTwoPerType,
    PosUnbounded,
    PosThree,
    #[value(name = "pos-34-33")]
    PosThirtyFourOver33,
    ReduceClique,
    ReduceCliqueWelfare,
    ReduceHamiltonian,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PadArg {
    Strategic,
    Stubborn,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub family: Family,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub x: Option<usize>,
    /// Target clique size for the clique reductions.
    #[arg(long)]
    pub s: Option<usize>,
    /// Rational such as `1/4`.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub leaves: Option<usize>,
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Strategic agents per type, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub types: Vec<usize>,
    /// Stubborn agents per type for random instances.
    #[arg(long, value_delimiter = ',')]
    pub stubborn: Vec<usize>,
    /// Edge-list file for the reductions.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Random topology: `tree`, `path`, `ring`, `star` or `gnp:P`.
    #[arg(long, default_value = "tree")]
    pub topology: String,
    /// Use a random social network with this edge probability.
    #[arg(long)]
    pub social: Option<String>,
    /// `fractional`, `modified` or `linear:ALPHA:BETA`.
    #[arg(long)]
    pub model: Option<String>,
    /// Resample random topologies until connected.
    #[arg(long)]
    pub connected: bool,
    /// Append isolated nodes, each with an agent of a new type.
    #[arg(long)]
    pub pad: Option<usize>,
    #[arg(long, value_enum, default_value_t = PadArg::Strategic)]
    pub pad_kind: PadArg,
}

