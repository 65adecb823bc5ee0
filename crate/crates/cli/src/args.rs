use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "transversal", version, about = "Rainbow spanning structures in graph collections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance (plus a `.meta.json` sidecar).
    Gen {
        #[command(subcommand)]
        construction: Construction,
    },
    /// Run a pipeline and write a witness; exit 1 with a staged report on failure.
    Solve {
        #[command(subcommand)]
        target: SolveTarget,
    },
    /// Exact decisions and witness checks.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
    /// Success rates over a grid of minimum-degree ratios.
    #[command(long_about = "Success rates over a grid of minimum-degree ratios.\n\n\
        Writes CSV (UTF-8, LF) with header\n  delta_over_n,trials,successes,mean_runtime_ms\n\
        delta_over_n: grid point x; every colour has minimum degree at least ceil(x*n)\n\
        trials: instances drawn at x\n\
        successes: instances solved, each witness re-verified\n\
        mean_runtime_ms: mean wall time per trial (0 with --timing none)")]
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseArg {
    Complete,
    Cycle,
    Path,
    Gnp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ModelArg {
    IidGnp,
    SharedBasePlusNoise,
    MinDegreeConditioned,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    #[arg(long, env = "TRANSVERSAL_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Construction {
    /// `m` copies of one base graph.
    Identical {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value = "complete")]
        base: BaseArg,
        /// Edge probability for `--base gnp`.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        out: Output,
    },
    /// Two cliques in all colours but one, complete bipartite in the last.
    BridgelessLb {
        #[arg(long = "F")]
        f: String,
        #[arg(long)]
        copies: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Random collection from one of the listed models.
    Random {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Per-colour flip probability for shared_base_plus_noise.
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        /// Degree target for min_degree_conditioned.
        #[arg(long)]
        min_degree: Option<usize>,
        /// Samples per colour for min_degree_conditioned.
        #[arg(long, default_value_t = 20)]
        retries: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        out: Output,
    },
    /// Colours of `K_{t,t}` with no copy following its pattern; the
    /// pattern goes to `<output>.patterns`.
    PatternedCe {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Side-size floor of property R (default max(1, ceil(t/10k))).
        #[arg(long)]
        floor: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        attempts: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        out: Output,
    },
    /// Random tree with bounded maximum degree.
    Tree {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Args)]
pub struct SolveCommon {
    #[arg(short, long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Pipeline constants as JSON; the seed flag overrides its seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Subcommand)]
pub enum SolveTarget {
    /// Rainbow spanning tree; needs `n − 1` colours.
    Tree {
        #[command(flatten)]
        common: SolveCommon,
        #[arg(long)]
        tree: PathBuf,
    },
    /// (F,t)-factor; uses the surplus pipeline when colours exceed `t·n/r`.
    Factor {
        #[command(flatten)]
        common: SolveCommon,
        #[arg(long = "F")]
        f: String,
        /// 1 or e(F); defaults to e(F).
        #[arg(long)]
        t: Option<usize>,
    },
    /// F-factor whose copies follow the given colour patterns.
    Patterned {
        #[command(flatten)]
        common: SolveCommon,
        #[arg(long = "F")]
        f: String,
        #[arg(long)]
        patterns: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleAction {
    /// Exhaustive decision; prints yes / no / budget_exhausted, exit 0 only on yes.
    Decide {
        #[arg(short, long)]
        input: PathBuf,
        /// Rainbow copy of this tree.
        #[arg(long, conflicts_with = "f")]
        tree: Option<PathBuf>,
        /// Spanning (F,t)-factor, or a patterned one with `--patterns`.
        #[arg(long = "F")]
        f: Option<String>,
        #[arg(long, requires = "f")]
        t: Option<usize>,
        #[arg(long, requires = "f", conflicts_with = "t")]
        patterns: Option<PathBuf>,
        /// Search node budget.
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
        /// Witness output on yes.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Checks a witness against an instance; exit 1 on the first violation.
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        witness: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    /// Exact oracle, `n/2` colours, one edge each.
    PerfectMatching,
    /// Spanning-tree pipeline, `n − 1` colours, random tree with Δ ≤ 4.
    Tree,
    /// Factor pipeline for `--F`/`--t`, `t·n/r` colours.
    Factor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorArg {
    /// A random set `A` of `d` vertices is a clique joined to everything;
    /// the rest is independent except for `--noise` edges per colour.
    Barrier,
    /// `G(n, d/(n−1))` per colour, topped up until every degree is `d`.
    Conditioned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Timing {
    Wall,
    /// Writes 0 so the CSV is a pure function of the seed.
    None,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub mode: SweepMode,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub trials: usize,
    /// `a:b:step`, inclusive, within [0, 1].
    #[arg(long)]
    pub delta_grid: String,
    /// Defaults to barrier for perfect-matching and conditioned otherwise.
    #[arg(long, value_enum)]
    pub generator: Option<GeneratorArg>,
    /// Edge probability inside the barrier's independent side.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    #[arg(long = "F", default_value = "K3")]
    pub f: String,
    #[arg(long)]
    pub t: Option<usize>,
    /// Oracle node budget per trial.
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
    #[arg(long, value_enum, default_value = "wall")]
    pub timing: Timing,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub out: Output,
}
