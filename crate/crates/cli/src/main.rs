//! `radsched`: batch front end to the scheduling engine.
//!
//! Every command is deterministic for fixed inputs and seeds. Solver budgets
//! default to node limits; `--time-limit` is available but makes results
//! depend on machine speed when it binds.

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use radsched_core::harness::DEFAULT_GAMMAS;
use radsched_core::instancegen::DEFAULT_SIM_DAYS;
use radsched_core::StrategyKind;
use std::path::PathBuf;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "radsched", version, about = "Radiotherapy allocation scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate warm-started instances, one JSON file per seed.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the offline problem of one instance.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// Reservation kept free of curatives.
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate one strategy on one instance.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        strategy: StrategyKind,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Result JSON.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-patient CSV.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Turn solved instances into a training-example CSV.
    Extract {
        #[arg(long)]
        instances: PathBuf,
        /// Solutions written by `solve`, with the same file names as the instances.
        #[arg(long)]
        solutions: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the waiting-time model.
    Train {
        #[arg(long)]
        examples: PathBuf,
        #[command(flatten)]
        params: GbtArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tree Shapley attributions for every row of an examples CSV.
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Attribution JSON; `<stem>.waterfall.csv` and `<stem>.beeswarm.csv` go next to it.
        #[arg(long)]
        out: PathBuf,
        /// Row rendered as the waterfall.
        #[arg(long, default_value_t = 0)]
        row: usize,
    },
    /// Simulate strategies on a batch of instances.
    Sim {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        run: BatchArgs,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Capacity simulation used to choose arrival rates.
    Capsim {
        #[arg(long, value_enum)]
        mode: CapsimMode,
        #[arg(long, default_value_t = 4)]
        linacs: usize,
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value_t = 1000)]
        days: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        pool: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full factorial of strategies and reservation rates.
    Sweep {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        run: BatchArgs,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_GAMMAS)]
        gammas: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Strategy comparison with ANOVA and paired t tests.
    Compare {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        run: BatchArgs,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pearson correlation of the feature columns of an examples CSV.
    Corr {
        #[arg(long)]
        examples: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate, solve, train and evaluate in one go.
    Pipeline {
        #[arg(long, default_value_t = 2)]
        linacs: usize,
        #[arg(long, default_value_t = 2.5)]
        rate: f64,
        #[arg(long, default_value_t = DEFAULT_SIM_DAYS)]
        days: u32,
        #[arg(long, default_value_t = 50)]
        train: usize,
        #[arg(long, default_value_t = 30)]
        test: usize,
        #[arg(long, default_value_t = 1_000)]
        train_seed: u64,
        #[arg(long, default_value_t = 900_000)]
        test_seed: u64,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[command(flatten)]
        params: GbtArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the booking API.
    Serve {
        /// Scenario JSON, or an instance JSON whose scenario is used.
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Append-only booking journal, replayed at startup.
        #[arg(long)]
        journal: Option<PathBuf>,
        /// Day treated as today before any booking.
        #[arg(long, default_value_t = 0)]
        start_day: u32,
        /// Monday that day 0 falls on, as YYYY-MM-DD.
        #[arg(long)]
        epoch: Option<chrono::NaiveDate>,
    },
}

#[derive(Args, Clone)]
struct GenArgs {
    #[arg(long, default_value_t = 2)]
    linacs: usize,
    /// Mean arrivals per business day.
    #[arg(long, default_value_t = 2.5)]
    rate: f64,
    #[arg(long, default_value_t = DEFAULT_SIM_DAYS)]
    days: u32,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Seed of the first instance; instance k uses seed + k.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Patient pool JSON; defaults to the built-in pool.
    #[arg(long)]
    pool: Option<PathBuf>,
    /// Named setting; overrides --linacs, --rate and the rate variation.
    #[arg(long)]
    preset: Option<String>,
    /// Redraw the rate uniformly within +-delta every --rate-interval days.
    #[arg(long)]
    rate_delta: Option<f64>,
    #[arg(long, default_value_t = 10)]
    rate_interval: u32,
}

#[derive(Args, Clone)]
struct SourceArgs {
    /// Directory of instance JSON files; replaces generation.
    #[arg(long)]
    instances: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
}

#[derive(Args, Clone, Copy)]
struct SolverArgs {
    /// Branch-and-bound node budget per solve.
    #[arg(long, default_value_t = 20_000)]
    node_limit: u64,
    /// Wall-clock budget per solve, in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(Args, Clone)]
struct BatchArgs {
    /// Comma-separated strategy names; defaults to all (prediction-based only with --model).
    #[arg(long, value_delimiter = ',')]
    strategies: Vec<StrategyKind>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Clone, Copy)]
struct GbtArgs {
    #[arg(long, default_value_t = 200)]
    trees: usize,
    #[arg(long, default_value_t = 6)]
    depth: usize,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long, default_value_t = 5)]
    min_leaf: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum CapsimMode {
    Uncapped,
    Waiting,
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    commands::dispatch(Cli::parse().command)
}
