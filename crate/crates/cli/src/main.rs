//! `wicketsim`: fit score priors, simulate matches and tournaments, emit
//! density tables and serve the what-if API.

mod commands;
mod error;
mod output;

use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tracing_subscriber::EnvFilter;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "wicketsim", version = output::VERSION, about = "Monte Carlo cricket match and tournament simulator")]
struct Cli {
    /// Worker threads for simulation (default: all cores). Results do not
    /// depend on this.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    workers: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a gamma prior for every player against every other team.
    Fit(FitCmd),
    /// Run a head-to-head matrix or a whole tournament.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Tabulate a player's prior density against each opponent.
    Density(DensityCmd),
    /// Compare head-to-head predictions with observed records.
    Compare(CompareCmd),
    /// Serve the HTTP API.
    Serve(ServeCmd),
}

/// Where the dataset comes from: a competition config, a dataset file
/// (`{"stats", "teams", "defaults"}`), or the individual files.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// Competition config JSON.
    #[arg(long, conflicts_with_all = ["dataset", "stats"])]
    pub config: Option<PathBuf>,
    /// Dataset JSON listing the stats, teams and defaults files.
    #[arg(long, conflicts_with = "stats")]
    pub dataset: Option<PathBuf>,
    /// Matchup statistics CSV.
    #[arg(long, requires = "teams")]
    pub stats: Option<PathBuf>,
    /// Teams JSON.
    #[arg(long, requires = "stats")]
    pub teams: Option<PathBuf>,
    /// League default lines JSON.
    #[arg(long, requires = "stats")]
    pub defaults: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RuleArg {
    Max,
    Min,
}

/// Overrides for the prior fit; unset fields keep the config's values.
#[derive(Debug, Args)]
pub struct FitArgs {
    /// Largest allowed P(score > highest).
    #[arg(long)]
    pub tail_cap: Option<f64>,
    #[arg(long)]
    pub beta_lo: Option<f64>,
    #[arg(long)]
    pub beta_hi: Option<f64>,
    #[arg(long)]
    pub beta_count: Option<usize>,
    /// Which end of the feasible scale candidates to take.
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
}

#[derive(Debug, Args)]
pub struct FitCmd {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Output CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Competition config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Replicates (default: the config's).
    #[arg(long, value_parser = at_least_one)]
    pub sims: Option<u64>,
    /// Master seed (default: the config's).
    #[arg(long, env = "WICKETSIM_SEED")]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum SimCmd {
    /// Win probabilities for every ordered pair of teams.
    Match {
        #[command(flatten)]
        run: RunArgs,
        /// Restrict to these teams (repeatable).
        #[arg(long = "team")]
        teams: Vec<String>,
    },
    /// Finishing-position distribution over the whole competition.
    Tournament {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
pub struct DensityCmd {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long)]
    pub player: String,
    /// Comma-separated opponent teams (default: every other team).
    #[arg(long, value_delimiter = ',')]
    pub opponents: Vec<String>,
    /// Grid points per opponent.
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(2..))]
    pub points: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareCmd {
    #[command(flatten)]
    pub run: RunArgs,
    /// Observed records CSV: `a,b,wins,games,pct`.
    #[arg(long)]
    pub actuals: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeCmd {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Allowed browser origin (default: any).
    #[arg(long)]
    pub cors_origin: Option<String>,
}

fn at_least_one(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.into())
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    match cli.command {
        Command::Fit(c) => commands::fit(c),
        Command::Sim(SimCmd::Match { run, teams }) => commands::sim_match(run, teams),
        Command::Sim(SimCmd::Tournament { run }) => commands::sim_tournament(run),
        Command::Density(c) => commands::density(c),
        Command::Compare(c) => commands::compare(c),
        Command::Serve(c) => commands::serve(c),
    }
}
