mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use epicoord::rational::{parse_rational, Rational};
use epicoord::strategies::PayoffParams;
use epicoord::Player;

const THREADS_ENV: &str = "EPICOORD_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "epicoord",
    version,
    about = "Exact common p-belief for finite two-player Bayesian games"
)]
struct Cli {
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write results to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// `builtin:messenger`, `builtin:loudspeaker` or a JSON world-model file.
    #[arg(long)]
    model: String,

    /// Prior probability that x = 1, as p/q or an exact decimal.
    #[arg(long, value_parser = rational_arg)]
    delta: Option<Rational>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a player's information partition.
    Partition {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = player_arg)]
        player: Player,
    },
    /// Perceived maximal common p-belief of an event.
    Pbelief {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "x=1")]
        event: String,
        #[arg(long, value_parser = player_arg)]
        player: Player,
        /// Comma-separated bits in variable declaration order, e.g. 1,1,0,1,0.
        #[arg(long)]
        state: String,
    },
    /// Print the nested maximally evident events and their levels.
    Ladder {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "x=1")]
        event: String,
    },
    /// Evaluate a strategy at one state.
    Act {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        /// Reasoning depth for the iterated strategies.
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, value_parser = payoff_arg, default_value = "1.1,0,1,0.4")]
        payoffs: PayoffParams,
        #[arg(long, value_enum, default_value_t = LevelZeroArg::Threshold)]
        level_zero: LevelZeroArg,
        #[arg(long, default_value = "x=1")]
        event: String,
        #[arg(long, value_parser = player_arg)]
        player: Player,
        #[arg(long)]
        state: String,
    },
    /// Check that rational p-belief play is an equilibrium.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = payoff_arg, default_value = "1.1,0,1,0.4")]
        payoffs: PayoffParams,
    },
    /// Fit and score the four models against human data.
    Compare {
        /// CSV with columns condition,n,prob_a.
        #[arg(long)]
        human: PathBuf,
        #[arg(long, value_parser = rational_arg)]
        delta: Option<Rational>,
        #[arg(long, value_parser = payoff_arg, default_value = "1.1,0,1,0.4")]
        payoffs: PayoffParams,
    },
    /// Marginal value of artificial companions across risk levels.
    Sweep {
        #[arg(long)]
        human: PathBuf,
        /// start:step:end, inclusive.
        #[arg(long, default_value = "1/20:1/20:19/20")]
        grid: String,
        #[arg(long, value_parser = rational_arg)]
        delta: Option<Rational>,
    },
    /// Compare the ladder walk with the brute-force oracles on random instances.
    Fuzz {
        #[arg(long, default_value_t = 500)]
        seeds: u64,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=12))]
        states: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Rational,
    Matched,
    Itermax,
    Itermatch,
    Private,
    Pair,
    Cognitive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelZeroArg {
    Threshold,
    AlwaysA,
    Uniform,
}

fn rational_arg(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

fn player_arg(text: &str) -> Result<Player, String> {
    text.parse::<Player>().map_err(|e| e.to_string())
}

fn payoff_arg(text: &str) -> Result<PayoffParams, String> {
    text.parse::<PayoffParams>().map_err(|e| e.to_string())
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return ExitCode::from(2);
    }
    match commands::run(&cli.command, cli.format) {
        Ok(output) => {
            let written = match &cli.out {
                Some(path) => {
                    std::fs::write(path, &output.text).map_err(|e| format!("cannot write {}: {e}", path.display()))
                }
                None => {
                    print!("{}", output.text);
                    Ok(())
                }
            };
            match written {
                Err(message) => {
                    eprintln!("error: {message}");
                    ExitCode::from(1)
                }
                Ok(()) if output.failed => ExitCode::from(1),
                Ok(()) => ExitCode::SUCCESS,
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
