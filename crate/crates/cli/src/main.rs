//! `polyce`: correlated equilibria of polynomial games from the command line.
//!
//! Exit status is 0 on success, 1 for bad input (unreadable or malformed files,
//! invalid parameters) and 2 when a solver fails.

mod commands;
mod parse;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "polyce",
    version,
    about = "Correlated equilibria of polynomial games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the game sampled on fixed midpoint grids and report ε per grid size.
    Static(StaticArgs),
    /// Grow finite supports until the distribution is an ε-correlated equilibrium.
    Adaptive(AdaptiveArgs),
    /// Bound equilibrium payoffs with the moment relaxation hierarchy.
    Moments(MomentArgs),
    /// Write a random game with standard normal coefficients.
    Randgame(RandArgs),
    /// Recompute ε for every distribution found in a JSON output.
    Audit(AuditArgs),
}

#[derive(Args, Debug)]
struct StaticArgs {
    /// Game file (JSON).
    #[arg(long)]
    game: PathBuf,
    /// Grid sizes: `5`, `1..40` or `5,10,20,40`.
    #[arg(long, default_value = "5,10,20,40")]
    d: String,
    /// CSV output path; distributions go to the same path with a `.json`
    /// extension. Prints the CSV when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AdaptiveArgs {
    #[arg(long)]
    game: PathBuf,
    /// Initial strategies: `-1` for every player, or `0;0.5,1` per player.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    grid: String,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Stop once ε^k is at most this.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Number of SDP solves; defaults to 50, or 6 with `--degenerate`.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Run with α = β = 1, which need not converge.
    #[arg(long)]
    degenerate: bool,
    /// JSON trace output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MomentArgs {
    #[arg(long)]
    game: PathBuf,
    /// Test-polynomial half-degrees: `2`, `0..2` or `0,1,2`.
    #[arg(long, default_value = "0,1,2")]
    d: String,
    /// Moment half-order; the smallest valid one for each d when omitted.
    #[arg(long)]
    r: Option<u32>,
    /// Number of directions for the payoff region sketch (at least 3).
    #[arg(long)]
    directions: Option<usize>,
    /// Seed for random directions with three or more players.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for `boxes.json` and `region.csv`. Prints both when
    /// omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RandArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = polyce::randgame::DEFAULT_PLAYERS)]
    players: usize,
    #[arg(long, default_value_t = polyce::randgame::DEFAULT_DEGREE)]
    degree: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[arg(long)]
    game: PathBuf,
    /// JSON emitted by `static`, `adaptive`, or a single distribution.
    #[arg(long)]
    dist: PathBuf,
}

/// A failure and the exit status it maps to.
pub enum Failure {
    Input(anyhow::Error),
    Solver(anyhow::Error),
}

impl Failure {
    pub fn input(e: impl Into<anyhow::Error>) -> Self {
        Failure::Input(e.into())
    }

    pub fn solver(e: impl Into<anyhow::Error>) -> Self {
        Failure::Solver(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Static(a) => commands::static_sweep(a),
        Command::Adaptive(a) => commands::adaptive(a),
        Command::Moments(a) => commands::moments(a),
        Command::Randgame(a) => commands::randgame(a),
        Command::Audit(a) => commands::audit(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver failure: {e:#}");
            ExitCode::from(2)
        }
    }
}
