mod commands;
mod output;
mod svg;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Explore N-expansions with finitely many digits: matching pairs, entropy
/// plateaux, natural extensions and attractor gaps.
#[derive(Debug, Parser)]
#[command(name = "nexp", version)]
pub struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true, env = "NEXP_SEED", default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

/// The triple `(N, d, i)` naming one matching pair.
#[derive(Debug, Clone, Copy, clap::Args)]
pub struct PairArgs {
    #[arg(long = "N")]
    pub n: u64,
    #[arg(long)]
    pub d: u64,
    #[arg(long)]
    pub i: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Matching,
    Quilting,
    Lamination,
    Invariance,
    Endpoints,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List all matching pairs for N with plateau, H and entropy.
    Enumerate {
        #[arg(long = "N")]
        n: u64,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Heights, normalizing constant, entropy and sub-plateaux of one pair.
    Plateau {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Whether alpha lies in the plateau of a pair, and in which sub-plateau.
    Classify {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        alpha: f64,
    },
    /// Run a verification suite; exits with 1 if any check fails.
    Verify {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum)]
        suite: Suite,
    },
    /// Closed-form entropy, optionally compared with a Birkhoff average.
    Entropy {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        iters: usize,
    },
    /// Simulated entropy over a grid of alpha values, as CSV.
    Sweep {
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1_000_000)]
        iters: usize,
        /// CSV destination; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a plot of the curve.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Attractor and gaps of T_alpha.
    Gaps {
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        alpha: f64,
    },
    /// Vertices of the natural-extension domain.
    Domain {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        alpha: f64,
        /// Vertex list destination; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also draw the outline with its strip boundaries.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
