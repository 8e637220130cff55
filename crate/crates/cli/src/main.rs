use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "spa",
    version,
    about = "Approximate transpose, SIC measurements and approximate entanglement witnesses"
)]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Residual tolerance for verification commands.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tolerance: f64,
    /// Also write the command's report as JSON to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Sic,
    Mub,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Via {
    Formula,
    Design,
    TwoStep,
    Optics,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the two-design and coherence conditions of a SIC or MUB set.
    VerifyDesign {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum)]
        kind: Kind,
        /// SIC fiducial file; defaults to the built-in fiducial.
        #[arg(long)]
        fiducial: Option<PathBuf>,
    },
    /// Search for a Weyl-Heisenberg SIC fiducial.
    SearchFiducial {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 20_000)]
        max_iters: usize,
        /// Fiducial output file; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply the approximate transpose to a state file.
    ApplyApproxTranspose {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = Via::Formula)]
        via: Via,
        /// Output state file; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the approximate entanglement witness across a cut.
    Detect {
        #[arg(long)]
        state: PathBuf,
        /// Cut such as "A|BC"; parties are A, B, ... in dims order.
        #[arg(long)]
        cut: String,
        /// Simulate the swap-test estimator with this many shots.
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0.95, requires = "shots")]
        confidence: f64,
    },
    /// Evaluate the three-qubit bound-entangled example on every cut.
    TripartiteDemo,
    /// Run the full verification suite.
    VerifyAll {
        #[arg(long, default_value_t = 5)]
        max_dim: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
