//! `dmn`: command-line front end for dmn-core.
//!
//! Exit codes: 0 success, 1 domain violation (invalid spec, bad parameter,
//! infeasible profile), 2 I/O, parse or usage error, 3 resource cap exceeded.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dmn_core::bounds::{BoundMode, DEFAULT_GRID_CAP};
use dmn_core::gaussian::{DEFAULT_BACKOFF, DEFAULT_CODEBOOK_CAP, DEFAULT_TARGET_RATE};
use dmn_core::simulate::{ForwardCode, DEFAULT_JOINT_CAP};
use dmn_core::{Error, ErrorClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "dmn", version, about = "Generalized discrete memoryless networks with zero-delay nodes")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "DMN_THREADS")]
    threads: Option<usize>,

    /// Write output to this file instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
pub struct SpecArg {
    /// Network spec file (JSON).
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a spec file against every model invariant.
    Validate(SpecArg),

    /// Delay-profile feasibility.
    Feasible {
        #[command(flatten)]
        spec: SpecArg,
        /// Profile such as `1,0`.
        #[arg(long, conflicts_with = "all", required_unless_present = "all")]
        profile: Option<String>,
        /// List every feasible profile.
        #[arg(long)]
        all: bool,
    },

    /// Cut-set bounds over a probability grid.
    Bound {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = BoundMode::Capacity)]
        mode: BoundMode,
        /// Grid resolution k (probabilities are multiples of 1/k).
        #[arg(long, default_value_t = 8)]
        grid: u32,
        /// Restrict to one cut, given as a node bitmask (bit 0 is node 1).
        #[arg(long)]
        cut: Option<u64>,
        /// Refuse grids with more points than this.
        #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
        cap: u128,
        /// Also list the caps of every grid point.
        #[arg(long)]
        points: bool,
    },

    /// Search the grid for a distribution admitting a rate tuple.
    Region {
        #[command(flatten)]
        spec: SpecArg,
        /// Rates such as `1,2=0.45;2,1=0.95`.
        #[arg(long)]
        rates: String,
        #[arg(long, default_value_t = BoundMode::Capacity)]
        mode: BoundMode,
        #[arg(long, default_value_t = 8)]
        grid: u32,
        #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
        cap: u128,
    },

    /// Monte Carlo error estimate of a table code.
    Simulate {
        #[command(flatten)]
        spec: SpecArg,
        /// Table code file (JSON).
        #[arg(long)]
        code: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Emit the `slot,node,X,Y` trace of this trial instead of the report.
        #[arg(long)]
        trace: Option<u64>,
    },

    /// Markov-chain and equivalence checks of a table code by exact enumeration.
    Check {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        code: PathBuf,
        /// Largest joint table to enumerate.
        #[arg(long, default_value_t = DEFAULT_JOINT_CAP)]
        cap: u128,
    },

    /// Zero-delay feedback scheme on the BSC with correlated feedback.
    Bscfb {
        #[arg(long, default_value_t = 0.11)]
        eps: f64,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Forward rate in bits per slot.
        #[arg(long, default_value_t = 0.4)]
        rate: f64,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Forward code: ldpc, codebook or uncoded.
        #[arg(long, default_value = "ldpc")]
        forward_code: ForwardCode,
    },

    /// Gaussian causal relay: bounds, relay gating and codebook experiment.
    Gaussian {
        #[arg(long, default_value_t = 5.0)]
        power: f64,
        /// Source power back-off.
        #[arg(long, default_value_t = DEFAULT_BACKOFF)]
        delta: f64,
        /// Operating rate in bits per slot.
        #[arg(long, default_value_t = DEFAULT_TARGET_RATE)]
        rate: f64,
        /// Blocklength of the gating experiment.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        blocks: u64,
        /// Blocklengths of the codebook sweep.
        #[arg(long, value_delimiter = ',', default_value = "8,16,24")]
        codebook_n: Vec<usize>,
        /// Trials per codebook blocklength.
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Search an explicit codebook instead of the exact ensemble draw.
        #[arg(long)]
        explicit: bool,
        /// Largest explicit codebook.
        #[arg(long, default_value_t = DEFAULT_CODEBOOK_CAP)]
        codebook_cap: u128,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Only print the closed-form comparison.
        #[arg(long)]
        report_only: bool,
        /// Emit the `slot,x1,z2,y2,x2,z3,y3` trace of this block instead.
        #[arg(long)]
        trace: Option<u64>,
    },

    /// Print a bundled network spec or the sample table code.
    Generate {
        /// bscfb, classical-bsc, deterministic, causal-relay or sample-code.
        name: String,
        /// Crossover probability of the generated network.
        #[arg(long)]
        eps: Option<f64>,
    },
}

pub struct Outcome {
    pub text: String,
    pub code: u8,
}

impl Outcome {
    pub fn ok(text: String) -> Self {
        Outcome { text, code: 0 }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Domain => 1,
        ErrorClass::Io => 2,
        ErrorClass::Resource => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(cli.command, cli.format) {
        Ok(out) => {
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, &out.text) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
