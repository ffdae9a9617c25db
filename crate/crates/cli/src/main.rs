//! `qfactor`: command-line driver for the Shor sweeps, QUBO builders,
//! annealing benchmarks and Pegasus tools.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qfactor_core::qubo::Method;
use qfactor_core::samplers::EnergyScale;

#[derive(Parser, Debug)]
#[command(
    name = "qfactor",
    version,
    about = "Factoring experiments: Shor simulation and QUBO annealing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Summary,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML file with the fields of the command's spec.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for result files; nothing is written when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// What to print on stdout.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    #[command(subcommand)]
    Shor(ShorCmd),
    #[command(subcommand)]
    Qubo(QuboCmd),
    #[command(subcommand)]
    Anneal(AnnealCmd),
    /// Fit `median ~ 2^(b l + c)` to two columns `l median`.
    Fit {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    #[command(subcommand)]
    Pegasus(PegasusCmd),
}

#[derive(Subcommand, Debug)]
pub enum ShorCmd {
    /// Simulate shots of one order-finding problem.
    Run {
        #[arg(long)]
        n: u64,
        /// Base; drawn from the seed when absent.
        #[arg(long)]
        a: Option<u64>,
        /// Counting bits, `2L` by default.
        #[arg(long)]
        t: Option<u32>,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 50)]
        shots: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Mean success probabilities over random problems for each noise level.
    Sweep {
        #[arg(long)]
        bits: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        #[arg(long)]
        problems: Option<usize>,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        t: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Problem {
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, value_enum, default_value = "direct")]
    pub method: MethodArg,
    /// Bit length of `p`; taken from the factorisation of `n` when absent.
    #[arg(long)]
    pub lp: Option<u32>,
    #[arg(long)]
    pub lq: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    Mc,
    Cfa,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Direct => Method::Direct,
            MethodArg::Mc => Method::Mc,
            MethodArg::Cfa => Method::Cfa,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Raw,
    MaxCoefficient,
}

impl From<ScaleArg> for EnergyScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Raw => EnergyScale::Raw,
            ScaleArg::MaxCoefficient => EnergyScale::MaxCoefficient,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Exhaustive,
    Sa,
}

#[derive(Subcommand, Debug)]
pub enum QuboCmd {
    /// Write the factoring QUBO for `n` in text form.
    Build {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        common: Common,
    },
    /// Minimise a factoring QUBO and decode the samples.
    Solve {
        #[command(flatten)]
        problem: Problem,
        /// Solve this model file instead of building one.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "sa")]
        solver: Solver,
        #[arg(long, default_value_t = 1000)]
        reads: u64,
        #[arg(long)]
        sweeps: Option<u32>,
        #[arg(long, value_enum, default_value = "raw")]
        scale: ScaleArg,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand, Debug)]
pub enum AnnealCmd {
    /// Success frequencies over random semiprimes for each unknown-bit count.
    Bench {
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long = "l", value_delimiter = ',')]
        l_values: Option<Vec<u32>>,
        #[arg(long)]
        problems: Option<usize>,
        #[arg(long)]
        reads: Option<u64>,
        #[arg(long, value_enum)]
        solver: Option<Solver>,
        #[arg(long)]
        sweeps: Option<u32>,
        /// Energy unit of the SA inverse temperatures.
        #[arg(long, value_enum)]
        scale: Option<ScaleArg>,
        /// Sample through a remote service at this URL.
        #[arg(long)]
        endpoint: Option<String>,
        /// Embed into Pegasus `P_m` before sampling.
        #[arg(long)]
        pegasus_m: Option<u32>,
        #[arg(long)]
        sweep_split: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand, Debug)]
pub enum PegasusCmd {
    /// Write the edge list of `P_m`.
    Gen {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        defects: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check an embedding against `P_m`; builds one for the problem when no
    /// embedding file is given.
    Verify {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        defects: Option<PathBuf>,
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        embedding: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<commands::UsageError>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
