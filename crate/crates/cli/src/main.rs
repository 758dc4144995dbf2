//! `qtr`: batch front end for curve validation, Miura checks, kernel
//! solving, the residue recursion and loop-equation checks.

mod commands;
mod corpus;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

use qtr::field::set_default_precision;
use qtr::{Complex, Error, Rat};

#[derive(Parser, Debug)]
#[command(name = "qtr", version, about = "Quantum spectral curves, quantum Miura transforms and topological recursion")]
pub struct Cli {
    /// Scalar backend: exact rationals or 256-bit (by default) complex floats.
    #[arg(long, value_enum, global = true, default_value_t = Backend::Exact)]
    pub backend: Backend,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Exact,
    F256,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Auto,
    Definition,
    Appendix,
}

/// Options shared by the commands that run the recursion.
#[derive(clap::Args, Debug, Clone)]
pub struct RecursionArgs {
    #[arg(long)]
    pub curve: PathBuf,
    /// Kernel file; solved from the curve when absent.
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub chi_max: i64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Auto)]
    pub convention: ConventionArg,
    /// Right-hand side factor ½ instead of 1 (forced conventions only).
    #[arg(long, action = ArgAction::Set, default_value_t = false)]
    pub half_rhs: bool,
    /// Negated right-hand side (forced conventions only).
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    pub negate_rhs: bool,
    /// Run the per-root work on the rayon pool.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Structural checks of a curve file.
    Validate {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// W-generators from the closed formula, cross-checked against the expansion of Ê.
    Miura {
        #[arg(long)]
        d: usize,
        /// Print only this generator.
        #[arg(long)]
        k: Option<usize>,
        /// Background charge; the Q-graded form is printed when absent.
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        trace_free: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quantum curve of a curve file and its classical symbol, or the symbol check of Ê for a given d.
    Symbol {
        #[arg(long, conflicts_with = "d")]
        curve: Option<PathBuf>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hirota residues at the Bethe roots of a curve, or the formal determinant identity for a given d.
    Hirota {
        #[arg(long, conflicts_with = "d")]
        curve: Option<PathBuf>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for a curve-adapted kernel, or validate a given one.
    Bergman {
        #[arg(long)]
        curve: PathBuf,
        /// Validate this kernel instead of solving.
        #[arg(long, conflicts_with = "decoupled")]
        kernel: Option<PathBuf>,
        /// Validate the decoupled kernel (no regular part).
        #[arg(long)]
        decoupled: bool,
        #[arg(long, default_value_t = 2)]
        max_pole_order: u32,
        /// Also impose the (0,1) quadratic loop equation.
        #[arg(long)]
        loop_equation: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the residue recursion and write the correlator table.
    Recurse {
        #[command(flatten)]
        args: RecursionArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sample point, comma separated; each entry is evaluated at its first n coordinates. Repeatable.
        #[arg(long)]
        samples: Vec<String>,
        /// Also write the samples as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check the linear and quadratic loop equations.
    Loopcheck {
        #[command(flatten)]
        args: RecursionArgs,
        /// Table to check; computed when absent.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Try every sign and normalisation of the kernel equation.
    ResolveConvention {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        kernel: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every bundled curve against its pinned status.
    Corpus {
        /// Only this curve.
        #[arg(long)]
        name: Option<String>,
        /// Print the curve file instead of checking it.
        #[arg(long, requires = "name")]
        show: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Result of a command: exit 0 when every check passed, 1 otherwise.
pub type Outcome = std::result::Result<bool, CliError>;

#[derive(Debug)]
pub enum CliError {
    Engine(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Engine(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 2,
            CliError::Engine(e) => match e {
                Error::Input(_)
                | Error::PoleFieldMismatch(_)
                | Error::NonSimpleRoot(_)
                | Error::NonIntegerResidue { .. }
                | Error::EssentialSingularity(_)
                | Error::Unsupported(_)
                | Error::BudgetExceeded(_) => 2,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Engine(e) => write!(f, "{e}"),
            CliError::Io(s) => write!(f, "{s}"),
        }
    }
}

fn precision_from_env() -> std::result::Result<u32, CliError> {
    match std::env::var("QTR_PRECISION_BITS") {
        Err(_) => Ok(256),
        Ok(v) => match v.trim().parse::<u32>() {
            Ok(b) if b >= 128 => Ok(b),
            _ => Err(CliError::Io(format!("QTR_PRECISION_BITS must be an integer >= 128, got \"{v}\""))),
        },
    }
}

fn run(cli: Cli) -> Outcome {
    if let Cmd::Corpus { name, show, out } = &cli.cmd {
        set_default_precision(precision_from_env()?);
        return corpus::run(name.as_deref(), *show, out.as_deref());
    }
    match cli.backend {
        Backend::Exact => commands::dispatch::<Rat>(&cli.cmd),
        Backend::F256 => {
            set_default_precision(precision_from_env()?);
            commands::dispatch::<Complex>(&cli.cmd)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
