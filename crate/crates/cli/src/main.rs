mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use arank_core::Error;
use input::{InputArgs, UniverseArgs};
use output::Format;

/// Exact bias, analytic rank and combinatorial ranks of tensors over F_p.
#[derive(Debug, Parser)]
#[command(name = "arank", version)]
struct Cli {
    /// Largest number of elementary evaluations any step may perform.
    #[arg(long, global = true, default_value_t = 100_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Fiber,
    Recursive,
    Histogram,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Rank,
    Srank,
    Prank,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact bias `K / q^e` of a tensor.
    Bias {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = Method::Fiber)]
        method: Method,
    },
    /// Analytic rank `-log_q(bias)`.
    Arank {
        #[command(flatten)]
        input: InputArgs,
    },
    /// The constant c(d, q) and its two lower bounds.
    Constant {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        q: u64,
    },
    /// Tensor rank, slice rank or partition rank.
    Rank {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = Kind::Prank)]
        kind: Kind,
        /// Exhaustive search (the default).
        #[arg(long, conflicts_with = "bounds")]
        exact: bool,
        /// Only lower and upper bounds, no search.
        #[arg(long)]
        bounds: bool,
    },
    /// Largest independent set.
    Maxindep {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Check one law, or `all`, over a universe of instances.
    Check {
        /// Law id, or `all`.
        law: String,
        #[command(flatten)]
        universe: UniverseArgs,
    },
    /// Write a tensor file to standard output.
    Gen {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// The identity tensor instead of a random one.
        #[arg(long, conflicts_with = "diagonal")]
        identity: bool,
        /// Diagonal tensor with these coefficients.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        diagonal: Option<Vec<u64>>,
    },
    /// Table of arank, prank and their ratio over a universe.
    Survey {
        #[command(flatten)]
        universe: UniverseArgs,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status for an error: 1 for internal disagreement, 2 for bad input,
/// 3 for a refused budget.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } => 3,
        Error::Inconsistent(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(commands::Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(commands::Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
