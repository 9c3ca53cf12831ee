//! Command-line front end: scenario loading, metric evaluation, sweeps,
//! analysis-vs-simulation reports and optimizations, written as CSV or JSON
//! tables.

pub mod args;
pub mod commands;
pub mod eval;
pub mod rows;

use std::fmt;

pub use args::{Cli, Command};
pub use rows::{read_csv, write_rows, Format, Row};

/// A failure, classified by the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, flags or input files (exit 2).
    Config(String),
    /// A numerical evaluation failed (exit 3).
    Numerical(String),
    /// The requested optimization has no feasible point (exit 4).
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }

    pub(crate) fn output(e: impl fmt::Display) -> Self {
        CliError::Config(format!("cannot write or read the table: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<uavcov::Error> for CliError {
    fn from(e: uavcov::Error) -> Self {
        use uavcov::Error as E;
        match e {
            E::Config(_) | E::Parse(_) | E::Io(_) | E::Domain(_) => CliError::Config(e.to_string()),
            E::NoInteriorOptimum { .. } => CliError::Infeasible(e.to_string()),
            E::Quadrature { .. } | E::UndefinedConditional { .. } | E::Cancellation { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

/// Run a parsed command line and write its table.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?;
    }
    let (rows, common) = match &cli.command {
        Command::Eval(a) => (commands::eval(a, false)?, &a.common),
        Command::Simulate(a) => (commands::eval(a, true)?, &a.common),
        Command::Sweep(a) => (commands::sweep(a)?, &a.common),
        Command::Optimize(a) => (commands::optimize(a)?, &a.common),
    };
    match &common.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
            write_rows(&rows, common.format, std::io::BufWriter::new(file))
        }
        None => write_rows(&rows, common.format, std::io::stdout().lock()),
    }
}
