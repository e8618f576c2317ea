//! Command-line front end for the regime-switching American put solver.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use amerput_core::{InterpOrder, Method};
use clap::{Parser, Subcommand, ValueEnum};

pub use config::RunConfig;
pub use error::CliError;

use commands::{Overrides, StudyTarget};

#[derive(Debug, Parser)]
#[command(name = "amerput", version, about = "American put prices and Greeks under regime switching")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the market described by a TOML config and write result files.
    Run {
        config: PathBuf,
        /// Output directory, overriding `output.directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute a reference table and compare it cell by cell.
    Reproduce {
        /// Table id; see `amerput tables list`.
        table: String,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long, value_enum)]
        interpolation: Option<InterpArg>,
        #[arg(long)]
        h: Option<f64>,
    },
    /// Grid-refinement study with k = h^2, printed as CSV.
    Converge {
        /// Fixture name, or `manufactured` for the smooth decoupled problem.
        target: String,
        /// Grid sizes, coarse first, each half the previous.
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
        h: Vec<f64>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long, value_enum)]
        interpolation: Option<InterpArg>,
        /// One-based regime whose value field is compared.
        #[arg(long, default_value_t = 1)]
        regime: usize,
        /// Volatility of the manufactured problem.
        #[arg(long, default_value_t = 0.3)]
        vol: f64,
        /// Interest rate of the manufactured problem.
        #[arg(long, default_value_t = 0.05)]
        rate: f64,
    },
    /// Built-in markets.
    Fixtures {
        #[command(subcommand)]
        action: ListAction,
    },
    /// Reference tables available to `reproduce`.
    Tables {
        #[command(subcommand)]
        action: ListAction,
    },
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum ListAction {
    List,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Gs,
    Newton,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Gs => Method::GaussSeidel,
            MethodArg::Newton => Method::Newton,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InterpArg {
    Cubic,
    Quintic,
}

impl From<InterpArg> for InterpOrder {
    fn from(o: InterpArg) -> Self {
        match o {
            InterpArg::Cubic => InterpOrder::Cubic,
            InterpArg::Quintic => InterpOrder::Quintic,
        }
    }
}

fn overrides(method: Option<MethodArg>, interpolation: Option<InterpArg>, h: Option<f64>) -> Overrides {
    Overrides { method: method.map(Into::into), interpolation: interpolation.map(Into::into), h }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out: dir } => commands::run(&config, dir.as_deref(), out),
        Command::Reproduce { table, method, interpolation, h } => {
            commands::reproduce(&table, overrides(method, interpolation, h), out)
        }
        Command::Converge { target, h, method, interpolation, regime, vol, rate } => {
            let target = if target == "manufactured" {
                StudyTarget::Manufactured { vol, rate }
            } else {
                StudyTarget::Fixture { name: target, regime }
            };
            commands::converge(&target, &h, overrides(method, interpolation, None), out)
        }
        Command::Fixtures { action: ListAction::List } => commands::list_fixtures(out),
        Command::Tables { action: ListAction::List } => commands::list_tables(out),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 1;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
