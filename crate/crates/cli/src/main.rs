//! `edr`: Expected Downside Risk analyses from the command line.
//!
//! Every subcommand writes one table, as CSV or JSON, to `--output` or
//! stdout. Failures print a JSON record `{code, message, context}` on stderr
//! and exit with a code that names the failure class.

#![allow(clippy::result_large_err, clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod table;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::Context;
use error::{CliError, CliResult, EXIT_IO, EXIT_USAGE};
use table::Table;

const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "edr", version, about = "Expected Downside Risk analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the table here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[arg(long, value_enum, global = true, default_value_t = Format::Csv)]
    format: Format,

    /// Worker threads; all cores by default. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Base directory for relative input paths.
    #[arg(long, global = true, env = "EDR_DATA_DIR")]
    data_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean, volatility, EDR, prospect and tail measures per series.
    Risk(commands::RiskArgs),
    /// Monte Carlo efficiency frontier in volatility or EDR space.
    Frontier(commands::FrontierArgs),
    /// Risk-neutral curve after a prior loss.
    Rnc(commands::RncArgs),
    /// Iso-utility slope, curvature and utility on a grid of points.
    Isoutil(commands::IsoArgs),
    /// Risk aversion calibration table.
    Calibrate(commands::CalibrateArgs),
    /// Expected return under leverage with a margin-call floor.
    Leverage(commands::LeverageArgs),
    /// Optimal volatility on a power-law frontier, with and without leverage.
    PowerFrontier(commands::PowerArgs),
    /// Value-weighted required return of investor views.
    Aggregate(commands::AggregateArgs),
    /// AS-AD equilibrium price path under uniform growth.
    Asad(commands::AsadArgs),
    /// Volatility change after large price moves.
    #[command(name = "empirics-table1")]
    EmpiricsTable1(commands::Table1Args),
    /// t-tests of companion changes across index-return quantiles.
    #[command(name = "empirics-vixcurve")]
    EmpiricsVixcurve(commands::VixArgs),
    /// Cross-sectional regressions of mean return on risk measures.
    #[command(name = "empirics-crosssection")]
    EmpiricsCrosssection(commands::CrossSectionArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Risk(_) => "risk",
            Command::Frontier(_) => "frontier",
            Command::Rnc(_) => "rnc",
            Command::Isoutil(_) => "isoutil",
            Command::Calibrate(_) => "calibrate",
            Command::Leverage(_) => "leverage",
            Command::PowerFrontier(_) => "power-frontier",
            Command::Aggregate(_) => "aggregate",
            Command::Asad(_) => "asad",
            Command::EmpiricsTable1(_) => "empirics-table1",
            Command::EmpiricsVixcurve(_) => "empirics-vixcurve",
            Command::EmpiricsCrosssection(_) => "empirics-crosssection",
        }
    }
}

fn dispatch(ctx: &Context, command: &Command) -> CliResult<Table> {
    match command {
        Command::Risk(a) => commands::risk(ctx, a),
        Command::Frontier(a) => commands::frontier(ctx, a),
        Command::Rnc(a) => commands::rnc(a),
        Command::Isoutil(a) => commands::isoutil(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Leverage(a) => commands::leverage(ctx, a),
        Command::PowerFrontier(a) => commands::power_frontier(a),
        Command::Aggregate(a) => commands::aggregate(ctx, a),
        Command::Asad(a) => commands::asad(a),
        Command::EmpiricsTable1(a) => commands::empirics_table1(ctx, a),
        Command::EmpiricsVixcurve(a) => commands::empirics_vixcurve(ctx, a),
        Command::EmpiricsCrosssection(a) => commands::empirics_crosssection(ctx, a),
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::params("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::new(error::EXIT_COMPUTE, "thread_pool", e.to_string()))?;
    }
    let ctx = Context {
        seed: cli.seed,
        data_dir: cli.data_dir.clone(),
    };
    let table = dispatch(&ctx, &cli.command)?;
    let bytes = match cli.format {
        Format::Csv => table
            .to_csv()
            .map_err(|e| CliError::new(EXIT_IO, "encode", e.to_string()))?,
        Format::Json => table
            .to_json()
            .map_err(|e| CliError::new(EXIT_IO, "encode", e.to_string()))?,
    };
    match &cli.output {
        Some(path) => fs::write(path, &bytes).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|e| CliError::new(EXIT_IO, "io", e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or_default().trim_start_matches("error: ");
            let err = CliError::new(EXIT_USAGE, "usage", first).with("kind", e.kind().to_string());
            eprintln!("{}", err.to_json_line());
            eprint!("{message}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let err = err.with("command", cli.command.name());
            eprintln!("{}", err.to_json_line());
            ExitCode::from(err.exit as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_table_is_consistent() {
        Cli::command().debug_assert();
        let names: Vec<String> = Cli::command()
            .get_subcommands()
            .map(|c| c.get_name().to_string())
            .collect();
        assert_eq!(
            names,
            [
                "risk",
                "frontier",
                "rnc",
                "isoutil",
                "calibrate",
                "leverage",
                "power-frontier",
                "aggregate",
                "asad",
                "empirics-table1",
                "empirics-vixcurve",
                "empirics-crosssection"
            ]
        );
    }
}
