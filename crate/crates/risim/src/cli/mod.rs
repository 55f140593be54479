//! Command-line interface: argument parsing, dispatch, and exit-code
//! mapping.  All real work lives in [`commands`]; the binary is a thin
//! wrapper around [`run`].

pub mod commands;
pub mod report;
pub mod scenario;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Result, RisError};
use commands::FileFormat;
use scenario::{ResolvedScenario, ScenarioFile};

#[derive(Parser)]
#[command(
    name = "risim",
    version,
    about = "Simulator and configuration toolkit for RIS-assisted wireless links"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run a pilot campaign and estimate per-element gains (hadamard or omp).
    Estimate(RunArgs),
    /// Optimize the configuration by per-element greedy probing.
    Optimize(RunArgs),
    /// Render coverage maps for a saved configuration and the all-zero baseline.
    Coverage(CoverageArgs),
    /// Time the configuration methods and report medians.
    Bench(BenchArgs),
    /// Import or export per-element channel files.
    Channel(ChannelArgs),
    /// Exhaustively search all binary configurations (small lattices only).
    Oracle(RunArgs),
}

#[derive(Args)]
pub struct RunArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory; overrides the scenario's `outputs` entry.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Global seed override.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Phase configuration CSV to map (e.g. a previous run's config.csv).
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Scenario files, one per method; repeat the flag.
    #[arg(long = "scenario", required = true)]
    pub scenarios: Vec<PathBuf>,
    /// Directory for bench.json (optional; the table always prints).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Global seed override applied to every scenario.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Timing repetitions per scenario (at least 5).
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
}

#[derive(Args)]
pub struct ChannelArgs {
    #[command(subcommand)]
    pub op: ChannelOp,
}

#[derive(Subcommand)]
pub enum ChannelOp {
    /// Synthesize the scenario's channel and write it to a file.
    Export {
        #[arg(long)]
        scenario: PathBuf,
        /// Destination file (.json or .csv).
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the format inferred from the extension.
        #[arg(long, value_enum)]
        format: Option<FileFormat>,
    },
    /// Validate a channel file against the scenario's lattice.
    Import {
        #[arg(long)]
        scenario: PathBuf,
        /// Channel file to read (.json or .csv).
        #[arg(long)]
        input: PathBuf,
        /// Optional destination to re-export the validated channel.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override the format inferred from the input extension.
        #[arg(long, value_enum)]
        format: Option<FileFormat>,
    },
}

fn load(scenario: &std::path::Path, seed: Option<u64>) -> Result<ResolvedScenario> {
    ScenarioFile::load(scenario)?.resolve(scenario, seed)
}

/// `--out` beats the scenario's `outputs` entry; one of them must exist.
/// The directory is created if missing.
fn resolve_out(rs: &ResolvedScenario, flag: Option<PathBuf>) -> Result<PathBuf> {
    let dir = flag
        .or_else(|| rs.file.outputs.clone())
        .ok_or_else(|| rs.schema_err("no output directory: set `outputs` or pass --out"))?;
    fs::create_dir_all(&dir).map_err(|e| RisError::io(&dir, e))?;
    Ok(dir)
}

fn print_report(report: &crate::cli::report::RunReport, out: &std::path::Path) {
    println!(
        "{}: {} broadcasts, {:.6} s, gain at rx {:.2} dB{}",
        report.method,
        report.broadcast_instants,
        report.algorithm_time_seconds,
        report.gain_at_rx_db,
        match report.gain_delta_db {
            Some(d) => format!(", delta {d:.2} dB"),
            None => String::new(),
        }
    );
    println!("artifacts in {}", out.display());
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate(args) => {
            let rs = load(&args.scenario, args.seed)?;
            let out = resolve_out(&rs, args.out)?;
            let report = commands::cmd_estimate(&rs, &out)?;
            print_report(&report, &out);
        }
        Command::Optimize(args) => {
            let rs = load(&args.scenario, args.seed)?;
            let out = resolve_out(&rs, args.out)?;
            let report = commands::cmd_optimize(&rs, &out)?;
            print_report(&report, &out);
        }
        Command::Coverage(args) => {
            let rs = load(&args.run.scenario, args.run.seed)?;
            let out = resolve_out(&rs, args.run.out)?;
            let report = commands::cmd_coverage(&rs, &args.config, &out)?;
            print_report(&report, &out);
        }
        Command::Bench(args) => {
            commands::cmd_bench(&args.scenarios, args.seed, args.repeats, args.out.as_deref())?;
        }
        Command::Channel(args) => match args.op {
            ChannelOp::Export {
                scenario,
                output,
                seed,
                format,
            } => {
                let rs = load(&scenario, seed)?;
                commands::cmd_channel_export(&rs, &output, format)?;
            }
            ChannelOp::Import {
                scenario,
                input,
                output,
                format,
            } => {
                let rs = load(&scenario, None)?;
                commands::cmd_channel_import(&rs, &input, output.as_deref(), format)?;
            }
        },
        Command::Oracle(args) => {
            let rs = load(&args.scenario, args.seed)?;
            let out = resolve_out(&rs, args.out)?;
            let report = commands::cmd_oracle(&rs, &out)?;
            print_report(&report, &out);
        }
    }
    Ok(())
}

/// Parses the process arguments, runs the selected command, and returns the
/// process exit code (0 on success; error codes per [`RisError::exit_code`]).
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            e.exit_code()
        }
    }
}
