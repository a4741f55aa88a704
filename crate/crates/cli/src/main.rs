//! `drift` — modal-basis image features, baselines, and benchmark grids.
//!
//! Exit codes: 0 success, 1 runtime/I/O failures, 2 usage errors.

mod bench;
mod data;
mod gen_basis;
mod report;
mod train_cmd;
mod transform_cmd;

use clap::{Parser, Subcommand};
use drift_core::Error;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "drift",
    version,
    about = "Project images onto plate-vibration mode shapes and benchmark the features against PCA and raw pixels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a modal basis: binary export plus a CSV of the first modes for plotting
    GenBasis(gen_basis::GenBasisArgs),
    /// Write feature vectors of one split as CSV
    Transform(transform_cmd::TransformArgs),
    /// Run one training configuration and write per-epoch metrics as CSV
    Train(train_cmd::TrainArgs),
    /// Run a preconfigured comparison grid (figures 3-7) and write CSV + summary
    Bench(bench::BenchArgs),
    /// Summarize metrics CSVs: final accuracies, gaps, and stability per run
    Report(report::ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenBasis(args) => gen_basis::run(args),
        Command::Transform(args) => transform_cmd::run(args),
        Command::Train(args) => train_cmd::run(args),
        Command::Bench(args) => bench::run(args),
        Command::Report(args) => report::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            data::print_download_hint_if_missing_data(&err);
            match err {
                Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
