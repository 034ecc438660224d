//! `sounder`: simulate, estimate, analyze and report multi-band
//! channel-sounding measurements.

mod analyze;
mod csvio;
mod error;
mod plot;
mod presets;
mod process;
mod report;
mod simulate;

use clap::{Parser, Subcommand};

use crate::error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "sounder",
    version,
    about = "Channel-sounding post-processing: time-varying Rician K-factor and RMS delay spread"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a measurement: snapshot file, calibration file, ground truth.
    Simulate(simulate::SimulateArgs),
    /// Estimate the time-variant CTF from raw snapshots.
    Process(process::ProcessArgs),
    /// Run the per-region estimation pipeline and emit tables (and plots).
    Analyze(analyze::AnalyzeArgs),
    /// Render summary CSVs as a markdown comparison table.
    Report(report::ReportArgs),
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(args) => simulate::run(args),
        Command::Process(args) => process::run(args),
        Command::Analyze(args) => analyze::run(args),
        Command::Report(args) => report::run(args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        // machine-readable error on stderr, nonzero exit
        let payload = serde_json::json!({
            "error": { "kind": e.kind(), "message": e.to_string() }
        });
        eprintln!("{payload}");
        std::process::exit(1);
    }
}
