use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use corepulse::config::PipelineConfig;
use corepulse::stages;

/// Peer-influence analysis over mutual-call social graphs: synthetic
/// population generation, graph construction, overlapping community
/// detection, core/periphery classification, adoption hazard panels, and
/// Probit / 2SRI estimation.
#[derive(Parser)]
#[command(name = "corepulse", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct StageArgs {
    /// TOML configuration file (built-in defaults when omitted).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic population with planted ground truth.
    Simulate(StageArgs),
    /// Build the monthly mutual-call graph from call records.
    Graph(StageArgs),
    /// Detect attribute-aware overlapping communities on adopter ego-networks.
    Communities(StageArgs),
    /// Classify core vs periphery and compute the C(alpha) profile.
    Coreperi(StageArgs),
    /// Assemble the subscriber-month adoption hazard panel with instruments.
    Panel(StageArgs),
    /// Fit stratified Probit and 2SRI models.
    Estimate(StageArgs),
    /// Bundle figure data, static figures, and the regression table.
    Report(StageArgs),
    /// Run every stage in order.
    Pipeline(StageArgs),
}

impl Command {
    fn split(&self) -> (&'static str, &StageArgs) {
        match self {
            Command::Simulate(a) => ("simulate", a),
            Command::Graph(a) => ("graph", a),
            Command::Communities(a) => ("communities", a),
            Command::Coreperi(a) => ("coreperi", a),
            Command::Panel(a) => ("panel", a),
            Command::Estimate(a) => ("estimate", a),
            Command::Report(a) => ("report", a),
            Command::Pipeline(a) => ("pipeline", a),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, args) = cli.command.split();

    let config = match &args.config {
        Some(path) => PipelineConfig::load(path, args.seed, args.out.as_deref()),
        None => PipelineConfig::default_with(args.seed, args.out.as_deref()),
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", e.to_json());
            return ExitCode::from(e.exit_code());
        }
    };

    match stages::run_stage(stage, &config) {
        Ok(()) => {
            println!("{stage}: ok (out: {})", config.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
