use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use tordisc_core::Error;

mod commands;
mod output;
mod verify;

use output::{Outcome, Table};

#[derive(Debug, Parser, Serialize)]
#[command(name = "tordisc", version, about = "L2-discrepancies, torus energies and weak Latin hypercubes")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize, Clone)]
struct Global {
    /// Master seed; all randomness is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Exact rational arithmetic where the method supports it.
    #[arg(long, global = true)]
    exact: bool,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Discrepancy of a point-set file.
    Compute(commands::ComputeArgs),
    /// Random weak Latin hypercubes.
    Sample(commands::SampleArgs),
    /// All weak Latin hypercubes of a small order.
    Enumerate(commands::EnumerateArgs),
    /// Moments of a statistic over random hypercubes.
    Stats(commands::StatsArgs),
    /// Check an identity or bound on generated instances.
    Verify {
        #[command(subcommand)]
        check: verify::Check,
    },
    /// Search for hypercubes with small periodic discrepancy.
    Optimize(commands::OptimizeArgs),
}

impl Command {
    fn name(&self) -> String {
        match self {
            Self::Compute(_) => "compute".into(),
            Self::Sample(_) => "sample".into(),
            Self::Enumerate(_) => "enumerate".into(),
            Self::Stats(_) => "stats".into(),
            Self::Verify { check } => format!("verify {}", check.name()),
            Self::Optimize(_) => "optimize".into(),
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, Error> {
    let g = &cli.global;
    match &cli.command {
        Command::Compute(a) => commands::compute(a, g),
        Command::Sample(a) => commands::sample(a, g),
        Command::Enumerate(a) => commands::enumerate(a, g),
        Command::Stats(a) => commands::stats(a, g),
        Command::Verify { check } => verify::run(check, g),
        Command::Optimize(a) => commands::optimize(a, g),
    }
}

fn envelope(cli: &Cli, mode: &str, status: &str, results: Value) -> Value {
    json!({
        "command": cli.command.name(),
        "config_echo": cli,
        "results": results,
        "provenance": { "mode": mode, "seed": cli.global.seed },
        "status": status,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("warning: could not size the worker pool: {e}");
        }
    }
    let mode = if cli.global.exact { "exact" } else { "float" };
    match dispatch(&cli) {
        Ok(outcome) => {
            for (path, text) in &outcome.files {
                if let Err(e) = write_file(path, text) {
                    eprintln!("error: {e}");
                    println!("{}", envelope(&cli, mode, "error", json!({ "error": e })));
                    return ExitCode::from(2);
                }
            }
            let status = if outcome.passed { "ok" } else { "verification_failed" };
            match cli.global.format {
                Format::Json => {
                    let mode = outcome.mode.unwrap_or(mode);
                    let doc = envelope(&cli, mode, status, outcome.results);
                    println!("{}", serde_json::to_string_pretty(&doc).expect("json values serialize"));
                }
                Format::Csv => print!("{}", outcome.table.unwrap_or_else(|| Table::from_value(&outcome.results)).to_csv()),
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if cli.global.format == Format::Json {
                let doc = envelope(&cli, mode, "error", json!({ "error": e.to_string() }));
                println!("{}", serde_json::to_string_pretty(&doc).expect("json values serialize"));
            }
            ExitCode::from(2)
        }
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), String> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}
