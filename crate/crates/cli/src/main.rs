use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use tangency_core::harness::{self, CheckKind, Format, Scenario};

#[derive(Debug, Parser)]
#[command(
    name = "tangency-lab",
    version,
    about = "Tangency and involutivity checks on polyhedral currents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the checks of a scenario file and write a report.
    Run(RunArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// Restrict the run to these checks (repeatable).
    #[arg(long = "check", value_name = "NAME")]
    checks: Vec<String>,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: Format,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the tangency tolerance.
    #[arg(long, value_name = "X", value_parser = parse_positive)]
    tol: Option<f64>,
    /// Override the subdivision depth.
    #[arg(long, value_name = "N")]
    depth: Option<u32>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse::<Format>().map_err(|e| e.to_string())
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

fn load(args: &RunArgs) -> anyhow::Result<Scenario> {
    let mut scenario = Scenario::load(&args.scenario)?;
    if !args.checks.is_empty() {
        let checks = args
            .checks
            .iter()
            .map(|c| CheckKind::parse(c))
            .collect::<Result<Vec<_>, _>>()?;
        scenario.select_checks(checks)?;
    }
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if let Some(tol) = args.tol {
        scenario.tolerances.tangency = tol;
    }
    if let Some(depth) = args.depth {
        scenario.tolerances.depth = depth;
    }
    Ok(scenario)
}

fn run(args: &RunArgs, scenario: &Scenario) -> anyhow::Result<bool> {
    let report = harness::run(scenario)?;
    match &args.out {
        Some(path) => harness::emit(&report, args.format, path)
            .with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(harness::render(&report, args.format).as_bytes())?,
    }
    for check in &report.checks {
        eprintln!(
            "{:<14} {:<18} {}",
            check.check,
            check.verdict.as_str(),
            check.summary
        );
    }
    Ok(report.has_failure())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run(args) = cli.command;
    let scenario = match load(&args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(&args, &scenario) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
