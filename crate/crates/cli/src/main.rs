mod commands;
mod config;
mod output;
mod suites;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use config::{resolve, Command};
use output::Report;
use serde_json::json;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "wickgraph", version, about = "Moment tables and verification suites for random network limits")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Spectral moments of the input-output Jacobian, with an optional Monte Carlo column.
    JacobianTable(commands::JacobianTable),
    /// Convergence rate of empirical Jacobian moments across widths.
    Rate(commands::Rate),
    /// Pairing expansions against brute-force Gaussian expectations.
    WickVerify(commands::WickVerify),
    /// GP kernel checks.
    Gp(commands::Gp),
    /// Neural tangent kernel checks.
    Ntk(commands::Ntk),
    /// Tree expansions against forward passes and Jacobians.
    TreesVerify(commands::TreesVerify),
    /// Non-linear Fuss-Catalan moment table.
    Fc(commands::Fc),
}

fn execute<T: Command>(cli: T, fill: fn(&mut T), run: fn(&T) -> Result<Report>) -> Result<bool> {
    let start = Instant::now();
    let mut args = resolve(cli)?;
    fill(&mut args);
    let report = run(&args)?;
    let c = args.common();
    let meta = json!({
        "command": T::NAME,
        "params": serde_json::to_value(&args)?,
        "seed": c.seed,
        "git_version": env!("WICKGRAPH_GIT_VERSION"),
        "version": env!("CARGO_PKG_VERSION"),
        "wallclock_s": start.elapsed().as_secs_f64(),
    });
    let text = report.render(c.format.unwrap_or_default(), &meta);
    match &c.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    if report.failed > 0 {
        eprintln!("{} of {} checks failed", report.failed, report.rows.len());
    }
    Ok(report.failed == 0)
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("TOOL_THREADS") {
        let n: usize = v.parse().with_context(|| format!("TOOL_THREADS={v}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = init_threads().and_then(|_| match cli.command {
        Cmd::JacobianTable(a) => execute(a, commands::JacobianTable::fill_defaults, commands::JacobianTable::run),
        Cmd::Rate(a) => execute(a, commands::Rate::fill_defaults, commands::Rate::run),
        Cmd::WickVerify(a) => execute(a, commands::WickVerify::fill_defaults, commands::WickVerify::run),
        Cmd::Gp(a) => execute(a, commands::Gp::fill_defaults, commands::Gp::run),
        Cmd::Ntk(a) => execute(a, commands::Ntk::fill_defaults, commands::Ntk::run),
        Cmd::TreesVerify(a) => execute(a, commands::TreesVerify::fill_defaults, commands::TreesVerify::run),
        Cmd::Fc(a) => execute(a, commands::Fc::fill_defaults, commands::Fc::run),
    });
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
