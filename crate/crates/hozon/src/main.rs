use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hozon::output::write_report;
use hozon::{Command, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(
    name = "hozon",
    version,
    about = "Higher-order mean zonoids: estimators and inclusion checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Support tables of Z^{m,p}_Q K by all three routes.
    ComputeZonoid(Common),
    /// Radial-mean, simplex and mean-zonoid inclusion chains.
    VerifyInclusions(Common),
    /// vol(Z K)/vol K against the unit ball.
    VerifyMain(Common),
    /// Higher-order Rogers-Shephard ratios.
    VerifyRs(Common),
    /// Steiner symmetrization toward the ball.
    SteinerRun(Common),
    /// Centroid/projection ratio against the ball (m = 1).
    BpcSpotcheck(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Sets both the tuple and the direction budget.
    #[arg(long)]
    samples: Option<usize>,
    /// Number of directions in the support table.
    #[arg(long)]
    grid: Option<usize>,
    /// RNG shards; fixes the streams, not the thread count.
    #[arg(long)]
    shards: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Main CSV path; verdicts and summary are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (command, c) = match cli.command {
        Cmd::ComputeZonoid(c) => (Command::ComputeZonoid, c),
        Cmd::VerifyInclusions(c) => (Command::VerifyInclusions, c),
        Cmd::VerifyMain(c) => (Command::VerifyMain, c),
        Cmd::VerifyRs(c) => (Command::VerifyRs, c),
        Cmd::SteinerRun(c) => (Command::SteinerRun, c),
        Cmd::BpcSpotcheck(c) => (Command::BpcSpotcheck, c),
    };
    let mut cfg = ExperimentConfig::from_path(&c.config)?;
    cfg.apply(&Overrides {
        seed: c.seed,
        samples: c.samples,
        grid: c.grid,
        shards: c.shards,
        rel_tol: c.rel_tol,
        out: c.out,
    });
    let report = command.run(&cfg)?;
    write_report(&report, cfg.out.as_deref(), command.main_is_verdicts())?;
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
