//! `mcl`: experiment driver for the MHD Couette laboratory.

mod cells;
mod config;
mod plan;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::Config;
use plan::{execute, Kind, Plan};

#[derive(Parser)]
#[command(name = "mcl", version, about = "Pseudo-spectral MHD Couette laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config; every key is optional and `MCL_<KEY>` environment
    /// variables override it. Defaults: nu = 1e-3, alpha = 10, sigma = [1, 1],
    /// 32x64x32 grid with m = 4, dt = 0.05, t_final = 1, epsilon = 1e-3,
    /// random_band initial data, remap = "none", N = 5.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output root; results go to <out>/<plan-hash>/<cell-id>/.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Sweep cells run concurrently, one process each.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Runs cells with |alpha| <= 8p, outside the stability theorem's range.
    #[arg(long)]
    allow_out_of_theorem: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate M1, M2, Upsilon, M3 and M by closed form and quadrature.
    MultiplierCheck(Common),
    /// Integrate one linear per-mode system and write its envelope.
    LinearMode(Common),
    /// Peak amplification across a viscosity sweep with log-log slopes.
    LinearSweep(Common),
    /// Nonlinear run writing diagnostics and snapshots.
    Simulate(Common),
    /// Nonlinear runs over (nu, epsilon) with a combined amplification table.
    ThresholdSweep(Common),
    /// Nonlinear run plus the measured constants of the stability estimates.
    NormsReport(Common),
    /// Runs one prepared cell directory (used by the orchestrator).
    #[command(hide = true)]
    RunCell {
        #[arg(long, value_enum)]
        kind: Kind,
        dir: PathBuf,
    },
}

fn orchestrate(kind: Kind, common: &Common) -> Result<bool> {
    let mut cfg = Config::load(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let plan = Plan::new(kind, cfg);
    let outside = plan.out_of_theorem();
    if !outside.is_empty() {
        for c in &outside {
            let p = c.config.shear_angle()?.p();
            eprintln!(
                "warning: cell {} has alpha = {}, outside the stability range |alpha| > 8p = {}",
                c.id,
                c.config.alpha,
                8 * p
            );
        }
        if !common.allow_out_of_theorem {
            anyhow::bail!(
                "refusing to run {} cell(s) without --allow-out-of-theorem",
                outside.len()
            );
        }
    }
    let (root, records) = execute(&plan, &common.out, common.jobs)?;
    println!(
        "plan {} ({}): {} cell(s) in {}",
        plan.hash(),
        kind.name(),
        records.len(),
        root.display()
    );
    println!("{:<48} {:>7} {:>10}  digest", "cell", "status", "wall [s]");
    for r in &records {
        println!(
            "{:<48} {:>7} {:>10.3}  {}",
            r.cell_id,
            if r.ok { "ok" } else { "FAILED" },
            r.wall_seconds,
            &r.digest[..r.digest.len().min(16)]
        );
    }
    Ok(records.iter().all(|r| r.ok))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::RunCell { kind, dir } => cells::run_cell(*kind, dir).map(|_| true),
        Command::MultiplierCheck(c) => orchestrate(Kind::MultiplierCheck, c),
        Command::LinearMode(c) => orchestrate(Kind::LinearMode, c),
        Command::LinearSweep(c) => orchestrate(Kind::LinearSweep, c),
        Command::Simulate(c) => orchestrate(Kind::Simulate, c),
        Command::ThresholdSweep(c) => orchestrate(Kind::ThresholdSweep, c),
        Command::NormsReport(c) => orchestrate(Kind::NormsReport, c),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
