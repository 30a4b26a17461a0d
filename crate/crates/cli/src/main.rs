use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use lhedge::harness::{audit_csv, comparison_table, run, sweep, ExperimentConfig, RunSummary, SweepGrid};

const EXIT_CONFIG: u8 = 2;
const EXIT_AUDIT: u8 = 3;

#[derive(Parser)]
#[command(name = "lhedge", version, about = "Run and audit optimistic Lagrangian hedging experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its per-round CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Exit with status 3 if any audited bound fails.
        #[arg(long)]
        strict: bool,
        /// CSV destination; defaults to the config's output, then
        /// `<out-dir>/<label>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "LHEDGE_OUT_DIR", default_value = ".")]
        out_dir: PathBuf,
        /// Print the full summary as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run a grid of configs in parallel.
    Sweep {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, env = "LHEDGE_OUT_DIR", default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Re-check the bounds recorded in a telemetry CSV.
    Audit {
        #[arg(long)]
        csv: PathBuf,
    },
}

enum Failure {
    Config(anyhow::Error),
    Audit(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<lhedge::Error>() {
            Some(lhedge::Error::Config(_) | lhedge::Error::InvalidParameter(_) | lhedge::Error::Unsupported(_)) => {
                Failure::Config(e)
            }
            _ => Failure::Other(e),
        }
    }
}

fn print_summary(s: &RunSummary, csv: &Path) {
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
    println!("run        {}", s.label);
    println!("rounds     {}", s.rounds);
    println!("regret     {:.6e}", s.final_regret);
    println!("bound      {:.6e} (slack {:.6e})", s.bound, s.bound_slack);
    println!("blackwell  {:.3e}", s.max_blackwell);
    if let Some(e) = s.exploitability {
        println!("exploit.   {e:.6e}");
    }
    if let Some(g) = s.ce_gap {
        println!("ce gap     {g:.6e}");
    }
    if let Some(p) = &s.path_length {
        println!("path       C~ = {:.4}, violations {}, regret ok {}", p.constant, p.violations, p.regret_ok);
    }
    println!("audit      {} ({} violations)", if s.audit_passed { "ok" } else { "FAILED" }, s.violations);
    println!("wall time  {:.3}s", s.wall_time_secs);
    println!("csv        {}", csv.display());
}

fn cmd_run(config: &Path, strict: bool, out: Option<PathBuf>, out_dir: &Path, json: bool) -> Result<(), Failure> {
    let cfg = ExperimentConfig::from_file(config).map_err(|e| Failure::Config(e.into()))?;
    let csv = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| out_dir.join(format!("{}.csv", cfg.label())));
    let summary = run(&cfg, Some(&csv)).with_context(|| format!("running {}", config.display()))?;
    if json {
        println!("{}", serde_json::to_string_pretty(&summary).map_err(anyhow::Error::from)?);
    } else {
        print_summary(&summary, &csv);
    }
    if strict && cfg.audit && !summary.audit_passed {
        return Err(Failure::Audit(format!(
            "{} audit violations, first at round {:?}",
            summary.violations, summary.first_violation_round
        )));
    }
    Ok(())
}

fn cmd_sweep(grid: &Path, jobs: usize, out_dir: &Path, strict: bool) -> Result<(), Failure> {
    let configs = SweepGrid::from_file(grid)
        .and_then(|g| g.expand())
        .map_err(|e| Failure::Config(e.into()))?;
    let entries = sweep(&configs, jobs, Some(out_dir)).map_err(anyhow::Error::from)?;
    let table = comparison_table(&entries);
    std::fs::create_dir_all(out_dir).map_err(anyhow::Error::from)?;
    let table_path = out_dir.join("sweep_summary.csv");
    std::fs::write(&table_path, &table).with_context(|| format!("writing {}", table_path.display()))?;
    print!("{table}");
    let failed = entries.iter().filter(|e| e.result.is_err()).count();
    if failed > 0 {
        eprintln!("{failed} of {} configs failed", entries.len());
    }
    let audit_failures = entries.iter().filter(|e| matches!(&e.result, Ok(s) if s.audit_enabled && !s.audit_passed)).count();
    if strict && audit_failures > 0 {
        return Err(Failure::Audit(format!("{audit_failures} configs failed their audit")));
    }
    Ok(())
}

fn cmd_audit(csv: &Path) -> Result<(), Failure> {
    let report = audit_csv(csv).with_context(|| format!("auditing {}", csv.display()))?;
    println!("rows                {}", report.rows);
    println!("blackwell           {}", report.blackwell_violations);
    println!("potential growth    {}", report.growth_violations);
    println!("regret              {}", report.regret_violations);
    if report.recomputed {
        println!("bound mismatches    {}", report.bound_mismatches);
    } else {
        println!("bound mismatches    skipped (no metadata sidecar)");
    }
    match report.first_violation {
        None => Ok(()),
        Some((t, player)) => Err(Failure::Audit(format!("first violation at round {t}, player {player}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, strict, out, out_dir, json } => cmd_run(&config, strict, out, &out_dir, json),
        Command::Sweep { grid, jobs, out_dir, strict } => cmd_sweep(&grid, jobs, &out_dir, strict),
        Command::Audit { csv } => cmd_audit(&csv),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Audit(msg)) => {
            eprintln!("audit violation: {msg}");
            ExitCode::from(EXIT_AUDIT)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
