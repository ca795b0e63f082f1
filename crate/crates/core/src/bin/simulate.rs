use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Parser;

use vodtier::experiments::{emit_report, run_scenarios, Scenario, ScenarioConfig};

/// Runs the cost sweeps and writes sweep.csv and summary.txt.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// TOML scenario file; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// fav, views, cdn or all.
    #[arg(long, default_value = "all")]
    scenario: String,

    #[arg(long)]
    out: PathBuf,

    /// Use the paper-scale repository size from the config.
    #[arg(long)]
    paper_scale: bool,

    /// Comma-separated seeds, overriding the config.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,

    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(args: Args) -> anyhow::Result<()> {
    let mut cfg = match &args.config {
        Some(path) => ScenarioConfig::load(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => ScenarioConfig::default(),
    };
    if let Some(seeds) = args.seeds {
        cfg.seeds = seeds;
    }
    if args.paper_scale {
        cfg = cfg.at_paper_scale();
    }
    cfg.validate()?;
    let scenarios = Scenario::parse_selection(&args.scenario)?;

    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }

    let out = run_scenarios(&cfg, &scenarios)?;
    emit_report(&out, &args.out)
        .with_context(|| format!("writing report to {}", args.out.display()))?;
    eprintln!(
        "wrote {} rows to {}",
        out.rows.len(),
        args.out.join("sweep.csv").display()
    );
    if !out.failures.is_empty() {
        for f in &out.failures {
            eprintln!(
                "calibration failed: shape {} target {:.1}% closest {:.2}%",
                f.weibull_shape, f.target_pct, f.achieved_pct
            );
        }
        bail!(
            "{} scenario point(s) skipped after calibration failure",
            out.failures.len()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
