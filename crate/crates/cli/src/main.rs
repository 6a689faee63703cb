//! `predcorr`: certify correction specs, run solvers, compare modes and fit
//! convergence rates from traces.

mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;
use std::time::Instant;

use anyhow::{ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use predcorr::framework::{certify, run, RunOptions, CERTIFY_TOL};
use predcorr::rates::{fit_rate, floor_reached, MIN_WINDOW_START};
use predcorr::{Error, Mode, VariationalInstance};
use serde::Serialize;

use config::{Generator, RunConfig};
use output::{RunSummary, INSTANCE_FILE, SUMMARY_FILE, TRACE_FILE};

#[derive(Parser)]
#[command(name = "predcorr", version, about = "Prediction-correction solvers: certify, run, compare, fit rates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the convergence conditions of an instance's solver. Exit 0 when
    /// satisfied, 1 when a condition fails, 2 when the spec cannot be built.
    Certify(SourceArgs),
    /// Run one solver mode and write trace.csv, summary.json and instance.json.
    Run {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        run: RunArgs,
        /// baseline or faster
        #[arg(long)]
        mode: Option<Mode>,
    },
    /// Run baseline and faster on the same instance and summarize side by side.
    Compare {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Fit the slope of log(metric) against log(k) over a window of a trace.
    Rates {
        /// trace.csv written by `run`
        trace: PathBuf,
        /// Window as K_LO,K_HI; defaults to 10 through the last row
        #[arg(long, value_parser = parse_window)]
        window: Option<(usize, usize)>,
        /// Trace column to fit
        #[arg(long, default_value = "pointwise_residual")]
        metric: String,
    },
}

#[derive(Args)]
struct SourceArgs {
    /// JSON run config; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Generator name: two-block-quadratic, two-block-l1, multi-block-quadratic,
    /// saddle-quadratic, matrix-game, matching-pennies (default parameters)
    #[arg(long, conflicts_with = "instance")]
    generator: Option<String>,
    /// Instance JSON file
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Generator seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    tau_init: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run even when the convergence conditions fail
    #[arg(long)]
    override_uncertified: bool,
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected K_LO,K_HI, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok((parse(lo)?, parse(hi)?))
}

fn resolve(source: SourceArgs, run: Option<RunArgs>, mode: Option<Mode>) -> Result<RunConfig> {
    let base = match &source.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let generator = source.generator.as_deref().map(Generator::named).transpose()?;
    let mut cli = RunConfig { generator, instance: source.instance, seed: source.seed, mode, ..Default::default() };
    if let Some(r) = run {
        cli.budget = r.budget;
        cli.tau_init = r.tau_init;
        cli.out = r.out;
        cli.override_uncertified = r.override_uncertified;
    }
    Ok(base.merge(cli))
}

fn cmd_certify(source: SourceArgs) -> ExitCode {
    let instance = match resolve(source, None, None).and_then(|c| c.instance()) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cert = match instance.certify() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: cannot build the certificate: {e}");
            return ExitCode::from(2);
        }
    };
    println!("family: {}", instance.family());
    println!("H min pivot: {:e}", cert.h_min_pivot);
    println!("G min pivot: {:e}", cert.g_min_pivot);
    match instance.check_region() {
        Ok(()) => println!("parameter region: inside"),
        Err(e) => println!("parameter region: outside ({e})"),
    }
    println!("satisfied: {}", cert.satisfied);
    if cert.satisfied {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// Run one mode and write its files to `dir`.
fn run_one(instance: &VariationalInstance, config: &RunConfig, mode: Mode, dir: &Path) -> Result<RunSummary> {
    let budget = config.budget()?;
    let options = RunOptions {
        tau_init: config.tau_init()?,
        allow_uncertified: config.override_uncertified,
        ..RunOptions::new(mode, budget)
    };
    let solver = instance.solver()?;
    let cert = certify(solver.correction(), CERTIFY_TOL)?;
    let start = Instant::now();
    let trace = match run(solver.as_ref(), instance, &cert, &options) {
        Err(Error::Uncertified { h_min_pivot, g_min_pivot }) => anyhow::bail!(
            "convergence conditions fail (H min pivot {h_min_pivot:e}, G min pivot {g_min_pivot:e}); \
             pass --override-uncertified to run anyway"
        ),
        other => other?,
    };
    let elapsed = start.elapsed().as_secs_f64();
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    output::write_trace(&dir.join(TRACE_FILE), &trace.records)?;
    output::write_json(&dir.join(INSTANCE_FILE), &instance.to_document())?;
    let summary = RunSummary::new(instance.family(), budget, &trace, elapsed);
    output::write_json(&dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

fn print_summary(s: &RunSummary) {
    let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3e}"));
    println!(
        "{} {}: {} iterations, gap {}, feasibility {}, residual {}, {:.3}s",
        s.family,
        s.mode,
        s.iterations,
        show(s.final_values.gap),
        show(s.final_values.feasibility),
        show(s.final_values.residual),
        s.runtime_seconds
    );
    if let Some(f) = &s.failure {
        println!("  solver failure: {f}");
    }
}

fn cmd_run(config: RunConfig) -> Result<bool> {
    let instance = config.instance()?;
    let dir = config.out_dir()?;
    let summary = run_one(&instance, &config, config.mode(), dir)?;
    print_summary(&summary);
    Ok(summary.failure.is_none())
}

#[derive(Serialize)]
struct Comparison<'a> {
    baseline: &'a RunSummary,
    faster: &'a RunSummary,
}

fn cmd_compare(config: RunConfig) -> Result<bool> {
    let instance = config.instance()?;
    let dir = config.out_dir()?;
    let (baseline, faster) = thread::scope(|scope| {
        let spawn = |mode: Mode| {
            let (instance, config) = (&instance, &config);
            let sub = dir.join(mode.to_string());
            scope.spawn(move || run_one(instance, config, mode, &sub))
        };
        let b = spawn(Mode::Baseline);
        let f = spawn(Mode::Faster);
        (b.join().expect("baseline run panicked"), f.join().expect("faster run panicked"))
    });
    let (baseline, faster) = (baseline?, faster?);
    output::write_json(&dir.join("compare.json"), &Comparison { baseline: &baseline, faster: &faster })?;

    let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3e}"));
    println!("{:<14}{:>14}{:>14}", "", "baseline", "faster");
    for (name, b, f) in [
        ("gap", baseline.final_values.gap, faster.final_values.gap),
        ("feasibility", baseline.final_values.feasibility, faster.final_values.feasibility),
        ("residual", baseline.final_values.residual, faster.final_values.residual),
    ] {
        println!("{name:<14}{:>14}{:>14}", show(b), show(f));
    }
    println!("{:<14}{:>14.3}{:>14.3}", "seconds", baseline.runtime_seconds, faster.runtime_seconds);
    for s in [&baseline, &faster] {
        if let Some(f) = &s.failure {
            println!("{} solver failure: {f}", s.mode);
        }
    }
    Ok(baseline.failure.is_none() && faster.failure.is_none())
}

fn cmd_rates(trace: &Path, window: Option<(usize, usize)>, metric: &str) -> Result<()> {
    let samples = output::read_trace_column(trace, metric)?;
    ensure!(!samples.is_empty(), "{} has no {metric} values", trace.display());
    let rows = samples.iter().map(|s| s.0).max().unwrap_or(0) + 1;
    let window = window.unwrap_or((MIN_WINDOW_START, rows));
    ensure!(window.1 <= rows, "window ends at {} but the trace has {rows} iterations", window.1);
    let report = fit_rate(&samples, window, metric)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(k) = floor_reached(&samples) {
        eprintln!("note: {metric} reaches the numeric floor at k = {k}; later rows are excluded");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Certify(source) => return cmd_certify(source),
        Command::Run { source, run, mode } => resolve(source, Some(run), mode).and_then(cmd_run),
        Command::Compare { source, run } => resolve(source, Some(run), None).and_then(cmd_compare),
        Command::Rates { trace, window, metric } => cmd_rates(&trace, window, &metric).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
