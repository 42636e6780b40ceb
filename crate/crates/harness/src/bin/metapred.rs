use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use metapred::config::{ExperimentConfig, Mode};
use metapred::experiment::{run_genie_check, run_offline_report, run_online_report};
use metapred::output::{
    emit_outputs, render_svg, trace_series, write_checkpoint, write_frames_csv, write_text, write_trace_csv, Checkpoint,
};
use metapred::selftest::run_selftest;

#[derive(Parser)]
#[command(name = "metapred", version, about = "Meta-learned linear channel prediction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Offline meta-learning versus the baselines over a training-size sweep.
    Offline(RunArgs),
    /// Streaming meta-learning over a frame sequence.
    Online(RunArgs),
    /// Analytic versus Monte Carlo genie MSE for every window size.
    GenieCheck(RunArgs),
    /// Runs the oracle suite.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 runs serially.
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write the first replicate's evaluation frames (offline only).
    #[arg(long)]
    export_frames: bool,
}

fn load(args: &RunArgs, mode: Mode) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.mode = mode;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn pool(jobs: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            bail!("--jobs must be at least 1");
        }
        b = b.num_threads(j);
    }
    Ok(b.build()?)
}

fn offline(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = load(args, Mode::Offline)?;
    let report = pool(args.jobs)?.install(|| run_offline_report(&cfg))?;
    let (csv, svg) = emit_outputs(&report.records, &args.out, "offline", "L_new")?;
    for cell in report.cells.iter().filter(|c| c.replicate == 0) {
        if let Some(t) = &cell.tuned {
            let path = args.out.join("checkpoints").join(format!("meta_ltr_{}.csv", cell.sweep));
            write_checkpoint(&Checkpoint { lambda: t.lambda, bias: t.bias.clone() }, &path)?;
        }
    }
    if args.export_frames {
        write_frames_csv(&report.eval_frames, &args.out.join("frames.csv"))?;
    }
    write_text(&args.out.join("config.toml"), &cfg.to_toml())?;
    println!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}

fn online(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = load(args, Mode::Online)?;
    let report = pool(args.jobs)?.install(|| run_online_report(&cfg))?;
    let (csv, _) = emit_outputs(&report.records, &args.out, "online", "frame")?;
    let trace = args.out.join("online_trace.csv");
    write_trace_csv(&report.traces, &trace)?;
    let title = format!("moving average ({})", cfg.online.smoothing);
    write_text(&args.out.join("online.svg"), &render_svg(&trace_series(&report.traces), &title, "frame", "MSE"))?;
    write_text(&args.out.join("config.toml"), &cfg.to_toml())?;
    println!("wrote {} and {}", csv.display(), trace.display());
    Ok(())
}

fn genie_check(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = load(args, Mode::GenieCheck)?;
    let records = pool(args.jobs)?.install(|| run_genie_check(&cfg))?;
    let (csv, _) = emit_outputs(&records, &args.out, "genie_check", "window N")?;
    for n in 1..=cfg.window as u64 {
        let mean = |scheme: &str| {
            let v: Vec<f64> = records.iter().filter(|r| r.scheme == scheme && r.sweep == n).map(|r| r.mse).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        println!("N={n}: analytic {:.6e}  empirical {:.6e}", mean("analytic"), mean("empirical"));
    }
    println!("wrote {}", csv.display());
    Ok(())
}

fn selftest() -> bool {
    let checks = run_selftest();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

fn ensure_dir(p: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(p).with_context(|| format!("creating {}", p.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Offline(a) => ensure_dir(&a.out).and_then(|_| offline(a)),
        Command::Online(a) => ensure_dir(&a.out).and_then(|_| online(a)),
        Command::GenieCheck(a) => ensure_dir(&a.out).and_then(|_| genie_check(a)),
        Command::Selftest => {
            return if selftest() { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
