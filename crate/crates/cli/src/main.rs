use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use blockmod_cli::checks::{run_theory, Fault};
use blockmod_cli::config::{ExperimentConfig, Objective};
use blockmod_cli::detect::{detect, read_graph, write_assignment, DetectSummary};
use blockmod_cli::karate::run_karate;
use blockmod_cli::plot::render_svg;
use blockmod_cli::sweep::{read_csv, run_sweep, summarize, write_csv};
use blockmod_cli::{UsageError, THREADS_ENV};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "blockmod",
    version,
    about = "Bayesian modularity community detection"
)]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of classes.
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true, value_enum)]
    objective: Option<Objective>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate SBM graphs and measure recovery.
    Sweep,
    /// Partition Zachary's karate club.
    Karate,
    /// Run numerical checks of the consistency theory.
    Theory {
        #[arg(long, hide = true, value_enum)]
        inject_fault: Option<Fault>,
    },
    /// Detect communities in an edge list.
    Detect {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Node indices start at 0.
        #[arg(long)]
        zero_indexed: bool,
    },
    /// Render a sweep CSV as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
    },
}

fn usage(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(UsageError(e.into()))
}

fn configure(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path).map_err(usage)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.out.is_some() {
        cfg.out.clone_from(&cli.out);
    }
    if cli.k.is_some() {
        cfg.k = cli.k;
    }
    if let Some(o) = cli.objective {
        cfg.objective = o;
    }
    if let Some(r) = cli.restarts {
        cfg.tabu.restarts = r;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        usage(anyhow!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()?;
    Ok(())
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> anyhow::Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// `Ok(false)` when the command ran but its checks failed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    init_threads()?;
    let cfg = configure(&cli)?;
    let out = cfg.out.as_deref();
    match cli.command {
        Command::Sweep => {
            let result = run_sweep(&cfg).map_err(usage)?;
            write_csv(&result.records, output(out)?)?;
            if let Some(p) = out {
                write_json(&result.timings, Some(&sidecar(p, ".timings.json")))?;
            }
            for g in summarize(&result.records) {
                eprintln!(
                    "n={} rho={:.4e} degree={:.2}: recovery {:.3}, misclassification {:.4}",
                    g.n, g.rho, g.expected_degree, g.recovery_rate, g.mean_misclassification
                );
            }
            Ok(true)
        }
        Command::Karate => {
            let report = run_karate(&cfg)?;
            write_json(&report, out)?;
            for c in &report.checks {
                eprintln!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            Ok(report.passed())
        }
        Command::Theory { inject_fault } => {
            let report = run_theory(&cfg.theory, cfg.seed, &cfg.prior, inject_fault)?;
            write_json(&report, out)?;
            for c in &report.checks {
                eprintln!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name.as_str(),
                    c.summary
                );
            }
            Ok(report.passed)
        }
        Command::Detect {
            input,
            zero_indexed,
        } => {
            let input = input
                .or(cfg.detect.input.clone())
                .ok_or_else(|| usage(anyhow!("detect needs --input")))?;
            let zero_indexed = zero_indexed || cfg.detect.zero_indexed;
            let file =
                File::open(&input).with_context(|| format!("cannot open {}", input.display()))?;
            let graph = read_graph(BufReader::new(file), zero_indexed)?;
            let k = cfg.k.unwrap_or(2);
            let kind = cfg.kind();
            let tabu = cfg.tabu_with_seed(cfg.seed);
            let start = Instant::now();
            let (labels, value) = detect(&graph, k, &kind, &tabu)?;
            let summary = DetectSummary {
                objective: kind.name().to_string(),
                value,
                k,
                seed: cfg.seed,
                restarts: cfg.tabu.restarts,
                nodes: graph.n(),
                edges: graph.edge_count(),
                runtime_seconds: start.elapsed().as_secs_f64(),
            };
            write_assignment(&labels, zero_indexed, output(out)?)?;
            match out {
                Some(p) => write_json(&summary, Some(&sidecar(p, ".json")))?,
                None => eprintln!("{}", serde_json::to_string(&summary)?),
            }
            Ok(true)
        }
        Command::Plot { input } => {
            let file =
                File::open(&input).with_context(|| format!("cannot open {}", input.display()))?;
            let records = read_csv(BufReader::new(file)).map_err(usage)?;
            let mut w = output(out)?;
            w.write_all(render_svg(&summarize(&records)).as_bytes())?;
            w.flush()?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
