use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cei_cli::config::{parse_interval, ConfigOverrides, Format};
use cei_cli::{default_config, emit_samples, list_experiments, read_samples, run_experiment, SampleMetadata};
use cei_core::samplers::{sample_ensemble, EiParams, Process};
use cei_core::transforms::{
    bes3_to_bridge, condition_min_transform, condition_min_value_transform, first_passage_transform,
    last_passage_transform, vervaat,
};
use cei_core::{cyclic_shift, GridPath, Interval, RngStream};
use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;

#[derive(Parser)]
#[command(
    name = "cei",
    version,
    about = "Cyclic-shift conditioning of paths with exchangeable increments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw paths from one of the built-in samplers.
    Sample(SampleArgs),
    /// Apply a path transform to every path of a samples file.
    Transform(TransformArgs),
    /// Run a registered experiment; exits 0 iff it passes.
    Verify(VerifyArgs),
    /// List registered experiments.
    List {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProcessKind {
    Bridge,
    Bm,
    Ei,
    Bessel3,
    Bessel3Bridge,
    SignedBm,
    Walk,
}

#[derive(clap::Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    process: ProcessKind,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    paths: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Endpoint for bridge, bessel3-bridge and (optionally) ei.
    #[arg(long)]
    x: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha_drift: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    betas: Vec<f64>,
    /// Increment multiset for walk (n is its length).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    increments: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Op {
    Shift,
    Vervaat,
    ConditionMin,
    ConditionMinValue,
    FirstPassage,
    LastPassage,
    Bes3ToBridge,
}

#[derive(clap::Args)]
struct TransformArgs {
    #[arg(long, value_enum)]
    op: Op,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Shift index for `shift`.
    #[arg(long)]
    j: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<f64>,
    #[arg(long)]
    x: Option<f64>,
    /// Fixed quantile; by default one uniform draw per path from `--seed`.
    #[arg(long)]
    u: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct VerifyArgs {
    experiment: String,
    /// TOML file with ExperimentConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// `lo,hi` for (lo, hi], or bracketed such as `[-2,-2]`.
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<String>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sample(a) => sample(a).map(|_| ExitCode::SUCCESS),
        Command::Transform(a) => transform(a).map(|_| ExitCode::SUCCESS),
        Command::Verify(a) => verify(a),
        Command::List { json } => {
            let list = list_experiments();
            if json {
                println!("{}", serde_json::to_string_pretty(&list)?);
            } else {
                for e in list {
                    println!("{:<34} {}\n{:<34} {}", e.name, e.citation, "", e.description);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn sample(a: SampleArgs) -> Result<()> {
    let needs_x = || a.x.context("--x is required for this process");
    let (process, name) = match a.process {
        ProcessKind::Bridge => (Process::Bridge { x: a.x.unwrap_or(0.0) }, "bridge"),
        ProcessKind::Bm => (Process::Bm, "bm"),
        ProcessKind::Ei => {
            let params = EiParams::new(a.alpha_drift, a.sigma, a.betas.clone())?;
            (Process::Ei { params, x_end: a.x }, "ei")
        }
        ProcessKind::Bessel3 => (Process::Bessel3, "bessel3"),
        ProcessKind::Bessel3Bridge => (Process::Bessel3Bridge { x: needs_x()? }, "bessel3-bridge"),
        ProcessKind::SignedBm => (Process::SignedBm, "signed-bm"),
        ProcessKind::Walk => {
            if a.increments.is_empty() {
                bail!("--increments is required for walk");
            }
            (
                Process::Walk {
                    increments: a.increments.clone(),
                },
                "walk",
            )
        }
    };
    let n = if let Process::Walk { increments } = &process {
        increments.len()
    } else {
        a.n
    };
    if n == 0 || a.paths == 0 {
        bail!("need n >= 1 and paths >= 1");
    }
    let paths = sample_ensemble(a.paths, a.seed, 0, |rng| process.sample(n, rng));
    let meta = SampleMetadata {
        n,
        master_seed: a.seed,
        source: name.to_string(),
    };
    emit_samples(&paths, &meta, a.format, &a.out)?;
    eprintln!("wrote {} paths to {}", paths.len(), a.out.display());
    Ok(())
}

fn transform(a: TransformArgs) -> Result<()> {
    let (meta, inputs) = read_samples(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let interval: Option<Interval> = a.interval.as_deref().map(parse_interval).transpose()?;
    let mut out: Vec<GridPath> = Vec::new();
    let mut skipped = 0usize;
    for (i, p) in inputs.iter().enumerate() {
        let u = match a.u {
            Some(u) => u,
            None => RngStream::tagged(a.seed, 0, i as u64).rng().random(),
        };
        let q = match a.op {
            Op::Shift => Some(cyclic_shift(p, a.j.context("--j is required for shift")?)?),
            Op::Vervaat => Some(vervaat(p)),
            Op::ConditionMin => condition_min_transform(p, interval.context("--interval is required")?, u)?.into_path(),
            Op::ConditionMinValue => {
                let y = a.y.context("--y is required")?;
                let eps = a.epsilon.context("--epsilon is required")?;
                condition_min_value_transform(p, y, eps, u)
                    .ok()
                    .and_then(|r| r.into_path())
            }
            Op::FirstPassage => first_passage_transform(p, a.x.context("--x is required")?, u)
                .ok()
                .and_then(|r| r.into_path()),
            Op::LastPassage => last_passage_transform(p, u)?.into_path(),
            Op::Bes3ToBridge => Some(bes3_to_bridge(p, u)?),
        };
        match q {
            Some(q) => out.push(q),
            None => skipped += 1,
        }
    }
    if out.is_empty() {
        bail!("no path satisfied the conditioning event");
    }
    let op = a.op.to_possible_value().expect("no skipped variants");
    let meta = SampleMetadata {
        source: format!("{}+{}", meta.source, op.get_name()),
        ..meta
    };
    emit_samples(&out, &meta, a.format, &a.out)?;
    eprintln!(
        "wrote {} paths to {} ({skipped} without the conditioning event)",
        out.len(),
        a.out.display()
    );
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let file = match &a.config {
        Some(path) => ConfigOverrides::from_toml_file(path)?,
        None => ConfigOverrides::default(),
    };
    // the positional name wins over any `experiment` key in the file
    let flags = ConfigOverrides {
        experiment: Some(a.experiment.clone()),
        n: a.n,
        paths: a.paths,
        seed: a.seed,
        epsilon: a.epsilon,
        interval: a.interval.as_deref().map(parse_interval).transpose()?,
        x: a.x,
        y: a.y,
        alpha: a.alpha,
        out_dir: a.out,
        format: a.format,
    };
    let cfg = default_config(&a.experiment)?.apply(file.merge(flags));
    let outcome = run_experiment(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&outcome.report)?);
    if let Some(e) = &outcome.error {
        eprintln!("pipeline error: {e}");
    }
    for f in outcome.samples_file.iter().chain(&outcome.report_file) {
        eprintln!("wrote {}", f.display());
    }
    Ok(if outcome.report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
