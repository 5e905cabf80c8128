//! `reflectlab`: batch driver writing CSV series and JSON reports.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::ExperimentConfig;
use error::CliError;
use output::Artifact;

#[derive(Parser)]
#[command(name = "reflectlab", version, about = "Reflected random walks on the half-line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    #[command(subcommand)]
    Simulate(Simulate),
    #[command(subcommand)]
    Analyze(Analyze),
    #[command(subcommand, name = "wiener-hopf")]
    WienerHopf(WienerHopf),
    #[command(subcommand)]
    Contractivity(Contractivity),
    #[command(subcommand)]
    Diagnose(Diagnose),
    /// Same as `analyze classify`.
    Classify(LawArgs),
    /// Run the command named in a config file or manifest.
    Run(RunArgs),
}

#[derive(Subcommand)]
enum Simulate {
    /// One seeded path: path.csv plus reflections.csv or ladder.csv.
    Walk(WalkArgs),
    /// Parallel paths aggregated into ensemble.json.
    Ensemble(EnsembleArgs),
}

#[derive(Subcommand)]
enum Analyze {
    /// Invariant measures nu and rho on the essential class: invariant.csv.
    LatticeInvariant(InvariantArgs),
    /// Densities of nu and rho for a continuous law: density.csv.
    Density(DensityArgs),
    /// Quadratic tail sum or integral: tail.json.
    Tail(LawArgs),
    /// Recurrence classification: classification.json.
    Classify(LawArgs),
}

#[derive(Subcommand)]
enum WienerHopf {
    /// Symmetric law from a ladder-height law: wiener_hopf.csv.
    Construct(ConstructArgs),
    /// Simulated ladder heights of the constructed law: ladder_heights.csv.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum Contractivity {
    /// Distance of two coupled paths: contraction.csv.
    Trace(TraceArgs),
    /// Escape-fraction transience vote: vote.json.
    Vote(VoteArgs),
}

#[derive(Subcommand)]
enum Diagnose {
    /// Log-log slope of 1 - chf near 0: char_slope.json.
    CharSlope(SlopeArgs),
}

#[derive(Args)]
struct Common {
    /// TOML config (or JSON config/manifest); flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Increment law, e.g. "lat:pmf(d=1;1:0.5,2:0.5)".
    #[arg(long)]
    law: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short = 'o')]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct LawArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct WalkArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    /// `reflected` (default) or `classical`.
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Args)]
struct EnsembleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    paths: Option<u64>,
    #[arg(long)]
    workers: Option<u64>,
    /// Occupation window is [0, x_max).
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    bins: Option<u64>,
    #[arg(long)]
    return_lo: Option<f64>,
    #[arg(long)]
    return_hi: Option<f64>,
    /// Escape level.
    #[arg(long = "M", value_name = "M")]
    m: Option<f64>,
}

#[derive(Args)]
struct InvariantArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    x0: Option<f64>,
    /// Cap on the essential class.
    #[arg(long)]
    x_max: Option<f64>,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    points: Option<u64>,
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n_max: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n_max: Option<u64>,
    #[arg(long)]
    epochs: Option<u64>,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    y0: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
}

#[derive(Args)]
struct VoteArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    paths: Option<u64>,
    #[arg(long)]
    workers: Option<u64>,
    /// Escape level (default: quantile-based).
    #[arg(long = "M", value_name = "M")]
    m: Option<f64>,
}

#[derive(Args)]
struct SlopeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    points: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, short = 'o')]
    output_dir: Option<PathBuf>,
}

/// Flag values as a config layer.
trait Layer {
    fn common(&self) -> &Common;
    fn knobs(&self, cfg: &mut ExperimentConfig);

    fn layer(&self) -> ExperimentConfig {
        let c = self.common();
        let mut cfg = ExperimentConfig {
            law: c.law.clone(),
            seed: c.seed,
            output_dir: c.output_dir.clone(),
            ..Default::default()
        };
        self.knobs(&mut cfg);
        cfg
    }
}

macro_rules! layer {
    ($ty:ty; $($field:ident),*) => {
        impl Layer for $ty {
            fn common(&self) -> &Common {
                &self.common
            }
            #[allow(unused_variables)]
            fn knobs(&self, cfg: &mut ExperimentConfig) {
                $( cfg.$field = self.$field.clone(); )*
            }
        }
    };
}

layer!(LawArgs;);
layer!(WalkArgs; x0, steps, mode);
layer!(EnsembleArgs; x0, steps, paths, workers, x_max, bins, return_lo, return_hi, m);
layer!(InvariantArgs; x0, x_max);
layer!(DensityArgs; x_max, points);
layer!(ConstructArgs; n_max);
layer!(VerifyArgs; n_max, epochs);
layer!(TraceArgs; x0, y0, steps);
layer!(VoteArgs; x0, steps, paths, workers, m);
layer!(SlopeArgs; t_min, t_max, points);

const STOCHASTIC: &[&str] =
    &["simulate walk", "simulate ensemble", "wiener-hopf verify", "contractivity trace", "contractivity vote"];

fn resolve(cli: Cli) -> Result<(&'static str, ExperimentConfig), CliError> {
    let (name, args): (&'static str, &dyn Layer) = match &cli.command {
        Command::Simulate(Simulate::Walk(a)) => ("simulate walk", a),
        Command::Simulate(Simulate::Ensemble(a)) => ("simulate ensemble", a),
        Command::Analyze(Analyze::LatticeInvariant(a)) => ("analyze lattice-invariant", a),
        Command::Analyze(Analyze::Density(a)) => ("analyze density", a),
        Command::Analyze(Analyze::Tail(a)) => ("analyze tail", a),
        Command::Analyze(Analyze::Classify(a)) | Command::Classify(a) => ("analyze classify", a),
        Command::WienerHopf(WienerHopf::Construct(a)) => ("wiener-hopf construct", a),
        Command::WienerHopf(WienerHopf::Verify(a)) => ("wiener-hopf verify", a),
        Command::Contractivity(Contractivity::Trace(a)) => ("contractivity trace", a),
        Command::Contractivity(Contractivity::Vote(a)) => ("contractivity vote", a),
        Command::Diagnose(Diagnose::CharSlope(a)) => ("diagnose char-slope", a),
        Command::Run(run) => {
            let file = ExperimentConfig::load(&run.config)?;
            let named = file
                .command
                .as_deref()
                .ok_or_else(|| CliError::Validation(format!("{} does not name a `command`", run.config.display())))?;
            let name =
                commands::canonical(named).ok_or_else(|| CliError::Validation(format!("unknown command `{named}`")))?;
            let top = ExperimentConfig { output_dir: run.output_dir.clone(), ..Default::default() };
            return Ok((name, file.overlay(&top)));
        }
    };
    let flags = args.layer();
    let merged = match &args.common().config {
        Some(path) => {
            let file = ExperimentConfig::load(path)?;
            if let Some(named) = &file.command {
                if commands::canonical(named) != Some(name) {
                    return Err(CliError::Validation(format!(
                        "config {} is for `{named}`, not `{name}`",
                        path.display()
                    )));
                }
            }
            file.overlay(&flags)
        }
        None => flags,
    };
    Ok((name, merged))
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let (name, mut cfg) = resolve(cli)?;
    cfg.command = Some(name.to_string());
    cfg.validate()?;
    if STOCHASTIC.contains(&name) && cfg.seed.is_none() {
        return Err(CliError::Validation(format!("`{name}` is stochastic and needs --seed")));
    }
    let outcome = commands::execute(name, &cfg)?;
    let mut artifacts = outcome.artifacts;
    let mut manifest = json!({
        "tool": "reflectlab",
        "version": reflectlab::VERSION,
        "command": name,
        "config": cfg,
        "started_unix": started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
        "wall_clock_seconds": clock.elapsed().as_secs_f64(),
        "artifacts": artifacts.iter().map(|a| a.name.clone()).collect::<Vec<_>>(),
    });
    if let Some(serde_json::Value::Object(extra)) = outcome.manifest_extra {
        manifest.as_object_mut().expect("manifest is an object").extend(extra);
    }
    artifacts.push(Artifact::json("manifest.json", &manifest)?);
    output::write_all(&cfg.output_dir(), &artifacts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
