//! One handler per subcommand. Handlers read the merged config, call the
//! library and return the artifacts to write.

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::{json, Value};

use reflectlab::continuous::{classify_continuous, density_grid, quadratic_tail_integral};
use reflectlab::contractivity::{contraction_trace, default_escape_threshold, transience_vote, CONTRACTION_PILOT};
use reflectlab::general_walk::{
    char_slope_diagnostic, ladder_height_empirical, total_variation, wiener_hopf_construct, SlopeVerdict,
};
use reflectlab::lattice::{classify_lattice, invariant_table, quadratic_tail_sum};
use reflectlab::measures::{parse_law, IncrementLaw, Pmf};
use reflectlab::simulate::{
    ensemble_run, ladder_trace, reflection_trace, sample_path, EnsembleConfig, LadderMode, PathMode, SeededStream,
};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Artifact;

pub const COMMANDS: &[&str] = &[
    "simulate walk",
    "simulate ensemble",
    "analyze lattice-invariant",
    "analyze density",
    "analyze tail",
    "analyze classify",
    "wiener-hopf construct",
    "wiener-hopf verify",
    "contractivity trace",
    "contractivity vote",
    "diagnose char-slope",
];

const DEFAULT_WINDOW: f64 = 10.0;
const DEFAULT_BINS: u64 = 100;
const DEFAULT_CLASS_CAP: f64 = 1000.0;
const DEFAULT_DENSITY_POINTS: u64 = 200;
const DEFAULT_PATHS: u64 = 100;
const DEFAULT_N_MAX: u64 = 64;
const DEFAULT_EPOCHS: u64 = 100_000;
const DEFAULT_T_RANGE: (f64, f64) = (1e-4, 1e-2);
const DEFAULT_SLOPE_POINTS: u64 = 20;

/// Artifacts of a run plus extra manifest entries.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub manifest_extra: Option<Value>,
}

impl From<Vec<Artifact>> for Outcome {
    fn from(artifacts: Vec<Artifact>) -> Self {
        Outcome { artifacts, manifest_extra: None }
    }
}

/// Accept `simulate walk`, `simulate-walk` and the top-level `classify`.
pub fn canonical(command: &str) -> Option<&'static str> {
    let words = command.split(|c: char| c.is_whitespace() || c == '_').filter(|w| !w.is_empty());
    let joined = words.collect::<Vec<_>>().join(" ");
    if joined == "classify" {
        return Some("analyze classify");
    }
    COMMANDS.iter().copied().find(|c| *c == joined || c.replacen(' ', "-", 1) == joined)
}

pub fn execute(command: &str, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let law = parse_law(cfg.law()?)?;
    match command {
        "simulate walk" => simulate_walk(&law, cfg).map(Into::into),
        "simulate ensemble" => simulate_ensemble(&law, cfg).map(Into::into),
        "analyze lattice-invariant" => lattice_invariant(&law, cfg).map(Into::into),
        "analyze density" => density(&law, cfg).map(Into::into),
        "analyze tail" => tail(&law).map(Into::into),
        "analyze classify" => classify(&law).map(Into::into),
        "wiener-hopf construct" => wh_construct(&law, cfg).map(Into::into),
        "wiener-hopf verify" => wh_verify(&law, cfg).map(Into::into),
        "contractivity trace" => trace(&law, cfg),
        "contractivity vote" => vote(&law, cfg).map(Into::into),
        "diagnose char-slope" => char_slope(&law, cfg).map(Into::into),
        other => Err(CliError::Validation(format!("unknown command `{other}`"))),
    }
}

fn as_f64(values: impl IntoIterator<Item = u64>) -> Vec<f64> {
    values.into_iter().map(|v| v as f64).collect()
}

fn index(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64).collect()
}

fn simulate_walk(law: &IncrementLaw, cfg: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let mode = match cfg.mode.as_deref().unwrap_or("reflected") {
        "reflected" => PathMode::Reflected,
        "classical" => PathMode::Classical,
        other => return Err(CliError::Validation(format!("mode must be `reflected` or `classical`, got `{other}`"))),
    };
    let steps = cfg.steps()? as usize;
    let path = sample_path(law, mode, cfg.x0.unwrap_or(0.0), steps, SeededStream::new(cfg.seed()?, 0))?;
    let mut out = vec![Artifact::csv("path", &[("n", &index(path.values.len())), ("value", &path.values)])?];
    match mode {
        PathMode::Reflected => {
            let r = reflection_trace(&path)?;
            let k: Vec<f64> = (1..=r.times.len()).map(|k| k as f64).collect();
            out.push(Artifact::csv("reflections", &[("k", &k), ("time", &as_f64(r.times)), ("R", &r.values)])?);
        }
        PathMode::Classical => {
            let l = ladder_trace(&path, LadderMode::NonstrictAscending)?;
            let k: Vec<f64> = (1..l.epochs.len()).map(|k| k as f64).collect();
            out.push(Artifact::csv(
                "ladder",
                &[
                    ("k", &k),
                    ("epoch", &as_f64(l.epochs[1..].iter().copied())),
                    ("height", &l.heights[1..]),
                    ("increment", &l.increments),
                ],
            )?);
        }
    }
    Ok(out)
}

fn simulate_ensemble(law: &IncrementLaw, cfg: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let ens = EnsembleConfig {
        x0: cfg.x0.unwrap_or(0.0),
        steps: cfg.steps()?,
        paths: cfg.paths.unwrap_or(DEFAULT_PATHS),
        seed: cfg.seed()?,
        workers: cfg.workers.unwrap_or(1) as usize,
        window: (0.0, cfg.x_max.unwrap_or(DEFAULT_WINDOW)),
        bins: cfg.bins.unwrap_or(DEFAULT_BINS) as usize,
        return_interval: (cfg.return_lo.unwrap_or(0.0), cfg.return_hi.unwrap_or(1.0)),
        escape_threshold: cfg.m.unwrap_or_else(|| default_escape_threshold(law)),
    };
    Ok(vec![Artifact::json("ensemble.json", &ensemble_run(law, &ens)?)?])
}

fn lattice_invariant(law: &IncrementLaw, cfg: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let table = invariant_table(law, cfg.x0.unwrap_or(0.0), cfg.x_max.unwrap_or(DEFAULT_CLASS_CAP))?;
    let summary = json!({
        "law": law.spec(),
        "states": table.states.len(),
        "exact": table.exact,
        "truncation_bound": table.truncation_bound,
        "nu_residual_max": table.nu_residual_max(),
        "rho_residual_max": table.rho_residual_max(),
    });
    Ok(vec![
        Artifact::csv(
            "invariant",
            &[
                ("state", &table.states),
                ("nu", &table.nu),
                ("rho", &table.rho),
                ("nu_residual", &table.nu_residual),
                ("rho_residual", &table.rho_residual),
            ],
        )?,
        Artifact::json("invariant.json", &summary)?,
    ])
}

fn density(law: &IncrementLaw, cfg: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let points = cfg.points.unwrap_or(DEFAULT_DENSITY_POINTS) as usize;
    let g = density_grid(law, cfg.x_max.unwrap_or(DEFAULT_WINDOW), points)?;
    Ok(vec![Artifact::csv(
        "density",
        &[
            ("x", &g.grid),
            ("nu_density", &g.nu_density),
            ("rho_density", &g.rho_density),
            ("quad_error", &g.quadrature_error),
        ],
    )?])
}

#[derive(Serialize)]
struct Labelled<'a, T: Serialize> {
    law: &'a str,
    #[serde(flatten)]
    report: T,
}

fn tail(law: &IncrementLaw) -> Result<Vec<Artifact>, CliError> {
    let report = if law.is_continuous() { quadratic_tail_integral(law)? } else { quadratic_tail_sum(law)? };
    Ok(vec![Artifact::json("tail.json", &Labelled { law: law.spec(), report })?])
}

fn classify(law: &IncrementLaw) -> Result<Vec<Artifact>, CliError> {
    let report = if law.is_continuous() { classify_continuous(law)? } else { classify_lattice(law)? };
    Ok(vec![Artifact::json("classification.json", &report)?])
}

/// Symmetric law built from the ladder law `law`, as floats, plus the exact
/// masses when the input is a finite rational pmf.
struct Construction {
    mu0: Pmf<f64>,
    mu: Pmf<f64>,
    exact_mu: Option<Vec<(i64, String)>>,
    remainder: f64,
    validity: Value,
    increments: IncrementLaw,
}

fn construct(law: &IncrementLaw, cfg: &ExperimentConfig) -> Result<Construction, CliError> {
    if !law.kind().is_half_line_lattice() {
        return Err(CliError::Validation(format!("`{}` is not a ladder law on 0, 1, 2, ...", law.spec())));
    }
    let n_max = cfg.n_max.unwrap_or(DEFAULT_N_MAX) as i64;
    match law.exact_pmf() {
        Some(mu0) => {
            let wh = wiener_hopf_construct(&mu0, n_max)?;
            let f = wh.to_f64();
            Ok(Construction {
                mu0: f.mu0,
                mu: f.mu,
                exact_mu: Some(wh.mu.iter().map(|(k, p)| (k, p.to_string())).collect()),
                remainder: f.remainder,
                validity: serde_json::to_value(wh.validity).map_err(|e| CliError::Io(e.to_string()))?,
                increments: wh.law()?,
            })
        }
        None => {
            let wh = wiener_hopf_construct(&law.pmf(n_max)?, n_max)?;
            Ok(Construction {
                mu0: wh.mu0.clone(),
                mu: wh.mu.clone(),
                exact_mu: None,
                remainder: wh.remainder,
                validity: serde_json::to_value(wh.validity).map_err(|e| CliError::Io(e.to_string()))?,
                increments: wh.law()?,
            })
        }
    }
}

/// Union of the supports, ascending, with one column per pmf.
fn aligned(pmfs: &[&Pmf<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let keys: BTreeSet<i64> = pmfs.iter().flat_map(|p| p.iter().map(|(k, _)| k)).collect();
    let ks = keys.iter().map(|&k| k as f64).collect();
    let cols = pmfs.iter().map(|p| keys.iter().map(|&k| p.get(k)).collect()).collect();
    (ks, cols)
}

fn wh_construct(law: &IncrementLaw, cfg: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let c = construct(law, cfg)?;
    let (k, cols) = aligned(&[&c.mu0, &c.mu]);
    let mu: Vec<Value> = match &c.exact_mu {
        Some(exact) => exact.iter().map(|(k, p)| json!({"k": k, "p": c.mu.get(*k), "exact": p})).collect(),
        None => c.mu.iter().map(|(k, p)| json!({"k": k, "p": p})).collect(),
    };
    let report = json!({
        "law": law.spec(),
        "n_max": cfg.n_max.unwrap_or(DEFAULT_N_MAX),
        "exact": c.exact_mu.is_some(),
        "validity": c.validity,
        "remainder": c.remainder,
        "mu": mu,
    });
    Ok(vec![
        Artifact::csv("wiener_hopf", &[("k", &k), ("mu0", &cols[0]), ("mu", &cols[1])])?,
        Artifact::json("wiener_hopf.json", &report)?,
    ])
}

fn wh_verify(law: &IncrementLaw, cfg: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let c = construct(law, cfg)?;
    let epochs = cfg.epochs.unwrap_or(DEFAULT_EPOCHS);
    let est = ladder_height_empirical(&c.increments, epochs, SeededStream::new(cfg.seed()?, 0))?;
    let empirical = est.pmf();
    let tv = total_variation(&empirical, &c.mu0);
    let (k, cols) = aligned(&[&c.mu0, &empirical]);
    let report = json!({
        "law": law.spec(),
        "epochs": est.epochs,
        "steps": est.steps,
        "total_variation": tv,
    });
    Ok(vec![
        Artifact::csv("ladder_heights", &[("k", &k), ("mu0", &cols[0]), ("empirical", &cols[1])])?,
        Artifact::json("wiener_hopf_verify.json", &report)?,
    ])
}

fn trace(law: &IncrementLaw, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let y0 =
        cfg.y0.ok_or_else(|| CliError::Validation("missing `y0` (pass --y0 or set it in the config file)".into()))?;
    let t = contraction_trace(law, cfg.x0.unwrap_or(0.0), y0, cfg.steps()?, SeededStream::new(cfg.seed()?, 0))?;
    let report = json!({
        "law": law.spec(),
        "x0": t.x0,
        "y0": t.y0,
        "steps": t.d.len() - 1,
        "first_below": t.first_below,
        "monotonicity_violations": t.monotonicity_violations().len(),
    });
    let artifacts = vec![
        Artifact::csv("contraction", &[("n", &index(t.d.len())), ("D", &t.d)])?,
        Artifact::json("contraction.json", &report)?,
    ];
    let calibration = serde_json::to_value(CONTRACTION_PILOT).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(Outcome { artifacts, manifest_extra: Some(json!({ "contraction_pilot": calibration })) })
}

fn vote(law: &IncrementLaw, cfg: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let level = cfg.m.unwrap_or_else(|| default_escape_threshold(law));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(1) as usize)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let (steps, paths, seed) = (cfg.steps()?, cfg.paths.unwrap_or(DEFAULT_PATHS), cfg.seed()?);
    let v = pool.install(|| transience_vote(law, cfg.x0.unwrap_or(0.0), steps, paths, level, seed))?;
    Ok(vec![Artifact::json("vote.json", &v)?])
}

#[derive(Serialize)]
struct SlopeReport {
    slope: f64,
    margin: f64,
    verdict: SlopeVerdict,
    t_min: f64,
    t_max: f64,
    points: usize,
}

fn char_slope(law: &IncrementLaw, cfg: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let t_min = cfg.t_min.unwrap_or(DEFAULT_T_RANGE.0);
    let t_max = cfg.t_max.unwrap_or(DEFAULT_T_RANGE.1);
    let points = cfg.points.unwrap_or(DEFAULT_SLOPE_POINTS) as usize;
    let d = char_slope_diagnostic(law, t_min, t_max, points)?;
    let report = SlopeReport {
        slope: d.slope,
        margin: d.margin,
        verdict: d.verdict,
        t_min: d.t_min,
        t_max: d.t_max,
        points: d.points,
    };
    Ok(vec![
        Artifact::csv("char_slope", &[("t", &d.t_grid), ("one_minus_chf", &d.one_minus_chf)])?,
        Artifact::json("char_slope.json", &report)?,
    ])
}
