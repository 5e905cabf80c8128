use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SeededStream, Walker};
use crate::error::{Error, Result};
use crate::measures::IncrementLaw;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub x0: f64,
    pub steps: u64,
    pub paths: u64,
    pub seed: u64,
    pub workers: usize,
    /// Occupation window `[lo, hi)` split into `bins` equal bins.
    pub window: (f64, f64),
    pub bins: usize,
    /// Closed interval whose visits are counted.
    pub return_interval: (f64, f64),
    /// A path escapes if `min X_k` over `k > steps/2` exceeds this.
    pub escape_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Returns {
    pub interval: [f64; 2],
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Escape {
    pub threshold: f64,
    pub fraction: f64,
}

/// Aggregate over all paths of the visits `X_1..X_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub paths: u64,
    pub steps: u64,
    pub bins: Vec<EnsembleBin>,
    pub returns: Returns,
    pub escape: Escape,
}

impl EnsembleReport {
    /// Occupation frequency per bin among all recorded visits.
    pub fn frequencies(&self) -> Vec<f64> {
        let total = (self.paths * self.steps) as f64;
        self.bins.iter().map(|b| b.count as f64 / total).collect()
    }
}

#[derive(Clone)]
struct Counters {
    bins: Vec<u64>,
    returns: u64,
    escaped: u64,
}

impl Counters {
    fn zero(bins: usize) -> Self {
        Counters { bins: vec![0; bins], returns: 0, escaped: 0 }
    }

    fn merge(mut self, other: Counters) -> Counters {
        for (a, b) in self.bins.iter_mut().zip(other.bins) {
            *a += b;
        }
        self.returns += other.returns;
        self.escaped += other.escaped;
        self
    }
}

fn validate(cfg: &EnsembleConfig) -> Result<()> {
    let bad = |msg: &str| Err(Error::Argument(msg.to_string()));
    if cfg.paths == 0 || cfg.steps == 0 || cfg.workers == 0 || cfg.bins == 0 {
        return bad("paths, steps, workers and bins must be at least 1");
    }
    if !(cfg.window.0 < cfg.window.1) {
        return bad("occupation window must satisfy lo < hi");
    }
    if !(cfg.return_interval.0 <= cfg.return_interval.1) {
        return bad("return interval must satisfy a <= b");
    }
    if !(cfg.x0 >= 0.0 && cfg.x0.is_finite()) {
        return bad("x0 must be finite and non-negative");
    }
    Ok(())
}

fn run_path(m: &IncrementLaw, cfg: &EnsembleConfig, stream_id: u64) -> Counters {
    let mut c = Counters::zero(cfg.bins);
    let (lo, hi) = cfg.window;
    let width = (hi - lo) / cfg.bins as f64;
    let (a, b) = cfg.return_interval;
    let half = cfg.steps / 2;
    let mut tail_min = f64::INFINITY;
    let mut walker = Walker::new(m, cfg.x0, SeededStream::new(cfg.seed, stream_id));
    for k in 1..=cfg.steps {
        let (_, x) = walker.step();
        if x >= lo && x < hi {
            let i = (((x - lo) / width) as usize).min(cfg.bins - 1);
            c.bins[i] += 1;
        }
        if x >= a && x <= b {
            c.returns += 1;
        }
        if k > half {
            tail_min = tail_min.min(x);
        }
    }
    if tail_min > cfg.escape_threshold {
        c.escaped = 1;
    }
    c
}

/// Run `paths` independent reflected walks (path `i` on stream `i`) on a
/// pool of `workers` threads. Counters are integers, so the report does not
/// depend on scheduling.
pub fn ensemble_run(m: &IncrementLaw, cfg: &EnsembleConfig) -> Result<EnsembleReport> {
    validate(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Argument(format!("cannot start worker pool: {e}")))?;
    let totals = pool.install(|| {
        (0..cfg.paths).into_par_iter().map(|i| run_path(m, cfg, i)).reduce(|| Counters::zero(cfg.bins), Counters::merge)
    });
    let (lo, hi) = cfg.window;
    let width = (hi - lo) / cfg.bins as f64;
    let bins = totals
        .bins
        .iter()
        .enumerate()
        .map(|(i, &count)| EnsembleBin {
            lo: lo + i as f64 * width,
            hi: if i + 1 == cfg.bins { hi } else { lo + (i + 1) as f64 * width },
            count,
        })
        .collect();
    Ok(EnsembleReport {
        paths: cfg.paths,
        steps: cfg.steps,
        bins,
        returns: Returns { interval: [cfg.return_interval.0, cfg.return_interval.1], count: totals.returns },
        escape: Escape { threshold: cfg.escape_threshold, fraction: totals.escaped as f64 / cfg.paths as f64 },
    })
}
