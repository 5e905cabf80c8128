//! Seeded trajectories of the classical walk `S_n` and the reflected walk
//! `X_n`, reflection times, ladder epochs and parallel ensembles.

mod ensemble;
mod sampler;

pub use ensemble::{ensemble_run, EnsembleBin, EnsembleConfig, EnsembleReport, Escape, Returns};
pub(crate) use sampler::LatticeSampler;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::IncrementLaw;

/// A `(seed, stream_id)` pair. Path `i` of an ensemble uses `stream_id = i`.
///
/// The generator is ChaCha8 seeded with `seed` (via `seed_from_u64`) and
/// switched to stream `stream_id`; this choice is part of the output contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        SeededStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathMode {
    Reflected,
    Classical,
}

/// A stored trajectory together with the increments that drove it.
#[derive(Debug, Clone)]
pub struct WalkPath {
    pub mode: PathMode,
    pub x0: f64,
    /// `X_0..X_n` (reflected) or `S_0..S_n` (classical).
    pub values: Vec<f64>,
    /// `Y_1..Y_n`.
    pub increments: Vec<f64>,
    pub law: Option<IncrementLaw>,
}

impl WalkPath {
    /// Run the recursion on a given increment sequence.
    pub fn from_increments(mode: PathMode, x0: f64, increments: Vec<f64>) -> Result<Self> {
        check_start(mode, x0)?;
        let mut values = Vec::with_capacity(increments.len() + 1);
        values.push(x0);
        let mut x = x0;
        for &y in &increments {
            x = match mode {
                PathMode::Reflected => (x - y).abs(),
                PathMode::Classical => x + y,
            };
            values.push(x);
        }
        Ok(WalkPath { mode, x0, values, increments, law: None })
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }
}

fn check_start(mode: PathMode, x0: f64) -> Result<()> {
    if !x0.is_finite() || (mode == PathMode::Reflected && x0 < 0.0) {
        return Err(Error::Argument(format!("start point must be finite and non-negative, got {x0}")));
    }
    Ok(())
}

/// Draw `n` increments from `stream` and run the recursion.
pub fn sample_path(m: &IncrementLaw, mode: PathMode, x0: f64, n: usize, stream: SeededStream) -> Result<WalkPath> {
    check_start(mode, x0)?;
    let mut rng = stream.rng();
    let increments: Vec<f64> = (0..n).map(|_| m.sample(&mut rng)).collect();
    let mut path = WalkPath::from_increments(mode, x0, increments)?;
    path.law = Some(m.clone());
    Ok(path)
}

/// Reflection times `r(1) < r(2) < ...` and values `R_k = X_{r(k)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionTrace {
    pub times: Vec<u64>,
    pub values: Vec<f64>,
}

/// Steps `n` with `X_{n-1} - Y_n <= 0`: the walk would leave the half-line
/// (or land exactly on 0, which counts as a reflection with `R = 0`).
pub fn reflection_trace(path: &WalkPath) -> Result<ReflectionTrace> {
    if path.mode != PathMode::Reflected {
        return Err(Error::WrongKind { op: "reflection_trace", what: "classical path".into() });
    }
    let mut trace = ReflectionTrace { times: Vec::new(), values: Vec::new() };
    for (i, &y) in path.increments.iter().enumerate() {
        if path.values[i] - y <= 0.0 {
            trace.times.push(i as u64 + 1);
            trace.values.push(path.values[i + 1]);
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderMode {
    NonstrictAscending,
    StrictAscending,
    StrictDescending,
}

/// Ladder epochs of a classical path.
///
/// `epochs[0] = 0` and `heights[0] = S_0`; `increments[k-1] = heights[k] - heights[k-1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderTrace {
    pub mode: LadderMode,
    pub epochs: Vec<u64>,
    pub heights: Vec<f64>,
    pub increments: Vec<f64>,
}

impl LadderTrace {
    /// Number of completed ladder steps.
    pub fn count(&self) -> usize {
        self.increments.len()
    }
}

pub fn ladder_trace(path: &WalkPath, mode: LadderMode) -> Result<LadderTrace> {
    if path.mode != PathMode::Classical {
        return Err(Error::WrongKind { op: "ladder_trace", what: "reflected path".into() });
    }
    let mut trace = LadderTrace { mode, epochs: vec![0], heights: vec![path.values[0]], increments: Vec::new() };
    let mut level = path.values[0];
    for (n, &s) in path.values.iter().enumerate().skip(1) {
        let hit = match mode {
            LadderMode::NonstrictAscending => s >= level,
            LadderMode::StrictAscending => s > level,
            LadderMode::StrictDescending => s < level,
        };
        if hit {
            trace.epochs.push(n as u64);
            trace.heights.push(s);
            trace.increments.push(s - level);
            level = s;
        }
    }
    Ok(trace)
}

/// Streaming reflected walk: yields `(Y_n, X_n)` without storing the path.
pub struct Walker<'a> {
    law: &'a IncrementLaw,
    rng: ChaCha8Rng,
    x: f64,
}

impl<'a> Walker<'a> {
    pub fn new(law: &'a IncrementLaw, x0: f64, stream: SeededStream) -> Self {
        Walker { law, rng: stream.rng(), x: x0 }
    }

    pub fn position(&self) -> f64 {
        self.x
    }

    pub fn step(&mut self) -> (f64, f64) {
        let y = self.law.sample(&mut self.rng);
        self.x = (self.x - y).abs();
        (y, self.x)
    }
}
