use serde::Serialize;

use crate::error::Result;
use crate::measures::IncrementLaw;
use crate::simulate::{ladder_trace, reflection_trace, sample_path, LadderMode, PathMode, SeededStream, WalkPath};

/// Checks of the embedded reflected walk along one simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EmbeddedReport {
    pub steps: usize,
    /// Completed non-strict ascending ladder epochs.
    pub epochs: usize,
    /// `Xbar_k = X_{lambda(k)}` for every recorded `k`.
    pub embedded_matches: bool,
    /// Reflection times of `Xbar` mapped through `lambda` equal those of
    /// `X`, with equal reflection values.
    pub reflections_match: bool,
    /// `X_n >= X_{lambda(k)}` whenever `lambda(k) <= n < lambda(k+1)`.
    pub between_epochs_ok: bool,
}

impl EmbeddedReport {
    pub fn all(&self) -> bool {
        self.embedded_matches && self.reflections_match && self.between_epochs_ok
    }
}

/// Simulate `n` signed increments, run the reflected walk from `x0` on them
/// and on their ladder increments, and compare the two.
pub fn embedded_equivalence(m: &IncrementLaw, x0: f64, n: usize, stream: SeededStream) -> Result<EmbeddedReport> {
    let path = sample_path(m, PathMode::Reflected, x0, n, stream)?;
    let classical = WalkPath::from_increments(PathMode::Classical, 0.0, path.increments.clone())?;
    let ladder = ladder_trace(&classical, LadderMode::NonstrictAscending)?;
    let embedded = WalkPath::from_increments(PathMode::Reflected, x0, ladder.increments.clone())?;
    let at = |k: usize| path.values[ladder.epochs[k] as usize];

    let embedded_matches = (0..ladder.epochs.len()).all(|k| embedded.values[k] == at(k));

    let refl = reflection_trace(&path)?;
    let refl_bar = reflection_trace(&embedded)?;
    let mapped: Vec<u64> = refl_bar.times.iter().map(|&k| ladder.epochs[k as usize]).collect();
    let reflections_match = mapped == refl.times && refl_bar.values == refl.values;

    let mut between_epochs_ok = true;
    for (k, &start) in ladder.epochs.iter().enumerate() {
        let end = ladder.epochs.get(k + 1).map_or(path.values.len(), |&e| e as usize);
        let base = at(k);
        between_epochs_ok &= path.values[start as usize..end].iter().all(|&x| x >= base);
    }
    Ok(EmbeddedReport { steps: n, epochs: ladder.count(), embedded_matches, reflections_match, between_epochs_ok })
}
