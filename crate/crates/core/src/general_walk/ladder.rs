use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use super::drift::{drift_report, DriftCase};
use crate::error::{Error, Result};
use crate::measures::{IncrementLaw, Pmf};
use crate::simulate::{LatticeSampler, SeededStream};

/// Default cap on the steps between consecutive ladder epochs. Excursions of
/// a centred walk have `P(T > n) ~ c n^-1/2`, so the cap must be far beyond
/// any practical path length.
pub const DEFAULT_WATCHDOG: u64 = 1_000_000_000_000_000;

/// Empirical law of the non-strict ascending ladder heights along one path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderEstimate {
    pub epochs: u64,
    /// Steps of the classical walk that were simulated.
    pub steps: u64,
    pub counts: BTreeMap<i64, u64>,
}

impl LadderEstimate {
    pub fn pmf(&self) -> Pmf<f64> {
        let n = self.epochs as f64;
        Pmf::new(self.counts.iter().map(|(&h, &c)| (h, c as f64 / n)))
    }
}

/// First `epochs` non-strict ladder increments of one classical path from `stream`.
pub fn ladder_height_empirical(m: &IncrementLaw, epochs: u64, stream: SeededStream) -> Result<LadderEstimate> {
    ladder_height_empirical_with_watchdog(m, epochs, stream, DEFAULT_WATCHDOG)
}

/// As `ladder_height_empirical`, failing when more than `watchdog` steps
/// pass without a new ladder epoch.
pub fn ladder_height_empirical_with_watchdog(
    m: &IncrementLaw,
    epochs: u64,
    stream: SeededStream,
    watchdog: u64,
) -> Result<LadderEstimate> {
    if !m.is_lattice() {
        return Err(Error::WrongKind { op: "ladder_height_empirical", what: format!("continuous law `{m}`") });
    }
    if epochs == 0 {
        return Err(Error::Argument("need at least one ladder epoch".into()));
    }
    if drift_report(m).case == DriftCase::NegativeDrift {
        return Err(Error::Drift(format!("E(Y-) > E(Y+) for `{m}`")));
    }
    let mut sampler = LatticeSampler::new(m);
    let blocks = m.atoms().map(BlockSampler::new);
    let mut rng = stream.rng();
    let mut counts = BTreeMap::new();
    let (mut s, mut level) = (0i128, 0i128);
    let (mut steps, mut since) = (0u64, 0u64);
    let mut found = 0;
    while found < epochs {
        let depth = level - s;
        match &blocks {
            Some(b) if depth > 2 * b.max_up => {
                let len = b.block_len(depth);
                s += b.sum(len, &mut rng);
                steps += len;
                since += len;
                continue;
            }
            _ => {
                s += sampler.next(&mut rng);
                steps += 1;
                since += 1;
            }
        }
        if s >= level {
            let h = i64::try_from(s - level).unwrap_or(i64::MAX);
            *counts.entry(h).or_insert(0) += 1;
            level = s;
            since = 0;
            found += 1;
        } else if since > watchdog {
            return Err(Error::Drift(format!("no ladder epoch within {watchdog} steps")));
        }
    }
    Ok(LadderEstimate { epochs, steps, counts })
}

/// Sums of `L` increments of a finite law, drawn as `sum_k k N_k` with
/// `(N_k)` multinomial.
///
/// A block of `L` steps rises by at most `L * max_up`, so below depth
/// `L * max_up` it cannot produce a ladder epoch and the path may jump over
/// it; the sampled path is the same in law as the step-by-step one.
struct BlockSampler {
    atoms: Vec<(i64, f64)>,
    max_up: i128,
}

impl BlockSampler {
    fn new(atoms: &[(i64, f64)]) -> Self {
        let max_up = atoms.iter().map(|a| a.0).max().unwrap_or(0).max(1) as i128;
        BlockSampler { atoms: atoms.to_vec(), max_up }
    }

    /// Largest power of two `L` with `L * max_up < depth`.
    fn block_len(&self, depth: i128) -> u64 {
        let room = ((depth - 1) / self.max_up).min(1 << 40) as u64;
        1u64 << (63 - room.leading_zeros())
    }

    fn sum<R: Rng>(&self, len: u64, rng: &mut R) -> i128 {
        let mut left = len;
        let mut rest = 1.0;
        let mut total = 0i128;
        for (i, &(k, p)) in self.atoms.iter().enumerate() {
            if left == 0 {
                break;
            }
            let n = if i + 1 == self.atoms.len() || p >= rest {
                left
            } else {
                Binomial::new(left, (p / rest).clamp(0.0, 1.0)).expect("valid binomial").sample(rng)
            };
            total += k as i128 * n as i128;
            left -= n;
            rest -= p;
        }
        total
    }
}

/// `sum_k |a(k) - b(k)| / 2`, counting the remainders as unmatched mass.
pub fn total_variation(a: &Pmf<f64>, b: &Pmf<f64>) -> f64 {
    let keys: std::collections::BTreeSet<i64> = a.atoms().keys().chain(b.atoms().keys()).copied().collect();
    let diff: f64 = keys.iter().map(|&k| (a.get(k) - b.get(k)).abs()).sum();
    (diff + a.remainder() + b.remainder()) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::parse_law;

    #[test]
    fn simple_walk_heights() {
        let m = parse_law("int:pmf(-1:0.5,1:0.5)").unwrap();
        let est = ladder_height_empirical(&m, 20_000, SeededStream::new(5, 0)).unwrap();
        let target = Pmf::new([(0, 0.5), (1, 0.5)]);
        assert!(total_variation(&est.pmf(), &target) < 0.02);
        assert_eq!(est.counts.keys().copied().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn half_line_law_every_step_is_an_epoch() {
        let m = parse_law("lat:pmf(1:0.5,2:0.5)").unwrap();
        let est = ladder_height_empirical(&m, 1000, SeededStream::new(1, 0)).unwrap();
        assert_eq!(est.steps, 1000);
        assert!(total_variation(&est.pmf(), &Pmf::new([(1, 0.5), (2, 0.5)])) < 0.06);
    }

    #[test]
    fn single_epoch_is_a_point_mass() {
        let m = parse_law("int:pmf(-1:0.5,1:0.5)").unwrap();
        let est = ladder_height_empirical(&m, 1, SeededStream::new(9, 2)).unwrap();
        assert_eq!(est.epochs, 1);
        assert_eq!(est.counts.len(), 1);
        assert_eq!(est.pmf().total(), 1.0);
    }

    #[test]
    fn negative_drift_and_watchdog() {
        let m = parse_law("int:pmf(-2:0.5,1:0.5)").unwrap();
        assert!(matches!(ladder_height_empirical(&m, 10, SeededStream::new(1, 0)), Err(Error::Drift(_))));
        let sym = parse_law("int:pmf(-1:0.5,1:0.5)").unwrap();
        // an excursion longer than one step trips a watchdog of 1
        let r = ladder_height_empirical_with_watchdog(&sym, 1000, SeededStream::new(1, 0), 1);
        assert!(matches!(r, Err(Error::Drift(_))));
    }

    #[test]
    fn block_sums_have_the_right_moments() {
        let b = BlockSampler::new(&[(-2, 1.0 / 3.0), (-1, 1.0 / 6.0), (1, 1.0 / 6.0), (2, 1.0 / 3.0)]);
        assert_eq!(b.block_len(5), 2);
        assert_eq!(b.block_len(4), 1);
        let mut rng = SeededStream::new(8, 0).rng();
        let n = 20_000;
        let len = 64;
        let xs: Vec<f64> = (0..n).map(|_| b.sum(len, &mut rng) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        // step variance 2 (1/3 * 4 + 1/6) = 3
        assert!(mean.abs() < 0.2, "{mean}");
        assert!((var / (3.0 * len as f64) - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn blocks_do_not_change_the_law() {
        // skipping must not bias heights: compare with a watchdog-free plain run on a short horizon
        let m = parse_law("int:pmf(-2:1/3,-1:1/6,1:1/6,2:1/3)").unwrap();
        let est = ladder_height_empirical(&m, 5_000, SeededStream::new(6, 0)).unwrap();
        let mut plain = LatticeSampler::new(&m);
        let mut rng = SeededStream::new(6, 1).rng();
        let (mut s, mut level, mut found) = (0i128, 0i128, 0);
        let mut counts = BTreeMap::new();
        while found < 5_000 {
            s += plain.next(&mut rng);
            if s >= level {
                *counts.entry((s - level) as i64).or_insert(0u64) += 1;
                level = s;
                found += 1;
            }
        }
        let plain_est = LadderEstimate { epochs: 5_000, steps: 0, counts };
        assert!(total_variation(&est.pmf(), &plain_est.pmf()) < 0.03);
    }

    #[test]
    fn deterministic_given_stream() {
        let m = parse_law("int:pmf(-2:1/3,-1:1/6,1:1/6,2:1/3)").unwrap();
        let a = ladder_height_empirical(&m, 3000, SeededStream::new(4, 1)).unwrap();
        let b = ladder_height_empirical(&m, 3000, SeededStream::new(4, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tv_counts_remainders() {
        let a = Pmf::new([(0, 0.5)]).with_remainder(0.5);
        let b = Pmf::new([(0, 0.5), (1, 0.5)]);
        assert!((total_variation(&a, &b) - 0.5).abs() < 1e-15);
    }
}
