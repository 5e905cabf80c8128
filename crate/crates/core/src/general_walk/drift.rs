use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::measures::{moments, Extended, IncrementLaw};

/// Which drift regime a signed law falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftCase {
    /// `E(Y-) < E(Y+) <= inf`.
    A,
    /// `0 < E(Y-) = E(Y+) < inf`.
    B,
    /// `E(Y-) > E(Y+)`: `S_n -> -inf` and there are finitely many reflections.
    NegativeDrift,
    /// `E(Y-) = E(Y+) = inf`: the comparison of means decides nothing.
    Oscillating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftReport {
    pub case: DriftCase,
    pub pos_mean: Extended,
    pub neg_mean: Extended,
    /// Case (a) with `E(sqrt Y+) < inf`, or case (b) with `E((Y+)^(3/2)) < inf`.
    pub recurrence_sufficient: bool,
}

pub fn drift_report(m: &IncrementLaw) -> DriftReport {
    let mom = moments(m);
    let case = match (mom.pos_mean, mom.neg_mean) {
        (Extended::Infinite, Extended::Infinite) => DriftCase::Oscillating,
        (Extended::Infinite, Extended::Finite(_)) => DriftCase::A,
        (Extended::Finite(_), Extended::Infinite) => DriftCase::NegativeDrift,
        (Extended::Finite(pos), Extended::Finite(neg)) => match exact_drift(m) {
            Some(d) if d.is_zero() => DriftCase::B,
            Some(d) if d.is_positive() => DriftCase::A,
            Some(_) => DriftCase::NegativeDrift,
            // symmetric analytic laws have equal finite means
            None if m.is_signed() => DriftCase::B,
            None if neg < pos => DriftCase::A,
            None => DriftCase::NegativeDrift,
        },
    };
    let recurrence_sufficient = match case {
        DriftCase::A => mom.half_moment.is_finite(),
        DriftCase::B => mom.three_half_moment.is_finite(),
        _ => false,
    };
    DriftReport { case, pos_mean: mom.pos_mean, neg_mean: mom.neg_mean, recurrence_sufficient }
}

/// `E(Y)` in exact arithmetic for finite rational laws.
fn exact_drift(m: &IncrementLaw) -> Option<BigRational> {
    let atoms = m.exact_atoms()?;
    Some(atoms.iter().map(|(k, p)| BigRational::from_integer((*k).into()) * p).fold(BigRational::zero(), |a, b| a + b))
}
