use num_rational::BigRational;

use super::{IncrementLaw, Pmf, Scalar};
use crate::error::{Error, Result};

/// The lattice potential `U(n) = sum_m mu^(m)(n)` on `0..=n_max`.
///
/// It solves `sum_k A(k) U(n-k) = delta_0(n)` with `A = delta_0 - mu`, so
/// `U(0) = 1 / (1 - mu(0))`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalSequence<T = f64> {
    values: Vec<T>,
}

impl<T: Scalar> RenewalSequence<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn n_max(&self) -> i64 {
        self.values.len() as i64 - 1
    }

    /// `U(n)`, zero for negative `n`.
    pub fn get(&self, n: i64) -> T {
        if n < 0 {
            T::zero()
        } else {
            self.values[n as usize].clone()
        }
    }

    fn from_masses(mass: impl Fn(i64) -> T, window: Option<i64>, n_max: i64) -> Self {
        let denom = T::one() - mass(0);
        let masses: Vec<T> = (1..=window.unwrap_or(n_max).min(n_max).max(0)).map(&mass).collect();
        let mut values: Vec<T> = Vec::with_capacity(n_max as usize + 1);
        for n in 0..=n_max {
            let mut acc = if n == 0 { T::one() } else { T::zero() };
            for (i, m) in masses.iter().enumerate().take(n as usize) {
                if !m.is_zero() {
                    acc = acc + m.clone() * values[n as usize - 1 - i].clone();
                }
            }
            values.push(acc / denom.clone());
        }
        RenewalSequence { values }
    }
}

impl RenewalSequence<f64> {
    /// `max_n |sum_k A(k) U(n-k) - delta_0(n)|` over the stored range.
    pub fn identity_residual(&self, m: &IncrementLaw) -> f64 {
        let masses: Vec<f64> = (0..=self.n_max()).map(|k| m.mass(k)).collect();
        (0..=self.n_max())
            .map(|n| {
                let conv: f64 = (0..=n).map(|k| masses[k as usize] * self.get(n - k)).sum();
                let delta = if n == 0 { 1.0 } else { 0.0 };
                (self.get(n) - conv - delta).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Potential of a half-line lattice law, by renewal recursion.
///
/// Cost is `O(n_max * w)` where `w` is the support window (`N` for finite
/// support, `n_max` otherwise).
pub fn renewal_sequence(m: &IncrementLaw, n_max: i64) -> Result<RenewalSequence<f64>> {
    m.require_half_line_lattice("renewal_sequence")?;
    check_n_max(n_max)?;
    let window = m.support_max().map(|n| n as i64);
    Ok(RenewalSequence::from_masses(|k| m.mass(k), window, n_max))
}

/// Exact rational potential of a finite half-line lattice law.
pub fn renewal_sequence_exact(m: &IncrementLaw, n_max: i64) -> Result<RenewalSequence<BigRational>> {
    m.require_half_line_lattice("renewal_sequence_exact")?;
    check_n_max(n_max)?;
    let pmf = m.exact_pmf().ok_or_else(|| Error::WrongKind {
        op: "renewal_sequence_exact",
        what: format!("infinite-support law `{m}`"),
    })?;
    let window = m.support_max().map(|n| n as i64);
    Ok(RenewalSequence::from_masses(|k| pmf.get(k), window, n_max))
}

/// Potential of a pmf on the non-negative integers (it may be a point mass).
pub fn renewal_from_pmf<T: Scalar>(pmf: &Pmf<T>, n_max: i64) -> Result<RenewalSequence<T>> {
    check_n_max(n_max)?;
    if let Some((&k, _)) = pmf.atoms().iter().next() {
        if k < 0 {
            return Err(Error::Validation(format!("renewal sequence needs non-negative support, found atom at {k}")));
        }
    }
    if pmf.get(0) >= T::one() {
        return Err(Error::Validation("renewal sequence of the point mass at 0 is infinite".into()));
    }
    let window = pmf.atoms().keys().next_back().copied();
    Ok(RenewalSequence::from_masses(|k| pmf.get(k), window, n_max))
}

fn check_n_max(n_max: i64) -> Result<()> {
    if n_max < 0 {
        return Err(Error::Argument(format!("n_max must be non-negative, got {n_max}")));
    }
    Ok(())
}
