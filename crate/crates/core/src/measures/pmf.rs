use std::collections::BTreeMap;

use num_integer::Integer;

use super::Scalar;
use crate::error::{Error, Result};

/// A (possibly truncated) probability mass function on the integer grid.
///
/// `remainder` is the mass that has been cut off by truncation, so
/// `sum(atoms) + remainder == 1` for a probability law.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<T = f64> {
    atoms: BTreeMap<i64, T>,
    remainder: T,
}

impl<T: Scalar> Pmf<T> {
    /// Build from atoms; zero masses are dropped.
    pub fn new(atoms: impl IntoIterator<Item = (i64, T)>) -> Self {
        let mut map: BTreeMap<i64, T> = BTreeMap::new();
        for (k, p) in atoms {
            let slot = map.entry(k).or_insert_with(T::zero);
            *slot = slot.clone() + p;
        }
        map.retain(|_, p| !p.is_zero());
        Pmf { atoms: map, remainder: T::zero() }
    }

    pub fn point(k: i64) -> Self {
        Pmf::new([(k, T::one())])
    }

    pub fn with_remainder(mut self, remainder: T) -> Self {
        self.remainder = remainder;
        self
    }

    pub fn get(&self, k: i64) -> T {
        self.atoms.get(&k).cloned().unwrap_or_else(T::zero)
    }

    pub fn atoms(&self) -> &BTreeMap<i64, T> {
        &self.atoms
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &T)> + '_ {
        self.atoms.iter().map(|(k, p)| (*k, p))
    }

    pub fn remainder(&self) -> &T {
        &self.remainder
    }

    pub fn total(&self) -> T {
        self.atoms.values().fold(T::zero(), |acc, p| acc + p.clone())
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// gcd of the support (0 for the point mass at 0 or an empty pmf).
    pub fn span(&self) -> i64 {
        self.atoms.keys().fold(0i64, |g, &k| g.gcd(&k))
    }

    /// The reflection `B -> mu(-B)`.
    pub fn reflect(&self) -> Self {
        Pmf { atoms: self.atoms.iter().map(|(k, p)| (-k, p.clone())).collect(), remainder: self.remainder.clone() }
    }

    pub fn scale(&self, factor: &T) -> Self {
        Pmf::new(self.atoms.iter().map(|(k, p)| (*k, p.clone() * factor.clone())))
            .with_remainder(self.remainder.clone() * factor.clone())
    }

    /// Signed-measure sum (masses may become negative).
    pub fn add(&self, other: &Self) -> Self {
        Pmf::new(self.iter().map(|(k, p)| (k, p.clone())).chain(other.iter().map(|(k, p)| (k, p.clone()))))
            .with_remainder(self.remainder.clone() + other.remainder.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Pmf::new(self.iter().map(|(k, p)| (k, p.clone())).chain(other.iter().map(|(k, p)| (k, -p.clone()))))
            .with_remainder(self.remainder.clone() - other.remainder.clone())
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Pmf<U> {
        Pmf::new(self.atoms.iter().map(|(k, p)| (*k, f(p)))).with_remainder(f(&self.remainder))
    }
}

/// `(m1 * m2)(n) = sum_k m1(k) m2(n - k)`, keeping indices with `|n| <= n_max`.
///
/// Mass falling outside the window is moved into the remainder, together with
/// the mass `r1 + r2 - r1 r2` that was already missing from the inputs.
pub fn convolve<T: Scalar>(m1: &Pmf<T>, m2: &Pmf<T>, n_max: i64) -> Result<Pmf<T>> {
    let (s1, s2) = (m1.span(), m2.span());
    if s1 != 0 && s2 != 0 && s1 != s2 {
        return Err(Error::SpanMismatch(s1, s2));
    }
    let mut out: BTreeMap<i64, T> = BTreeMap::new();
    let mut dropped = T::zero();
    for (&a, pa) in &m1.atoms {
        for (&b, pb) in &m2.atoms {
            let mass = pa.clone() * pb.clone();
            let n = a + b;
            if n.abs() <= n_max {
                let slot = out.entry(n).or_insert_with(T::zero);
                *slot = slot.clone() + mass;
            } else {
                dropped = dropped + mass;
            }
        }
    }
    let r1 = m1.remainder.clone();
    let r2 = m2.remainder.clone();
    let missing = r1.clone() + r2.clone() - r1 * r2;
    Ok(Pmf::new(out).with_remainder(dropped + missing))
}
