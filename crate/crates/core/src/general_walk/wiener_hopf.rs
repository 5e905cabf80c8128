use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{IncrementLaw, Pmf, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Validity {
    pub nonnegative: bool,
    pub total_mass_one: bool,
    pub symmetric: bool,
}

impl Validity {
    pub fn all(&self) -> bool {
        self.nonnegative && self.total_mass_one && self.symmetric
    }
}

/// A symmetric law `mu` on the integers built from a prescribed
/// non-strict ladder-height law `mu0`.
#[derive(Debug, Clone)]
pub struct WienerHopfResult<T = f64> {
    pub mu0: Pmf<T>,
    /// `mu0` on `k >= 1`, renormalized.
    pub mu_times: Pmf<T>,
    pub mu: Pmf<T>,
    pub validity: Validity,
    /// Mass of `mu` lost to truncation at `n_max` (an upper bound).
    pub remainder: T,
}

/// `mu = mu0(0) delta_0 + (1 - mu0(0)) (mu_x + mu_x' - mu_x * mu_x')`, where
/// `mu_x` is the positive part of `mu0` renormalized and `mu_x'` its
/// reflection.
///
/// Requires `mu0` non-increasing on `N_0` with `mu0(0) < 1`. Indices beyond
/// `n_max` are dropped and their mass reported in `remainder`.
pub fn wiener_hopf_construct<T: Scalar>(mu0: &Pmf<T>, n_max: i64) -> Result<WienerHopfResult<T>> {
    if n_max < 1 {
        return Err(Error::Argument(format!("n_max must be >= 1, got {n_max}")));
    }
    if let Some((&k, _)) = mu0.atoms().iter().next() {
        if k < 0 {
            return Err(Error::LadderLaw(format!("mass at negative index {k}")));
        }
    }
    if mu0.atoms().values().any(|p| p.is_negative()) {
        return Err(Error::LadderLaw("negative mass".into()));
    }
    let top = mu0.atoms().keys().next_back().copied().unwrap_or(0);
    for n in 0..top {
        if mu0.get(n) < mu0.get(n + 1) {
            return Err(Error::LadderLaw(format!("not non-increasing: mu0({n}) < mu0({})", n + 1)));
        }
    }
    let m00 = mu0.get(0);
    let positive = T::one() - m00.clone();
    if !positive.is_positive() {
        return Err(Error::LadderLaw("degenerate: mu0 has no mass on k >= 1".into()));
    }

    let kept: Vec<(i64, T)> =
        mu0.iter().filter(|(k, _)| *k >= 1 && *k <= n_max).map(|(k, p)| (k, p.clone() / positive.clone())).collect();
    let kept_mass = kept.iter().fold(T::zero(), |a, (_, p)| a + p.clone());
    let mu_times = Pmf::new(kept.clone()).with_remainder(T::one() - kept_mass);

    // (mu_x * mu_x')(n) = sum_k mu_x(k + n) mu_x(k), computed for n >= 0 and mirrored
    let dense: BTreeMap<i64, T> = kept.iter().cloned().collect();
    let mut cross: Vec<(i64, T)> = Vec::new();
    for n in 0..=n_max {
        let c = kept
            .iter()
            .filter_map(|(k, p)| dense.get(&(k + n)).map(|q| q.clone() * p.clone()))
            .fold(T::zero(), |a, b| a + b);
        if !c.is_zero() {
            cross.push((n, c.clone()));
            if n > 0 {
                cross.push((-n, c));
            }
        }
    }

    let mut atoms: Vec<(i64, T)> = vec![(0, m00.clone())];
    for (k, p) in &kept {
        atoms.push((*k, positive.clone() * p.clone()));
        atoms.push((-*k, positive.clone() * p.clone()));
    }
    for (n, c) in cross {
        atoms.push((n, -(positive.clone() * c)));
    }
    let mu = Pmf::new(atoms);

    // mu_x and its reflection each miss r, the cross term at most 2r
    let r = mu_times.remainder().clone();
    let remainder = positive * (r.clone() + r.clone() + r.clone() + r) + mu0.remainder().clone();
    let total = mu.total();
    let defect = (T::one() - total).to_f64();
    let validity = Validity {
        nonnegative: mu.atoms().values().all(|p| !p.is_negative()),
        total_mass_one: defect.abs() <= remainder.to_f64() + 1e-12,
        symmetric: mu.iter().all(|(k, p)| mu.get(-k) == *p),
    };
    debug_assert!(validity.nonnegative, "monotone mu0 must give a non-negative mu");
    Ok(WienerHopfResult { mu0: mu0.clone(), mu_times, mu, validity, remainder })
}

impl WienerHopfResult<BigRational> {
    pub fn law(&self) -> Result<IncrementLaw> {
        let atoms: Vec<(i64, BigRational)> = self.mu.iter().map(|(k, p)| (k, p.clone())).collect();
        IncrementLaw::signed_pmf(&atoms)
    }

    pub fn to_f64(&self) -> WienerHopfResult<f64> {
        let f = |p: &BigRational| p.to_f64();
        WienerHopfResult {
            mu0: self.mu0.map_scalar(f),
            mu_times: self.mu_times.map_scalar(f),
            mu: self.mu.map_scalar(f),
            validity: self.validity,
            remainder: self.remainder.to_f64(),
        }
    }
}

impl WienerHopfResult<f64> {
    /// The constructed law, renormalized over the kept indices.
    pub fn law(&self) -> Result<IncrementLaw> {
        let total = self.mu.total();
        let atoms: Vec<(i64, f64)> = self.mu.iter().map(|(k, p)| (k, p / total)).collect();
        IncrementLaw::signed_pmf_f64(&atoms)
    }
}
