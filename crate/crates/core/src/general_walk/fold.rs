use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{IncrementLaw, LawKind, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldReport {
    pub window: i64,
    /// `max_{x,y <= window} |K_abs(x,y) - K_refl(x,y)|`.
    pub discrepancy: f64,
    /// Whether masses were compared in rational arithmetic.
    pub exact: bool,
}

/// Compare the transition kernel of `|S_n|`,
/// `K_abs(x, y) = mu(y - x) + mu(-y - x) - mu(-x) [y = 0]`,
/// with the reflected-walk kernel `K_refl(x, y) = P(|x - Y| = y)
/// = mu(x - y) + mu(x + y) [y > 0]` on states `0..=window`.
pub fn symmetric_abs_equivalence(m: &IncrementLaw, window: i64) -> Result<FoldReport> {
    if window < 0 {
        return Err(Error::Argument(format!("window must be >= 0, got {window}")));
    }
    check_symmetric(m)?;
    if let Some(atoms) = m.exact_atoms() {
        let map: BTreeMap<i64, BigRational> = atoms.iter().cloned().collect();
        let mu = |k: i64| map.get(&k).cloned().unwrap_or_else(BigRational::zero);
        let d = max_discrepancy(mu, window);
        return Ok(FoldReport { window, discrepancy: d.to_f64(), exact: true });
    }
    let d = max_discrepancy(|k| m.mass(k), window);
    Ok(FoldReport { window, discrepancy: d, exact: false })
}

fn max_discrepancy<T: Scalar>(mu: impl Fn(i64) -> T, window: i64) -> T {
    let mut worst = T::zero();
    for x in 0..=window {
        for y in 0..=window {
            let mut k_abs = mu(y - x) + mu(-y - x);
            if y == 0 {
                k_abs = k_abs - mu(-x);
            }
            let mut k_refl = mu(x - y);
            if y > 0 {
                k_refl = k_refl + mu(x + y);
            }
            let d = (k_abs - k_refl).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Whether `mu(k) = mu(-k)` for every `k`.
pub fn is_symmetric(m: &IncrementLaw) -> bool {
    check_symmetric(m).is_ok()
}

/// `mu(k) = mu(-k)` for every `k`, exactly for finite rational laws.
pub(crate) fn check_symmetric(m: &IncrementLaw) -> Result<()> {
    match m.kind() {
        LawKind::SignedSymmetricPowerLaw => Ok(()),
        LawKind::SignedLatticeFinite | LawKind::LatticeFinite => {
            let atoms = m.exact_atoms().unwrap_or_default();
            let map: BTreeMap<i64, &BigRational> = atoms.iter().map(|(k, p)| (*k, p)).collect();
            for (k, p) in &map {
                if map.get(&-k) != Some(p) {
                    return Err(Error::Asymmetric { k: k.abs() });
                }
            }
            Ok(())
        }
        LawKind::LatticePowerLaw | LawKind::LatticeLogPowerLaw => Err(Error::Asymmetric { k: 1 }),
        _ => Err(Error::WrongKind { op: "symmetric law", what: format!("continuous law `{m}`") }),
    }
}
