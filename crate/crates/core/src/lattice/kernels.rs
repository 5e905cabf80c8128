use num_rational::BigRational;
use num_traits::Zero;

use super::class::{EssentialClass, State, Tag};
use crate::error::{Error, Result};
use crate::measures::{IncrementLaw, RenewalSequence, Scalar};

/// Point masses and tails of a half-line lattice law in a chosen arithmetic.
pub trait LatticeMasses<T: Scalar> {
    /// `mu({k})`.
    fn mass(&self, k: i64) -> T;
    /// `mu((k, inf))`.
    fn tail_gt(&self, k: i64) -> T;
}

/// Floating-point view of any half-line lattice law.
pub struct FloatMasses<'a>(pub &'a IncrementLaw);

impl LatticeMasses<f64> for FloatMasses<'_> {
    fn mass(&self, k: i64) -> f64 {
        self.0.mass(k)
    }

    fn tail_gt(&self, k: i64) -> f64 {
        self.0.tail_gt(k)
    }
}

/// Floating-point masses tabulated on `0..len`, for repeated kernel sums.
struct TabulatedMasses<'a> {
    law: &'a IncrementLaw,
    mass: Vec<f64>,
}

impl<'a> TabulatedMasses<'a> {
    fn new(law: &'a IncrementLaw, len: usize) -> Self {
        TabulatedMasses { law, mass: (0..len as i64).map(|k| law.mass(k)).collect() }
    }
}

impl LatticeMasses<f64> for TabulatedMasses<'_> {
    fn mass(&self, k: i64) -> f64 {
        match self.mass.get(k as usize) {
            Some(&m) if k >= 0 => m,
            _ => self.law.mass(k),
        }
    }

    fn tail_gt(&self, k: i64) -> f64 {
        self.law.tail_gt(k)
    }
}

/// Exact rational view of a finite-support lattice law.
pub struct ExactMasses {
    atoms: Vec<(i64, BigRational)>,
    /// `tails[i]` = mass strictly above `atoms[i].0`.
    tails: Vec<BigRational>,
}

impl ExactMasses {
    pub fn new(m: &IncrementLaw) -> Result<Self> {
        let atoms = m
            .exact_atoms()
            .ok_or_else(|| Error::WrongKind {
                op: "exact lattice backend",
                what: format!("infinite-support law `{m}`"),
            })?
            .to_vec();
        let mut tails = vec![BigRational::zero(); atoms.len()];
        let mut acc = BigRational::zero();
        for i in (0..atoms.len()).rev() {
            tails[i] = acc.clone();
            acc += atoms[i].1.clone();
        }
        Ok(ExactMasses { atoms, tails })
    }

    pub fn atoms(&self) -> &[(i64, BigRational)] {
        &self.atoms
    }
}

impl LatticeMasses<BigRational> for ExactMasses {
    fn mass(&self, k: i64) -> BigRational {
        match self.atoms.binary_search_by_key(&k, |(i, _)| *i) {
            Ok(i) => self.atoms[i].1.clone(),
            Err(_) => BigRational::zero(),
        }
    }

    fn tail_gt(&self, k: i64) -> BigRational {
        let idx = self.atoms.partition_point(|(i, _)| *i <= k);
        if idx == 0 {
            BigRational::from_integer(1.into())
        } else {
            self.tails[idx - 1].clone()
        }
    }
}

fn mass_at<T: Scalar>(mu: &impl LatticeMasses<T>, k: Option<i64>) -> T {
    match k {
        Some(k) if k >= 0 => mu.mass(k),
        _ => T::zero(),
    }
}

/// One-step kernel of the reflected walk between class states.
pub fn kernel_p_with<T: Scalar>(mu: &impl LatticeMasses<T>, class: &EssentialClass, x: State, y: State) -> T {
    if y.is_zero() {
        return mass_at(mu, class.as_int(x));
    }
    let plus = mass_at(mu, class.sum_int(x, y));
    if class.compare(x, y).is_lt() {
        plus
    } else {
        plus + mass_at(mu, class.diff_int(x, y))
    }
}

pub fn kernel_p(m: &IncrementLaw, class: &EssentialClass, x: State, y: State) -> f64 {
    kernel_p_with(&FloatMasses(m), class, x, y)
}

/// Transition kernel of the process of reflections:
/// `q(0, y) = mu(y)` and `q(x, y) = sum_{0 <= w < x} U(w) mu(x + y - w)`.
pub fn kernel_q_with<T: Scalar>(
    mu: &impl LatticeMasses<T>,
    u: &RenewalSequence<T>,
    class: &EssentialClass,
    x: State,
    y: State,
) -> Result<T> {
    if x.is_zero() {
        return Ok(mass_at(mu, class.as_int(y)));
    }
    let Some(s) = class.sum_int(x, y) else {
        return Ok(T::zero());
    };
    // w ranges over integers in [0, x)
    let w_max = if x.tag == Tag::Zero { x.int - 1 } else { x.int };
    if w_max > u.n_max() {
        return Err(Error::RenewalTooShort { needed: w_max, available: u.values().len() });
    }
    let mut acc = T::zero();
    for w in 0..=w_max {
        let m = mass_at(mu, Some(s - w));
        if !m.is_zero() {
            acc = acc + u.get(w) * m;
        }
    }
    Ok(acc)
}

pub fn kernel_q(m: &IncrementLaw, u: &RenewalSequence<f64>, class: &EssentialClass, x: State, y: State) -> Result<f64> {
    kernel_q_with(&FloatMasses(m), u, class, x, y)
}

/// `(m P)(y)` for every class state `y`, using only states inside the cap.
pub fn apply_p<T: Scalar>(mu: &impl LatticeMasses<T>, class: &EssentialClass, masses: &[T]) -> Vec<T> {
    class
        .states
        .iter()
        .map(|&y| {
            let mut acc = T::zero();
            for (&x, mx) in class.states.iter().zip(masses) {
                if mx.is_zero() {
                    continue;
                }
                let p = kernel_p_with(mu, class, x, y);
                if !p.is_zero() {
                    acc = acc + mx.clone() * p;
                }
            }
            acc
        })
        .collect()
}

/// `(m Q)(y)` for every class state `y`, using only states inside the cap.
///
/// With `j = x - w` the sum becomes `sum_j mu(y + j) V(j)` where
/// `V(j) = sum_x m(x) U(x - j)`, which costs `O(n^2)` overall.
pub fn apply_q<T: Scalar>(
    mu: &impl LatticeMasses<T>,
    u: &RenewalSequence<T>,
    class: &EssentialClass,
    masses: &[T],
) -> Result<Vec<T>> {
    let max_int = class.states.iter().map(|s| s.int).max().unwrap_or(0);
    if max_int > u.n_max() {
        return Err(Error::RenewalTooShort { needed: max_int, available: u.values().len() });
    }
    let mut zero_mass = T::zero();
    // per tag: V[jj] for j = jj + frac(tag)
    let mut v: Vec<(Tag, Vec<T>)> = Vec::new();
    for (&x, mx) in class.states.iter().zip(masses) {
        if x.is_zero() {
            zero_mass = mx.clone();
            continue;
        }
        if mx.is_zero() {
            continue;
        }
        let slot = match v.iter().position(|(t, _)| *t == x.tag) {
            Some(i) => i,
            None => {
                v.push((x.tag, vec![T::zero(); max_int as usize + 1]));
                v.len() - 1
            }
        };
        let table = &mut v[slot].1;
        let lo = if x.tag == Tag::Zero { 1 } else { 0 };
        for jj in lo..=x.int {
            let uw = u.get(x.int - jj);
            if !uw.is_zero() {
                table[jj as usize] = table[jj as usize].clone() + mx.clone() * uw;
            }
        }
    }
    let out = class
        .states
        .iter()
        .map(|&y| {
            let mut acc =
                if zero_mass.is_zero() { T::zero() } else { zero_mass.clone() * mass_at(mu, class.as_int(y)) };
            for (tag, table) in &v {
                for (jj, vj) in table.iter().enumerate() {
                    if vj.is_zero() {
                        continue;
                    }
                    let j = State { int: jj as i64, tag: *tag };
                    let m = mass_at(mu, class.sum_int(y, j));
                    if !m.is_zero() {
                        acc = acc + vj.clone() * m;
                    }
                }
            }
            acc
        })
        .collect();
    Ok(out)
}

/// `sum_y q(x, y)` over class states `y <= y_cap`, plus the exact mass beyond
/// `y_cap`, which is `sum_w U(w) mu((x + y_cap - w, inf))`.
pub fn q_row_sum(
    m: &IncrementLaw,
    u: &RenewalSequence<f64>,
    class: &EssentialClass,
    x: State,
    y_cap: f64,
) -> Result<f64> {
    let reach = class.value(x) + y_cap.min(class.cap) + 2.0;
    let mu = TabulatedMasses::new(m, reach.clamp(0.0, 1e7) as usize);
    let mut inside = 0.0;
    for &y in class.states.iter().filter(|&&y| class.value(y) <= y_cap) {
        inside += kernel_q_with(&mu, u, class, x, y)?;
    }
    let xv = class.value(x);
    let beyond = if x.is_zero() {
        m.tail_gt(y_cap.floor() as i64)
    } else {
        let w_max = if x.tag == Tag::Zero { x.int - 1 } else { x.int };
        (0..=w_max).map(|w| u.get(w) * m.tail_gt((xv + y_cap - w as f64).floor() as i64)).sum()
    };
    Ok(inside + beyond)
}
