use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::class::{essential_class, EssentialClass, State};
use super::classify::squared_tail_from;
use super::kernels::{apply_p, apply_q, ExactMasses, FloatMasses, LatticeMasses};
use crate::error::{Error, Result};
use crate::measures::{renewal_sequence, renewal_sequence_exact, IncrementLaw, Scalar};
use crate::special::series_tail;

/// Terms of the inner `k`-sum of `rho` summed directly for unbounded laws.
const RHO_DIRECT_TERMS: i64 = 4096;

/// `nu(0) = (1 - mu(0))/2`, `nu(x) = mu(x)/2 + mu((x, inf))` for `x > 0`.
///
/// `x` may lie outside the class; `mu(x) = 0` off the integers.
pub fn nu_value_with<T: Scalar>(mu: &impl LatticeMasses<T>, class: &EssentialClass, x: State) -> T {
    if x.is_zero() {
        return (T::one() - mu.mass(0)) * T::half();
    }
    let atom = match class.as_int(x) {
        Some(k) => mu.mass(k) * T::half(),
        None => T::zero(),
    };
    atom + mu.tail_gt(x.int)
}

/// `rho(0) = (1 - mu(0))/2`, `rho(x) = sum_k mu(k) (nu(x) - nu(x + k))` for `x > 0`.
fn rho_value_exact(mu: &ExactMasses, class: &EssentialClass, x: State) -> BigRational {
    if x.is_zero() {
        return nu_value_with(mu, class, x);
    }
    let nu_x = nu_value_with(mu, class, x);
    mu.atoms()
        .iter()
        .filter(|(k, _)| *k >= 1)
        .map(|(k, p)| p.clone() * (nu_x.clone() - nu_value_with(mu, class, x.shifted(*k))))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// Same as the exact version, for unbounded support: the `k`-sum is taken
/// directly up to `RHO_DIRECT_TERMS` and its remainder by Euler-Maclaurin.
/// Returns `(value, error estimate)`.
fn rho_value_float(m: &IncrementLaw, class: &EssentialClass, x: State) -> (f64, f64) {
    let mu = FloatMasses(m);
    let nu_x = nu_value_with(&mu, class, x);
    if x.is_zero() {
        return (nu_x, 0.0);
    }
    let xi = class.as_int(x);
    let head: f64 = (1..=RHO_DIRECT_TERMS).map(|k| m.mass(k) * nu_value_with(&mu, class, x.shifted(k))).sum();
    let base = x.int as f64;
    let smooth = |t: f64| {
        let atom = if xi.is_some() { 0.5 * m.mass_smooth(base + t) } else { 0.0 };
        m.mass_smooth(t) * (atom + m.tail_gt_smooth(base + t))
    };
    let rest = series_tail(smooth, (RHO_DIRECT_TERMS + 1) as f64, 0);
    let value = (1.0 - m.mass(0)) * nu_x - head - rest.value;
    (value, rest.error + 1e-15 * nu_x)
}

pub fn nu_measure_exact(m: &IncrementLaw, class: &EssentialClass) -> Result<Vec<BigRational>> {
    let mu = ExactMasses::new(m)?;
    Ok(class.states.iter().map(|&x| nu_value_with(&mu, class, x)).collect())
}

pub fn rho_measure_exact(m: &IncrementLaw, class: &EssentialClass) -> Result<Vec<BigRational>> {
    let mu = ExactMasses::new(m)?;
    Ok(class.states.iter().map(|&x| rho_value_exact(&mu, class, x)).collect())
}

/// `nu` on the class states.
pub fn nu_measure(m: &IncrementLaw, class: &EssentialClass) -> Result<Vec<f64>> {
    m.require_half_line_lattice("nu_measure")?;
    Ok(class.states.iter().map(|&x| nu_value_with(&FloatMasses(m), class, x)).collect())
}

/// `rho` on the class states (exact arithmetic for finite support).
pub fn rho_measure(m: &IncrementLaw, class: &EssentialClass) -> Result<Vec<f64>> {
    m.require_half_line_lattice("rho_measure")?;
    if m.has_finite_support() {
        return Ok(rho_measure_exact(m, class)?.iter().map(Scalar::to_f64).collect());
    }
    Ok(class.states.iter().map(|&x| rho_value_float(m, class, x).0).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    P,
    Q,
}

/// `|(m K)(y) - m(y)|` per class state, exact.
pub fn invariance_residual_exact(
    m: &IncrementLaw,
    class: &EssentialClass,
    masses: &[BigRational],
    kernel: Kernel,
) -> Result<Vec<BigRational>> {
    check_len(class, masses.len())?;
    let mu = ExactMasses::new(m)?;
    let image = match kernel {
        Kernel::P => apply_p(&mu, class, masses),
        Kernel::Q => {
            let u = renewal_sequence_exact(m, max_int(class))?;
            apply_q(&mu, &u, class, masses)?
        }
    };
    Ok(image.iter().zip(masses).map(|(a, b)| (a - b).abs()).collect())
}

/// `|(m K)(y) - m(y)|` per class state in floating point, using only the
/// states inside the cap (see `truncation_bounds` for what is left out).
pub fn invariance_residual(
    m: &IncrementLaw,
    class: &EssentialClass,
    masses: &[f64],
    kernel: Kernel,
) -> Result<Vec<f64>> {
    check_len(class, masses.len())?;
    m.require_half_line_lattice("invariance_residual")?;
    let mu = FloatMasses(m);
    let image = match kernel {
        Kernel::P => apply_p(&mu, class, masses),
        Kernel::Q => {
            let u = renewal_sequence(m, max_int(class))?;
            apply_q(&mu, &u, class, masses)?
        }
    };
    Ok(image.iter().zip(masses).map(|(a, b)| (a - b).abs()).collect())
}

fn check_len(class: &EssentialClass, n: usize) -> Result<()> {
    if n != class.len() {
        return Err(Error::Argument(format!("{n} masses for a class of {} states", class.len())));
    }
    Ok(())
}

fn max_int(class: &EssentialClass) -> i64 {
    class.states.iter().map(|s| s.int).max().unwrap_or(0)
}

/// Bounds on the mass flowing into state `y` from states beyond the cap,
/// for `nu` under `p` and `rho` under `q`.
///
/// For `x > cap`: `nu(x) <= H(c)` with `c = floor(cap)`, and the columns of
/// `p` sum the masses `mu(x - y)`, `mu(x + y)` at distinct integers. For
/// `q`, `q(x, y) <= U(0) H(y)` and the `rho` mass beyond the cap is at most
/// `2 (H(c) + H(c) sum_{t<c} H(t) + sum_{t>=c} H(t)^2)`.
fn truncation_bounds(m: &IncrementLaw, class: &EssentialClass, y: f64, rho_beyond: f64, u0: f64) -> (f64, f64) {
    if class.is_complete() {
        return (0.0, 0.0);
    }
    let c = class.cap.floor();
    let h = |v: f64| m.tail_gt(v.floor() as i64);
    let p = h(c) * (h(c - y) + h(c + y));
    let q = u0 * h(y) * rho_beyond;
    (p, q)
}

fn rho_mass_beyond(m: &IncrementLaw, cap: f64) -> f64 {
    let c = cap.floor() as i64;
    let hc = m.tail_gt(c);
    let below: f64 = (0..c).map(|t| m.tail_gt(t)).sum();
    match squared_tail_from(m, c) {
        Some(sq) => 2.0 * (hc + hc * below + sq.value + sq.error),
        None => f64::INFINITY,
    }
}

/// `nu` and `rho` on an essential class with their invariance residuals.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantTable {
    pub states: Vec<f64>,
    pub nu: Vec<f64>,
    pub rho: Vec<f64>,
    pub nu_residual: Vec<f64>,
    pub rho_residual: Vec<f64>,
    /// Upper bound for every reported residual that comes from the cap and
    /// from series remainders (0 for complete classes in exact arithmetic).
    pub truncation_bound: f64,
    /// Whether masses and residuals were computed in rational arithmetic.
    pub exact: bool,
}

impl InvariantTable {
    pub fn nu_residual_max(&self) -> f64 {
        self.nu_residual.iter().copied().fold(0.0, f64::max)
    }

    pub fn rho_residual_max(&self) -> f64 {
        self.rho_residual.iter().copied().fold(0.0, f64::max)
    }
}

/// Build the table on `C(x0)` capped at `x_max`.
///
/// When the class is cut by the cap, rows are reported only for states up
/// to `cap / 2`, whose residuals are dominated by `truncation_bound`.
pub fn invariant_table(m: &IncrementLaw, x0: f64, x_max: f64) -> Result<InvariantTable> {
    let class = essential_class(m, x0, x_max)?;
    let mut table = if m.has_finite_support() { exact_table(m, &class)? } else { float_table(m, &class)? };
    if !class.is_complete() {
        let keep = table.states.iter().take_while(|&&v| v <= class.cap / 2.0).count();
        table.states.truncate(keep);
        table.nu.truncate(keep);
        table.rho.truncate(keep);
        table.nu_residual.truncate(keep);
        table.rho_residual.truncate(keep);
    }
    Ok(table)
}

fn exact_table(m: &IncrementLaw, class: &EssentialClass) -> Result<InvariantTable> {
    let nu = nu_measure_exact(m, class)?;
    let rho = rho_measure_exact(m, class)?;
    let nu_res = invariance_residual_exact(m, class, &nu, Kernel::P)?;
    let rho_res = invariance_residual_exact(m, class, &rho, Kernel::Q)?;
    let f = |v: &[BigRational]| v.iter().map(|q| ToPrimitive::to_f64(q).unwrap_or(f64::NAN)).collect::<Vec<_>>();
    let u0 = 1.0 / (1.0 - m.mass(0));
    let beyond = if class.is_complete() { 0.0 } else { rho_mass_beyond(m, class.cap) };
    let values = class.values();
    let bound = values
        .iter()
        .filter(|&&y| y <= class.cap / 2.0 || class.is_complete())
        .map(|&y| {
            let (p, q) = truncation_bounds(m, class, y, beyond, u0);
            p.max(q)
        })
        .fold(0.0, f64::max);
    Ok(InvariantTable {
        states: values,
        nu: f(&nu),
        rho: f(&rho),
        nu_residual: f(&nu_res),
        rho_residual: f(&rho_res),
        truncation_bound: bound,
        exact: true,
    })
}

fn float_table(m: &IncrementLaw, class: &EssentialClass) -> Result<InvariantTable> {
    let nu = nu_measure(m, class)?;
    let rho_err: Vec<(f64, f64)> = class.states.iter().map(|&x| rho_value_float(m, class, x)).collect();
    let rho: Vec<f64> = rho_err.iter().map(|r| r.0).collect();
    let value_err = rho_err.iter().map(|r| r.1).fold(0.0, f64::max);
    let nu_res = invariance_residual(m, class, &nu, Kernel::P)?;
    let rho_res = invariance_residual(m, class, &rho, Kernel::Q)?;
    let n = class.len() as f64;
    let u0 = 1.0 / (1.0 - m.mass(0));
    let beyond = rho_mass_beyond(m, class.cap);
    // rounding in the O(n) sums behind every residual
    let rounding = 64.0 * f64::EPSILON * n;
    let values = class.values();
    let bound = values
        .iter()
        .filter(|&&y| y <= class.cap / 2.0)
        .map(|&y| {
            let (p, q) = truncation_bounds(m, class, y, beyond, u0);
            (p + rounding).max(q + rounding + value_err * (1.0 + n * u0))
        })
        .fold(0.0, f64::max);
    Ok(InvariantTable {
        states: values,
        nu,
        rho,
        nu_residual: nu_res,
        rho_residual: rho_res,
        truncation_bound: bound,
        exact: false,
    })
}

/// `sum_k U(k) rho(x + k)` at a class state `x > 0`; equals `nu(x)` for
/// finite-support laws.
pub fn potential_of_rho(m: &IncrementLaw, class: &EssentialClass, x: State) -> Result<BigRational> {
    let mu = ExactMasses::new(m)?;
    let n = m.support_max().unwrap_or(0.0) as i64;
    let u = renewal_sequence_exact(m, n + 1)?;
    Ok((0..=n + 1)
        .map(|k| u.get(k) * rho_value_exact(&mu, class, x.shifted(k)))
        .fold(BigRational::zero(), |a, b| a + b))
}
