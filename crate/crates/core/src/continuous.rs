//! Non-lattice case: the densities of `nu` and `rho`, the quadratic-tail
//! integral and the recurrence classification.

use rayon::prelude::*;
use serde::Serialize;

use crate::classification::{ClassificationReport, Evidence, EvidenceValue, TailMethod, TailReport, Verdict};
use crate::error::{Error, Result};
use crate::measures::{moments, Extended, IncrementLaw, LawKind};
use crate::special::{integrate, integrate_to_infinity, Estimate};

/// Absolute error target for one density evaluation.
pub const QUAD_TARGET: f64 = 1e-8;
/// Upper-tail probability left out of the `rho` integral.
const QUANTILE_CUT: f64 = 1e-12;
pub const DEFAULT_GRID_POINTS: usize = 512;

/// `nu` density `H(x) = 1 - F(x)`.
pub fn nu_density(m: &IncrementLaw, x: f64) -> Result<f64> {
    m.require_continuous("nu_density")?;
    check_x(x)?;
    Ok(m.cdf_tail(x).1)
}

/// `rho` density `h(x) = ∫ mu((x, x+y]) mu(dy)`, in closed form for the
/// exponential law and by quadrature otherwise.
pub fn rho_density(m: &IncrementLaw, x: f64) -> Result<Estimate> {
    m.require_continuous("rho_density")?;
    check_x(x)?;
    if let LawKind::ContinuousExponential = m.kind() {
        return Ok(Estimate { value: 0.5 * m.cdf_tail(x).1, error: 0.0 });
    }
    rho_density_quadrature(m, x)
}

/// `h(x)` by quadrature for every continuous family.
///
/// Substituting `y = Q(u)` (upper quantile) turns the integral into
/// `∫_0^1 (H(x) - H(x + Q(u))) du` with a bounded integrand; `u` below
/// `1e-12` is dropped and its contribution (at most `1e-12 H(x)`) is added
/// to the error.
pub fn rho_density_quadrature(m: &IncrementLaw, x: f64) -> Result<Estimate> {
    m.require_continuous("rho_density")?;
    check_x(x)?;
    let hx = m.cdf_tail(x).1;
    if hx == 0.0 {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let g = |u: f64| hx - m.cdf_tail(x + m.upper_quantile(u)).1;
    let breaks: Vec<f64> = m.breakpoints().iter().map(|&b| m.cdf_tail(b - x).1).collect();
    let est = integrate(g, QUANTILE_CUT, 1.0, &breaks, 1e-13);
    let error = est.error + QUANTILE_CUT * hx;
    if error > QUAD_TARGET {
        return Err(Error::Numeric(format!("rho density at x={x}: error {error:e} above target {QUAD_TARGET:e}")));
    }
    Ok(Estimate { value: est.value.max(0.0), error })
}

/// `∫_0^∞ h(x) dx` with the inner integral done by quadrature.
pub fn rho_total_mass(m: &IncrementLaw) -> Result<Estimate> {
    m.require_continuous("rho_total_mass")?;
    let failure = std::cell::Cell::new(None);
    let h = |x: f64| match rho_density_quadrature(m, x) {
        Ok(e) => e.value,
        Err(err) => {
            failure.set(Some(err));
            0.0
        }
    };
    let est = match m.support_max() {
        Some(n) => integrate(h, 0.0, n, &m.breakpoints(), 1e-10),
        None => integrate_to_infinity(h, 0.0, 1.0, 1e-10),
    };
    match failure.take() {
        Some(err) => Err(err),
        None => Ok(est),
    }
}

fn check_x(x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("density point must be a finite x >= 0, got {x}")))
    }
}

/// `nu` and `rho` densities on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct DensityGrid {
    pub grid: Vec<f64>,
    pub nu_density: Vec<f64>,
    pub rho_density: Vec<f64>,
    pub quadrature_error: Vec<f64>,
}

impl DensityGrid {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// `points` log-spaced points on `[0, min(N, x_max)]`, starting at 0.
pub fn log_grid(top: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![0.0];
    }
    let delta = top * 1e-3;
    let ratio = 1.0 + top / delta;
    (0..points)
        .map(|i| if i + 1 == points { top } else { delta * (ratio.powf(i as f64 / (points - 1) as f64) - 1.0) })
        .collect()
}

pub fn density_grid(m: &IncrementLaw, x_max: f64, points: usize) -> Result<DensityGrid> {
    m.require_continuous("density_grid")?;
    if !(x_max > 0.0 && x_max.is_finite()) || points == 0 {
        return Err(Error::Argument(format!("density grid needs x_max > 0 and points >= 1, got {x_max}, {points}")));
    }
    let top = m.support_max().map_or(x_max, |n| n.min(x_max));
    let grid = log_grid(top, points);
    let rows: Vec<(f64, Estimate)> =
        grid.par_iter().map(|&x| Ok((m.cdf_tail(x).1, rho_density(m, x)?))).collect::<Result<_>>()?;
    Ok(DensityGrid {
        nu_density: rows.iter().map(|r| r.0).collect(),
        rho_density: rows.iter().map(|r| r.1.value).collect(),
        quadrature_error: rows.iter().map(|r| r.1.error).collect(),
        grid,
    })
}

/// Analytic finiteness of `∫ H(x)^2 dx`.
pub fn quadratic_tail_integral_is_finite(m: &IncrementLaw) -> bool {
    match m.kind() {
        LawKind::ContinuousPareto => 2.0 * m.tail_exponents().map_or(0.0, |e| e.0) > 1.0,
        _ => true,
    }
}

/// `∫_0^∞ (1 - F(x))^2 dx`, which is the total mass of `rho`.
pub fn quadratic_tail_integral(m: &IncrementLaw) -> Result<TailReport> {
    m.require_continuous("quadratic_tail_integral")?;
    if !quadratic_tail_integral_is_finite(m) {
        return Ok(TailReport { quad_tail: Extended::Infinite, error: 0.0, method: TailMethod::ClosedForm });
    }
    let p = m.params();
    let value = match m.kind() {
        LawKind::ContinuousExponential => 0.5 / p[0].1,
        LawKind::ContinuousUniform => {
            let (lo, hi) = (p[0].1, p[1].1);
            lo + (hi - lo) / 3.0
        }
        _ => {
            let (alpha, scale) = (p[0].1, p[1].1);
            scale / (2.0 * alpha - 1.0)
        }
    };
    Ok(TailReport { quad_tail: Extended::Finite(value), error: 0.0, method: TailMethod::ClosedForm })
}

/// `∫ H^2` by quadrature, for cross-checking the closed forms. `None` when
/// the integral is infinite.
pub fn quadratic_tail_quadrature(m: &IncrementLaw) -> Result<Option<TailReport>> {
    m.require_continuous("quadratic_tail_quadrature")?;
    if !quadratic_tail_integral_is_finite(m) {
        return Ok(None);
    }
    let h2 = |x: f64| m.cdf_tail(x).1.powi(2);
    let est = match m.support_max() {
        Some(n) => integrate(h2, 0.0, n, &m.breakpoints(), 1e-12),
        None => integrate_to_infinity(h2, 0.0, 1.0, 1e-12),
    };
    Ok(Some(TailReport {
        quad_tail: Extended::Finite(est.value),
        error: est.error,
        method: TailMethod::AdaptiveQuadratureWithTailBound,
    }))
}

/// Positive / null recurrence from the tail integral and the mean.
pub fn classify_continuous(m: &IncrementLaw) -> Result<ClassificationReport> {
    let tail = quadratic_tail_integral(m)?;
    let report = moments(m);
    let half_finite = report.half_moment.is_finite();
    let consistent = !half_finite || tail.quad_tail.is_finite();
    debug_assert!(consistent, "half moment finite but tail integral infinite for {m}");
    let mut evidence = vec![
        Evidence::new("quad_tail_method", EvidenceValue::Text(tail.method.as_str().into())),
        Evidence::extended("half_moment", report.half_moment),
        Evidence::new("half_moment_implies_quad_tail", EvidenceValue::Flag(consistent)),
    ];
    if let Some((a, _)) = m.tail_exponents() {
        evidence.push(Evidence::new("tail_exponent_alpha", EvidenceValue::Number(a)));
    }
    Ok(ClassificationReport {
        model: m.spec().to_string(),
        quad_tail: tail.quad_tail,
        mean: report.mean,
        verdict: Verdict::from_criteria(tail.quad_tail, report.mean),
        evidence,
    })
}
