use serde::Serialize;

use super::fold::check_symmetric;
use crate::error::{Error, Result};
use crate::measures::IncrementLaw;
use crate::special::{gamma, integrate, integrate_to_infinity};

/// Slopes within this distance of 1 abstain: at `a = 1` the logarithmic
/// correction pulls the fitted slope visibly below 1.
pub const SLOPE_TIE: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeVerdict {
    RecurrentIndicated,
    TransientIndicated,
    Abstain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharDiagnostic {
    pub t_grid: Vec<f64>,
    pub one_minus_chf: Vec<f64>,
    pub slope: f64,
    pub verdict: SlopeVerdict,
    pub margin: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

/// `1 - mu^(t) = sum_k mu(k) (1 - cos kt)` for a symmetric lattice law.
pub fn one_minus_chf(m: &IncrementLaw, t: f64) -> Result<f64> {
    check_symmetric(m)?;
    Ok(one_minus_chf_unchecked(m, t))
}

fn one_minus_chf_unchecked(m: &IncrementLaw, t: f64) -> f64 {
    match m.atoms() {
        // 1 - cos(kt) = 2 sin^2(kt/2) avoids cancellation at small t
        Some(atoms) => atoms.iter().map(|&(k, p)| 2.0 * p * (0.5 * k as f64 * t).sin().powi(2)).sum(),
        None => {
            let (a, _) = m.tail_exponents().expect("symmetric power law");
            2.0 * m.normalizer() * power_cosine_sum(1.0 + a, t)
        }
    }
}

/// `sum_{k >= 1} k^-s (1 - cos kt)` for `s > 1`, `0 < t < 2 pi`, as a Mellin
/// integral: with `E = e^x - 1` and `sigma = sin^2(t/2)`,
/// `Gamma(s)^-1 ∫_0^∞ x^(s-1) 2 sigma e^x (e^x + 1) / (E (E^2 + 4 e^x sigma)) dx`.
pub fn power_cosine_sum(s: f64, t: f64) -> f64 {
    let sigma = (0.5 * t).sin().powi(2);
    let f = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        if x > 700.0 {
            return 0.0;
        }
        let e = x.exp_m1();
        let ex = x.exp();
        x.powf(s - 1.0) * 2.0 * sigma * ex * (ex + 1.0) / (e * (e * e + 4.0 * ex * sigma))
    };
    // the integrand turns over near x ~ t
    let split = t.min(1.0);
    let head = integrate(f, 0.0, split, &[], 1e-14);
    let tail = integrate_to_infinity(f, split, split, 1e-14);
    (head.value + tail.value) / gamma(s)
}

/// Least-squares slope of `log(1 - mu^(t))` against `log t` on a log-spaced grid.
pub fn char_slope_diagnostic(m: &IncrementLaw, t_min: f64, t_max: f64, points: usize) -> Result<CharDiagnostic> {
    check_symmetric(m)?;
    if !(t_min > 0.0 && t_min < t_max && t_max < std::f64::consts::PI) || points < 2 {
        return Err(Error::Argument(format!(
            "need 0 < t_min < t_max < pi and points >= 2, got {t_min}, {t_max}, {points}"
        )));
    }
    let ratio = (t_max / t_min).ln();
    let t_grid: Vec<f64> = (0..points).map(|i| t_min * (ratio * i as f64 / (points - 1) as f64).exp()).collect();
    let values: Vec<f64> = t_grid.iter().map(|&t| one_minus_chf_unchecked(m, t)).collect();
    if let Some(i) = values.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Numeric(format!("1 - chf({}) = {} is not positive", t_grid[i], values[i])));
    }
    let xs: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = points as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let margin = (slope - 1.0).abs();
    let verdict = if margin < SLOPE_TIE {
        SlopeVerdict::Abstain
    } else if slope > 1.0 {
        SlopeVerdict::RecurrentIndicated
    } else {
        SlopeVerdict::TransientIndicated
    };
    Ok(CharDiagnostic { t_grid, one_minus_chf: values, slope, verdict, margin, t_min, t_max, points })
}
