use serde::{Deserialize, Serialize};

use super::law::Family;
use super::IncrementLaw;
use crate::special::{gamma, series_tail, zeta};

/// An extended non-negative real: a finite value or an infinite flag.
/// Serialized as `{"status":"finite","value":v}` or `{"status":"infinite"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "lowercase")]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(*v),
            Extended::Infinite => None,
        }
    }
}

/// Moments of an increment law.
///
/// `half_moment` and `three_half_moment` are taken of the positive part
/// `Y+`. For signed laws `mean` is `E(Y)` when `E|Y|` is finite and the
/// infinite flag otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean: Extended,
    pub half_moment: Extended,
    pub three_half_moment: Extended,
    pub pos_mean: Extended,
    pub neg_mean: Extended,
}

pub fn moments(m: &IncrementLaw) -> MomentReport {
    let pos = |p: f64| positive_moment(m, p);
    let pos_mean = pos(1.0);
    let neg_mean = if m.is_signed() { positive_moment_of_negative(m) } else { Extended::Finite(0.0) };
    let mean = match (pos_mean, neg_mean) {
        (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a - b),
        _ => Extended::Infinite,
    };
    MomentReport { mean, half_moment: pos(0.5), three_half_moment: pos(1.5), pos_mean, neg_mean }
}

/// `E((Y+)^p)` for `p > 0`, with finiteness decided from the family exponents.
pub fn positive_moment(m: &IncrementLaw, p: f64) -> Extended {
    match m.family() {
        Family::Finite(f) => {
            Extended::Finite(f.atoms.iter().filter(|(k, _)| *k > 0).map(|&(k, w)| (k as f64).powf(p) * w).sum())
        }
        Family::PowerLaw(t) => {
            if p < t.a {
                Extended::Finite(t.c * zeta(1.0 + t.a - p))
            } else {
                Extended::Infinite
            }
        }
        Family::SymPower(t) => {
            if p < t.a {
                Extended::Finite(0.5 * t.c * zeta(1.0 + t.a - p))
            } else {
                Extended::Infinite
            }
        }
        Family::LogPower(t) => {
            if p < t.a || (p == t.a && t.b < -1.0) {
                let b = t.b;
                let s = 1.0 + t.a;
                let term = |x: f64| x.powf(p) * (x + 2.0).ln().powf(b) * (x + 1.0).powf(-s);
                Extended::Finite(t.c * series_tail(term, 1.0, 1 << 14).value)
            } else {
                Extended::Infinite
            }
        }
        Family::Exponential { rate } => Extended::Finite(gamma(1.0 + p) / rate.powf(p)),
        Family::Uniform { lo, hi } => Extended::Finite((hi.powf(p + 1.0) - lo.powf(p + 1.0)) / ((p + 1.0) * (hi - lo))),
        Family::Pareto { alpha, scale } => {
            if p < *alpha {
                Extended::Finite(scale.powf(p) * gamma(1.0 + p) * gamma(alpha - p) / gamma(*alpha))
            } else {
                Extended::Infinite
            }
        }
    }
}

fn positive_moment_of_negative(m: &IncrementLaw) -> Extended {
    match m.family() {
        Family::Finite(f) => {
            Extended::Finite(f.atoms.iter().filter(|(k, _)| *k < 0).map(|&(k, w)| (-k) as f64 * w).sum())
        }
        Family::SymPower(_) => positive_moment(m, 1.0),
        _ => Extended::Finite(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::parse_law;

    fn finite(m: Extended) -> f64 {
        m.value().expect("finite moment")
    }

    #[test]
    fn uniform_one_two() {
        let r = moments(&parse_law("lat:pmf(d=1;1:0.5,2:0.5)").unwrap());
        assert_eq!(finite(r.mean), 1.5);
        assert!((finite(r.half_moment) - (1.0 + 2f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((finite(r.half_moment) - 1.20711).abs() < 1e-5);
    }

    #[test]
    fn log_power_half_moment_is_infinite() {
        let r = moments(&parse_law("lat:logpow(a=0.5,b=1)").unwrap());
        assert_eq!(r.half_moment, Extended::Infinite);
        assert_eq!(r.mean, Extended::Infinite);
    }

    #[test]
    fn log_power_boundary_with_negative_log_exponent() {
        let law = parse_law("lat:logpow(a=0.5,b=-2)").unwrap();
        assert!(positive_moment(&law, 0.5).is_finite());
        assert_eq!(positive_moment(&law, 0.6), Extended::Infinite);
    }

    #[test]
    fn log_power_finite_moment_matches_brute_force() {
        let law = parse_law("lat:logpow(a=2,b=1)").unwrap();
        let brute: f64 = (1..2_000_000).map(|k| k as f64 * law.mass(k)).sum();
        // tail of the brute sum beyond 2e6 is ~ c log(n) / n, well below 1e-5
        assert!((finite(positive_moment(&law, 1.0)) - brute).abs() < 1e-5);
    }

    #[test]
    fn exponential_mean() {
        let r = moments(&parse_law("cont:exp(rate=1)").unwrap());
        assert!((finite(r.mean) - 1.0).abs() < 1e-14);
        assert!((finite(r.half_moment) - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn pareto_moments() {
        let law = parse_law("cont:pareto(alpha=0.75,scale=1)").unwrap();
        let r = moments(&law);
        assert_eq!(r.mean, Extended::Infinite);
        // E sqrt(Y) = Gamma(1.5) Gamma(0.25) / Gamma(0.75)
        let expected = gamma(1.5) * gamma(0.25) / gamma(0.75);
        assert!((finite(r.half_moment) - expected).abs() < 1e-10);
    }

    #[test]
    fn power_law_threshold() {
        let law = parse_law("lat:powerlaw(a=1.2)").unwrap();
        let r = moments(&law);
        assert!(r.mean.is_finite());
        assert_eq!(r.three_half_moment, Extended::Infinite);
        let brute: f64 = (1..=100_000).map(|k| k as f64 * law.mass(k)).sum();
        assert!(finite(r.mean) > brute);
    }

    #[test]
    fn symmetric_laws() {
        let r = moments(&parse_law("int:pmf(-1:0.5,1:0.5)").unwrap());
        assert_eq!(finite(r.mean), 0.0);
        assert_eq!(finite(r.pos_mean), 0.5);
        assert_eq!(finite(r.neg_mean), 0.5);
        let heavy = moments(&parse_law("int:sympow(a=0.8)").unwrap());
        assert_eq!(heavy.mean, Extended::Infinite);
        assert!(heavy.half_moment.is_finite());
        let light = moments(&parse_law("int:sympow(a=1.5)").unwrap());
        assert_eq!(finite(light.mean), 0.0);
        assert_eq!(light.three_half_moment, Extended::Infinite);
    }

    #[test]
    fn moment_serializes_with_status() {
        let json = serde_json::to_string(&Extended::Finite(1.5)).unwrap();
        assert_eq!(json, r#"{"status":"finite","value":1.5}"#);
        assert_eq!(serde_json::to_string(&Extended::Infinite).unwrap(), r#"{"status":"infinite"}"#);
    }
}
