use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::kernels::{ExactMasses, LatticeMasses};
use crate::classification::{ClassificationReport, Evidence, EvidenceValue, TailMethod, TailReport, Verdict};
use crate::error::Result;
use crate::measures::{moments, Extended, IncrementLaw, LawKind};
use crate::special::{series_tail, Estimate};

/// Terms summed directly before the Euler-Maclaurin remainder takes over.
const DIRECT_TERMS: i64 = 4096;

/// Analytic finiteness of `sum_k H(k)^2` from the tail exponents:
/// `H(k) ~ C log(k)^b k^-a` is square-summable iff `2a > 1`, or `2a = 1`
/// and `2b < -1`.
pub fn quadratic_tail_is_finite(m: &IncrementLaw) -> bool {
    match m.kind() {
        LawKind::LatticeFinite => true,
        _ => {
            let (a, b) = m.tail_exponents().expect("analytic lattice family");
            2.0 * a > 1.0 || (2.0 * a == 1.0 && 2.0 * b < -1.0)
        }
    }
}

/// `sum_{k >= from} H(k)^2` for a half-line lattice law, `None` if infinite.
pub(crate) fn squared_tail_from(m: &IncrementLaw, from: i64) -> Option<Estimate> {
    if !quadratic_tail_is_finite(m) {
        return None;
    }
    let from = from.max(0);
    if let Some(n) = m.support_max() {
        let value = (from..n as i64).map(|k| m.tail_gt(k).powi(2)).sum();
        return Some(Estimate { value, error: 0.0 });
    }
    let split = from.max(DIRECT_TERMS);
    let head: f64 = (from..split).map(|k| m.tail_gt(k).powi(2)).sum();
    let rest = series_tail(|t| m.tail_gt_smooth(t).powi(2), split as f64, 0);
    Some(Estimate { value: head + rest.value, error: rest.error + head * 1e-15 })
}

/// `sum_{k >= 0} (1 - F(k))^2`, which is the total mass of the reflection
/// invariant measure.
pub fn quadratic_tail_sum(m: &IncrementLaw) -> Result<TailReport> {
    m.require_half_line_lattice("quadratic_tail_sum")?;
    if let Some(atoms) = m.exact_atoms() {
        let mu = ExactMasses::new(m)?;
        let n = atoms.last().map_or(0, |(k, _)| *k);
        let exact: BigRational =
            (0..n).map(|k| mu.tail_gt(k)).map(|h| h.clone() * h).fold(BigRational::zero(), |a, b| a + b);
        return Ok(TailReport {
            quad_tail: Extended::Finite(exact.to_f64().unwrap_or(f64::NAN)),
            error: 0.0,
            method: TailMethod::ExactSum,
        });
    }
    Ok(match squared_tail_from(m, 0) {
        Some(est) => TailReport {
            quad_tail: Extended::Finite(est.value),
            error: est.error,
            method: TailMethod::SummationWithTailBound,
        },
        None => TailReport { quad_tail: Extended::Infinite, error: 0.0, method: TailMethod::Analytic },
    })
}

/// Positive / null recurrence from the quadratic tail and the mean.
pub fn classify_lattice(m: &IncrementLaw) -> Result<ClassificationReport> {
    let tail = quadratic_tail_sum(m)?;
    let report = moments(m);
    let half_finite = report.half_moment.is_finite();
    // finite E(sqrt Y) forces a finite quadratic tail
    let consistent = !half_finite || tail.quad_tail.is_finite();
    debug_assert!(consistent, "half moment finite but quadratic tail infinite for {m}");
    let mut evidence = vec![
        Evidence::new("quad_tail_method", EvidenceValue::Text(tail.method.as_str().into())),
        Evidence::new("quad_tail_error", EvidenceValue::Number(tail.error)),
        Evidence::extended("half_moment", report.half_moment),
        Evidence::new("half_moment_implies_quad_tail", EvidenceValue::Flag(consistent)),
    ];
    if let Some((a, b)) = m.tail_exponents() {
        evidence.push(Evidence::new("tail_exponent_a", EvidenceValue::Number(a)));
        if m.kind() == LawKind::LatticeLogPowerLaw {
            evidence.push(Evidence::new("log_exponent_b", EvidenceValue::Number(b)));
        }
    }
    Ok(ClassificationReport {
        model: m.spec().to_string(),
        quad_tail: tail.quad_tail,
        mean: report.mean,
        verdict: Verdict::from_criteria(tail.quad_tail, report.mean),
        evidence,
    })
}
