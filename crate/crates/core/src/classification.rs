//! Recurrence classification reports shared by the lattice and continuous
//! analyses.

use serde::{Deserialize, Serialize};

use crate::measures::Extended;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    PositiveRecurrent,
    NullRecurrent,
    /// The quadratic-tail condition fails; it is sufficient, not necessary.
    Unknown,
}

impl Verdict {
    /// Positive recurrent iff the quadratic tail and the mean are finite;
    /// null recurrent iff only the quadratic tail is finite.
    pub fn from_criteria(quad_tail: Extended, mean: Extended) -> Self {
        match (quad_tail.is_finite(), mean.is_finite()) {
            (true, true) => Verdict::PositiveRecurrent,
            (true, false) => Verdict::NullRecurrent,
            (false, _) => Verdict::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EvidenceValue {
    Number(f64),
    Flag(bool),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub name: String,
    pub value: EvidenceValue,
}

impl Evidence {
    pub fn new(name: &str, value: EvidenceValue) -> Self {
        Evidence { name: name.to_string(), value }
    }

    pub(crate) fn extended(name: &str, value: Extended) -> Self {
        match value {
            Extended::Finite(v) => Evidence::new(name, EvidenceValue::Number(v)),
            Extended::Infinite => Evidence::new(name, EvidenceValue::Text("infinite".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub model: String,
    pub quad_tail: Extended,
    pub mean: Extended,
    pub verdict: Verdict,
    pub evidence: Vec<Evidence>,
}

/// How a quadratic-tail value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    ClosedForm,
    ExactSum,
    SummationWithTailBound,
    AdaptiveQuadratureWithTailBound,
    /// Infinite by the analytic exponent test.
    Analytic,
}

impl TailMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TailMethod::ClosedForm => "closed_form",
            TailMethod::ExactSum => "exact_sum",
            TailMethod::SummationWithTailBound => "summation_with_tail_bound",
            TailMethod::AdaptiveQuadratureWithTailBound => "adaptive_quadrature_with_tail_bound",
            TailMethod::Analytic => "analytic",
        }
    }
}

/// `sum_k H(k)^2` (lattice) or `∫ H(x)^2 dx` (continuous).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    #[serde(flatten)]
    pub quad_tail: Extended,
    pub error: f64,
    pub method: TailMethod,
}
