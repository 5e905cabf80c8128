//! Signed increments: drift regimes, the Wiener-Hopf construction of a
//! symmetric law from a ladder law, ladder-height estimation, the `|S_n|`
//! fold and the characteristic-function recurrence diagnostic.

mod chf;
mod drift;
mod embedded;
mod fold;
mod ladder;
mod wiener_hopf;

pub use chf::{char_slope_diagnostic, one_minus_chf, power_cosine_sum, CharDiagnostic, SlopeVerdict, SLOPE_TIE};
pub use drift::{drift_report, DriftCase, DriftReport};
pub use embedded::{embedded_equivalence, EmbeddedReport};
pub use fold::{is_symmetric, symmetric_abs_equivalence, FoldReport};
pub use ladder::{
    ladder_height_empirical, ladder_height_empirical_with_watchdog, total_variation, LadderEstimate, DEFAULT_WATCHDOG,
};
pub use wiener_hopf::{wiener_hopf_construct, Validity, WienerHopfResult};
