//! Increment laws, moments, convolution and the lattice potential.

mod law;
mod moments;
mod parse;
mod pmf;
mod renewal;
mod scalar;

pub use law::{IncrementLaw, LawKind, TAIL_TABLE_LEN};
pub use moments::{moments, positive_moment, Extended, MomentReport};
pub use parse::parse_law;
pub use pmf::{convolve, Pmf};
pub use renewal::{renewal_from_pmf, renewal_sequence, renewal_sequence_exact, RenewalSequence};
pub use scalar::{parse_rational, Scalar};
