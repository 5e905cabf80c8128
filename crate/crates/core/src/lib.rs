//! Reflected random walk `X_{n+1} = |X_n - Y_{n+1}|` on the half-line:
//! simulation, exact invariant measures, recurrence classification,
//! ladder constructions and contractivity diagnostics.

pub mod classification;
pub mod continuous;
pub mod contractivity;
pub mod error;
pub mod general_walk;
pub mod lattice;
pub mod measures;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
