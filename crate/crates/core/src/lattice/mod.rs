//! Lattice case: essential classes, the kernels `p` and `q`, the invariant
//! measures `nu` and `rho`, and the quadratic-tail classification.

mod class;
mod classify;
mod invariant;
mod kernels;

pub use class::{essential_class, EssentialClass, State, Tag};
pub use classify::{classify_lattice, quadratic_tail_is_finite, quadratic_tail_sum};
pub use invariant::{
    invariance_residual, invariance_residual_exact, invariant_table, nu_measure, nu_measure_exact, nu_value_with,
    potential_of_rho, rho_measure, rho_measure_exact, InvariantTable, Kernel,
};
pub use kernels::{
    apply_p, apply_q, kernel_p, kernel_p_with, kernel_q, kernel_q_with, q_row_sum, ExactMasses, FloatMasses,
    LatticeMasses,
};
