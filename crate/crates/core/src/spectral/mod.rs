//! Fourier collocation grids in `x` and `τ` and the operator algebra that
//! acts diagonally on them.

pub(crate) mod fft;
mod field;
mod grid;
mod ops;

pub use field::{SpatialField, TwoScaleField};
pub use grid::{SpatialGrid, TauGrid};
pub(crate) use ops::hs_norm_weighted;
pub use ops::{
    antiderivative_table, apply_tau_table, apply_x_multiplier, apply_x_table, combine_tau_tables,
    evaluate_at_tau, hs_norm, q_inverse_table, q_mu_inverse, tau_antiderivative_a, tau_average,
    tau_derivative, tau_symbol_table, two_minus_q_apply, two_minus_q_table, x_symbol_table,
};
