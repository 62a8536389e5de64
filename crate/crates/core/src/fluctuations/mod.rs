//! Test functions, linear-statistic fluctuations, `H^{1/2}` norms, and the terms of the
//! Laplace-transform expansion.

mod fluct;
mod hhalf;
mod laplace;
mod test_function;

pub use fluct::{fluct, FluctEvaluator};
pub use hhalf::{h_half_norm, h_half_norm_squared, h_half_norm_squared_half_plane};
pub use laplace::{anisotropy, laplace_terms, LaplaceConvention, LaplaceExpansion, LaplaceExpansionTerms};
pub use test_function::{bump_ck_norm, bump_derivative, TestFunction};
