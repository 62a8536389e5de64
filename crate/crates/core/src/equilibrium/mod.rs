//! Equilibrium measure `mu_V`, Robin constant `c_V`, effective potential `zeta_V`, and the
//! continuous energy `I_V`.
//!
//! Densities on each support interval are stored as `sqrt(1 - v^2) sum b_n U_{n-1}(v)` in the
//! affine variable `v`; logarithmic potentials and Stieltjes transforms then have closed forms.

mod measure;
mod potential;
mod solve;

pub use measure::{
    cell_log_kernel, energy_functional, EquilibriumMeasure, GridDensity, Interval, Method, Tolerances,
};
pub use potential::{Potential, PotentialSpec};
pub use solve::{from_user_data, minimize_on_grid, solve_equilibrium};
