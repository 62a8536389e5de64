//! Next-order energy, truncated fields in the two-dimensional extension, local energies,
//! minimal distances and discrepancies.

mod background;
mod distances;
mod energy;
mod field;

pub use background::{Background, Scaled, Uniform};
pub use distances::{
    discrepancy, local_minimal_distances, minimal_distances, truncation_function, truncation_mass, validate_points,
    TruncationVector, Window,
};
pub use energy::{macroscopic_next_order_energy, next_order_energy, splitting_check, EnergyBreakdown, EnergyForm};
pub use field::{electric_field, local_energy, local_energy_fast, renormalized_energy_field_form};
