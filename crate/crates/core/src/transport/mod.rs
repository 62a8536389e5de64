//! Inversion of the master operator: the transport `psi` with `Xi_V[psi] = xi + c_xi`, the flow
//! `phi_t = id + t psi`, the energy difference `tau_t`, and decay diagnostics.

mod map;

pub use map::{
    decay_profile, energy_difference, master_operator, push_forward_mass_check, solve_transport, transport_flow,
    DecayProfile, TransportMap, TransportRecord, TransportState, RESIDUAL_TOL,
};
