//! Numerical building blocks shared by the physics modules.

pub mod cheb;
pub mod eigen;
pub mod quad;
pub mod rng;
pub mod stats;
pub mod linalg;
