pub mod cache;
pub mod cli;
pub mod electrostatics;
pub mod equilibrium;
pub mod error;
pub mod fluctuations;
pub mod harness;
pub mod numerics;
pub mod sampler;
pub mod transport;

pub use error::{Error, Result};
