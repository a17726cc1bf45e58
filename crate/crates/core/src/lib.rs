//! Propagation-of-chaos bounds for weakly interacting particle systems:
//! interaction matrices, the percolation process that controls subset
//! entropies, explicit bounds, the exactly solvable Gaussian model and an
//! Euler–Maruyama simulator.

pub mod bounds;
pub mod error;
pub mod expm;
pub mod gaussian;
pub mod matrix;
pub mod numeric;
pub mod percolation;
pub mod rng;
pub mod sde;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::{InteractionMatrix, SubsetState};
