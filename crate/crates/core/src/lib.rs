//! Generalized discrete memoryless networks with zero-delay nodes.

pub mod bounds;
pub mod codes;
pub mod error;
pub mod gaussian;
pub mod model;
pub mod networks;
pub mod probability;
pub mod rng;
pub mod simulate;

pub use error::{Error, ErrorClass, Result};
