//! Near-field polar-domain codebooks and limited-feedback simulation for
//! extremely large antenna arrays.
//!
//! The crate builds angle/range sampling codebooks (geometric, hyperbolic,
//! uniform, DFT, hybrid-field and Lloyd-designed), runs the three-phase FDD
//! feedback protocol with RVQ and zero-forcing, and evaluates the closed-form
//! error and bit-scaling laws against numerical oracles.

pub mod allocation;
pub mod array;
pub mod channel;
pub mod codebook;
pub mod distribution;
pub mod error;
pub mod feedback;
pub mod harness;
pub mod numerics;
pub mod seed;
pub mod theory;

pub use error::{Error, Result};
