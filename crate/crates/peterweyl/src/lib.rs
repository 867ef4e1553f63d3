//! Harmonic analysis and pseudodifferential operator calculus on compact
//! Lie groups, with concrete backends for SU(2) and tori.
//!
//! The crate is organized around one trait, [`group::CompactGroup`], which
//! supplies the group operations, the unitary dual, quadrature grids, and
//! Fourier transforms. Everything else (symbols, quantization, function
//! spaces, the verification suite) is generic over that trait.

pub mod dual;
pub mod error;
pub mod fourier;
pub mod group;
pub mod linalg;
pub mod quantize;
pub mod session;
pub mod spaces;
pub mod symbol;
pub mod verify;

pub use error::{Error, Result};
