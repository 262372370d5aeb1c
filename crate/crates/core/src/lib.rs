//! Phase-space simulation of two gravitating masses, each in a
//! superposition of three positions, and the entanglement witnesses built
//! from the particle-2 marginal.
//!
//! The initial state is a sum of nine Gaussian branches with interference
//! fringes. It is evolved under approximate classical dynamics (quadratic
//! potentials or stepwise constant forces, optionally with momentum
//! diffusion) and compared to the exact quantum purity.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod observables;
pub mod params;
pub mod potentials;
pub mod quadrature;
pub mod trajectory;
pub mod wigner;

pub use error::{Error, Result};
pub use params::{Params, RawParams};
