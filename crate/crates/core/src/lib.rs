//! Numerical laboratory for spectral multipliers of the harmonic oscillator,
//! their Weyl and twisted quantizations, and the Fock-space model.

pub mod error;
pub mod fock;
pub mod hermite_model;
pub mod jet;
pub mod multiplier;
pub mod opnorm;
pub mod specfun;
pub mod twisted;
pub mod weyl_quantization;

pub use error::{Error, Result};
