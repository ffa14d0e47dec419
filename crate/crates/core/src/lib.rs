//! Frequency estimation with bosonic Fock states.
//!
//! Quantum Fisher information of Fock and superposition probes, the
//! relative-entropy non-Gaussianity degree, a two-mode excitation-transfer
//! protocol and a photon-number measurement channel, all over truncated Fock
//! spaces in natural units (ħ = 1).

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod gaussian_ref;
pub mod hilbert;
pub mod measurement;
pub mod metrology;
pub mod quadrature;
pub mod wavefunction;

pub use error::{Error, Result};
