//! Variational simulation of finite-temperature quantum dynamics in the
//! thermofield-double picture.
//!
//! The physical register is purified by a fictitious copy. Thermal states are
//! prepared by imaginary-time McLachlan flow from the maximally entangled state,
//! then evolved in real time under `Ĥ = H − H̃`. Every pipeline has an exact
//! dense-matrix counterpart in [`oracle`].

pub mod ansatz;
pub mod estimators;
pub mod dynamics;
pub mod error;
pub mod models;
pub mod oracle;
pub mod pauli;
pub mod statevector;
pub mod tfd;
pub mod vqa;

pub use error::{Error, Result};
