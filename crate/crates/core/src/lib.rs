//! Thermal quantum coherence and geometric discord of a spin-1/2
//! Heisenberg dimer.
//!
//! The crate has two independent routes to every observable:
//!
//! * [`quantum`] builds the 4x4 Hamiltonian, diagonalizes it and forms Gibbs
//!   states explicitly. It is slow and obviously correct.
//! * [`models`] holds the closed-form expressions (Bleaney-Bowers
//!   susceptibility, partition function, longitudinal and transverse
//!   coherences, critical field).
//!
//! [`fitting`] estimates (J, g) from measured susceptibility and
//! [`sweep`] produces parameter sweeps with both routes side by side.

pub mod constants;
pub mod error;
pub mod fitting;
pub mod models;
pub mod quantifiers;
pub mod quantum;
pub mod sweep;
pub mod table;

pub use error::{Error, ErrorClass, Result};
pub use quantifiers::{CoherenceValue, DiscordValue};
pub use quantum::{Basis, DensityMatrix4, DimerParams, Hamiltonian4};
