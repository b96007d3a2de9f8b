//! Exact simulation of a nine-qubit Shor-code logical qubit driven by an always-on
//! diagonal Hamiltonian, with depolarizing noise and the error-correction sequence.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod effective_couplings;
pub mod error;
pub mod hamiltonian;
pub mod noise;
pub mod pauli;
pub mod qec_sequence;
pub mod shor_code;
pub mod state;
pub mod table;

pub use error::{Error, Result};
