//! Compile stabilizer codes into dual-species CZ/Hadamard programs, schedule the CZ gates
//! into parallel layers, and simulate the resulting entanglement purification protocols.

pub mod bell;
pub mod cli;
pub mod compiler;
pub mod decoder;
pub mod error;
pub mod f2;
pub mod pauli;
pub mod plot;
pub mod rates;
pub mod scheduler;
pub mod sim;
pub mod stabilizer;

pub use error::{Error, Result};
