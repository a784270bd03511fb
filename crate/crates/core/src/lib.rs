pub mod ansatz;
pub mod error;
pub mod experiment;
pub mod fermion;
pub mod hubbard;
pub mod meanfield;
pub mod pauli;
pub mod reference;
pub mod sim;
pub mod solve;

pub use error::{Error, Result};
