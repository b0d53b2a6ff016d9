//! Haar-random quantum codes under Pauli noise: exact finite-size spectra,
//! entropies and coherent information, with closed-form predictions to
//! compare against.

pub mod ansatz;
pub mod channels;
pub mod code;
pub mod density;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod pauli;
pub mod postselect;
pub mod spectra;

pub use error::{Error, Result};
