pub mod analysis;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod protocol;
pub mod verify;

pub use error::{Error, Result};
