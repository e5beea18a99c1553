pub mod error;
pub mod euler_ring;
pub mod brouwer;
pub mod cli;
pub mod config;
pub mod continuation;
pub mod potentials;
pub mod predictor;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
