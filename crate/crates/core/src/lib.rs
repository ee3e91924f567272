pub mod cli;
pub mod config;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod identities;
pub mod oracles;
pub mod pipeline;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
