pub mod cli;
pub mod constants;
pub mod dist;
pub mod entropy;
pub mod error;
pub mod family;
pub mod functional;
pub mod optimizer;
pub mod repro;
pub mod sampler;

pub use error::{Error, Result};
