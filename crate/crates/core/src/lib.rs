pub mod analytic;
pub mod breather;
pub mod cli;
pub mod error;
pub mod evolve;
pub mod model;
pub mod monodromy;
pub mod spectral;

pub use error::{Error, Result};
