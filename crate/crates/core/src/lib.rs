pub mod error;
pub mod linalg;
pub mod model;
pub mod toeplitz;

pub mod frand;
pub mod imaging;
pub mod metrics;

pub mod baselines;

pub mod config;
pub mod harness;
pub mod io;

pub use error::{Error, Result};
