pub mod cli;
pub mod error;
pub mod grassmann;
pub mod kgc;
pub mod matker;
pub mod spd_gyro;
pub mod spd_mlr;
pub mod verify;

#[cfg(test)]
mod testkit;

pub use error::{GyroError, Result};
