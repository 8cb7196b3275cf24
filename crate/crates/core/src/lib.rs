pub mod bounds;
pub mod cli;
pub mod error;
pub mod fourier_ops;
pub mod gap;
pub mod geometry;
pub mod quadrature;
pub mod rectangle;
pub mod verify;
pub mod window;

pub use error::{Error, Result};

#[cfg(test)]
mod proptests;
