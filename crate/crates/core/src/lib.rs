pub mod assembly;
pub mod basis2d;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod wavelet1d;

pub use error::{Error, Result};
