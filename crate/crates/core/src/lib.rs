pub mod coding;
pub mod counting;
pub mod error;
pub mod geometry;
pub mod group;
pub mod output;
pub mod potential;
pub mod spectral;

pub use error::{Error, Result};
