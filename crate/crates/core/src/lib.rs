pub mod algebra;
pub mod calabi;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod immersions;
pub mod surfaces;

pub use error::{Error, Result};
