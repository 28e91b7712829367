//! Certified lower bounds for univariate and custom WSOS cones via dual certificates.

pub mod barrier;
pub mod bounds;
pub mod certificates;
pub mod cli;
pub mod cone;
pub mod constants;
pub mod error;
pub mod field;
pub mod fraction_free;
pub mod linalg;
pub mod rational;
pub mod solver;

pub use error::{Error, Result};
