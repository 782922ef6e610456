//! Zipper models on rooted Cayley trees: admissible configurations, boundary
//! laws, finite-volume Gibbs measures, free energies and phase scans.

pub mod boundary_law;
pub mod cli;
pub mod error;
pub mod gibbs;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod thermo;
pub mod tree;

pub use error::{Result, ZipperError};
