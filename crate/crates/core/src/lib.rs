//! Structure-preserving fractional discrete exterior calculus on regular 3D
//! cubical complexes.

pub mod complex;
pub mod error;
pub mod forms;
pub mod harness;
pub mod fraccalc;
pub mod operators;
pub mod sparsekit;

pub use error::{FdecError, Result};
