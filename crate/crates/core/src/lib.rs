//! Curved-Casimir engine for conformally invariant differential operators.

pub mod bundles;
pub mod coeff;
pub mod error;
pub mod numeric;
pub mod symop;
pub mod weights;

pub use error::{Error, Result};
