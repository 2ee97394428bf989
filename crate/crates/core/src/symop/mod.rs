//! Symbolic operators built from the tractor-twisted Casimir.

pub mod casimir;
pub mod derive;
pub mod tensor;
