//! Finite-difference verification on periodic grids.

pub mod eval;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod section;
pub mod verify;
