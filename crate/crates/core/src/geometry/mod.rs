//! Exact rational polytopes: hulls, V/H conversion, images and sections.

pub mod dd;
mod polytope;

pub use polytope::{dimension_cap, set_dimension_cap, Polytope};
