#![no_std]
//! Exact kernel for finite-dimensional normed spaces whose unit balls are
//! symmetric rational polytopes, and for embedding/projection pairs between
//! them.

extern crate alloc;

pub mod arrows;
pub mod catalog;
pub mod certificate;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod lp;
pub mod matrix;
pub mod pushout;
pub mod rational;
pub mod spaces;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use rational::{Vector, Q};
pub use spaces::{NormedSpace, SumKind};
