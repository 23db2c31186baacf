//! Weighted radial Sobolev spaces on `(0, R)`: discrete operators, weighted norms,
//! Hardy constants, the cutoff-and-reflection extension, and numerical computation of
//! best Sobolev constants with their extremal profiles.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod extension;
pub mod extremal;
pub mod mesh;
pub mod norms;
pub mod operators;
mod series;

pub use error::{Error, Result};
