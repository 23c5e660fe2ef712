//! Deterministic numerical laboratory for the spatially homogeneous Boltzmann
//! equation with soft potentials on an expanding Newtonian background.

pub mod collision;
pub mod config;
pub mod decay;
pub mod error;
pub mod evolution;
pub mod fields;
pub mod invariants;
pub mod norms;
pub mod quadrature;
pub mod runner;
pub mod scale_factor;
pub mod sphere;
pub mod velocity;

pub use error::{Error, Result};
