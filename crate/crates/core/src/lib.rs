//! Exact combinatorics of affine apartments: chamber complexes, contracting
//! homotopies supported on cones, Moy-Prasad filtrations and the `SL₂`
//! coefficient-system complex on a tree ball.

pub mod apartment;
pub mod cone;
pub mod config;
pub mod contraction;
pub mod error;
pub mod linalg;
pub mod moy_prasad;
pub mod par;
pub mod polytope;
pub mod rational;
pub mod render;
pub mod roots;
pub mod sl2;

pub use error::{Error, Result};
pub use rational::Q;
