//! A rank-one check of the exactness statement on the Bruhat-Tits tree of
//! `SL₂(ℚ_p)`: coefficient systems with values in finite-dimensional
//! representations of `SL₂(ℤ/pᴺ)`.

pub mod group;
pub mod tree;
pub mod ss;
