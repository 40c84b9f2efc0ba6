//! Quasi-étale covers of Du Val del Pezzo surfaces, computed on the lattice side.
//!
//! The crate works entirely with Picard lattices of weak del Pezzo surfaces:
//! root subsystems classify singularity types, torsion of `Pic/R` classifies
//! covers, and automorphisms of dual graphs give Cremona isometry groups.

pub mod ade;
pub mod correspondence;
pub mod covers;
pub mod cris;
pub mod error;
pub mod lattice;
pub mod reference;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
