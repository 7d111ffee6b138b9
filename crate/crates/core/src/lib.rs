//! Reidemeister, analytic and residue torsion on finite twisted complexes and
//! model manifolds.

pub mod boundary_models;
pub mod error;
pub mod hodge_core;
pub mod spectral_models;
pub mod torsion_engine;
pub mod twisted_complex;
pub mod verify;
pub mod zeta;

pub use error::{Result, TorsionError};
