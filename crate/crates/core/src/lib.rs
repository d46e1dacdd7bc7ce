//! Finite-element solver and experiment harness for the monolithic Biot-Stokes
//! interface problem: a Stokes fluid region coupled to a three-field
//! (displacement, total pressure, fluid pressure) poroelastic region through
//! Beavers-Joseph-Saffman and normal-flux transmission conditions.
//!
//! The crate discretizes the five-field system with generalized Taylor-Hood
//! elements, builds the parameter-weighted block-diagonal preconditioners
//! (including the fractional interface term realized by a spectral
//! decomposition on the interface trace space) and runs preconditioned MinRes.
//!
//! Monolithic unknown ordering is always `(u, d, p_F, phi, p_P)`.

pub mod assembly;
pub mod error;
pub mod exec;
pub mod fem;
pub mod interface;
pub mod linalg;
pub mod mesh;
pub mod precond;
pub mod study;

pub use error::{Error, Result};
