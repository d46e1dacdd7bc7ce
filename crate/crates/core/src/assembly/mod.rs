//! Monolithic five-field system: parameters, block operator, loads and the
//! manufactured-solution convergence test.

pub mod mms;
mod params;
mod system;

pub use params::Params;
pub use system::{assemble_load, dirichlet_set, dirichlet_tags, field_mask, monolithic, nonzero_blocks, Blocks, Forcing, Operators, System};
