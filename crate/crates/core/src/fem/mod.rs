//! Lagrange finite elements, function spaces and variational forms.

pub mod element;
pub mod forms;
pub mod quadrature;
pub mod space;

pub use element::{CellGeometry, Element};
pub use space::{DirichletSet, Field, FieldSpace, TaylorHood};
