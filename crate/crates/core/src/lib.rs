//! Uniformly accurate two-scale integrators for highly oscillatory
//! dispersive equations, with the spectral machinery, test problems,
//! reference solvers and experiment harness they need.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod dd;
pub mod error;
pub mod harness;
pub mod initdata;
pub mod integrators;
pub mod models;
pub mod reference;
pub mod spectral;

pub use error::{Error, Result};
pub use initdata::PreparationOrder;
pub use integrators::Scheme;
pub use models::{Model, ModelId, VectorField};
pub use num_complex::Complex64;
pub use spectral::{SpatialField, SpatialGrid, TauGrid, TwoScaleField};
