//! Exact Lebesgue numbers, meshes and quasi-homothety bounds.
//!
//! Finite metric spaces are handled by [`lebesgue`]; covering families of
//! open axis-aligned boxes over slices of `Q^n` by [`boxlab`]. Every quantity
//! is an exact [`Value`]; nothing in the crate uses floating point.

pub mod boxlab;
pub mod cover;
pub mod fixtures;
pub mod homothety;
pub mod io;
pub mod lebesgue;
pub mod oracle;
pub mod space;
pub mod value;

pub use cover::{BoxFamily, CoveringFamily, FiniteFamily, Member, OpenBox, OpenInterval};
pub use space::{Axis, FiniteMetricSpace, Norm, PointSet, SliceSpace};
pub use value::{Rational, Value};
