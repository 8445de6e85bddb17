//! Visible boundaries of domains on discretized metric measure spaces.
//!
//! The crate rasterizes domains on 2D and 3D grids, builds the generational
//! construction of boundary points reachable by John paths from a base point,
//! certifies its paths and measure, and compares it against an exact
//! visibility search and Hausdorff content estimates.
//!
//! Numeric code is generic over [`real::Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for callers that do not care.

pub mod construction;
pub mod content;
pub mod domaingen;
pub mod error;
pub mod gridspace;
pub mod io;
pub mod real;
pub mod visibility;

pub use error::{Error, Result};
pub use gridspace::field::DistanceField;
pub use gridspace::mask::DomainMask;
pub use gridspace::path::GridPath;
pub use gridspace::GridSpace;
pub use real::Real;

pub type GridSpaceF64 = GridSpace<f64>;
pub type GridSpaceF32 = GridSpace<f32>;
pub type DomainMaskF64 = DomainMask<f64>;
pub type DomainMaskF32 = DomainMask<f32>;
pub type DistanceFieldF64 = DistanceField<f64>;
pub type DistanceFieldF32 = DistanceField<f32>;
pub type GridPathF64 = GridPath<f64>;
pub type GridPathF32 = GridPath<f32>;
