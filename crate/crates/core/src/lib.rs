//! Equivariant polynomial vector fields in R^4 that carry robust
//! heteroclinic cycles between symmetry axes: group construction from
//! quaternion pairs, closed-form existence/stability criteria, Poincare-type
//! return maps, and numerical verification of the predicted dynamics.

pub mod dynamics;
pub mod error;
pub mod fields;
pub mod group;
pub mod maps;
pub mod ode;
pub mod planar;
pub mod quat;

pub use error::{Error, Result};
