//! Balanced biarc interpolation of closed space curves and the discrete
//! tangent-point energies built on it.

// `!(x <= tol)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biarc;
pub mod curve;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod geom;
pub mod interpolate;
pub mod optimize;
pub mod quad;
pub mod table;

pub use error::{Error, Result};
