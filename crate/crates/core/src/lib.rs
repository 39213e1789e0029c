//! Parallel laminar flow near a constant-curvature wall.
//!
//! The crate builds the concentric-circle laminar field above a circular
//! wall arc, checks its closed-form derivatives against finite-difference
//! oracles, traces streamlines and pressure lines in the normal-coordinate
//! chart, evaluates the stationary mismatch and the wall-limit of the
//! tangential material derivative, and runs a small unsteady Navier-Stokes
//! solver on an annular sector to observe the near-wall deceleration.
//!
//! Closed forms are generic over [`Scalar`] (floats or exact rationals);
//! geometry and finite differences over [`Real`]. The aliases below fix the
//! usual `f64` instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

pub mod error;
pub mod fdops;
pub mod field;
pub mod geometry;
pub mod nssim;
pub mod scalar;
pub mod theorems;
pub mod tracing;
pub mod vec2;

pub use error::{Error, Result};
pub use field::{AdvectionVariant, Components, FieldHandle, LaminarParams, ScalarField};
pub use geometry::{ArcBoundary, LocalFrame, NormalPoint};
pub use scalar::{Real, Scalar};
pub use vec2::{Mat2, Vec2};

pub use num_rational::BigRational;

pub type Point = Vec2<f64>;
pub type Arc64 = ArcBoundary<f64>;
pub type Params64 = LaminarParams<f64>;
pub type ExactParams = LaminarParams<BigRational>;
pub type Field64 = FieldHandle<f64>;
pub type Pressure64 = ScalarField<f64>;

/// Library version, echoed in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
