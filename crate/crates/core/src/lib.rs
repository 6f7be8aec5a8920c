//! Sharp weak-type bounds for the radial Hardy operator and its adjoint
//! under power weights.
//!
//! Everything operates on [`RadialProfile`]s: piecewise sums of
//! `c r^a (ln r)^k` on intervals of `(0, inf)`. The forward and adjoint
//! operators, weighted strong norms and weak quasi-norms are all evaluated in
//! closed form on that family, so the sharp constants can be compared with
//! the ratios of explicit test functions to near machine precision.
//! The [`oracle`] module is an independent Monte Carlo cross-check in `R^n`.
#![no_std]

extern crate alloc;

pub mod error;
pub mod integrate;
pub mod limiting;
pub mod math;
pub mod operators;
pub mod oracle;
pub mod params;
pub mod profile;
pub mod quad;
pub mod reduction;
pub mod roots;
pub mod sampling;
pub mod sharpness;
pub mod special;
pub mod weaknorm;

pub use error::{Error, Result};
pub use operators::OperatorKind;
pub use params::{geom, validate_adjoint, validate_forward, validate_lebesgue, RawParams, SpaceParams};
pub use profile::{RadialProfile, ScalarField, Term};
pub use weaknorm::{weak_norm, SupKind, WeakNormResult};

