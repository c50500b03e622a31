//! Damped oscillations with time-dependent coefficients and causal
//! dissipative wave kernels.
//!
//! * [`ode`]: direct integration of `v'' + a v' + b v = f0`.
//! * [`frequency`]: frequency function, dissipation profile, classification.
//! * [`representation`]: closed-form solutions built from the frequency function.
//! * [`models`]: analytic model families.
//! * [`waves`]: dissipation laws, kernel semigroups and spherical fields.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod export;
pub mod frequency;
pub mod interp;
pub mod models;
pub mod ode;
pub mod params;
pub mod quadrature;
pub mod representation;
pub mod waves;

pub use error::{Error, Result};
