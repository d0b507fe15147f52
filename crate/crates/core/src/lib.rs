//! Numerical laboratory for the spreading and forced drainage of a
//! groundwater mound in a porous medium with capillary retention.
//!
//! The water table height `h(x, t)` obeys a generalized porous medium
//! equation `∂t h = κ ∂xx h²` whose diffusivity `κ` switches between an
//! advancing value `κ₁` and a receding value `κ₂ = κ₁ / (1 − δ)` with the
//! sign of `∂t h` (`δ` is the trapped pore fraction). Both edges of the
//! mound are free boundaries.
//!
//! The crate provides:
//!
//! * [`dipole`] - an explicit solver for the natural-outflow problem in
//!   rescaled coordinates `ξ = x / x_r(t)`, with the right front pinned
//!   at `ξ = 1` and advanced from the tip slope.
//! * [`drainage`] - a fixed-grid front-tracking solver handling forced
//!   drainage at the left front, a pinned left edge, and free two-sided
//!   spreading.
//! * [`similarity`] - a shooting solver for the nonlinear eigenvalue
//!   problem that yields the anomalous spreading exponent `β`, plus the
//!   exact self-similar drainage solution used for validation.
//! * [`analysis`] - power-law exponent extraction, profile-collapse
//!   metrics, and the solver-versus-eigenvalue comparison harness.
//!
//! All algorithms are deterministic; batch helpers in [`batch`] run
//! independent cases in parallel when the `parallel` feature (default)
//! is enabled and fall back to sequential iteration otherwise.

// Validation uses `!(x > 0.0)` so NaN fails the checks too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod batch;
pub mod dipole;
pub mod drainage;
pub mod error;
pub mod params;
pub mod profile;
pub mod similarity;

pub use error::SolverError;
pub use params::PhysicalParams;
pub use profile::{InitialCondition, Profile, SeriesRecord};
