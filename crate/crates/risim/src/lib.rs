//! Simulator and optimization toolkit for wireless links assisted by a
//! reconfigurable intelligent surface (RIS).
//!
//! The crate models a single-antenna Tx/Rx pair and a passive planar RIS
//! whose unit cells apply binary (0/π) phase shifts. It provides:
//!
//! * [`scene`] — scenario geometry: positions, element lattice, carrier.
//! * [`channel`] — per-element cascaded channel synthesis (free-space or
//!   angular-sparse), end-to-end composition, and noisy pilot observation.
//! * [`sensing`] — Sylvester–Hadamard and Bernoulli sensing matrices and the
//!   2D DFT angular transform.
//! * [`estimate`] — Hadamard least-squares and orthogonal matching pursuit
//!   channel estimators.
//! * [`configure`] — conjugate-phase configuration, 1-bit quantization, the
//!   per-element greedy power optimizer, and an exhaustive oracle.
//! * [`coverage`] — receiver-grid path-gain maps with CSV/PGM output.
//! * [`cli`] — scenario files, campaign commands, reports, and benchmarks.
//!
//! All numeric code is generic over the scalar type through [`Scalar`]
//! (`f32` or `f64`); concrete aliases for the common instantiations live at
//! the crate root. The command-line front end works in `f64`.

pub mod channel;
pub mod cli;
pub mod configure;
pub mod coverage;
pub mod error;
pub mod estimate;
pub mod io;
pub mod scalar;
pub mod scene;
pub mod sensing;

pub use error::{Result, RisError};
pub use num_complex::Complex;
pub use scalar::Scalar;

// Concrete aliases for the two supported scalar instantiations.

pub type Scene64 = scene::Scene<f64>;
pub type RisChannel64 = channel::RisChannel<f64>;
pub type NoiseSpec64 = channel::NoiseSpec<f64>;
pub type Observation64 = channel::Observation<f64>;
pub type AngularTransform64 = sensing::AngularTransform<f64>;
pub type EstimateResult64 = estimate::EstimateResult<f64>;
pub type PhaseConfig64 = configure::PhaseConfig<f64>;
pub type GridSpec64 = coverage::GridSpec<f64>;
pub type CoverageGrid64 = coverage::CoverageGrid<f64>;

pub type Scene32 = scene::Scene<f32>;
pub type RisChannel32 = channel::RisChannel<f32>;
pub type NoiseSpec32 = channel::NoiseSpec<f32>;
pub type Observation32 = channel::Observation<f32>;
pub type AngularTransform32 = sensing::AngularTransform<f32>;
pub type EstimateResult32 = estimate::EstimateResult<f32>;
pub type PhaseConfig32 = configure::PhaseConfig<f32>;
pub type GridSpec32 = coverage::GridSpec<f32>;
pub type CoverageGrid32 = coverage::CoverageGrid<f32>;
