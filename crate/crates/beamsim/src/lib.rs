//! Simulator for sub-shot-noise optical beam displacement measurements.
//!
//! Models transverse Hermite-Gaussian and phase-flipped ("flipped") modes,
//! overlap integrals over split/quadrant detector regions, linearized
//! quadrature-noise propagation of squeezed vacuum fields, a Gouy-phase
//! ring-cavity mode combiner, an electronic spectrum analyser, and a
//! semiclassical Monte-Carlo shot-noise oracle. A scenario layer drives
//! end-to-end pipelines and writes deterministic CSV traces.

pub mod cavity;
pub mod detector;
pub mod error;
pub mod esa;
pub mod modes;
pub mod montecarlo;
pub mod noise;
pub mod overlap;
pub mod quad;
pub mod scenario;
pub mod trace;
pub mod units;

pub use error::{Error, Result};
pub use modes::{BeamParams, FlipAxes, ModeSpec, TransversePoint};

/// Planck constant (J s), CODATA 2018 exact value.
pub const PLANCK_H: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
