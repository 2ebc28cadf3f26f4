//! Chirped-pulse phase control of a harmonic oscillator linearly coupled to a harmonic bath,
//! starting from the correlated system-bath equilibrium.

// NaN-rejecting checks are written as negated comparisons; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bath;
pub mod checks;
pub mod config;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod gaussian;
pub mod greens;
pub mod grid;
pub mod output;
pub mod presets;
pub mod propagator;
pub mod pulse;
pub mod quadrature;
pub mod scenario;

pub use error::{Error, Result};

/// Oscillator frequency in natural units.
pub const OMEGA0: f64 = 1.0;
/// Characteristic position scale `sqrt(hbar / (m omega0))`.
pub const Q0: f64 = 1.0;
/// Field scale `sqrt(2 hbar m omega0)` used to express pulse spectra.
pub const FIELD_SCALE: f64 = std::f64::consts::SQRT_2;
