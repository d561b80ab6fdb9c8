//! Normal modes of a linear ion string whose center ion has a different mass.
//!
//! Everything in the computational core is dimensionless: positions are in
//! units of the length scale `ℓ` (`ℓ³ = q/(4πε₀a₀)`), frequencies in units of the
//! single-ion axial frequency `ω_z` of an outer ion, and time in `T = ω_z t`.
//! Conversion to laboratory units lives in [`physical`].
//!
//! Mode and ion indices in the Rust API are zero-based. The center ion of an
//! `n`-ion string sits at index `n / 2`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibrium;
pub mod error;
pub mod heating;
pub mod modes;
pub mod numerics;
pub mod physical;
pub mod stability;
pub mod sweep;
pub mod types;

pub use error::{ConfigError, Error, Result};
pub use types::{
    Branch, CrystalConfig, DynamicalMatrix, EquilibriumConfiguration, ModeClass, ModeSpectrum,
    ModeTrajectory,
};

/// Crate version, embedded in generated file headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
