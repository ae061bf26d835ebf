//! Simulator and analysis toolkit for a non-contact cold thermal display
//! driven by a vortex tube.
//!
//! - [`thermo`]: lumped model of skin cooling by a cold air jet.
//! - [`device`]: vortex tube and PWM valve chain producing the jet velocity.
//! - [`harness`]: sensor transient and phantom cooling experiments.
//! - [`psychophys`]: constant-stimuli protocol, simulated observer, fitting.
//! - [`config`]: scenario files consumed by the `coolsim` binary.

pub mod config;
pub mod device;
pub mod error;
pub mod harness;
pub mod io;
pub mod psychophys;
pub mod thermo;

pub use error::{Error, Result};
pub use thermo::{CoolingCoefficient, CoolingSetup, Precision, Preset};
