//! Simulation and joint optimization of IRS-assisted terahertz downlinks.
//!
//! The crate models the water-vapour absorption channel in the 200–400 GHz
//! window and jointly chooses the IRS location, its phase shifts, the
//! sub-band assignment and the transmit powers to maximize the sum rate
//! under per-user rate floors.

pub mod allocation;
pub mod bcs;
pub mod channel;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod phase_opt;
pub mod rng;

pub use error::{Error, Result};
