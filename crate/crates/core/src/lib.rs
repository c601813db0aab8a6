//! Relay-hysteresis lattice laboratory.
//!
//! This crate simulates reaction-diffusion dynamics with discontinuous
//! relay hysteresis on 1-D and 2-D lattices, evaluates the discrete Green
//! function and its asymptotic profile, solves the transcendental equation
//! for the rattling coefficient, verifies the quadratic switching-time law
//! and the alternating switch patterns, and solves a 1-D parabolic free
//! boundary problem by a fixed-point construction.

pub mod analysis;
pub mod coeff;
pub mod engine;
pub mod error;
pub mod green;
pub mod lattice1d;
pub mod lattice2d;
pub mod ode;
pub mod quad;
pub mod relay;
pub mod signal;
pub mod slowfast;
pub mod svg;
pub mod transverse;

pub use error::{Error, Result};
pub use signal::Signal;
