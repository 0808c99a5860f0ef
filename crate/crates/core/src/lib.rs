//! Off-resonant light-scattering decoherence of a two-level atomic qubit.
//!
//! The elastic (Rayleigh) contribution to decoherence is set by the squared
//! difference of the elastic scattering *amplitudes* of the two qubit levels,
//! not by the difference of their scattering rates. This crate computes those
//! amplitudes from a strong-field level structure, derives every Raman and
//! Rayleigh rate, propagates the resulting master equation through pulse
//! sequences, and reproduces the detuning sweeps and calibration fits used to
//! compare amplitude-based and rate-difference models.
//!
//! Units: frequencies and detunings in Hz, Rabi frequencies in rad/s, rates
//! in s^-1, times in s, angles in rad.

// `!(x > 0.0)` is used on purpose so NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod levels;
pub mod scattering;

pub use error::{Error, Result};
