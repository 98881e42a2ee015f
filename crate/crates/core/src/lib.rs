//! Constant-envelope pulse shaping for OQPSK.
//!
//! * [`psf`] defines the half-sine, SFSK and α-half-sine pulse family, a
//!   numerical constant-envelope verifier for arbitrary phase functions and a
//!   smoothness classifier.
//! * [`spectral`] computes spectra by trapezoidal quadrature, power spectra
//!   and out-of-band leakage curves.
//! * [`oqpsk`] is a complex-baseband OQPSK modulator with a sampled digital
//!   pulse, a zero-stuffing interpolation low-pass filter and PAPR measurement.

pub mod error;
pub mod oqpsk;
pub mod psf;
pub mod spectral;

pub use error::{Error, Result};
pub use psf::{PhaseFunction, Parity, PulseShape, ShapeKind};
