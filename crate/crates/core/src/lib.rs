//! Discrete-time baseband simulator for optical OFDM (ACO / DCO), optical
//! OFDM with index modulation, and the hybrid scheme that superposes the two
//! on the same subcarriers.
//!
//! The signal chain is split the same way a link is:
//!
//! - [`dsp`]: transform kernels and bin bookkeeping
//! - [`mapping`]: bit budget and subcarrier activation pattern coding
//! - [`constellation`]: PSK rings and the superposition look-up table
//! - [`transmitter`]: frame assembly through biased, filtered intensity signal
//! - [`channel`]: LOS / ceiling-bounce channels, cyclic prefix, AWGN
//! - [`receiver`]: zero-forcing, energy detection and demapping
//! - [`metrics`]: spectral efficiency, Monte-Carlo BER and sweeps
//! - [`selftest`]: the always-on property suite

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod constellation;
pub mod dsp;
mod error;
pub mod mapping;
pub mod metrics;
pub mod receiver;
pub mod selftest;
pub mod transmitter;

pub use error::{Error, Result};
pub use num_complex::Complex64;
