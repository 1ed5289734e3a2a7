//! Link-level model of an in-band full-duplex underwater acoustic modem.
//!
//! The crate covers the local transmit chain that produces the self-interference
//! reference `i[n]`, time-varying multipath channels, the adaptive receiver that
//! jointly tracks the self-interference and remote channels, and the link runner
//! that measures BER and normalized estimation errors.
//!
//! Everything here is deterministic given a seed and needs only `alloc`.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod channel;
pub mod error;
pub mod link;
pub mod linalg;
pub mod metrics;
pub mod receiver;
pub mod rng;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Convert decibels to a linear power ratio.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    libm_pow10(db / 10.0)
}

/// Convert a linear power ratio to decibels.
#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * num_traits::Float::log10(x)
}

#[inline]
fn libm_pow10(x: f64) -> f64 {
    num_traits::Float::powf(10.0, x)
}
