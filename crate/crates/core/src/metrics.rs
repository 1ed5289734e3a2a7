//! Normalized error measures and BER counting.

use num_complex::Complex64;

use crate::channel::TapTrajectory;
use crate::error::{check_len, Error, Result};
use crate::linalg::{dist_sqr, norm_sqr};

/// Running `E||a - a^||^2 / E||a||^2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MseAccumulator {
    err: f64,
    power: f64,
    count: usize,
}

impl MseAccumulator {
    pub fn add(&mut self, truth: &[Complex64], estimate: &[Complex64]) {
        self.err += dist_sqr(truth, estimate);
        self.power += norm_sqr(truth);
        self.count += 1;
    }

    pub fn add_scalar(&mut self, truth: Complex64, estimate: Complex64) {
        self.err += (truth - estimate).norm_sqr();
        self.power += truth.norm_sqr();
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn value(&self) -> Result<f64> {
        if !(self.power > 0.0) {
            return Err(Error::ZeroPower("MSE reference"));
        }
        Ok(self.err / self.power)
    }
}

/// Normalized channel MSE between a true trajectory and per-cycle estimates.
///
/// `estimate.at(n)` is compared with `truth.at(n - shift)` for every `n` in
/// `window` with `n >= shift`.
pub fn normalized_channel_mse(
    truth: &TapTrajectory,
    estimate: &TapTrajectory,
    shift: usize,
    window: core::ops::Range<usize>,
) -> Result<f64> {
    check_len("estimate taps", truth.n_taps(), estimate.n_taps())?;
    let mut acc = MseAccumulator::default();
    for n in window {
        if n < shift || n >= estimate.n_symbols() {
            continue;
        }
        acc.add(truth.at(n - shift), estimate.at(n));
    }
    acc.value()
}

/// `E|r - r^|^2 / E|r|^2` over aligned slices.
pub fn residual_mse(r_true: &[Complex64], r_hat: &[Complex64]) -> Result<f64> {
    check_len("residual", r_true.len(), r_hat.len())?;
    let mut acc = MseAccumulator::default();
    for (a, b) in r_true.iter().zip(r_hat) {
        acc.add_scalar(*a, *b);
    }
    acc.value()
}

/// Minimum error count for a BER point to be considered reliable.
pub const MIN_RELIABLE_ERRORS: u64 = 20;

/// Bit error counter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BerCounter {
    pub errors: u64,
    pub symbols: u64,
}

impl BerCounter {
    pub fn record(&mut self, sent: Complex64, decided: Complex64) {
        self.symbols += 1;
        if (sent.re >= 0.0) != (decided.re >= 0.0) {
            self.errors += 1;
        }
    }

    pub fn merge(&mut self, other: BerCounter) {
        self.errors += other.errors;
        self.symbols += other.symbols;
    }

    pub fn ber(&self) -> f64 {
        if self.symbols == 0 {
            return f64::NAN;
        }
        self.errors as f64 / self.symbols as f64
    }

    pub fn reliable(&self) -> bool {
        self.errors >= MIN_RELIABLE_ERRORS
    }

    /// Normal-approximation 95% half-width of the BER estimate.
    pub fn ci95(&self) -> f64 {
        if self.symbols == 0 {
            return f64::NAN;
        }
        let p = self.ber();
        1.96 * num_traits::Float::sqrt(p * (1.0 - p) / self.symbols as f64)
    }
}
