//! Transmit chains and the front-end model that produces the local reference.
//!
//! The remote transmitter is modeled at symbol level. The local chain goes
//! through a real passband signal so the odd-order PA harmonics land where they
//! would in hardware, then back to symbol-rate complex baseband:
//!
//! ```text
//! bits -> BPSK -> RRC shaping -> upconvert -> PA (+ noise) -> downconvert -> RRC MF -> decimate -> normalize
//! ```
//!
//! Passband sequences carry a pre-roll of `span * sps / 2` samples: symbol `k`
//! peaks at passband sample `(k + span/2) * sps`, and a passband sequence for
//! `N` symbols is `(N + span) * sps` samples long.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::gauss;

/// Which representation a [`SampleSeq`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    PassbandReal,
    BasebandComplex,
    SymbolRateComplex,
}

/// A sampled signal with its rate and domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeq<T> {
    pub samples: Vec<T>,
    pub rate_hz: f64,
    pub domain: Domain,
}

pub type PassbandSeq = SampleSeq<f64>;
pub type ComplexSeq = SampleSeq<Complex64>;

impl<T> SampleSeq<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

impl ComplexSeq {
    pub fn symbol_rate(samples: Vec<Complex64>, rate_hz: f64) -> Self {
        SampleSeq { samples, rate_hz, domain: Domain::SymbolRateComplex }
    }

    /// Sample-mean power `E|s|^2`.
    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }
}

/// Sample-mean power of a complex slice.
pub fn mean_power(s: &[Complex64]) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    s.iter().map(|z| z.norm_sqr()).sum::<f64>() / s.len() as f64
}

/// Odd-order memoryless PA polynomial `a1 p + a3 p^3 + a5 p^5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaCoeffs {
    pub a1: f64,
    pub a3: f64,
    pub a5: f64,
}

impl PaCoeffs {
    pub const LINEAR: PaCoeffs = PaCoeffs { a1: 1.0, a3: 0.0, a5: 0.0 };

    #[inline]
    pub fn eval(&self, p: f64) -> f64 {
        let p2 = p * p;
        p * (self.a1 + p2 * (self.a3 + p2 * self.a5))
    }
}

/// Front-end parameters shared by the local transmit chain and the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontEndConfig {
    /// Bandwidth `B`; the symbol rate equals `B`.
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub rolloff: f64,
    pub filter_span_symbols: usize,
    pub samples_per_symbol: usize,
    pub pa: PaCoeffs,
    /// PA noise power, absolute passband sample power. `-inf` disables it.
    pub pa_noise_power_db: f64,
    /// Target power `P_i` of the local reference `i[n]`.
    pub local_ref_power_db: f64,
    /// Power `P_x` of the remote symbols.
    pub remote_symbol_power_db: f64,
}

impl Default for FrontEndConfig {
    fn default() -> Self {
        FrontEndConfig {
            bandwidth_hz: 5_000.0,
            carrier_hz: 12_000.0,
            rolloff: 0.5,
            filter_span_symbols: 12,
            samples_per_symbol: 32,
            pa: PaCoeffs { a1: 100.0, a3: 5.0, a5: 10.0 },
            pa_noise_power_db: 10.0,
            local_ref_power_db: 0.0,
            remote_symbol_power_db: 0.0,
        }
    }
}

impl FrontEndConfig {
    pub fn sample_rate_hz(&self) -> f64 {
        self.bandwidth_hz * self.samples_per_symbol as f64
    }

    /// Delay of one RRC filter in passband samples.
    pub fn filter_delay(&self) -> usize {
        self.filter_span_symbols * self.samples_per_symbol / 2
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0) || !self.bandwidth_hz.is_finite() {
            return Err(invalid("bandwidth_hz", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(invalid("rolloff", "must lie in [0, 1]"));
        }
        if self.filter_span_symbols < 2 || !self.filter_span_symbols.is_multiple_of(2) {
            return Err(invalid("filter_span_symbols", "must be even and at least 2"));
        }
        let half_band = self.bandwidth_hz * (1.0 + self.rolloff) / 2.0;
        if !(self.carrier_hz > half_band) {
            return Err(invalid("carrier_hz", "must exceed the baseband half-bandwidth"));
        }
        // fifth harmonic must stay below Nyquist
        if !(self.sample_rate_hz() > 2.0 * (5.0 * self.carrier_hz + half_band)) {
            return Err(invalid(
                "samples_per_symbol",
                "fifth PA harmonic aliases; raise the oversampling factor",
            ));
        }
        if self.pa_noise_power_db.is_nan() || self.local_ref_power_db.is_nan() {
            return Err(invalid("pa_noise_power_db", "must not be NaN"));
        }
        Ok(())
    }
}

/// Map bits to unit-power BPSK: `0 -> +1`, `1 -> -1`.
pub fn modulate_bpsk(bits: &[u8], symbol_rate_hz: f64) -> ComplexSeq {
    let samples = bits
        .iter()
        .map(|&b| Complex64::new(if b == 0 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    ComplexSeq::symbol_rate(samples, symbol_rate_hz)
}

/// Hard BPSK decision on the real part, matching [`modulate_bpsk`].
#[inline]
pub fn bpsk_slice(z: Complex64) -> Complex64 {
    Complex64::new(if z.re >= 0.0 { 1.0 } else { -1.0 }, 0.0)
}

fn rrc_value(t: f64, a: f64) -> f64 {
    if t == 0.0 {
        return 1.0 - a + 4.0 * a / PI;
    }
    let four_at = 4.0 * a * t;
    if a > 0.0 && (1.0 - four_at * four_at).abs() < 1e-12 {
        let x = PI / (4.0 * a);
        return a / 2.0.sqrt() * ((1.0 + 2.0 / PI) * x.sin() + (1.0 - 2.0 / PI) * x.cos());
    }
    ((PI * t * (1.0 - a)).sin() + four_at * (PI * t * (1.0 + a)).cos())
        / (PI * t * (1.0 - four_at * four_at))
}

/// Root-raised-cosine taps, `span * sps + 1` long, unit energy, symmetric.
pub fn rrc_taps(rolloff: f64, span_symbols: usize, sps: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(invalid("rolloff", "must lie in [0, 1]"));
    }
    if sps == 0 || span_symbols == 0 || !span_symbols.is_multiple_of(2) {
        return Err(invalid("span_symbols", "must be even and nonzero with sps > 0"));
    }
    let len = span_symbols * sps + 1;
    let half = len / 2;
    let mut taps = vec![0.0; len];
    for k in 0..=half {
        let t = k as f64 / sps as f64;
        let v = rrc_value(t, rolloff);
        taps[half + k] = v;
        taps[half - k] = v;
    }
    let energy: f64 = taps.iter().map(|x| x * x).sum();
    let scale = 1.0 / energy.sqrt();
    for x in &mut taps {
        *x *= scale;
    }
    Ok(taps)
}

fn carrier_phase(m: usize, cfg: &FrontEndConfig) -> f64 {
    // reduce in cycles first to keep the argument small for long runs
    let cycles = m as f64 * cfg.carrier_hz / cfg.sample_rate_hz();
    2.0 * PI * (cycles - cycles.floor())
}

/// RRC pulse shaping followed by upconversion to a real passband signal.
pub fn pulse_shape_upconvert(symbols: &ComplexSeq, cfg: &FrontEndConfig) -> Result<PassbandSeq> {
    cfg.validate()?;
    if symbols.domain != Domain::SymbolRateComplex || symbols.rate_hz != cfg.bandwidth_hz {
        return Err(Error::DomainMismatch("pulse shaping needs symbol-rate input at rate B"));
    }
    let sps = cfg.samples_per_symbol;
    let span = cfg.filter_span_symbols;
    let taps = rrc_taps(cfg.rolloff, span, sps)?;
    let n = symbols.len();
    let out_len = (n + span) * sps;
    let mut out = vec![0.0; out_len];
    let x = &symbols.samples;
    for (m, o) in out.iter_mut().enumerate() {
        // symbols k with 0 <= m - k*sps <= span*sps
        let k_hi = (m / sps).min(n.saturating_sub(1));
        let k_lo = m.saturating_sub(span * sps).div_ceil(sps);
        if n == 0 || k_lo > k_hi {
            continue;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for k in k_lo..=k_hi {
            acc += x[k] * taps[m - k * sps];
        }
        if acc.re == 0.0 && acc.im == 0.0 {
            continue;
        }
        let (s, c) = carrier_phase(m, cfg).sin_cos();
        // Re{acc * e^{j w m}}
        *o = acc.re * c - acc.im * s;
    }
    Ok(PassbandSeq { samples: out, rate_hz: cfg.sample_rate_hz(), domain: Domain::PassbandReal })
}

/// Memoryless odd-order PA plus additive real Gaussian PA noise.
pub fn pa_apply<R: Rng + ?Sized>(
    p: &PassbandSeq,
    cfg: &FrontEndConfig,
    rng: &mut R,
) -> Result<PassbandSeq> {
    if p.domain != Domain::PassbandReal {
        return Err(Error::DomainMismatch("PA input must be passband"));
    }
    let sigma = crate::db_to_linear(cfg.pa_noise_power_db).sqrt();
    let samples = p
        .samples
        .iter()
        .map(|&x| {
            let q = cfg.pa.eval(x);
            if sigma > 0.0 {
                q + sigma * gauss(rng)
            } else {
                q
            }
        })
        .collect();
    Ok(PassbandSeq { samples, rate_hz: p.rate_hz, domain: Domain::PassbandReal })
}

/// Mix to complex baseband, RRC matched filter, decimate to the symbol rate.
///
/// Output sample `k` is aligned with transmitted symbol `k`; a passband input of
/// `(N + span) * sps` samples yields `N` symbols.
pub fn downconvert_matched_downsample(
    passband: &PassbandSeq,
    cfg: &FrontEndConfig,
) -> Result<ComplexSeq> {
    cfg.validate()?;
    if passband.domain != Domain::PassbandReal {
        return Err(Error::DomainMismatch("downconversion needs a passband input"));
    }
    if (passband.rate_hz - cfg.sample_rate_hz()).abs() > 1e-9 * cfg.sample_rate_hz() {
        return Err(Error::DomainMismatch("passband rate differs from sps * B"));
    }
    let sps = cfg.samples_per_symbol;
    let span = cfg.filter_span_symbols;
    let taps = rrc_taps(cfg.rolloff, span, sps)?;
    let total = span * sps;
    let len = passband.len();
    if len < total + 1 {
        return Ok(ComplexSeq::symbol_rate(Vec::new(), cfg.bandwidth_hz));
    }
    let n_sym = (len - total - 1) / sps + 1;
    let mixed: Vec<Complex64> = passband
        .samples
        .iter()
        .enumerate()
        .map(|(m, &p)| {
            if p == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let (s, c) = carrier_phase(m, cfg).sin_cos();
            Complex64::new(2.0 * p * c, -2.0 * p * s)
        })
        .collect();
    let out = (0..n_sym)
        .map(|k| {
            // peak of symbol k after both filters sits at k*sps + span*sps
            let end = k * sps + total;
            let window = &mixed[end - total..=end];
            let mut acc = Complex64::new(0.0, 0.0);
            for (z, t) in window.iter().rev().zip(&taps) {
                acc += z * t;
            }
            acc
        })
        .collect();
    Ok(ComplexSeq::symbol_rate(out, cfg.bandwidth_hz))
}

/// Scale a sequence so its sample-mean power equals `10^(target_db/10)`.
pub fn normalize_power(seq: &ComplexSeq, target_db: f64) -> Result<ComplexSeq> {
    let p = seq.mean_power();
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::ZeroPower("normalize_power input"));
    }
    let g = (crate::db_to_linear(target_db) / p).sqrt();
    Ok(SampleSeq {
        samples: seq.samples.iter().map(|z| z * g).collect(),
        rate_hz: seq.rate_hz,
        domain: seq.domain,
    })
}

/// Build the local reference `i[n]` from the local bits through the full
/// passband chain.
pub fn make_local_reference<R: Rng + ?Sized>(
    local_bits: &[u8],
    cfg: &FrontEndConfig,
    rng: &mut R,
) -> Result<ComplexSeq> {
    let symbols = modulate_bpsk(local_bits, cfg.bandwidth_hz);
    let p = pulse_shape_upconvert(&symbols, cfg)?;
    let q = pa_apply(&p, cfg, rng)?;
    let i = downconvert_matched_downsample(&q, cfg)?;
    debug_assert_eq!(i.len(), local_bits.len());
    normalize_power(&i, cfg.local_ref_power_db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_bits, stream, Purpose};

    fn linear_cfg() -> FrontEndConfig {
        FrontEndConfig { pa: PaCoeffs::LINEAR, pa_noise_power_db: f64::NEG_INFINITY, ..Default::default() }
    }

    #[test]
    fn bpsk_mapping() {
        let s = modulate_bpsk(&[0, 1, 1], 5000.0);
        let re: Vec<f64> = s.samples.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![1.0, -1.0, -1.0]);
        assert!(modulate_bpsk(&[], 5000.0).is_empty());
    }

    #[test]
    fn bpsk_random_bits_have_unit_power() {
        let mut rng = stream(3, Purpose::LocalBits);
        let bits = random_bits(&mut rng, 10_000);
        let p = modulate_bpsk(&bits, 1.0).mean_power();
        assert!((p - 1.0).abs() < 1e-2);
    }

    #[test]
    fn rrc_shape_and_energy() {
        let t = rrc_taps(0.5, 12, 32).unwrap();
        assert_eq!(t.len(), 385);
        let e: f64 = t.iter().map(|x| x * x).sum();
        assert!((e - 1.0).abs() < 1e-12);
        for k in 0..t.len() {
            assert_eq!(t[k], t[t.len() - 1 - k]);
        }
        assert!(rrc_taps(1.5, 12, 32).is_err());
        assert!(rrc_taps(-0.1, 12, 32).is_err());
    }

    #[test]
    fn rrc_zero_rolloff_is_sinc() {
        let t = rrc_taps(0.0, 4, 8).unwrap();
        // zero crossings at integer symbol offsets
        for k in [8usize, 16] {
            assert!(t[16 + k].abs() < 1e-12);
        }
    }

    #[test]
    fn config_rejects_aliasing() {
        let cfg = FrontEndConfig { samples_per_symbol: 8, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::InvalidParameter { name: "samples_per_symbol", .. })));
        assert!(FrontEndConfig::default().validate().is_ok());
    }

    #[test]
    fn upconvert_zero_symbols_gives_zero() {
        let cfg = linear_cfg();
        let s = ComplexSeq::symbol_rate(vec![Complex64::new(0.0, 0.0); 20], cfg.bandwidth_hz);
        let p = pulse_shape_upconvert(&s, &cfg).unwrap();
        assert_eq!(p.len(), 32 * 32);
        assert!(p.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_symbol_is_modulated_pulse() {
        let cfg = linear_cfg();
        let s = ComplexSeq::symbol_rate(vec![Complex64::new(1.0, 0.0)], cfg.bandwidth_hz);
        let p = pulse_shape_upconvert(&s, &cfg).unwrap();
        let taps = rrc_taps(0.5, 12, 32).unwrap();
        let fs = cfg.sample_rate_hz();
        for (m, &v) in p.samples.iter().enumerate().take(taps.len()) {
            let want = taps[m] * (2.0 * PI * cfg.carrier_hz * m as f64 / fs).cos();
            assert!((v - want).abs() < 1e-12, "m={m}");
        }
        // envelope peak at the pulse center
        let center = cfg.filter_delay();
        let peak = taps.iter().cloned().fold(0.0, f64::max);
        assert_eq!(taps[center], peak);
    }

    #[test]
    fn passband_power_is_half_of_baseband() {
        let cfg = linear_cfg();
        let mut rng = stream(11, Purpose::LocalBits);
        let bits = random_bits(&mut rng, 4000);
        let s = modulate_bpsk(&bits, cfg.bandwidth_hz);
        let p = pulse_shape_upconvert(&s, &cfg).unwrap();
        let d = cfg.filter_delay();
        let body = &p.samples[2 * d..p.len() - 2 * d];
        let power = body.iter().map(|x| x * x).sum::<f64>() / body.len() as f64;
        let want = 0.5 / cfg.samples_per_symbol as f64;
        assert!((power / want - 1.0).abs() < 0.05, "power {power} want {want}");
    }

    #[test]
    fn pa_linear_and_polynomial() {
        let cfg = linear_cfg();
        let p = PassbandSeq { samples: vec![0.3, -0.1, 2.0], rate_hz: cfg.sample_rate_hz(), domain: Domain::PassbandReal };
        let mut rng = stream(1, Purpose::PaNoise);
        let q = pa_apply(&p, &cfg, &mut rng).unwrap();
        assert_eq!(q.samples, p.samples);

        let cfg = FrontEndConfig { pa_noise_power_db: f64::NEG_INFINITY, ..Default::default() };
        let p = PassbandSeq { samples: vec![0.1; 4], rate_hz: cfg.sample_rate_hz(), domain: Domain::PassbandReal };
        let q = pa_apply(&p, &cfg, &mut rng).unwrap();
        for v in q.samples {
            assert!((v - 10.0051).abs() < 1e-12);
        }
    }

    #[test]
    fn pa_noise_has_configured_power() {
        let cfg = FrontEndConfig { pa: PaCoeffs { a1: 0.0, a3: 0.0, a5: 0.0 }, ..Default::default() };
        let p = PassbandSeq { samples: vec![0.0; 100_000], rate_hz: cfg.sample_rate_hz(), domain: Domain::PassbandReal };
        let mut rng = stream(2, Purpose::PaNoise);
        let q = pa_apply(&p, &cfg, &mut rng).unwrap();
        let pw = q.samples.iter().map(|x| x * x).sum::<f64>() / q.len() as f64;
        assert!((pw / 10.0 - 1.0).abs() < 0.02);
    }

    #[test]
    fn downconvert_rejects_wrong_rate_and_zero_maps_to_zero() {
        let cfg = linear_cfg();
        let bad = PassbandSeq { samples: vec![0.0; 1000], rate_hz: 1.0, domain: Domain::PassbandReal };
        assert!(downconvert_matched_downsample(&bad, &cfg).is_err());
        let zero = PassbandSeq { samples: vec![0.0; 20 * 32], rate_hz: cfg.sample_rate_hz(), domain: Domain::PassbandReal };
        let out = downconvert_matched_downsample(&zero, &cfg).unwrap();
        assert_eq!(out.len(), 8);
        assert!(out.samples.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn normalize_power_targets() {
        let s = ComplexSeq::symbol_rate(vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, -2.0)], 1.0);
        let n = normalize_power(&s, 0.0).unwrap();
        assert!((n.samples[0].re - 1.0).abs() < 1e-15);
        let m = normalize_power(&n, 0.0).unwrap();
        for (a, b) in m.samples.iter().zip(&n.samples) {
            assert!((a - b).norm() < 1e-12);
        }
        let t = normalize_power(&s, -20.0).unwrap();
        assert!((t.mean_power() / 0.01 - 1.0).abs() < 1e-10);
        let z = ComplexSeq::symbol_rate(vec![Complex64::new(0.0, 0.0); 3], 1.0);
        assert_eq!(normalize_power(&z, 0.0), Err(Error::ZeroPower("normalize_power input")));
    }
}
