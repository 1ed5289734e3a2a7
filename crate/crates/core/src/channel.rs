//! Time-varying multipath channels and the received-signal composition
//! `y[n] = c^H[n] i[n] + h^H[n] x[n] + w[n]`.
//!
//! Taps follow the Hermitian convention everywhere: a tap vector `c` acts on a
//! newest-first input window as `c^H i`, i.e. `out[n] = sum_k conj(c_k) x[n-k]`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{check_len, invalid, Error, Result};
use crate::linalg::{dot_h, History};
use crate::rng::complex_gauss;
use crate::waveform::ComplexSeq;

/// Power delay profile at symbol spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct PdpSpec {
    /// Linear per-tap powers.
    pub profile: Vec<f64>,
    /// `true` marks a time-invariant tap.
    pub static_mask: Vec<bool>,
}

/// Peak of the surface-reflection cluster relative to the direct path, in dB.
pub const SI_SURFACE_PEAK_DB: f64 = -37.0;
/// Exponential skirt constant of the surface cluster, in taps.
pub const SI_SURFACE_SKIRT_TAPS: f64 = 2.0;
/// Diffuse floor on the remaining SI taps relative to the direct path, in dB.
pub const SI_FLOOR_DB: f64 = -55.0;

impl PdpSpec {
    pub fn new(profile: Vec<f64>, static_mask: Vec<bool>) -> Result<Self> {
        check_len("static_mask", profile.len(), static_mask.len())?;
        if profile.is_empty() {
            return Err(invalid("profile", "must have at least one tap"));
        }
        if profile.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(invalid("profile", "tap powers must be finite and nonnegative"));
        }
        Ok(PdpSpec { profile, static_mask })
    }

    pub fn len(&self) -> usize {
        self.profile.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profile.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.profile.iter().sum()
    }
}

/// Default SI profile: a static direct path at tap 0 and a time-varying
/// surface-reflection cluster centered on tap `M/2`.
///
/// The cluster level is an approximation; the shape can be overridden with a
/// profile file.
pub fn si_pdp_default(m: usize) -> Result<PdpSpec> {
    if m < 2 {
        return Err(invalid("M", "SI channel needs at least 2 taps"));
    }
    let center = (m / 2) as f64;
    let peak = crate::db_to_linear(SI_SURFACE_PEAK_DB);
    let floor = crate::db_to_linear(SI_FLOOR_DB);
    let mut profile = vec![0.0; m];
    profile[0] = 1.0;
    for (k, p) in profile.iter_mut().enumerate().skip(1) {
        let d = (k as f64 - center).abs();
        *p = (peak * (-d / SI_SURFACE_SKIRT_TAPS).exp()).max(floor);
    }
    let mut static_mask = vec![false; m];
    static_mask[0] = true;
    PdpSpec::new(profile, static_mask)
}

/// Exponential remote profile `exp(-decay * k)`, all taps time-varying.
pub fn remote_pdp(l: usize, decay: f64) -> Result<PdpSpec> {
    if l < 1 {
        return Err(invalid("L", "remote channel needs at least 1 tap"));
    }
    if !(decay > 0.0) {
        return Err(invalid("decay", "must be positive"));
    }
    let profile = (0..l).map(|k| (-decay * k as f64).exp()).collect();
    PdpSpec::new(profile, vec![false; l])
}

/// Scale a profile so a unit-power white input of power `input_power_db`
/// produces an output of power `signal_power_db`.
pub fn scale_pdp(pdp: &PdpSpec, signal_power_db: f64, input_power_db: f64) -> Result<PdpSpec> {
    let total = pdp.total_power();
    if !(total > 0.0) {
        return Err(Error::ZeroPower("PDP"));
    }
    let target = crate::db_to_linear(signal_power_db - input_power_db);
    let g = target / total;
    Ok(PdpSpec {
        profile: pdp.profile.iter().map(|p| p * g).collect(),
        static_mask: pdp.static_mask.clone(),
    })
}

/// Channel tap vectors over a run, one row per symbol instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TapTrajectory {
    taps: Vec<Complex64>,
    n_taps: usize,
    pub pdp: PdpSpec,
    /// Coherence time expressed in symbols; infinite for an all-static channel.
    pub coherence_symbols: f64,
}

impl TapTrajectory {
    /// Build from explicit rows (`n_symbols * n_taps`, row-major).
    pub fn from_rows(taps: Vec<Complex64>, pdp: PdpSpec, coherence_symbols: f64) -> Result<Self> {
        let n_taps = pdp.len();
        if !taps.len().is_multiple_of(n_taps) {
            return Err(Error::LengthMismatch { what: "trajectory rows", expected: n_taps, found: taps.len() % n_taps });
        }
        Ok(TapTrajectory { taps, n_taps, pdp, coherence_symbols })
    }

    /// Constant channel over `n_symbols`.
    pub fn constant(taps: &[Complex64], n_symbols: usize) -> Self {
        let n_taps = taps.len();
        let mut rows = Vec::with_capacity(n_symbols * n_taps);
        for _ in 0..n_symbols {
            rows.extend_from_slice(taps);
        }
        let pdp = PdpSpec { profile: taps.iter().map(|t| t.norm_sqr()).collect(), static_mask: vec![true; n_taps] };
        TapTrajectory { taps: rows, n_taps, pdp, coherence_symbols: f64::INFINITY }
    }

    pub fn n_symbols(&self) -> usize {
        self.taps.len() / self.n_taps
    }

    pub fn n_taps(&self) -> usize {
        self.n_taps
    }

    /// Tap vector at symbol instant `n`.
    #[inline]
    pub fn at(&self, n: usize) -> &[Complex64] {
        &self.taps[n * self.n_taps..(n + 1) * self.n_taps]
    }

    /// Time series of one tap.
    pub fn tap_series(&self, k: usize) -> Vec<Complex64> {
        (0..self.n_symbols()).map(|n| self.at(n)[k]).collect()
    }
}

/// AR(1) correlation per symbol for a coherence time given in symbols.
pub fn gauss_markov_rho(coherence_symbols: f64) -> f64 {
    (-1.0 / coherence_symbols).exp()
}

/// Generate per-tap first-order Gauss-Markov trajectories.
///
/// Each time-varying tap starts from its stationary distribution and evolves as
/// `tap[n] = rho tap[n-1] + sqrt(1 - rho^2) g[n]` with `rho = exp(-1/(Tc B))`,
/// so its autocorrelation falls to `1/e` after `Tc B` symbols. Static taps get
/// magnitude `sqrt(profile[k])` with a random phase and stay fixed.
pub fn gen_tap_trajectory<R: Rng + ?Sized>(
    pdp: &PdpSpec,
    coherence_ms: f64,
    n_symbols: usize,
    symbol_rate: f64,
    rng: &mut R,
) -> Result<TapTrajectory> {
    if n_symbols < 1 {
        return Err(invalid("n_symbols", "must be at least 1"));
    }
    let any_varying = pdp.static_mask.iter().any(|s| !s);
    if any_varying && !(coherence_ms > 0.0) {
        return Err(invalid("coherence_ms", "must be positive for time-varying taps"));
    }
    let n_taps = pdp.len();
    let coherence_symbols = if any_varying { coherence_ms * 1e-3 * symbol_rate } else { f64::INFINITY };
    let rho = gauss_markov_rho(coherence_symbols);
    let innov = (1.0 - rho * rho).sqrt();

    let mut current: Vec<Complex64> = pdp
        .profile
        .iter()
        .zip(&pdp.static_mask)
        .map(|(&p, &fixed)| {
            if fixed {
                let phase: f64 = rng.random::<f64>() * core::f64::consts::TAU;
                Complex64::from_polar(p.sqrt(), phase)
            } else {
                complex_gauss(rng, p)
            }
        })
        .collect();

    let mut taps = Vec::with_capacity(n_symbols * n_taps);
    taps.extend_from_slice(&current);
    for _ in 1..n_symbols {
        for (k, tap) in current.iter_mut().enumerate() {
            if pdp.static_mask[k] {
                continue;
            }
            *tap = *tap * rho + complex_gauss(rng, pdp.profile[k]) * innov;
        }
        taps.extend_from_slice(&current);
    }
    Ok(TapTrajectory { taps, n_taps, pdp: pdp.clone(), coherence_symbols })
}

/// `out[n] = sum_k conj(taps[n][k]) x[n-k]` with zero prehistory.
pub fn apply_channel(x: &ComplexSeq, traj: &TapTrajectory) -> Result<ComplexSeq> {
    if traj.n_symbols() < x.len() {
        return Err(Error::LengthMismatch { what: "trajectory vs signal", expected: x.len(), found: traj.n_symbols() });
    }
    // Same accumulation as the receiver's `c^H i`, so a perfect estimate
    // reproduces the injected signal bit for bit.
    let mut window = History::new(traj.n_taps());
    let out = x
        .samples
        .iter()
        .enumerate()
        .map(|(n, &xn)| {
            window.push(xn);
            dot_h(traj.at(n), window.window())
        })
        .collect();
    Ok(ComplexSeq { samples: out, rate_hz: x.rate_hz, domain: x.domain })
}

/// Ambient noise level `sigma_0^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub ambient_power_db: f64,
}

impl NoiseSpec {
    pub fn power(&self) -> f64 {
        crate::db_to_linear(self.ambient_power_db)
    }
}

/// The received signal and its three components.
#[derive(Debug, Clone, PartialEq)]
pub struct Received {
    pub y: ComplexSeq,
    /// Self-interference `s[n]`.
    pub s: Vec<Complex64>,
    /// Remote signal `r[n]`.
    pub r: Vec<Complex64>,
    /// Ambient noise `w[n]`.
    pub w: Vec<Complex64>,
}

/// Compose `y = s + r + w`.
pub fn synthesize_received<R: Rng + ?Sized>(
    i: &ComplexSeq,
    x: &ComplexSeq,
    si_traj: &TapTrajectory,
    remote_traj: &TapTrajectory,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Received> {
    check_len("remote symbols vs local reference", i.len(), x.len())?;
    let s = apply_channel(i, si_traj)?.samples;
    let r = apply_channel(x, remote_traj)?.samples;
    let np = noise.power();
    let w: Vec<Complex64> =
        (0..i.len()).map(|_| if np > 0.0 { complex_gauss(rng, np) } else { Complex64::new(0.0, 0.0) }).collect();
    let y = s.iter().zip(&r).zip(&w).map(|((a, b), c)| a + b + c).collect();
    Ok(Received { y: ComplexSeq { samples: y, rate_hz: i.rate_hz, domain: i.domain }, s, r, w })
}
