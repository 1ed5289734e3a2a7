//! One simulated link: scenario generation and a receiver pass with metrics.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::channel::{
    gen_tap_trajectory, remote_pdp, scale_pdp, si_pdp_default, synthesize_received, NoiseSpec, PdpSpec, Received,
    TapTrajectory,
};
use crate::error::{invalid, Result};
use crate::metrics::{BerCounter, MseAccumulator};
use crate::receiver::{Mode, Receiver, ReceiverConfig, Truth};
use crate::rng::{random_bits, stream, Purpose};
use crate::waveform::{make_local_reference, modulate_bpsk, ComplexSeq, FrontEndConfig};

/// A channel: its (unscaled) profile and coherence time.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub pdp: PdpSpec,
    pub coherence_ms: f64,
}

/// Receiver knobs that are not derived from the channel or noise settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverParams {
    pub lambda: f64,
    pub delta: f64,
    pub mu: f64,
    pub ff_len: usize,
    pub fb_len: usize,
    pub training_len: usize,
    pub redesign_every: usize,
}

impl Default for ReceiverParams {
    fn default() -> Self {
        ReceiverParams { lambda: 0.98, delta: 1e-4, mu: 1e-3, ff_len: 70, fb_len: 50, training_len: 130, redesign_every: 1 }
    }
}

/// What a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    None,
    /// Remote SNR `P_r / sigma_0^2` in dB; the noise power follows.
    Snr,
    /// SI power `P_s` in dB.
    SiPower,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::None => "none",
            SweepAxis::Snr => "snr",
            SweepAxis::SiPower => "si_power",
        }
    }
}

/// Full description of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub front_end: FrontEndConfig,
    pub si_channel: ChannelModel,
    pub remote_channel: ChannelModel,
    /// `P_s` in dB.
    pub si_power_db: f64,
    /// `P_r` in dB.
    pub remote_power_db: f64,
    /// `sigma_0^2` in dB.
    pub noise_power_db: f64,
    pub receiver: ReceiverParams,
    pub n_symbols: usize,
    pub trials: usize,
    pub seed: u64,
    pub sweep_axis: SweepAxis,
    pub sweep_grid: Vec<f64>,
    pub modes: Vec<Mode>,
    /// Remote tap index (0-based) whose true/estimated/damped series is recorded.
    pub capture_tap: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            front_end: FrontEndConfig::default(),
            si_channel: ChannelModel { pdp: si_pdp_default(30).expect("valid default"), coherence_ms: 70.0 },
            remote_channel: ChannelModel { pdp: remote_pdp(70, 0.25).expect("valid default"), coherence_ms: 70.0 },
            si_power_db: 0.0,
            remote_power_db: -20.0,
            noise_power_db: -35.0,
            receiver: ReceiverParams::default(),
            n_symbols: 200_000,
            trials: 1,
            seed: 1,
            sweep_axis: SweepAxis::None,
            sweep_grid: Vec::new(),
            modes: Mode::ALL.to_vec(),
            capture_tap: None,
        }
    }
}

impl ExperimentConfig {
    pub fn receiver_config(&self) -> ReceiverConfig {
        let p = &self.receiver;
        ReceiverConfig {
            si_taps: self.si_channel.pdp.len(),
            remote_taps: self.remote_channel.pdp.len(),
            lambda: p.lambda,
            delta: p.delta,
            mu: p.mu,
            ff_len: p.ff_len,
            fb_len: p.fb_len,
            training_len: p.training_len,
            noise_power: crate::db_to_linear(self.noise_power_db),
            redesign_every: p.redesign_every,
        }
    }

    /// Copy with the sweep variable set to `value`.
    pub fn at_sweep_point(&self, value: f64) -> ExperimentConfig {
        let mut c = self.clone();
        match self.sweep_axis {
            SweepAxis::None => {}
            SweepAxis::Snr => c.noise_power_db = self.remote_power_db - value,
            SweepAxis::SiPower => c.si_power_db = value,
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.front_end.validate()?;
        let rc = self.receiver_config();
        rc.validate()?;
        if self.n_symbols <= rc.warmup() {
            return Err(invalid("n_symbols", "run must be longer than training + K + equalizer delay"));
        }
        if self.trials < 1 {
            return Err(invalid("trials", "must be at least 1"));
        }
        for (name, v) in [
            ("si_power_db", self.si_power_db),
            ("remote_power_db", self.remote_power_db),
            ("noise_power_db", self.noise_power_db),
        ] {
            if v.is_nan() || v == f64::INFINITY {
                return Err(invalid(name, "must be a finite dB value or -inf"));
            }
        }
        if self.modes.is_empty() {
            return Err(invalid("modes", "at least one receiver mode is required"));
        }
        if let Some(k) = self.capture_tap {
            if k >= self.remote_channel.pdp.len() {
                return Err(invalid("capture_tap", "index beyond the remote channel length"));
            }
        }
        if self.sweep_axis != SweepAxis::None && self.sweep_grid.is_empty() {
            return Err(invalid("sweep_grid", "sweep axis set but grid is empty"));
        }
        Ok(())
    }
}

/// Everything the receivers see, plus the hidden truth.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub seed: u64,
    /// Local reference `i[n]`.
    pub i: ComplexSeq,
    /// Remote symbols `x[n]`.
    pub x: ComplexSeq,
    pub si: TapTrajectory,
    pub remote: TapTrajectory,
    pub rx: Received,
    pub noise_power: f64,
}

impl Scenario {
    pub fn generate(cfg: &ExperimentConfig, seed: u64) -> Result<Scenario> {
        cfg.validate()?;
        let fe = &cfg.front_end;
        let n = cfg.n_symbols;

        let local_bits = random_bits(&mut stream(seed, Purpose::LocalBits), n);
        let i = make_local_reference(&local_bits, fe, &mut stream(seed, Purpose::PaNoise))?;

        let remote_bits = random_bits(&mut stream(seed, Purpose::RemoteBits), n);
        let mut x = modulate_bpsk(&remote_bits, fe.bandwidth_hz);
        let gx = num_traits::Float::sqrt(crate::db_to_linear(fe.remote_symbol_power_db));
        if gx != 1.0 {
            x.samples.iter_mut().for_each(|s| *s *= gx);
        }

        let si_pdp = scale_pdp(&cfg.si_channel.pdp, cfg.si_power_db, fe.local_ref_power_db)?;
        let remote_pdp = scale_pdp(&cfg.remote_channel.pdp, cfg.remote_power_db, fe.remote_symbol_power_db)?;
        let si = gen_tap_trajectory(
            &si_pdp,
            cfg.si_channel.coherence_ms,
            n,
            fe.bandwidth_hz,
            &mut stream(seed, Purpose::SiChannel),
        )?;
        let remote = gen_tap_trajectory(
            &remote_pdp,
            cfg.remote_channel.coherence_ms,
            n,
            fe.bandwidth_hz,
            &mut stream(seed, Purpose::RemoteChannel),
        )?;
        let noise = NoiseSpec { ambient_power_db: cfg.noise_power_db };
        let rx = synthesize_received(&i, &x, &si, &remote, &noise, &mut stream(seed, Purpose::AmbientNoise))?;
        Ok(Scenario { seed, i, x, si, remote, rx, noise_power: noise.power() })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// One row of a captured remote-tap series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapSample {
    /// Symbol instant the values refer to.
    pub n: usize,
    pub truth: Complex64,
    pub estimated: Complex64,
    pub damped: Complex64,
}

/// Metrics of one receiver over the measurement window.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeResult {
    pub mode: Mode,
    pub ber: BerCounter,
    pub rho_c_hat: f64,
    pub rho_h_hat: f64,
    pub rho_h_bar: f64,
    pub rho_r_hat: f64,
    pub rls_resets: u32,
    pub trajectory: Option<Vec<TapSample>>,
}

/// Sample powers over the measurement window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCheck {
    pub y: f64,
    pub s: f64,
    pub r: f64,
    pub w: f64,
    pub noise_nominal: f64,
}

impl PowerCheck {
    /// `|E|y|^2 / (E|s|^2 + E|r|^2 + sigma_0^2) - 1|`.
    pub fn additivity_error(&self) -> f64 {
        (self.y / (self.s + self.r + self.noise_nominal) - 1.0).abs()
    }
}

/// All modes run on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub modes: Vec<ModeResult>,
    pub power: PowerCheck,
}

impl RunResult {
    pub fn mode(&self, mode: Mode) -> Option<&ModeResult> {
        self.modes.iter().find(|m| m.mode == mode)
    }

    /// SI estimation error of the conventional receiver on the same realization.
    pub fn rho_c_tilde(&self) -> Option<f64> {
        self.mode(Mode::Conventional).map(|m| m.rho_c_hat)
    }
}

fn window_power(s: &[Complex64]) -> f64 {
    crate::waveform::mean_power(s)
}

/// Run one receiver over a generated scenario.
pub fn run_receiver(scenario: &Scenario, cfg: &ExperimentConfig, mode: Mode) -> Result<ModeResult> {
    let rc = cfg.receiver_config();
    let warmup = rc.warmup();
    let training: Vec<Complex64> = scenario.x.samples[..rc.training_len.min(scenario.len())].to_vec();
    let mut rx = Receiver::new(mode, rc, training)?;

    let y = &scenario.rx.y.samples;
    let i = &scenario.i.samples;
    let x = &scenario.x.samples;
    let r = &scenario.rx.r;

    let mut ber = BerCounter::default();
    let mut rho_c = MseAccumulator::default();
    let mut rho_h = MseAccumulator::default();
    let mut rho_hb = MseAccumulator::default();
    let mut rho_r = MseAccumulator::default();
    let mut capture = cfg.capture_tap.map(|_| Vec::new());

    for n in 0..scenario.len() {
        let truth = (mode == Mode::Ideal).then(|| Truth { c: scenario.si.at(n), h: scenario.remote.at(n) });
        let out = rx.cycle(y[n], i[n], truth)?;

        if let (Some(k), Some(buf), Some(t)) = (cfg.capture_tap, capture.as_mut(), rx.estimate_time()) {
            buf.push(TapSample {
                n: t,
                truth: scenario.remote.at(t)[k],
                estimated: rx.h_hat()[k],
                damped: rx.h_bar()[k],
            });
        }
        if n < warmup {
            continue;
        }
        rho_r.add_scalar(r[n], out.r_hat);
        if let Some(t) = rx.estimate_time() {
            rho_c.add(scenario.si.at(t), rx.c_hat());
            let h_true = scenario.remote.at(t);
            rho_h.add(h_true, rx.h_hat());
            rho_hb.add(h_true, rx.h_bar());
        }
        if let Some(d) = out.decision {
            if d.index >= warmup && !d.training {
                ber.record(x[d.index], d.symbol);
            }
        }
    }

    Ok(ModeResult {
        mode,
        ber,
        rho_c_hat: rho_c.value()?,
        rho_h_hat: rho_h.value()?,
        rho_h_bar: rho_hb.value()?,
        rho_r_hat: rho_r.value()?,
        rls_resets: rx.rls_resets(),
        trajectory: capture,
    })
}

/// Generate the scenario for `seed` and run every mode in `modes` on it.
pub fn run_link_modes(cfg: &ExperimentConfig, modes: &[Mode], seed: u64) -> Result<RunResult> {
    let scenario = Scenario::generate(cfg, seed)?;
    let warmup = cfg.receiver_config().warmup();
    let power = PowerCheck {
        y: window_power(&scenario.rx.y.samples[warmup..]),
        s: window_power(&scenario.rx.s[warmup..]),
        r: window_power(&scenario.rx.r[warmup..]),
        w: window_power(&scenario.rx.w[warmup..]),
        noise_nominal: scenario.noise_power,
    };
    let modes = modes.iter().map(|&m| run_receiver(&scenario, cfg, m)).collect::<Result<Vec<_>>>()?;
    Ok(RunResult { seed, modes, power })
}

/// Run a single receiver mode.
pub fn run_link(cfg: &ExperimentConfig, mode: Mode, seed: u64) -> Result<RunResult> {
    run_link_modes(cfg, &[mode], seed)
}
