//! Experiment configuration files, shipped presets and PDP override files.
//!
//! A configuration is a TOML document. Every key is optional; anything left
//! out takes the default shown below. Unknown keys are
//! errors.
//!
//! ```toml
//! symbols = 200000
//! trials = 1
//! seed = 1
//! modes = ["proposed", "conventional", "ideal"]
//! capture_tap = 9
//!
//! [powers]
//! si_db = 0.0
//! remote_db = -20.0
//! noise_db = -35.0
//!
//! [front_end]
//! bandwidth_hz = 5000.0
//! carrier_hz = 12000.0
//! rolloff = 0.5
//! filter_span = 12
//! samples_per_symbol = 32
//! pa_a1 = 100.0
//! pa_a3 = 5.0
//! pa_a5 = 10.0
//! pa_noise_db = 10.0
//! local_power_db = 0.0
//! remote_symbol_power_db = 0.0
//!
//! [si_channel]
//! taps = 30
//! coherence_ms = 70.0
//! pdp_file = "si.pdp"
//!
//! [remote_channel]
//! taps = 70
//! decay = 0.25
//! coherence_ms = 70.0
//!
//! [receiver]
//! lambda = 0.98
//! delta = 0.0001
//! mu = 0.001
//! ff_len = 70
//! fb_len = 50
//! training = 130
//! redesign_every = 1
//!
//! [sweep]
//! axis = "snr"          # "none", "snr" (remote SNR in dB) or "si_power" (P_s in dB)
//! grid = [-10.0, 0.0, 10.0]
//! # or: start = -10.0, stop = 30.0, step = 5.0
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use uwfd_core::channel::{remote_pdp, si_pdp_default, PdpSpec};
use uwfd_core::link::{ChannelModel, ExperimentConfig, SweepAxis};
use uwfd_core::receiver::Mode;
use uwfd_core::waveform::PaCoeffs;

use crate::error::{AppError, Result};

/// Shipped presets, one per reproduced figure.
pub const PRESETS: &[(&str, &str)] = &[
    ("paper_fig4", include_str!("../presets/paper_fig4.toml")),
    ("paper_fig5", include_str!("../presets/paper_fig5.toml")),
    ("paper_fig6", include_str!("../presets/paper_fig6.toml")),
    ("paper_fig7", include_str!("../presets/paper_fig7.toml")),
    ("paper_fig8", include_str!("../presets/paper_fig8.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    symbols: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    modes: Option<Vec<String>>,
    capture_tap: Option<usize>,
    powers: Option<RawPowers>,
    front_end: Option<RawFrontEnd>,
    si_channel: Option<RawSiChannel>,
    remote_channel: Option<RawRemoteChannel>,
    receiver: Option<RawReceiver>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPowers {
    si_db: Option<f64>,
    remote_db: Option<f64>,
    noise_db: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrontEnd {
    bandwidth_hz: Option<f64>,
    carrier_hz: Option<f64>,
    rolloff: Option<f64>,
    filter_span: Option<usize>,
    samples_per_symbol: Option<usize>,
    pa_a1: Option<f64>,
    pa_a3: Option<f64>,
    pa_a5: Option<f64>,
    pa_noise_db: Option<f64>,
    local_power_db: Option<f64>,
    remote_symbol_power_db: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSiChannel {
    taps: Option<usize>,
    coherence_ms: Option<f64>,
    pdp_file: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRemoteChannel {
    taps: Option<usize>,
    decay: Option<f64>,
    coherence_ms: Option<f64>,
    pdp_file: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReceiver {
    lambda: Option<f64>,
    delta: Option<f64>,
    mu: Option<f64>,
    ff_len: Option<usize>,
    fb_len: Option<usize>,
    training: Option<usize>,
    redesign_every: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: Option<String>,
    grid: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
}

/// Records which keys fell back to their defaults.
struct Filler {
    defaulted: Vec<&'static str>,
}

impl Filler {
    fn take<T>(&mut self, v: Option<T>, default: T, key: &'static str) -> T {
        v.unwrap_or_else(|| {
            self.defaulted.push(key);
            default
        })
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Parse and validate a configuration document.
///
/// `origin` names the source in messages; relative `pdp_file` paths resolve
/// against `base_dir`.
pub fn parse_config_str(text: &str, origin: &str, base_dir: Option<&Path>) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| AppError::Parse {
        origin: origin.to_string(),
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(1),
        message: e.message().to_string(),
    })?;
    let d = ExperimentConfig::default();
    let mut f = Filler { defaulted: Vec::new() };
    let cfg_err = |m: String| AppError::config(origin, m);

    let p = raw.powers.unwrap_or_default();
    let fe = raw.front_end.unwrap_or_default();
    let si = raw.si_channel.unwrap_or_default();
    let rc = raw.remote_channel.unwrap_or_default();
    let rx = raw.receiver.unwrap_or_default();
    let sw = raw.sweep.unwrap_or_default();

    let mut cfg = d.clone();
    cfg.n_symbols = f.take(raw.symbols, d.n_symbols, "symbols");
    cfg.trials = f.take(raw.trials, d.trials, "trials");
    cfg.seed = f.take(raw.seed, d.seed, "seed");
    cfg.capture_tap = raw.capture_tap;
    if let Some(names) = raw.modes {
        cfg.modes = parse_modes(names.iter().map(String::as_str)).map_err(cfg_err)?;
    } else {
        f.defaulted.push("modes");
    }

    cfg.si_power_db = f.take(p.si_db, d.si_power_db, "powers.si_db");
    cfg.remote_power_db = f.take(p.remote_db, d.remote_power_db, "powers.remote_db");
    cfg.noise_power_db = f.take(p.noise_db, d.noise_power_db, "powers.noise_db");

    let dfe = &d.front_end;
    let c = &mut cfg.front_end;
    c.bandwidth_hz = f.take(fe.bandwidth_hz, dfe.bandwidth_hz, "front_end.bandwidth_hz");
    c.carrier_hz = f.take(fe.carrier_hz, dfe.carrier_hz, "front_end.carrier_hz");
    c.rolloff = f.take(fe.rolloff, dfe.rolloff, "front_end.rolloff");
    c.filter_span_symbols = f.take(fe.filter_span, dfe.filter_span_symbols, "front_end.filter_span");
    c.samples_per_symbol = f.take(fe.samples_per_symbol, dfe.samples_per_symbol, "front_end.samples_per_symbol");
    c.pa = PaCoeffs {
        a1: f.take(fe.pa_a1, dfe.pa.a1, "front_end.pa_a1"),
        a3: f.take(fe.pa_a3, dfe.pa.a3, "front_end.pa_a3"),
        a5: f.take(fe.pa_a5, dfe.pa.a5, "front_end.pa_a5"),
    };
    c.pa_noise_power_db = f.take(fe.pa_noise_db, dfe.pa_noise_power_db, "front_end.pa_noise_db");
    c.local_ref_power_db = f.take(fe.local_power_db, dfe.local_ref_power_db, "front_end.local_power_db");
    c.remote_symbol_power_db =
        f.take(fe.remote_symbol_power_db, dfe.remote_symbol_power_db, "front_end.remote_symbol_power_db");

    let si_pdp = match si.pdp_file {
        Some(path) => {
            if si.taps.is_some() {
                return Err(cfg_err("si_channel: give either `taps` or `pdp_file`, not both".into()));
            }
            load_pdp_file(&resolve(base_dir, &path))?
        }
        None => {
            let m = f.take(si.taps, d.si_channel.pdp.len(), "si_channel.taps");
            si_pdp_default(m).map_err(|e| cfg_err(format!("si_channel: {e}")))?
        }
    };
    cfg.si_channel = ChannelModel {
        pdp: si_pdp,
        coherence_ms: f.take(si.coherence_ms, d.si_channel.coherence_ms, "si_channel.coherence_ms"),
    };

    let remote = match rc.pdp_file {
        Some(path) => {
            if rc.taps.is_some() || rc.decay.is_some() {
                return Err(cfg_err("remote_channel: give either `taps`/`decay` or `pdp_file`, not both".into()));
            }
            load_pdp_file(&resolve(base_dir, &path))?
        }
        None => {
            let l = f.take(rc.taps, d.remote_channel.pdp.len(), "remote_channel.taps");
            let decay = f.take(rc.decay, 0.25, "remote_channel.decay");
            remote_pdp(l, decay).map_err(|e| cfg_err(format!("remote_channel: {e}")))?
        }
    };
    cfg.remote_channel = ChannelModel {
        pdp: remote,
        coherence_ms: f.take(rc.coherence_ms, d.remote_channel.coherence_ms, "remote_channel.coherence_ms"),
    };

    let dr = &d.receiver;
    let r = &mut cfg.receiver;
    r.lambda = f.take(rx.lambda, dr.lambda, "receiver.lambda");
    r.delta = f.take(rx.delta, dr.delta, "receiver.delta");
    r.mu = f.take(rx.mu, dr.mu, "receiver.mu");
    r.ff_len = f.take(rx.ff_len, dr.ff_len, "receiver.ff_len");
    r.fb_len = f.take(rx.fb_len, dr.fb_len, "receiver.fb_len");
    r.training_len = f.take(rx.training, dr.training_len, "receiver.training");
    r.redesign_every = f.take(rx.redesign_every, dr.redesign_every, "receiver.redesign_every");

    cfg.sweep_axis = match sw.axis.as_deref() {
        None | Some("none") => SweepAxis::None,
        Some("snr") => SweepAxis::Snr,
        Some("si_power") => SweepAxis::SiPower,
        Some(other) => {
            return Err(cfg_err(format!("sweep.axis: unknown axis `{other}` (none, snr, si_power)")));
        }
    };
    cfg.sweep_grid = match (sw.grid, sw.start, sw.stop, sw.step) {
        (Some(g), None, None, None) => g,
        (None, Some(a), Some(b), Some(s)) => range_grid(a, b, s).map_err(cfg_err)?,
        (None, None, None, None) => Vec::new(),
        _ => return Err(cfg_err("sweep: give either `grid` or all of `start`, `stop`, `step`".into())),
    };
    if cfg.sweep_grid.iter().any(|v| !v.is_finite()) {
        return Err(cfg_err("sweep.grid: values must be finite".into()));
    }

    cfg.validate().map_err(|e| cfg_err(e.to_string()))?;
    if !f.defaulted.is_empty() {
        log::info!("{origin}: defaults used for {}", f.defaulted.join(", "));
    }
    log::debug!("{origin}: {cfg:?}");
    Ok(cfg)
}

fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

fn range_grid(start: f64, stop: f64, step: f64) -> std::result::Result<Vec<f64>, String> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err("sweep: need start <= stop and step > 0".into());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

/// Parse receiver mode names.
pub fn parse_modes<'a>(names: impl IntoIterator<Item = &'a str>) -> std::result::Result<Vec<Mode>, String> {
    let mut out = Vec::new();
    for n in names {
        let m = Mode::from_name(n.trim()).ok_or_else(|| format!("unknown receiver mode `{n}`"))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err("at least one receiver mode is required".into());
    }
    Ok(out)
}

/// Load a configuration from a file path or a preset name.
///
/// A path that exists wins over a preset of the same name.
pub fn load_config(arg: &str) -> Result<ExperimentConfig> {
    let path = Path::new(arg);
    if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| AppError::config(arg, e.to_string()))?;
        return parse_config_str(&text, arg, path.parent());
    }
    match preset(arg) {
        Some(text) => parse_config_str(text, arg, None),
        None => {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            Err(AppError::config(arg, format!("no such file or preset (presets: {})", names.join(", "))))
        }
    }
}

/// Parse a PDP override: one `tap_index power_linear static_flag` triple per
/// line, `#` starts a comment. Every index from 0 to the largest must appear
/// exactly once; the flag is `0`/`1` or `false`/`true`.
pub fn parse_pdp(text: &str, origin: &str) -> Result<PdpSpec> {
    let perr = |line: usize, message: String| AppError::Parse { origin: origin.to_string(), line, message };
    let mut entries: Vec<Option<(f64, bool)>> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [idx, pow, flag] = fields[..] else {
            return Err(perr(line, format!("expected `tap_index power static_flag`, got {} fields", fields.len())));
        };
        let idx: usize = idx.parse().map_err(|_| perr(line, format!("bad tap index `{idx}`")))?;
        let pow: f64 = pow.parse().map_err(|_| perr(line, format!("bad power `{pow}`")))?;
        if !(pow >= 0.0) || !pow.is_finite() {
            return Err(perr(line, "power must be finite and nonnegative".into()));
        }
        let flag = match flag {
            "0" | "false" => false,
            "1" | "true" => true,
            other => return Err(perr(line, format!("bad static flag `{other}`"))),
        };
        if entries.len() <= idx {
            entries.resize(idx + 1, None);
        }
        if entries[idx].replace((pow, flag)).is_some() {
            return Err(perr(line, format!("tap {idx} given twice")));
        }
    }
    if entries.is_empty() {
        return Err(AppError::config(origin, "PDP file has no taps"));
    }
    let mut profile = Vec::with_capacity(entries.len());
    let mut mask = Vec::with_capacity(entries.len());
    for (k, e) in entries.into_iter().enumerate() {
        let (p, s) = e.ok_or_else(|| AppError::config(origin, format!("tap {k} missing")))?;
        profile.push(p);
        mask.push(s);
    }
    if profile.iter().all(|&p| p == 0.0) {
        return Err(AppError::config(origin, "PDP has zero total power"));
    }
    PdpSpec::new(profile, mask).map_err(|e| AppError::config(origin, e.to_string()))
}

pub fn load_pdp_file(path: &Path) -> Result<PdpSpec> {
    let origin = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| AppError::config(&origin, e.to_string()))?;
    parse_pdp(&text, &origin)
}
