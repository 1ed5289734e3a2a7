//! The three-stage full-duplex receiver and its baselines.
//!
//! Each cycle `n` takes `y[n]` and `i[n]` and
//! 1. updates the channel estimate for time `n - Delta`,
//! 2. cancels the self-interference from `y[n]`,
//! 3. damps the remote estimate, retunes the DFE and emits `x^[n - Delta']`.
//!
//! `Delta = Delta' + 1`, so the decision emitted in cycle `n - 1` is exactly the
//! newest remote reference the estimator needs in cycle `n`.

mod dfe;
mod rls;

pub use dfe::{cascade_tap, design_dfe, DfeDesign, DfeDesigner, DfeOutput, Equalizer, DFE_RIDGE};
pub use rls::RlsState;

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{check_len, invalid, Error, Result};
use crate::linalg::{dot_h, History};

/// Which receiver to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Joint SI/remote RLS with decision feedback, damper and DFE.
    Proposed,
    /// SI-only RLS, remote channel frozen after training.
    Conventional,
    /// True channels known.
    Ideal,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Proposed, Mode::Conventional, Mode::Ideal];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Proposed => "proposed",
            Mode::Conventional => "conventional",
            Mode::Ideal => "ideal",
        }
    }

    pub fn from_name(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl core::fmt::Display for Mode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// `r^[n] = y[n] - c^^H i[n]`.
pub fn cancel_si(y: Complex64, c_hat: &[Complex64], i_window: &[Complex64]) -> Result<Complex64> {
    check_len("SI reference window", c_hat.len(), i_window.len())?;
    Ok(y - dot_h(c_hat, i_window))
}

/// `h_bar[n] = (1 - mu) h_bar[n-1] + mu h^[n]`.
pub fn damp(h_bar_prev: &[Complex64], h_hat: &[Complex64], mu: f64) -> Result<Vec<Complex64>> {
    let mut out = h_bar_prev.to_vec();
    damp_in_place(&mut out, h_hat, mu)?;
    Ok(out)
}

/// In-place form of [`damp`].
pub fn damp_in_place(h_bar: &mut [Complex64], h_hat: &[Complex64], mu: f64) -> Result<()> {
    check_len("damper input", h_bar.len(), h_hat.len())?;
    if !(0.0..=1.0).contains(&mu) {
        return Err(invalid("mu", "damping factor must lie in [0, 1]"));
    }
    for (b, h) in h_bar.iter_mut().zip(h_hat) {
        *b = *b * (1.0 - mu) + *h * mu;
    }
    Ok(())
}

/// Receiver tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverConfig {
    /// SI channel length `M`.
    pub si_taps: usize,
    /// Remote channel length `L`.
    pub remote_taps: usize,
    pub lambda: f64,
    pub delta: f64,
    /// Damping factor `mu`.
    pub mu: f64,
    pub ff_len: usize,
    pub fb_len: usize,
    /// Known remote symbols at the start of the run.
    pub training_len: usize,
    /// Noise power handed to the MMSE-DFE design.
    pub noise_power: f64,
    /// Redesign the DFE every this many cycles.
    pub redesign_every: usize,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        ReceiverConfig {
            si_taps: 30,
            remote_taps: 70,
            lambda: 0.98,
            delta: 1e-4,
            mu: 1e-3,
            ff_len: 70,
            fb_len: 50,
            training_len: 130,
            noise_power: crate::db_to_linear(-35.0),
            redesign_every: 1,
        }
    }
}

impl ReceiverConfig {
    /// Equalizer delay `Delta'`.
    pub fn eq_delay(&self) -> usize {
        self.ff_len - 1
    }

    /// Estimator delay `Delta = Delta' + 1`.
    pub fn est_delay(&self) -> usize {
        self.ff_len
    }

    /// `K = max(M, L)`.
    pub fn k(&self) -> usize {
        self.si_taps.max(self.remote_taps)
    }

    /// Symbols excluded from every metric: training, `K` and `Delta'`.
    pub fn warmup(&self) -> usize {
        self.training_len + self.k() + self.eq_delay()
    }

    pub fn validate(&self) -> Result<()> {
        if self.si_taps == 0 || self.remote_taps == 0 {
            return Err(invalid("si_taps/remote_taps", "channel lengths must be at least 1"));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(invalid("lambda", "forgetting factor must lie in (0, 1]"));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(invalid("delta", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(invalid("mu", "damping factor must lie in [0, 1]"));
        }
        if self.ff_len == 0 {
            return Err(invalid("ff_len", "must be at least 1"));
        }
        if self.est_delay() > self.k() {
            return Err(invalid("ff_len", "estimator delay ff_len must not exceed max(M, L)"));
        }
        if !(self.noise_power >= 0.0) {
            return Err(invalid("noise_power", "must be nonnegative"));
        }
        if self.redesign_every == 0 {
            return Err(invalid("redesign_every", "must be at least 1"));
        }
        Ok(())
    }
}

/// True channels at the current instant, for the ideal receiver.
#[derive(Debug, Clone, Copy)]
pub struct Truth<'a> {
    pub c: &'a [Complex64],
    pub h: &'a [Complex64],
}

/// A symbol decision leaving the equalizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    /// Index of the remote symbol this decides.
    pub index: usize,
    pub soft: Complex64,
    pub symbol: Complex64,
    /// Inside the training prefix; the decision is not fed back.
    pub training: bool,
}

/// Per-cycle output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleOutput {
    pub r_hat: Complex64,
    pub decision: Option<Decision>,
    /// A priori estimator error, when an update ran this cycle.
    pub error: Option<Complex64>,
}

/// Single-owner receiver state.
#[derive(Debug, Clone)]
pub struct Receiver {
    mode: Mode,
    cfg: ReceiverConfig,
    training: Vec<Complex64>,
    n: usize,
    /// Joint `[h ; c]` (proposed) or SI-only `c` (conventional).
    rls: Option<RlsState>,
    /// Joint LS over the training window (conventional).
    train_rls: Option<RlsState>,
    c_hat: Vec<Complex64>,
    h_hat: Vec<Complex64>,
    h_bar: Vec<Complex64>,
    h_bar_ready: bool,
    designer: DfeDesigner,
    equalizer: Equalizer,
    designed: bool,
    since_design: usize,
    i_hist: History,
    y_hist: History,
    x_ref: History,
    v: Vec<Complex64>,
    last_feedback: Complex64,
    estimate_time: Option<usize>,
}

impl Receiver {
    pub fn new(mode: Mode, cfg: ReceiverConfig, training: Vec<Complex64>) -> Result<Self> {
        cfg.validate()?;
        if training.len() < cfg.training_len {
            return Err(Error::LengthMismatch { what: "training symbols", expected: cfg.training_len, found: training.len() });
        }
        let (m, l) = (cfg.si_taps, cfg.remote_taps);
        let rls = match mode {
            Mode::Proposed => Some(RlsState::joint(m, l, cfg.lambda, cfg.delta)?),
            Mode::Conventional => Some(RlsState::new(m, cfg.lambda, cfg.delta)?),
            Mode::Ideal => None,
        };
        let train_rls = match mode {
            Mode::Conventional => Some(RlsState::joint(m, l, 1.0, cfg.delta)?),
            _ => None,
        };
        let zero = Complex64::new(0.0, 0.0);
        let delta = cfg.est_delay();
        Ok(Receiver {
            mode,
            training,
            n: 0,
            rls,
            train_rls,
            c_hat: vec![zero; m],
            h_hat: vec![zero; l],
            h_bar: vec![zero; l],
            h_bar_ready: false,
            designer: DfeDesigner::new(),
            equalizer: Equalizer::new(DfeDesign::zeros(cfg.ff_len, cfg.fb_len)),
            designed: false,
            since_design: 0,
            i_hist: History::new(m + delta),
            y_hist: History::new(delta + 1),
            x_ref: History::new(l),
            v: vec![zero; m + l],
            last_feedback: zero,
            estimate_time: None,
            cfg,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn config(&self) -> &ReceiverConfig {
        &self.cfg
    }

    /// Cycles processed so far.
    pub fn cycles(&self) -> usize {
        self.n
    }

    /// Current SI estimate `c^`.
    pub fn c_hat(&self) -> &[Complex64] {
        &self.c_hat
    }

    /// Current remote estimate `h^` (frozen for the conventional receiver).
    pub fn h_hat(&self) -> &[Complex64] {
        &self.h_hat
    }

    /// Damped remote estimate used to tune the DFE.
    pub fn h_bar(&self) -> &[Complex64] {
        &self.h_bar
    }

    pub fn dfe(&self) -> &DfeDesign {
        &self.equalizer.design
    }

    /// Symbol instant the current estimates refer to.
    pub fn estimate_time(&self) -> Option<usize> {
        self.estimate_time
    }

    /// Number of `P` reinitializations in the estimator.
    pub fn rls_resets(&self) -> u32 {
        self.rls.as_ref().map_or(0, |r| r.resets()) + self.train_rls.as_ref().map_or(0, |r| r.resets())
    }

    fn training_symbol(&self, t: usize) -> Option<Complex64> {
        (t < self.cfg.training_len).then(|| self.training[t])
    }

    /// Process one received sample `y[n]` with local reference `i[n]`.
    pub fn cycle(&mut self, y_n: Complex64, i_n: Complex64, truth: Option<Truth<'_>>) -> Result<CycleOutput> {
        let n = self.n;
        let (m, l) = (self.cfg.si_taps, self.cfg.remote_taps);
        self.i_hist.push(i_n);
        self.y_hist.push(y_n);
        let mut error = None;

        let r_hat = match self.mode {
            Mode::Proposed => {
                let delta = self.cfg.est_delay();
                if n >= delta {
                    let t = n - delta;
                    let x_t = self.training_symbol(t).unwrap_or(self.last_feedback);
                    self.x_ref.push(x_t);
                    self.v[..l].copy_from_slice(self.x_ref.window());
                    self.v[l..].copy_from_slice(&self.i_hist.window()[delta..delta + m]);
                    let y_t = self.y_hist.window()[delta];
                    let rls = self.rls.as_mut().expect("proposed receiver owns an RLS");
                    error = Some(rls.update(&self.v, y_t)?);
                    let u = rls.estimate();
                    self.h_hat.copy_from_slice(&u[..l]);
                    self.c_hat.copy_from_slice(&u[l..]);
                    self.estimate_time = Some(t);
                    if t + 1 < self.cfg.training_len || !self.h_bar_ready {
                        // undamped until the training prefix has been absorbed
                        self.h_bar.copy_from_slice(&self.h_hat);
                        self.h_bar_ready = t + 1 >= self.cfg.training_len;
                    } else {
                        damp_in_place(&mut self.h_bar, &self.h_hat, self.cfg.mu)?;
                    }
                }
                cancel_si(y_n, &self.c_hat, &self.i_hist.window()[..m])?
            }
            Mode::Conventional => {
                let i_win = &self.i_hist.window()[..m];
                let r = cancel_si(y_n, &self.c_hat, i_win)?;
                let rls = self.rls.as_mut().expect("conventional receiver owns an RLS");
                error = Some(rls.update(i_win, y_n)?);
                self.c_hat.copy_from_slice(rls.estimate());
                self.estimate_time = Some(n);
                if let Some(x_n) = self.training_symbol(n) {
                    self.x_ref.push(x_n);
                    self.v[..l].copy_from_slice(self.x_ref.window());
                    self.v[l..].copy_from_slice(i_win);
                    let train = self.train_rls.as_mut().expect("conventional receiver owns a training fit");
                    train.update(&self.v, y_n)?;
                    if n + 1 == self.cfg.training_len {
                        self.h_hat.copy_from_slice(&train.estimate()[..l]);
                        self.h_bar.copy_from_slice(&self.h_hat);
                        self.h_bar_ready = true;
                    }
                }
                r
            }
            Mode::Ideal => {
                let truth = truth.ok_or(Error::MissingTruth)?;
                check_len("true SI taps", m, truth.c.len())?;
                check_len("true remote taps", l, truth.h.len())?;
                self.c_hat.copy_from_slice(truth.c);
                self.h_hat.copy_from_slice(truth.h);
                self.h_bar.copy_from_slice(truth.h);
                self.h_bar_ready = true;
                self.estimate_time = Some(n);
                cancel_si(y_n, &self.c_hat, &self.i_hist.window()[..m])?
            }
        };

        // Equalization: the output refers to symbol n - Delta'.
        let d = self.cfg.eq_delay();
        let target = n.checked_sub(d);
        let needs_decisions = target.is_some_and(|t| t >= self.cfg.training_len);
        if needs_decisions && self.h_bar_ready {
            let redesign = match self.mode {
                Mode::Conventional => !self.designed,
                _ => !self.designed || self.since_design + 1 >= self.cfg.redesign_every,
            };
            if redesign {
                let (ff, fb) = (self.cfg.ff_len, self.cfg.fb_len);
                match self.designer.design_into(&self.h_bar, self.cfg.noise_power, ff, fb, &mut self.equalizer.design) {
                    Ok(()) => {
                        self.designed = true;
                        self.since_design = 0;
                    }
                    // keep the previous filters when the estimate is degenerate
                    Err(Error::Singular(_)) => self.since_design += 1,
                    Err(e) => return Err(e),
                }
            } else {
                self.since_design += 1;
            }
        }

        let known = target.and_then(|t| self.training_symbol(t));
        let out = self.equalizer.step(r_hat, known);
        let decision = target.map(|index| {
            let fed = known.unwrap_or(out.decision);
            self.last_feedback = fed;
            Decision { index, soft: out.soft, symbol: out.decision, training: known.is_some() }
        });

        self.n += 1;
        Ok(CycleOutput { r_hat, decision, error })
    }
}
