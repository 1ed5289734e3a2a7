//! Monte Carlo driver: sweep points and trials in parallel, pooled results.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use uwfd_core::link::{run_link_modes, ExperimentConfig, RunResult, SweepAxis, TapSample};
use uwfd_core::metrics::{BerCounter, MIN_RELIABLE_ERRORS};
use uwfd_core::receiver::Mode;
use uwfd_core::rng::derive_seed;

use crate::error::Result;

/// One line of a result CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub mode: String,
    /// Empty for single runs.
    pub sweep_value: Option<f64>,
    pub ber: f64,
    pub errors: u64,
    pub symbols: u64,
    pub rho_c_hat: f64,
    /// The conventional receiver's SI error on the same realizations.
    pub rho_c_tilde: Option<f64>,
    pub rho_h_hat: f64,
    pub rho_h_bar: f64,
    pub rho_r_hat: f64,
    pub seed: u64,
}

impl ResultRow {
    /// Enough errors for the BER to mean something.
    pub fn reliable(&self) -> bool {
        self.errors >= MIN_RELIABLE_ERRORS
    }
}

/// Seed of one trial at one sweep point.
pub fn trial_seed(seed: u64, point: usize, trial: usize) -> u64 {
    derive_seed(derive_seed(seed, point as u64), trial as u64)
}

/// Sweep values to visit; `None` for an unswept run.
pub fn points(cfg: &ExperimentConfig) -> Vec<Option<f64>> {
    match cfg.sweep_axis {
        SweepAxis::None => vec![None],
        _ => cfg.sweep_grid.iter().copied().map(Some).collect(),
    }
}

/// Results of a whole experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    /// Captured remote tap of the first trial at the first point.
    pub trajectory: Option<Vec<TapSample>>,
}

/// Run every sweep point and trial for the configured modes.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let pts = points(cfg);
    let jobs: Vec<(usize, usize)> =
        (0..pts.len()).flat_map(|p| (0..cfg.trials).map(move |t| (p, t))).collect();
    let total = jobs.len();
    let results: Vec<RunResult> = jobs
        .into_par_iter()
        .map(|(p, t)| {
            let point_cfg = match pts[p] {
                Some(v) => cfg.at_sweep_point(v),
                None => cfg.clone(),
            };
            let point_cfg = if p == 0 && t == 0 { point_cfg } else { ExperimentConfig { capture_tap: None, ..point_cfg } };
            let res = run_link_modes(&point_cfg, &cfg.modes, trial_seed(cfg.seed, p, t))?;
            log::info!("point {}/{} trial {}/{} done", p + 1, pts.len(), t + 1, cfg.trials);
            Ok(res)
        })
        .collect::<Result<_>>()?;
    debug_assert_eq!(results.len(), total);

    let mut trajectory = None;
    let mut rows = Vec::new();
    for (p, chunk) in results.chunks(cfg.trials).enumerate() {
        if p == 0 {
            trajectory = chunk[0].modes.iter().find_map(|m| m.trajectory.clone());
        }
        rows.extend(aggregate(chunk, &cfg.modes, pts[p], cfg.seed));
    }
    for r in rows.iter().filter(|r| !r.reliable()) {
        log::warn!(
            "{} at {:?}: only {} errors in {} symbols, BER unreliable",
            r.mode,
            r.sweep_value,
            r.errors,
            r.symbols
        );
    }
    Ok(Outcome { rows, trajectory })
}

/// Pool trials of one sweep point: BER from summed counts, metrics averaged.
pub fn aggregate(trials: &[RunResult], modes: &[Mode], value: Option<f64>, seed: u64) -> Vec<ResultRow> {
    let n = trials.len() as f64;
    let mean = |f: &dyn Fn(&RunResult) -> Option<f64>| -> Option<f64> {
        trials.iter().map(f).sum::<Option<f64>>().map(|s| s / n)
    };
    let rho_c_tilde = mean(&|r| r.rho_c_tilde());
    modes
        .iter()
        .map(|&mode| {
            let mut ber = BerCounter::default();
            for r in trials {
                if let Some(m) = r.mode(mode) {
                    ber.merge(m.ber);
                }
            }
            let field = |g: fn(&uwfd_core::link::ModeResult) -> f64| mean(&|r| r.mode(mode).map(g)).unwrap_or(f64::NAN);
            ResultRow {
                mode: mode.name().to_string(),
                sweep_value: value,
                ber: ber.ber(),
                errors: ber.errors,
                symbols: ber.symbols,
                rho_c_hat: field(|m| m.rho_c_hat),
                rho_c_tilde,
                rho_h_hat: field(|m| m.rho_h_hat),
                rho_h_bar: field(|m| m.rho_h_bar),
                rho_r_hat: field(|m| m.rho_r_hat),
                seed,
            }
        })
        .collect()
}
