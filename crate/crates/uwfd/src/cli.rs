//! Command-line front end.
//!
//! Exit status: 0 success, 1 configuration error, 2 runtime error,
//! 3 selftest failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use uwfd_core::link::{ExperimentConfig, SweepAxis};

use crate::config::{load_config, parse_modes};
use crate::error::{AppError, Result};
use crate::output::{self, Outputs};
use crate::{plot, selftest, sweep};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;
pub const EXIT_SELFTEST: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "uwfd", version, about = "Link simulator for an adaptive full-duplex underwater acoustic receiver")]
pub struct Cli {
    /// Only report warnings and errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one link and write run.csv (and trajectory.csv when a tap is captured).
    Run(Common),
    /// Run the configured sweep and write sweep.csv.
    Sweep(Common),
    /// Render result or trajectory CSVs as SVG figures.
    Plot {
        #[command(flatten)]
        common: Common,
        /// CSV files to plot; defaults to the files `run`/`sweep` leave in `--out`.
        inputs: Vec<PathBuf>,
    },
    /// Run the oracle and invariant checks.
    Selftest,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file or preset name (paper_fig4 .. paper_fig8).
    #[arg(long)]
    pub config: Option<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Override the base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated receiver modes (proposed, conventional, ideal).
    #[arg(long)]
    pub mode: Option<String>,
    /// Override the number of symbols per run.
    #[arg(long)]
    pub symbols: Option<usize>,
}

/// Configuration after command-line overrides, and a name for output files.
fn resolve(common: &Common) -> Result<(ExperimentConfig, String)> {
    let (mut cfg, name) = match &common.config {
        Some(arg) => {
            let name = Path::new(arg).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| arg.clone());
            (load_config(arg)?, name)
        }
        None => (crate::config::parse_config_str("", "defaults", None)?, "uwfd".to_string()),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(n) = common.symbols {
        cfg.n_symbols = n;
    }
    if let Some(m) = &common.mode {
        cfg.modes = parse_modes(m.split(',')).map_err(|e| AppError::config("--mode", e))?;
    }
    cfg.validate().map_err(|e| AppError::config("command line", e.to_string()))?;
    Ok((cfg, name))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

fn report(rows: &[sweep::ResultRow]) {
    println!("{:<13} {:>10} {:>11} {:>9} {:>11} {:>11} {:>11} {:>11}", "mode", "value", "ber", "errors", "rho_c", "rho_h", "rho_hbar", "rho_r");
    for r in rows {
        let v = r.sweep_value.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
        println!(
            "{:<13} {:>10} {:>11.3e} {:>9} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e}{}",
            r.mode,
            v,
            r.ber,
            r.errors,
            r.rho_c_hat,
            r.rho_h_hat,
            r.rho_h_bar,
            r.rho_r_hat,
            if r.reliable() { "" } else { "  (fewer than 20 errors)" }
        );
    }
}

fn cmd_run(common: &Common, quiet: bool) -> Result<Vec<PathBuf>> {
    let (mut cfg, _) = resolve(common)?;
    cfg.sweep_axis = SweepAxis::None;
    cfg.sweep_grid.clear();
    ensure_dir(&common.out)?;
    let outcome = sweep::run(&cfg)?;
    let mut out = Outputs::new();
    let path = common.out.join("run.csv");
    out.write(&path, &output::results_csv(&outcome.rows, &path)?)?;
    if let Some(traj) = &outcome.trajectory {
        let path = common.out.join("trajectory.csv");
        out.write(&path, &output::trajectory_csv(traj, &path)?)?;
    }
    if !quiet {
        report(&outcome.rows);
    }
    Ok(out.commit())
}

fn cmd_sweep(common: &Common, quiet: bool) -> Result<Vec<PathBuf>> {
    let (cfg, name) = resolve(common)?;
    if cfg.sweep_axis == SweepAxis::None {
        return Err(AppError::config(name, "no sweep configured (set sweep.axis and a grid)"));
    }
    ensure_dir(&common.out)?;
    let outcome = sweep::run(&cfg)?;
    let mut out = Outputs::new();
    let path = common.out.join("sweep.csv");
    out.write(&path, &output::results_csv(&outcome.rows, &path)?)?;
    if !quiet {
        report(&outcome.rows);
    }
    Ok(out.commit())
}

fn cmd_plot(common: &Common, inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let (cfg, name) = resolve(common)?;
    let inputs: Vec<PathBuf> = if inputs.is_empty() {
        let default = if cfg.sweep_axis == SweepAxis::None { "trajectory.csv" } else { "sweep.csv" };
        vec![common.out.join(default)]
    } else {
        inputs.to_vec()
    };
    ensure_dir(&common.out)?;
    let mut out = Outputs::new();
    for input in &inputs {
        let header = output::header(input)?;
        let svg = if header.iter().any(|h| h == "true_re") {
            let rows = output::read_trajectory(input)?;
            plot::tap_trajectory(&rows, cfg.front_end.bandwidth_hz, &format!("{name}: captured remote tap"))
        } else if header.iter().any(|h| h == "rho_r_hat") {
            let rows = output::read_results(input)?;
            match cfg.sweep_axis {
                SweepAxis::SiPower => plot::residual_vs_si_ratio(
                    &rows,
                    cfg.remote_power_db,
                    &format!("{name}: residual after SI cancellation"),
                ),
                _ => plot::ber_vs_snr(&rows, &format!("{name}: BER")),
            }
        } else {
            return Err(AppError::Plot { path: input.clone(), message: "not a result or trajectory CSV".into() });
        }
        .map_err(|message| AppError::Plot { path: input.clone(), message })?;
        let file = if inputs.len() == 1 {
            format!("{name}.svg")
        } else {
            let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            format!("{name}_{stem}.svg")
        };
        out.write(&common.out.join(file), svg.as_bytes())?;
    }
    Ok(out.commit())
}

fn cmd_selftest(quiet: bool) -> bool {
    let checks = selftest::all();
    for c in &checks {
        if !quiet || !c.passed {
            println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
    }
    checks.iter().all(|c| c.passed)
}

/// Parse `args` and run; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let level = if cli.quiet { "warn" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();

    let result = match &cli.command {
        Command::Run(c) => cmd_run(c, cli.quiet),
        Command::Sweep(c) => cmd_sweep(c, cli.quiet),
        Command::Plot { common, inputs } => cmd_plot(common, inputs),
        Command::Selftest => {
            return if cmd_selftest(cli.quiet) { EXIT_OK } else { EXIT_SELFTEST };
        }
    };
    match result {
        Ok(paths) => {
            for p in paths {
                log::info!("wrote {}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
