//! Result and trajectory CSV files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use uwfd_core::link::TapSample;

use crate::error::{AppError, Result};
use crate::sweep::ResultRow;

/// One line of a trajectory CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub n: usize,
    pub true_re: f64,
    pub true_im: f64,
    pub estimated_re: f64,
    pub estimated_im: f64,
    pub damped_re: f64,
    pub damped_im: f64,
}

impl From<&TapSample> for TrajectoryRow {
    fn from(s: &TapSample) -> Self {
        TrajectoryRow {
            n: s.n,
            true_re: s.truth.re,
            true_im: s.truth.im,
            estimated_re: s.estimated.re,
            estimated_im: s.estimated.im,
            damped_re: s.damped.re,
            damped_im: s.damped.im,
        }
    }
}

/// Files written by one command; removed again unless the command succeeds.
#[derive(Debug, Default)]
pub struct Outputs {
    written: Vec<PathBuf>,
    keep: bool,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    /// Write `bytes` to `path` through a temporary sibling and a rename.
    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        let tmp = path.with_extension("partial");
        self.written.push(path.to_path_buf());
        let res = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
        if let Err(e) = res {
            let _ = fs::remove_file(&tmp);
            return Err(AppError::io(path, e));
        }
        Ok(())
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.written
    }

    /// Keep everything written so far.
    pub fn commit(mut self) -> Vec<PathBuf> {
        self.keep = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.keep {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}

fn to_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|source| AppError::Csv { path: path.to_path_buf(), source })?;
    }
    w.into_inner().map_err(|e| AppError::io(path, e.into_error()))
}

pub fn results_csv(rows: &[ResultRow], path: &Path) -> Result<Vec<u8>> {
    to_csv(rows, path)
}

pub fn trajectory_csv(samples: &[TapSample], path: &Path) -> Result<Vec<u8>> {
    let rows: Vec<TrajectoryRow> = samples.iter().map(TrajectoryRow::from).collect();
    to_csv(&rows, path)
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|source| AppError::Csv { path: path.to_path_buf(), source })?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(|source| AppError::Csv { path: path.to_path_buf(), source })
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    read_csv(path)
}

pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRow>> {
    read_csv(path)
}

/// Column names of a CSV file's header.
pub fn header(path: &Path) -> Result<Vec<String>> {
    let mut r = csv::Reader::from_path(path).map_err(|source| AppError::Csv { path: path.to_path_buf(), source })?;
    let h = r.headers().map_err(|source| AppError::Csv { path: path.to_path_buf(), source })?;
    Ok(h.iter().map(str::to_string).collect())
}
