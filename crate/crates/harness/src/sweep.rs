//! Parameter sweeps over the step count `n`.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiment::run_once;
use crate::spec::{ExperimentSpec, Size};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u64,
    pub m: String,
    pub rep: u32,
    pub seed: u64,
    pub chi: Option<u64>,
    pub chi_per_n: Option<f64>,
    pub wall_ms: u64,
    pub fallbacks: u64,
    pub violations: u64,
    /// `ok` or the error that stopped the run.
    pub status: String,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Parse `1024,4096` or `2^10,2^12`.
pub fn parse_grid(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|t| {
            let v = Size::Text(t.trim().to_string()).resolve(0)?;
            u64::try_from(v).map_err(|_| HarnessError::Config(format!("grid point {t} is too large")))
        })
        .collect()
}

/// One game per grid point and repetition, run in parallel. A failing run
/// is recorded in its row; the rest of the sweep continues.
pub fn sweep(grid: &[u64], template: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    let mut distinct = grid.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(HarnessError::Config(format!("a sweep needs at least 3 distinct grid points, got {}", distinct.len())));
    }
    let mut jobs = Vec::new();
    for &n in grid {
        let spec = ExperimentSpec { n, ..template.clone() };
        spec.resolve()?;
        for rep in 0..template.repetitions {
            jobs.push((spec.clone(), rep));
        }
    }
    Ok(jobs
        .par_iter()
        .map(|(spec, rep)| {
            let seed = spec.seed.wrapping_add(*rep as u64);
            let m = spec.resolve().map(|r| r.m.to_string()).unwrap_or_default();
            let started = Instant::now();
            let result = run_once(spec, seed);
            let wall_ms = started.elapsed().as_millis() as u64;
            match result {
                Ok(r) => SweepRow {
                    n: r.summary.n,
                    m,
                    rep: rep + 1,
                    seed,
                    chi: Some(r.summary.cost),
                    chi_per_n: Some(r.summary.cost_per_n),
                    wall_ms,
                    fallbacks: r.summary.fallbacks,
                    violations: r.summary.violations,
                    status: "ok".into(),
                },
                Err(e) => SweepRow {
                    n: spec.n,
                    m,
                    rep: rep + 1,
                    seed,
                    chi: None,
                    chi_per_n: None,
                    wall_ms,
                    fallbacks: 0,
                    violations: 0,
                    status: e.to_string(),
                },
            }
        })
        .collect())
}

pub fn write_sweep(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_sweep(path: &Path) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.deserialize().map(|r| r.map_err(HarnessError::from)).collect()
}
