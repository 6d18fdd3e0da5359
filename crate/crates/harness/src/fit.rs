//! Least-squares fit of `chi/n = a + b * ln(n)^2`.

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::sweep::SweepRow;

pub const MODEL: &str = "chi/n = a + b*ln(n)^2";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub n: u64,
    pub chi_per_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub a: f64,
    pub b: f64,
    pub b_positive: bool,
    /// Root mean squared residual.
    pub rms_residual: f64,
    pub points: Vec<FitPoint>,
}

pub fn fit_growth(points: &[FitPoint]) -> Result<FitResult> {
    let mut ns: Vec<u64> = points.iter().map(|p| p.n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(HarnessError::Config(format!("fit needs at least 3 distinct n, got {}", ns.len())));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln().powi(2)).collect();
    let k = points.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / k;
    let mean_y = points.iter().map(|p| p.chi_per_n).sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if !(sxx > 1e-12 * mean_x.abs().max(1.0)) {
        return Err(HarnessError::Config("degenerate design matrix".into()));
    }
    let sxy: f64 = xs.iter().zip(points).map(|(x, p)| (x - mean_x) * (p.chi_per_n - mean_y)).sum();
    let b = sxy / sxx;
    let a = mean_y - b * mean_x;
    let sse: f64 = xs.iter().zip(points).map(|(x, p)| (p.chi_per_n - a - b * x).powi(2)).sum();
    Ok(FitResult {
        model: MODEL.into(),
        a,
        b,
        b_positive: b > 0.0,
        rms_residual: (sse / k).sqrt(),
        points: points.to_vec(),
    })
}

/// Fit the successful rows of a sweep.
pub fn fit_sweep(rows: &[SweepRow]) -> Result<FitResult> {
    let points: Vec<FitPoint> = rows
        .iter()
        .filter(|r| r.is_ok())
        .filter_map(|r| r.chi_per_n.map(|c| FitPoint { n: r.n, chi_per_n: c }))
        .collect();
    fit_growth(&points)
}
