//! Run records as CSV (one row per step) plus a JSON sidecar holding the
//! parameters, so that `audit` can rebuild the record exactly.
//!
//! Columns: `t, j_t, depth, num_relocated, busy_lo, busy_hi, mingap,
//! fallback, depth_violation, whole_density, colors, balance_checked,
//! balance_failed`, then per level `i` the cells and statistics of `T_i` and
//! `S_i`, then `q_0..q_d`. Absent levels and options are empty.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use labeling_core::adversary::{AdversaryParams, LevelStats, RunRecord, StepRecord};
use labeling_core::segment::Segment;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

const FIXED: [&str; 13] = [
    "t",
    "j_t",
    "depth",
    "num_relocated",
    "busy_lo",
    "busy_hi",
    "mingap",
    "fallback",
    "depth_violation",
    "whole_density",
    "colors",
    "balance_checked",
    "balance_failed",
];
const PER_LEVEL: [&str; 8] = ["t_lo", "t_hi", "s_lo", "s_hi", "s_size", "s_weight", "s_density", "s_logphi"];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordMeta {
    pub params: AdversaryParams,
    pub mingap0: String,
    pub first_step: usize,
}

/// Sidecar path: the record path with a `.json` extension.
pub fn meta_path(record: &Path) -> PathBuf {
    record.with_extension("json")
}

fn header(d: usize) -> Vec<String> {
    let mut h: Vec<String> = FIXED.iter().map(|s| s.to_string()).collect();
    for i in 1..=d {
        h.extend(PER_LEVEL.iter().map(|c| format!("l{i}_{c}")));
    }
    h.extend((0..=d).map(|i| format!("q_{i}")));
    h
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_record(record: &RunRecord, path: &Path) -> Result<()> {
    let d = record.params.d;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header(d))?;
    for s in &record.steps {
        let mut row = vec![
            s.t.to_string(),
            s.critical.to_string(),
            s.levels.len().to_string(),
            s.num_relocated.to_string(),
            s.busy.lo.to_string(),
            s.busy.hi.to_string(),
            s.mingap.to_string(),
            opt(s.fallback),
            opt(s.depth_violation),
            s.whole_density.to_string(),
            s.colors_mask().to_string(),
            s.balance_checked.to_string(),
            s.balance_failed.to_string(),
        ];
        for i in 0..d {
            match s.levels.get(i) {
                Some(l) => row.extend([
                    l.t_seg.lo.to_string(),
                    l.t_seg.hi.to_string(),
                    l.s_seg.lo.to_string(),
                    l.s_seg.hi.to_string(),
                    l.s_seg.size().to_string(),
                    l.s_weight.to_string(),
                    l.s_density.to_string(),
                    l.s_log_potential.to_string(),
                ]),
                None => row.extend(std::iter::repeat(String::new()).take(PER_LEVEL.len())),
            }
        }
        row.extend((0..=d).map(|i| s.q.get(i).copied().unwrap_or(0).to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    let meta = RecordMeta { params: record.params.clone(), mingap0: record.mingap0.to_string(), first_step: record.first_step };
    let mp = meta_path(path);
    std::fs::write(&mp, serde_json::to_string_pretty(&meta)?).map_err(|e| HarnessError::io(&mp, e))?;
    Ok(())
}

fn field<T: FromStr>(row: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    let raw = row.get(i).ok_or_else(|| HarnessError::Record(format!("missing column {name}")))?;
    raw.parse().map_err(|_| HarnessError::Record(format!("bad {name} value {raw:?}")))
}

fn opt_field<T: FromStr>(row: &csv::StringRecord, i: usize, name: &str) -> Result<Option<T>> {
    match row.get(i) {
        Some("") | None => Ok(None),
        Some(_) => field(row, i, name).map(Some),
    }
}

/// Read a record written by [`write_record`]; `meta` defaults to the
/// sidecar next to `path`.
pub fn read_record(path: &Path, meta: Option<&Path>) -> Result<RunRecord> {
    let mp = meta.map(Path::to_path_buf).unwrap_or_else(|| meta_path(path));
    let text = std::fs::read_to_string(&mp).map_err(|e| HarnessError::io(&mp, e))?;
    let meta: RecordMeta = serde_json::from_str(&text)?;
    let d = meta.params.d;
    let mut rdr = csv::Reader::from_path(path)?;
    let expected = header(d);
    if rdr.headers()?.iter().ne(expected.iter().map(String::as_str)) {
        return Err(HarnessError::Record(format!("header does not match a depth-{d} record")));
    }
    let mut steps = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let depth: usize = field(&row, 2, "depth")?;
        if depth > d {
            return Err(HarnessError::Record(format!("depth {depth} above d = {d}")));
        }
        let mut levels = Vec::with_capacity(depth);
        for i in 0..depth {
            let at = FIXED.len() + i * PER_LEVEL.len();
            levels.push(LevelStats {
                t_seg: Segment::new(field(&row, at, "t_lo")?, field(&row, at + 1, "t_hi")?),
                s_seg: Segment::new(field(&row, at + 2, "s_lo")?, field(&row, at + 3, "s_hi")?),
                s_weight: field(&row, at + 5, "s_weight")?,
                s_density: field(&row, at + 6, "s_density")?,
                s_log_potential: field(&row, at + 7, "s_logphi")?,
            });
        }
        let colors: u64 = field(&row, 10, "colors")?;
        let q_at = FIXED.len() + d * PER_LEVEL.len();
        let q = (0..=d).map(|i| field(&row, q_at + i, "q")).collect::<Result<Vec<u64>>>()?;
        steps.push(StepRecord {
            t: field(&row, 0, "t")?,
            critical: field(&row, 1, "j_t")?,
            levels,
            green: (0..depth).map(|i| colors >> i & 1 == 1).collect(),
            q,
            num_relocated: field(&row, 3, "num_relocated")?,
            busy: Segment::new(field(&row, 4, "busy_lo")?, field(&row, 5, "busy_hi")?),
            mingap: field::<BigUint>(&row, 6, "mingap")?,
            fallback: opt_field(&row, 7, "fallback")?,
            depth_violation: opt_field(&row, 8, "depth_violation")?,
            whole_density: field(&row, 9, "whole_density")?,
            balance_checked: field(&row, 11, "balance_checked")?,
            balance_failed: field(&row, 12, "balance_failed")?,
        });
    }
    let mingap0 = BigUint::from_str(&meta.mingap0).map_err(|_| HarnessError::Record("bad mingap0".into()))?;
    Ok(RunRecord { params: meta.params, mingap0, first_step: meta.first_step, steps })
}
