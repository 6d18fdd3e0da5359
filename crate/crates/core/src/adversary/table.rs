//! Columns of the segment table and the per-step operations on them.

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::game::{gap_midpoint, largest_suitable_gap, Configuration, Key, Relocation};
use crate::segment::{balance, middle, pick_w, Segment, WeightedOccupancy};

/// Pair `T_i ⊇ S_i` at one level of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub t_seg: Segment,
    pub s_seg: Segment,
}

/// One column of the table. `levels[i - 1]` holds level `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    /// First rebuilt level, `levels.len() + 1` when the column is a copy.
    pub critical: usize,
    pub levels: Vec<Level>,
    /// `T_1`, kept even when level 1 itself could not be completed.
    pub root: Segment,
    /// Level at which a rebuild degenerated and the column was cut short.
    pub depth_violation: Option<usize>,
}

impl Column {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn s(&self, level: usize) -> Option<&Segment> {
        level.checked_sub(1).and_then(|i| self.levels.get(i)).map(|l| &l.s_seg)
    }
}

fn degenerate(e: &GameError) -> bool {
    matches!(e, GameError::DegenerateSegment(_) | GameError::UndefinedInput(_))
}

/// Build column `t` from column `t - 1` (with its colors) and the busy
/// segment of step `t - 1`. `occ` reflects the configuration before step
/// `t`; `n` is the adversary's horizon.
pub fn build_column(
    prev: Option<(&Column, &[bool])>,
    busy_prev: Option<&Segment>,
    occ: &WeightedOccupancy,
    d: usize,
    kappa: f64,
    n: u64,
) -> Result<Column> {
    let critical = match prev {
        None => 1,
        Some((col, green)) => green.iter().position(|g| !g).map_or(col.depth() + 1, |i| i + 1),
    };
    let mut levels: Vec<Level> = prev.map_or_else(Vec::new, |(c, _)| c.levels[..critical - 1].to_vec());
    let mut root = match prev {
        Some((c, _)) if critical > 1 => c.root,
        _ => pick_w(occ, occ.m(), n)?,
    };
    let mut depth_violation = None;
    for i in critical..=d {
        let t_seg = if i == 1 {
            Ok(root)
        } else {
            let from_prev = (i == critical)
                .then(|| prev.and_then(|(c, _)| c.levels.get(i - 1)))
                .flatten();
            match (from_prev, busy_prev) {
                (Some(old), Some(busy)) => Ok(old.t_seg.hull(busy)),
                _ => middle(&levels[i - 2].s_seg),
            }
        };
        let built = t_seg.and_then(|t| balance(occ, &t, kappa).map(|s| Level { t_seg: t, s_seg: s }));
        match built {
            Ok(level) => {
                if i == 1 {
                    root = level.t_seg;
                }
                levels.push(level);
            }
            Err(e) if degenerate(&e) => {
                depth_violation = Some(i);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Column { critical, levels, root, depth_violation })
}

/// Level `i` is green iff the busy segment lies inside `S_i`.
pub fn color_column(column: &Column, busy: &Segment) -> Vec<bool> {
    column.levels.iter().map(|l| l.s_seg.contains_segment(busy)).collect()
}

/// Midpoint of the largest suitable gap in the deepest segment that has
/// one. Returns the key and, when it did not come from the deepest level,
/// the level it came from (`0` for `T_1`).
pub fn select_key(column: &Column, config: &Configuration<u64>, t: usize) -> Result<(Key, Option<usize>)> {
    let depth = column.depth();
    let candidates = column
        .levels
        .iter()
        .enumerate()
        .rev()
        .map(|(i, l)| (i + 1, l.s_seg))
        .chain(std::iter::once((0, column.root)));
    for (level, seg) in candidates {
        if let Some(gap) = largest_suitable_gap(config, &seg) {
            let fallback = (level != depth || depth == 0).then_some(level);
            return Ok((gap_midpoint(&gap)?, fallback));
        }
    }
    Err(GameError::AdversaryStuck { step: t, reason: format!("no suitable gap anywhere in column (T_1 = {})", column.root) })
}

/// Counts `q_0..q_d`: each moved key is charged to the deepest level whose
/// `S` held its old cell, the new key to the deepest level of the column.
pub fn charge_partition(column: &Column, relocated: &[Relocation<u64>], d: usize) -> Vec<u64> {
    let mut q = vec![0u64; d + 1];
    for r in relocated {
        let level = match r.from {
            None => column.depth(),
            Some(cell) => column.levels.iter().rposition(|l| l.s_seg.contains(&cell)).map_or(0, |i| i + 1),
        };
        q[level] += 1;
    }
    q
}
