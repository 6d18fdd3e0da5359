//! Weights, densities and the potential-based segment selection used by the
//! segment-table adversary.
//!
//! All queries run on a [`WeightedOccupancy`]: prefix counts of old keys
//! (weight 1) and new keys (weight `lambda`) so that any range weight costs
//! O(1). Weights are kept as exact integer pairs; `lambda` only enters when a
//! density is evaluated.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cell::CellIndex;
use crate::error::{GameError, Result};
use crate::game::{Configuration, Key};

/// Potential values closer than this are ties.
pub const POTENTIAL_TIE: f64 = 1e-12;
/// Slack used by the balancedness predicates.
pub const BALANCE_EPS: f64 = 1e-9;

/// Inclusive cell interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Segment<C = u64> {
    pub lo: C,
    pub hi: C,
}

impl<C: CellIndex> Segment<C> {
    pub fn new(lo: C, hi: C) -> Self {
        debug_assert!(lo <= hi, "segment lo {lo} > hi {hi}");
        Segment { lo, hi }
    }

    pub fn contains(&self, cell: &C) -> bool {
        &self.lo <= cell && cell <= &self.hi
    }

    pub fn contains_segment(&self, other: &Segment<C>) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Segment<C>) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Segment<C>) -> Segment<C> {
        Segment::new(
            self.lo.clone().min(other.lo.clone()),
            self.hi.clone().max(other.hi.clone()),
        )
    }
}

impl Segment<u64> {
    pub fn size(&self) -> u64 {
        self.hi - self.lo + 1
    }
}

impl<C: fmt::Display> fmt::Display for Segment<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellFlag {
    Empty,
    Old,
    New,
}

/// Occupancy of `[1, m]` split into old and new keys, with prefix counts.
#[derive(Debug, Clone)]
pub struct WeightedOccupancy {
    m: u64,
    lambda: f64,
    old_prefix: Vec<u32>,
    new_prefix: Vec<u32>,
}

impl WeightedOccupancy {
    /// `flags[i]` describes cell `i + 1`.
    pub fn from_flags(flags: &[CellFlag], lambda: f64) -> Self {
        let m = flags.len();
        let mut old_prefix = vec![0u32; m + 1];
        let mut new_prefix = vec![0u32; m + 1];
        for (i, f) in flags.iter().enumerate() {
            old_prefix[i + 1] = old_prefix[i] + (*f == CellFlag::Old) as u32;
            new_prefix[i + 1] = new_prefix[i] + (*f == CellFlag::New) as u32;
        }
        WeightedOccupancy { m: m as u64, lambda, old_prefix, new_prefix }
    }

    /// Keys in `old` weigh 1, every other stored key weighs `lambda`.
    pub fn from_config(config: &Configuration<u64>, m: u64, old: &BTreeSet<Key>, lambda: f64) -> Self {
        let mut flags = vec![CellFlag::Empty; m as usize];
        for (k, &c) in config.iter() {
            flags[(c - 1) as usize] = if old.contains(k) { CellFlag::Old } else { CellFlag::New };
        }
        Self::from_flags(&flags, lambda)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn whole(&self) -> Segment {
        Segment::new(1, self.m)
    }

    /// `(#old, #new)` stored in `s`.
    pub fn counts(&self, s: &Segment) -> (u32, u32) {
        let (a, b) = ((s.lo - 1) as usize, s.hi as usize);
        (self.old_prefix[b] - self.old_prefix[a], self.new_prefix[b] - self.new_prefix[a])
    }

    pub fn weight(&self, s: &Segment) -> f64 {
        let (o, n) = self.counts(s);
        weight_of(o, n, self.lambda)
    }

    pub fn flag(&self, cell: u64) -> CellFlag {
        let i = cell as usize;
        if self.old_prefix[i] > self.old_prefix[i - 1] {
            CellFlag::Old
        } else if self.new_prefix[i] > self.new_prefix[i - 1] {
            CellFlag::New
        } else {
            CellFlag::Empty
        }
    }

    fn check(&self, s: &Segment) {
        assert!(1 <= s.lo && s.lo <= s.hi && s.hi <= self.m, "segment {s} outside [1, {}]", self.m);
    }
}

fn weight_of(old: u32, new: u32, lambda: f64) -> f64 {
    old as f64 + lambda * new as f64
}

/// `ln |s| + (1/kappa) ln rho`, or `-inf` for an empty segment.
fn potential_of(size: u64, weight: f64, kappa: f64) -> f64 {
    if weight <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let ln_size = (size as f64).ln();
    ln_size + (weight.ln() - ln_size) / kappa
}

pub fn density(occ: &WeightedOccupancy, s: &Segment) -> f64 {
    occ.check(s);
    occ.weight(s) / s.size() as f64
}

/// Logarithm of the kappa-potential `|s| * rho(s)^(1/kappa)`.
pub fn log_potential(occ: &WeightedOccupancy, s: &Segment, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(GameError::Parameter(format!("kappa must be positive, got {kappa}")));
    }
    occ.check(s);
    Ok(potential_of(s.size(), occ.weight(s), kappa))
}

/// Central piece after cutting `floor(|s|/3)` cells from each side.
pub fn middle(s: &Segment) -> Result<Segment> {
    let size = s.size();
    if size < 3 {
        return Err(GameError::DegenerateSegment(size));
    }
    let cut = size / 3;
    Ok(Segment::new(s.lo + cut, s.hi - cut))
}

/// Subsegment of `t_seg` with maximum potential.
///
/// Among subsegments within [`POTENTIAL_TIE`] of the maximum, the one with
/// the smallest `lo` wins, then the smallest size. For a fixed size the
/// potential only grows with weight, so only near-maximal windows of each
/// size are ever turned into logarithms.
pub fn densify(occ: &WeightedOccupancy, t_seg: &Segment, kappa: f64) -> Result<Segment> {
    if !(kappa > 0.0) {
        return Err(GameError::Parameter(format!("kappa must be positive, got {kappa}")));
    }
    occ.check(t_seg);
    if occ.weight(t_seg) <= 0.0 {
        return Err(GameError::UndefinedInput(format!("densify of zero-weight segment {t_seg}")));
    }
    let n = t_seg.size();
    let window_weight = |lo: u64, len: u64| occ.weight(&Segment::new(lo, lo + len - 1));

    let mut max_weight = vec![0.0f64; n as usize + 1];
    let mut best = f64::NEG_INFINITY;
    for len in 1..=n {
        let mut w = 0.0f64;
        for lo in t_seg.lo..=t_seg.hi + 1 - len {
            w = w.max(window_weight(lo, len));
        }
        max_weight[len as usize] = w;
        best = best.max(potential_of(len, w, kappa));
    }
    let floor = best - POTENTIAL_TIE;

    let mut choice: Option<Segment> = None;
    for len in 1..=n {
        let wmax = max_weight[len as usize];
        if potential_of(len, wmax, kappa) < floor {
            continue;
        }
        let prefilter = wmax * (1.0 - 1e-9);
        for lo in t_seg.lo..=t_seg.hi + 1 - len {
            let w = window_weight(lo, len);
            if w >= prefilter && potential_of(len, w, kappa) >= floor {
                let cand = Segment::new(lo, lo + len - 1);
                if choice.map_or(true, |c| lo < c.lo) {
                    choice = Some(cand);
                }
                break;
            }
        }
    }
    Ok(choice.expect("a maximizer exists"))
}

/// `middle(densify(t_seg))`.
pub fn balance(occ: &WeightedOccupancy, t_seg: &Segment, kappa: f64) -> Result<Segment> {
    let d = densify(occ, t_seg, kappa)?;
    middle(&d)
}

/// Block partition used to seed level 1 of the segment table.
pub fn w_blocks(m: u64, n: u64) -> Vec<Segment> {
    let block = n.div_ceil(2).max(1);
    let count = (m / block).max(1);
    (0..count)
        .map(|i| {
            let lo = i * block + 1;
            let hi = if i + 1 == count { m } else { lo + block - 1 };
            Segment::new(lo, hi)
        })
        .collect()
}

/// Densest block of [`w_blocks`], ties to the leftmost.
pub fn pick_w(occ: &WeightedOccupancy, m: u64, n: u64) -> Result<Segment> {
    if m < n.div_ceil(2) {
        return Err(GameError::Parameter(format!("m = {m} smaller than ceil(n/2) for n = {n}")));
    }
    let mut best: Option<(f64, Segment)> = None;
    for b in w_blocks(m, n) {
        let rho = density(occ, &b);
        if best.map_or(true, |(r, _)| rho > r) {
            best = Some((rho, b));
        }
    }
    Ok(best.expect("at least one block").1)
}

fn min_sub_size(s: &Segment) -> u64 {
    s.size().div_ceil(4).max(1)
}

/// Every subsegment of size at least `|s|/4` has density at most
/// `rho(s) * 4^kappa`.
pub fn is_upper_balanced(occ: &WeightedOccupancy, s: &Segment, kappa: f64) -> bool {
    let limit = density(occ, s) * 4f64.powf(kappa) + BALANCE_EPS;
    subsegments_extreme(occ, s, true) <= limit
}

/// Every subsegment of size at least `|s|/4` has density at least
/// `rho(s) * 4^-kappa`.
pub fn is_lower_balanced(occ: &WeightedOccupancy, s: &Segment, kappa: f64) -> bool {
    let limit = density(occ, s) * 4f64.powf(-kappa) - BALANCE_EPS;
    subsegments_extreme(occ, s, false) >= limit
}

fn subsegments_extreme(occ: &WeightedOccupancy, s: &Segment, want_max: bool) -> f64 {
    let mut acc = if want_max { f64::NEG_INFINITY } else { f64::INFINITY };
    for len in min_sub_size(s)..=s.size() {
        for lo in s.lo..=s.hi + 1 - len {
            let rho = occ.weight(&Segment::new(lo, lo + len - 1)) / len as f64;
            acc = if want_max { acc.max(rho) } else { acc.min(rho) };
        }
    }
    acc
}
