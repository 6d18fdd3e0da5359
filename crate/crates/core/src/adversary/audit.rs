//! Run records of the segment-table adversary and the property auditor.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::params::AdversaryParams;
use crate::segment::Segment;

const EPS: f64 = 1e-9;

/// Statistics of one level, taken before the algorithm answered.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    pub t_seg: Segment,
    pub s_seg: Segment,
    pub s_weight: f64,
    pub s_density: f64,
    pub s_log_potential: f64,
}

/// Everything the auditor needs about one step of the adversary.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Step counted from the adversary's first move.
    pub t: usize,
    pub critical: usize,
    pub levels: Vec<LevelStats>,
    pub green: Vec<bool>,
    /// `q_0..q_d`.
    pub q: Vec<u64>,
    pub num_relocated: u64,
    pub busy: Segment,
    /// Mingap of all stored keys after the step.
    pub mingap: BigUint,
    pub fallback: Option<usize>,
    pub depth_violation: Option<usize>,
    pub whole_density: f64,
    /// Bit `i - 1` set when the rebuild at level `i` met the hypotheses of
    /// the balance lemma.
    pub balance_checked: u64,
    pub balance_failed: u64,
}

impl StepRecord {
    pub fn colors_mask(&self) -> u64 {
        self.green.iter().enumerate().filter(|(_, g)| **g).fold(0, |acc, (i, _)| acc | 1 << i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub params: AdversaryParams,
    pub mingap0: BigUint,
    /// Global step index of the adversary's first move.
    pub first_step: usize,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpochEnd {
    /// Closed by a red site before the last step.
    Red,
    /// The level disappeared from the column.
    Truncated,
    /// Still running, or closed, at the last step.
    Terminal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Epoch {
    pub level: usize,
    pub start: usize,
    pub close: usize,
    pub end: EpochEnd,
    /// `q_i^E`.
    pub charge: u64,
    /// Weight of `S_i` at the start, measured before the first step.
    pub start_weight: f64,
}

/// Epochs of every level. Level 0 is a single epoch over the whole run.
pub fn epochs(record: &RunRecord) -> Vec<Epoch> {
    let last = record.steps.len();
    let horizon = record.params.n as usize;
    let terminal_at = |t: usize| if t >= horizon || t == last { EpochEnd::Terminal } else { EpochEnd::Red };
    let mut out = Vec::new();
    if last == 0 {
        return out;
    }
    out.push(Epoch {
        level: 0,
        start: 1,
        close: last,
        end: EpochEnd::Terminal,
        charge: record.steps.iter().map(|s| s.q.first().copied().unwrap_or(0)).sum(),
        start_weight: 0.0,
    });
    for level in 1..=record.params.d {
        let mut open: Option<Epoch> = None;
        for row in &record.steps {
            let Some(stats) = row.levels.get(level - 1) else {
                if let Some(mut e) = open.take() {
                    e.close = row.t - 1;
                    e.end = EpochEnd::Truncated;
                    out.push(e);
                }
                continue;
            };
            if level >= row.critical {
                if let Some(mut e) = open.take() {
                    e.close = row.t - 1;
                    e.end = EpochEnd::Truncated;
                    out.push(e);
                }
            }
            let e = open.get_or_insert_with(|| Epoch {
                level,
                start: row.t,
                close: row.t,
                end: EpochEnd::Terminal,
                charge: 0,
                start_weight: stats.s_weight,
            });
            e.charge += row.q.get(level).copied().unwrap_or(0);
            e.close = row.t;
            if !row.green.get(level - 1).copied().unwrap_or(false) {
                let mut e = open.take().expect("open epoch");
                e.end = terminal_at(row.t);
                out.push(e);
            }
        }
        if let Some(mut e) = open.take() {
            e.end = EpochEnd::Terminal;
            out.push(e);
        }
    }
    out
}

/// `q_i^E` keyed by `(level, start)`.
pub fn epoch_costs(epochs: &[Epoch]) -> Vec<((usize, usize), u64)> {
    epochs.iter().map(|e| ((e.level, e.start), e.charge)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub status: Status,
    pub checked: u64,
    pub violations: u64,
    /// First few counterexample sites.
    pub examples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub properties: Vec<PropertyResult>,
    pub fallbacks: u64,
    pub depth_violations: u64,
    pub degenerate_nestings: u64,
    pub epochs: usize,
    pub total_charge: u64,
    pub total_cost: u64,
}

impl AuditReport {
    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }

    /// True when the property exists and did not fail.
    pub fn holds(&self, name: &str) -> bool {
        self.get(name).is_some_and(|p| p.status != Status::Fail)
    }
}

struct Tally {
    name: &'static str,
    checked: u64,
    violations: u64,
    examples: Vec<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, checked: 0, violations: 0, examples: Vec::new() }
    }

    fn check(&mut self, ok: bool, site: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.examples.len() < 5 {
                self.examples.push(site());
            }
        }
    }

    fn finish(self) -> PropertyResult {
        let status = if self.violations > 0 {
            Status::Fail
        } else if self.checked == 0 {
            Status::Vacuous
        } else {
            Status::Pass
        };
        PropertyResult { name: self.name.into(), status, checked: self.checked, violations: self.violations, examples: self.examples }
    }
}

fn geq(a: f64, b: f64) -> bool {
    a >= b - EPS * b.abs().max(1.0)
}

/// Evaluate the seven table properties and the structural audits over a
/// completed run. Violations are reported, never raised.
pub fn audit_properties(record: &RunRecord) -> AuditReport {
    let p = &record.params;
    let steps = &record.steps;
    let n = p.n as f64;

    let mut p1 = Tally::new("P1");
    p1.check(p.d >= 8, || format!("d = {}", p.d));

    let mut p2 = Tally::new("P2");
    let mut p3 = Tally::new("P3");
    let mut p4 = Tally::new("P4");
    let mut p5 = Tally::new("P5");
    let mut p6 = Tally::new("P6");
    let mut nesting = Tally::new("nesting");
    let mut prefix = Tally::new("prefix_green");
    let mut copy = Tally::new("green_copy");
    let mut partition = Tally::new("charge_partition");
    let mut critical = Tally::new("critical_intersection");
    let mut potential_mono = Tally::new("potential_monotone");
    let mut balanced = Tally::new("balance");
    let mut mingap = Tally::new("mingap");
    let mut fallback = Tally::new("fallbacks");
    let mut depth = Tally::new("depth");
    let mut degenerate_nestings = 0;

    let min_size = 1.0 / p.gamma;
    let e_alpha = (-p.alpha).exp();
    let mingap_floor = (record.mingap0.bits() > p.n).then(|| &record.mingap0 >> (p.n as usize));

    for (idx, row) in steps.iter().enumerate() {
        let t = row.t;
        for (i, l) in row.levels.iter().enumerate() {
            let lv = i + 1;
            for (name, s) in [("T", l.t_seg), ("S", l.s_seg)] {
                p2.check(s.size() as f64 <= n / 2.0, || format!("t={t} {name}_{lv}={s} size {}", s.size()));
                p4.check(s.size() as f64 >= min_size - EPS, || format!("t={t} {name}_{lv}={s} size {}", s.size()));
            }
            if lv >= 2 {
                let up = &row.levels[i - 1];
                p3.check(2 * l.s_seg.size() <= up.s_seg.size(), || {
                    format!("t={t} |S_{lv}|={} > |S_{}|/2={}", l.s_seg.size(), lv - 1, up.s_seg.size() as f64 / 2.0)
                });
                p5.check(up.s_density <= 0.0 || geq(l.s_density / up.s_density, e_alpha), || {
                    format!("t={t} rho(S_{lv})/rho(S_{}) = {:.6}", lv - 1, l.s_density / up.s_density)
                });
            } else {
                p5.check(geq(l.s_density, p.delta0 * e_alpha), || format!("t={t} rho(S_1) = {:.6}", l.s_density));
            }
            p6.check(geq(l.s_density, p.delta_star), || format!("t={t} rho(S_{lv}) = {:.6}", l.s_density));

            // Chain T_1 ⊇ S_1 ⊇ T_2 ⊇ ... with strictness for inner sizes >= 4.
            let mut chain = vec![(l.t_seg, l.s_seg)];
            if lv >= 2 {
                chain.push((row.levels[i - 1].s_seg, l.t_seg));
            }
            for (outer, inner) in chain {
                let contained = outer.contains_segment(&inner);
                let strict = outer != inner;
                if contained && !strict && inner.size() < 4 {
                    degenerate_nestings += 1;
                }
                nesting.check(contained && (strict || inner.size() < 4), || {
                    format!("t={t} level {lv}: {inner} not properly inside {outer}")
                });
            }

            let bit = 1u64 << i;
            if row.balance_checked & bit != 0 {
                balanced.check(row.balance_failed & bit == 0, || format!("t={t} level {lv}"));
            }
        }

        let greens = row.green.len();
        let first_red = row.green.iter().position(|g| !g).unwrap_or(greens);
        prefix.check(row.green[first_red..].iter().all(|g| !g), || format!("t={t} colors {:#b}", row.colors_mask()));

        let q_sum: u64 = row.q.iter().sum();
        partition.check(q_sum == row.num_relocated, || format!("t={t} sum q = {q_sum}, |Rel| = {}", row.num_relocated));

        fallback.check(row.fallback.is_none(), || format!("t={t} key taken from level {:?}", row.fallback));
        depth.check(row.depth_violation.is_none(), || format!("t={t} column cut at level {:?}", row.depth_violation));

        if let Some(base) = &mingap_floor {
            let remaining = (p.n as usize).saturating_sub(t);
            let floor = base << remaining;
            mingap.check(row.mingap >= floor, || format!("t={t} mingap {:x} < {:x}", row.mingap, floor));
        }

        if idx == 0 {
            continue;
        }
        let prev = &steps[idx - 1];
        for (i, l) in prev.levels.iter().enumerate() {
            if !prev.green.get(i).copied().unwrap_or(false) {
                continue;
            }
            let lv = i + 1;
            let now = row.levels.get(i);
            copy.check(now.is_some_and(|c| c.t_seg == l.t_seg && c.s_seg == l.s_seg), || {
                format!("t={t} level {lv} changed after a green site")
            });
            let Some(now) = now else { continue };
            let parent = |r: &StepRecord| if i == 0 { r.whole_density } else { r.levels[i - 1].s_density };
            let ratio = |r: &StepRecord, s: &LevelStats| {
                let d = parent(r);
                if d > 0.0 { s.s_density / d } else { 0.0 }
            };
            potential_mono.check(
                geq(now.s_density, l.s_density)
                    && geq(now.s_log_potential, l.s_log_potential)
                    && geq(ratio(row, now), ratio(prev, l)),
                || format!("t={t} level {lv}: rho {:.6} -> {:.6}", l.s_density, now.s_density),
            );
        }
        if row.critical >= 2 {
            if let Some(l) = prev.levels.get(row.critical - 1) {
                critical.check(l.t_seg.intersects(&prev.busy), || {
                    format!("t={t} T_{} = {} misses busy {}", row.critical, l.t_seg, prev.busy)
                });
            }
        }
    }

    let eps = epochs(record);
    let mut p7 = Tally::new("P7");
    for e in eps.iter().filter(|e| e.level >= 1 && e.end == EpochEnd::Red) {
        p7.check(e.charge as f64 >= e.start_weight / 8.0 - EPS, || {
            format!("level {} epoch [{}, {}]: q = {} < w/8 = {:.3}", e.level, e.start, e.close, e.charge, e.start_weight / 8.0)
        });
    }
    let total_charge: u64 = eps.iter().map(|e| e.charge).sum();
    let total_cost: u64 = steps.iter().map(|s| s.num_relocated).sum();
    let mut conservation = Tally::new("charge_conservation");
    conservation.check(total_charge == total_cost, || format!("sum q_i^E = {total_charge}, cost = {total_cost}"));

    let fallbacks = fallback.violations;
    let depth_violations = depth.violations;
    AuditReport {
        properties: vec![
            p1.finish(),
            p2.finish(),
            p3.finish(),
            p4.finish(),
            p5.finish(),
            p6.finish(),
            p7.finish(),
            nesting.finish(),
            prefix.finish(),
            copy.finish(),
            partition.finish(),
            conservation.finish(),
            critical.finish(),
            potential_mono.finish(),
            balanced.finish(),
            mingap.finish(),
            fallback.finish(),
            depth.finish(),
        ],
        fallbacks,
        depth_violations,
        degenerate_nestings,
        epochs: eps.len(),
        total_charge,
        total_cost,
    }
}
