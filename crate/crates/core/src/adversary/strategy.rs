use std::collections::BTreeSet;

use num_bigint::BigUint;

use super::audit::{LevelStats, RunRecord, StepRecord};
use super::params::{params_for, AdversaryParams, Overrides, Profile};
use super::table::{build_column, charge_partition, color_column, select_key, Column};
use crate::error::{GameError, Result};
use crate::game::{mingap, Adversary, GameView, Key, StepTrace};
use crate::segment::{density, is_lower_balanced, log_potential, CellFlag, Segment, WeightedOccupancy};

/// The segment-table adversary.
///
/// It takes the keys stored when it makes its first move as its initial set
/// `Y^0` and plays for `horizon` steps (by default, the rest of the game).
/// It requires the algorithm's busy region to be a single segment.
#[derive(Debug)]
pub struct SegmentTableAdversary {
    profile: Profile,
    overrides: Overrides,
    horizon: Option<u64>,
    state: Option<State>,
}

#[derive(Debug)]
struct State {
    old: BTreeSet<Key>,
    /// Occupancy flags by cell, kept in step with the configuration.
    flags: Vec<CellFlag>,
    mingap: BigUint,
    last: Option<(Column, Vec<bool>)>,
    last_busy: Option<Segment>,
    pending: Option<Pending>,
    record: RunRecord,
}

#[derive(Debug)]
struct Pending {
    column: Column,
    levels: Vec<LevelStats>,
    whole_density: f64,
    fallback: Option<usize>,
    balance_checked: u64,
    balance_failed: u64,
}

impl SegmentTableAdversary {
    pub fn new(profile: Profile, overrides: Overrides) -> Self {
        SegmentTableAdversary { profile, overrides, horizon: None, state: None }
    }

    pub fn with_horizon(mut self, steps: u64) -> Self {
        self.horizon = Some(steps);
        self
    }

    pub fn params(&self) -> Option<&AdversaryParams> {
        self.state.as_ref().map(|s| &s.record.params)
    }

    pub fn record(&self) -> Option<&RunRecord> {
        self.state.as_ref().map(|s| &s.record)
    }

    pub fn into_record(self) -> Option<RunRecord> {
        self.state.map(|s| s.record)
    }

    fn start(&mut self, view: &GameView<u64>) -> Result<()> {
        let old: BTreeSet<Key> = view.config.keys().cloned().collect();
        let mingap0 = mingap(old.iter()).map_err(|_| {
            GameError::Parameter("the segment-table adversary needs at least two stored keys".into())
        })?;
        let horizon = self.horizon.unwrap_or((view.n + 1 - view.t) as u64);
        let params = params_for(self.profile, horizon, *view.m, old.len() as u64, &mingap0, &self.overrides)?;
        let mut flags = vec![CellFlag::Empty; *view.m as usize];
        for (_, &c) in view.config.iter() {
            flags[(c - 1) as usize] = CellFlag::Old;
        }
        self.state = Some(State {
            old,
            flags,
            mingap: mingap0.clone(),
            last: None,
            last_busy: None,
            pending: None,
            record: RunRecord { params, mingap0, first_step: view.t, steps: Vec::new() },
        });
        Ok(())
    }
}

fn level_stats(occ: &WeightedOccupancy, column: &Column, kappa: f64) -> Result<Vec<LevelStats>> {
    column
        .levels
        .iter()
        .map(|l| {
            Ok(LevelStats {
                t_seg: l.t_seg,
                s_seg: l.s_seg,
                s_weight: occ.weight(&l.s_seg),
                s_density: density(occ, &l.s_seg),
                s_log_potential: log_potential(occ, &l.s_seg, kappa)?,
            })
        })
        .collect()
}

/// Balance-lemma conclusions for every rebuilt level whose hypotheses hold.
fn balance_masks(occ: &WeightedOccupancy, column: &Column, kappa: f64) -> Result<(u64, u64)> {
    let ln4 = 4f64.ln();
    if kappa > 1.0 / (24.0 * ln4) {
        return Ok((0, 0));
    }
    let (mut checked, mut failed) = (0u64, 0u64);
    for (i, l) in column.levels.iter().enumerate().skip(column.critical.saturating_sub(1)) {
        if l.s_seg.size() < 4 {
            continue;
        }
        checked |= 1 << i;
        let (rho_s, rho_t) = (density(occ, &l.s_seg), density(occ, &l.t_seg));
        let (phi_s, phi_t) = (log_potential(occ, &l.s_seg, kappa)?, log_potential(occ, &l.t_seg, kappa)?);
        let ok = rho_s >= (-24.0 * ln4 * kappa).exp() * rho_t - 1e-9
            && is_lower_balanced(occ, &l.s_seg, 25.0 * kappa)
            && phi_s >= phi_t - (24.0 * ln4 + 3f64.ln()) - 1e-9;
        if !ok {
            failed |= 1 << i;
        }
    }
    Ok((checked, failed))
}

impl Adversary<u64> for SegmentTableAdversary {
    fn name(&self) -> String {
        "segment-table".into()
    }

    fn requires_lazy(&self) -> bool {
        true
    }

    fn next_key(&mut self, view: &GameView<u64>) -> Result<Key> {
        if self.state.is_none() {
            self.start(view)?;
        }
        let st = self.state.as_mut().expect("started");
        let p = &st.record.params;
        let tau = view.t + 1 - st.record.first_step;
        if tau as u64 > p.n {
            return Err(GameError::AdversaryStuck { step: view.t, reason: format!("horizon of {} steps exhausted", p.n) });
        }
        let occ = WeightedOccupancy::from_flags(&st.flags, p.lambda);
        let prev = st.last.as_ref().map(|(c, g)| (c, g.as_slice()));
        let column = build_column(prev, st.last_busy.as_ref(), &occ, p.d, p.kappa, p.n)?;
        let levels = level_stats(&occ, &column, p.kappa)?;
        let (balance_checked, balance_failed) = balance_masks(&occ, &column, p.kappa)?;
        let (key, fallback) = select_key(&column, view.config, view.t)?;
        st.pending = Some(Pending {
            column,
            levels,
            whole_density: density(&occ, &occ.whole()),
            fallback,
            balance_checked,
            balance_failed,
        });
        Ok(key)
    }

    fn observe(&mut self, view: &GameView<u64>, trace: &StepTrace<u64>) -> Result<()> {
        let st = self.state.as_mut().expect("next_key ran first");
        let pending = st.pending.take().expect("a key was chosen");
        let busy = trace.busy_segment()?;
        let green = color_column(&pending.column, &busy);
        let q = charge_partition(&pending.column, &trace.relocated, st.record.params.d);

        for r in &trace.relocated {
            if let Some(c) = r.from {
                st.flags[(c - 1) as usize] = CellFlag::Empty;
            }
        }
        for r in &trace.relocated {
            st.flags[(r.to - 1) as usize] = if st.old.contains(&r.key) { CellFlag::Old } else { CellFlag::New };
        }

        let y = &trace.loaded_key;
        for (a, b) in [(view.config.predecessor(y).map(|(k, _)| k), Some(y)), (Some(y), view.config.successor(y).map(|(k, _)| k))] {
            if let (Some(a), Some(b)) = (a, b) {
                let gap = b - a;
                if gap < st.mingap {
                    st.mingap = gap;
                }
            }
        }

        st.record.steps.push(StepRecord {
            t: view.t + 1 - st.record.first_step,
            critical: pending.column.critical,
            levels: pending.levels,
            green: green.clone(),
            q,
            num_relocated: trace.num_relocated() as u64,
            busy,
            mingap: st.mingap.clone(),
            fallback: pending.fallback,
            depth_violation: pending.column.depth_violation,
            whole_density: pending.whole_density,
            balance_checked: pending.balance_checked,
            balance_failed: pending.balance_failed,
        });
        st.last = Some((pending.column, green));
        st.last_busy = Some(busy);
        Ok(())
    }
}
