use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::audit::RunRecord;
use super::params::{Overrides, Profile};
use super::strategy::SegmentTableAdversary;
use crate::error::{GameError, Result};
use crate::game::{Adversary, GameView, Key, StepTrace};

/// `n0 = ceil(N/2)` keys `B, 2B, ..., n0 B` with `B = floor(r / n0)`.
pub fn theorem1_prefix(total: u64, r: &BigUint) -> Result<Vec<Key>> {
    let n0 = total.div_ceil(2);
    if n0 == 0 || r < &BigUint::from(2 * n0) {
        return Err(GameError::InvalidConfig(format!("prefix of {n0} keys needs r >= {}", 2 * n0)));
    }
    let b = r / n0;
    Ok((1..=n0).map(|t| &b * t).collect())
}

/// Smallest universe for which the prefix leaves `mingap >= 2^(N - n0)`,
/// the condition for unit weights in the following game.
pub fn unit_weight_universe(total: u64) -> BigUint {
    let n0 = total.div_ceil(2);
    BigUint::from(n0) << (total - n0) as usize
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub p: u64,
    /// `N_0, N_1, ..., N_p`; `N_0` is the preloaded set.
    pub sizes: Vec<u64>,
}

impl PhaseSchedule {
    pub fn total(&self) -> u64 {
        self.sizes.iter().sum()
    }
}

/// Phase count from `delta = N / m`: `floor(ln(1 - delta) / (7 ln(2/3))) - 1`.
pub fn phase_count(total: u64, m: u64) -> i64 {
    let delta = total as f64 / m as f64;
    ((1.0 - delta).ln() / (7.0 * (2f64 / 3.0).ln())).floor() as i64 - 1
}

pub fn phase_schedule(total: u64, m: u64) -> Result<PhaseSchedule> {
    phase_schedule_with(total, m, None)
}

/// As [`phase_schedule`], optionally forcing the number of phases.
pub fn phase_schedule_with(total: u64, m: u64, phases: Option<u64>) -> Result<PhaseSchedule> {
    if total == 0 || total >= m {
        return Err(GameError::InvalidConfig(format!("phase schedule needs 0 < N < m (N = {total}, m = {m})")));
    }
    let p = match phases {
        Some(p) => p as i64,
        None => phase_count(total, m),
    };
    if p < 1 {
        return Err(GameError::Infeasible(format!("phase count p = {p} < 1 for N = {total}, m = {m}")));
    }
    let mut sizes = vec![m / 3];
    let mut free = m - m / 3;
    for _ in 0..p {
        let nj = free / 3;
        sizes.push(nj);
        free -= nj;
    }
    let sched = PhaseSchedule { p: p as u64, sizes };
    if sched.total() > total {
        return Err(GameError::Infeasible(format!("phases load {} keys, more than N = {total}", sched.total())));
    }
    Ok(sched)
}

/// Keep each key of `y0` and add `ceil(12/delta0)` equally spaced keys
/// (rounded down) inside every adjacent pair.
pub fn subsample_equally(y0: &[Key], delta0: f64) -> Result<Vec<Key>> {
    if !(delta0 > 0.0) {
        return Err(GameError::Parameter(format!("delta0 must be positive, got {delta0}")));
    }
    let q = (12.0 / delta0).ceil() as u64;
    let parts = BigUint::from(q + 1);
    let mut sorted = y0.to_vec();
    sorted.sort();
    let mut out = Vec::with_capacity(sorted.len() * (q as usize + 1));
    for pair in sorted.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        out.push(a.clone());
        let span = b - a;
        for j in 1..=q {
            let key = a + &span * j / &parts;
            if out.last() == Some(&key) || &key >= b {
                return Err(GameError::Infeasible(format!("gap ({a}, {b}) cannot hold {q} distinct keys")));
            }
            out.push(key);
        }
    }
    out.extend(sorted.last().cloned());
    Ok(out)
}

/// Loads the prefix keys in the first `n0` steps, then hands over to the
/// segment-table adversary for the remaining `N - n0` steps.
#[derive(Debug)]
pub struct PrefixAdversary {
    prefix: Vec<Key>,
    inner: SegmentTableAdversary,
}

impl PrefixAdversary {
    pub fn new(total: u64, r: &BigUint, profile: Profile, overrides: Overrides) -> Result<Self> {
        let prefix = theorem1_prefix(total, r)?;
        let rest = total - prefix.len() as u64;
        Ok(PrefixAdversary { prefix, inner: SegmentTableAdversary::new(profile, overrides).with_horizon(rest) })
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn table(&self) -> &SegmentTableAdversary {
        &self.inner
    }

    pub fn into_record(self) -> Option<RunRecord> {
        self.inner.into_record()
    }
}

impl Adversary<u64> for PrefixAdversary {
    fn name(&self) -> String {
        "prefix".into()
    }

    fn requires_lazy(&self) -> bool {
        true
    }

    fn next_key(&mut self, view: &GameView<u64>) -> Result<Key> {
        match self.prefix.get(view.t - 1) {
            Some(k) => Ok(k.clone()),
            None => self.inner.next_key(view),
        }
    }

    fn observe(&mut self, view: &GameView<u64>, trace: &StepTrace<u64>) -> Result<()> {
        if view.t > self.prefix.len() {
            self.inner.observe(view, trace)?;
        }
        Ok(())
    }
}

/// Loads `N_0` equally spaced keys, then runs one fresh segment-table
/// adversary per phase, each starting from everything stored so far.
#[derive(Debug)]
pub struct PhaseAdversary {
    schedule: PhaseSchedule,
    z0: Vec<Key>,
    profile: Profile,
    overrides: Overrides,
    /// Last step of each phase, phase 0 included.
    ends: Vec<usize>,
    current: Option<SegmentTableAdversary>,
    records: Vec<RunRecord>,
}

impl PhaseAdversary {
    pub fn new(schedule: PhaseSchedule, r: &BigUint, profile: Profile, overrides: Overrides) -> Result<Self> {
        let n0 = schedule.sizes[0];
        if n0 == 0 || r < &BigUint::from(2 * n0) {
            return Err(GameError::InvalidConfig(format!("Z_0 of {n0} keys needs r >= {}", 2 * n0)));
        }
        let b = r / n0;
        let z0 = (1..=n0).map(|t| &b * t).collect();
        let ends = schedule
            .sizes
            .iter()
            .scan(0usize, |acc, &s| {
                *acc += s as usize;
                Some(*acc)
            })
            .collect();
        Ok(PhaseAdversary { schedule, z0, profile, overrides, ends, current: None, records: Vec::new() })
    }

    pub fn schedule(&self) -> &PhaseSchedule {
        &self.schedule
    }

    pub fn total_steps(&self) -> u64 {
        self.schedule.total()
    }

    /// Records of the finished phases followed by the running one.
    pub fn records(&self) -> Vec<RunRecord> {
        let mut out = self.records.clone();
        out.extend(self.current.as_ref().and_then(|c| c.record()).cloned());
        out
    }

    fn phase_of(&self, t: usize) -> usize {
        self.ends.iter().position(|&e| t <= e).unwrap_or(self.ends.len())
    }
}

impl Adversary<u64> for PhaseAdversary {
    fn name(&self) -> String {
        "phase".into()
    }

    fn requires_lazy(&self) -> bool {
        true
    }

    fn next_key(&mut self, view: &GameView<u64>) -> Result<Key> {
        if let Some(k) = self.z0.get(view.t - 1) {
            return Ok(k.clone());
        }
        let phase = self.phase_of(view.t);
        if phase >= self.ends.len() {
            return Err(GameError::AdversaryStuck { step: view.t, reason: "all phases finished".into() });
        }
        if view.t == self.ends[phase - 1] + 1 {
            if let Some(done) = self.current.take().and_then(|c| c.into_record()) {
                self.records.push(done);
            }
            let horizon = self.schedule.sizes[phase];
            self.current =
                Some(SegmentTableAdversary::new(self.profile, self.overrides.clone()).with_horizon(horizon));
        }
        self.current.as_mut().expect("phase running").next_key(view)
    }

    fn observe(&mut self, view: &GameView<u64>, trace: &StepTrace<u64>) -> Result<()> {
        match self.current.as_mut() {
            Some(c) if view.t > self.z0.len() => c.observe(view, trace),
            _ => Ok(()),
        }
    }
}
