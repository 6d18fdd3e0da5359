//! Array model, game loop, and cost accounting.
//!
//! A [`Configuration`] is a set of keys with a strictly order-preserving
//! storage function into cells `[1, m]`. Each step the adversary picks a key,
//! the algorithm answers with the cells of every key it relocates, and the
//! engine validates the answer and records a [`StepTrace`].

mod config;
mod lazy;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cell::CellIndex;
use crate::error::{GameError, Result};
use crate::segment::Segment;

pub use config::Configuration;
pub use lazy::{LazyStats, LazyWrap};

pub type Key = BigUint;

/// Parameters of one game `G^n(m, r)` or, with preloaded keys, `G^n(m | Y0)`.
#[derive(Debug, Clone)]
pub struct GameConfig<C: CellIndex = u64> {
    pub n: usize,
    pub m: C,
    pub r: BigUint,
    pub initial_keys: Vec<Key>,
    pub seed: u64,
}

impl<C: CellIndex> GameConfig<C> {
    pub fn new(n: usize, m: C, r: BigUint) -> Self {
        GameConfig { n, m, r, initial_keys: Vec::new(), seed: 0 }
    }

    pub fn with_initial_keys(mut self, keys: Vec<Key>) -> Self {
        self.initial_keys = keys;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(GameError::InvalidConfig("n must be at least 1".into()));
        }
        let n0 = self.initial_keys.len();
        let need = (self.n + n0) as u64;
        if let Some(m) = self.m.to_u64() {
            if need > m {
                return Err(GameError::InvalidConfig(format!(
                    "n + n0 = {need} exceeds m = {m}"
                )));
            }
        }
        let set: BTreeSet<&Key> = self.initial_keys.iter().collect();
        if set.len() != n0 {
            return Err(GameError::InvalidConfig("initial keys are not distinct".into()));
        }
        for k in &self.initial_keys {
            if k.is_zero() || k > &self.r {
                return Err(GameError::InvalidConfig(format!("initial key {k} outside [1, r]")));
            }
        }
        Ok(())
    }
}

/// Adjacent pair of loaded keys with nothing loaded strictly between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gap {
    pub left: Key,
    pub right: Key,
}

impl Gap {
    pub fn new(left: Key, right: Key) -> Self {
        Gap { left, right }
    }

    pub fn length(&self) -> BigUint {
        &self.right - &self.left
    }

    pub fn is_suitable(&self) -> bool {
        self.length() >= BigUint::from(2u32)
    }
}

/// Minimum difference between adjacent keys.
pub fn mingap<'a, I>(keys: I) -> Result<BigUint>
where
    I: IntoIterator<Item = &'a Key>,
{
    let mut sorted: Vec<&Key> = keys.into_iter().collect();
    sorted.sort();
    sorted.dedup();
    if sorted.len() < 2 {
        return Err(GameError::UndefinedInput("mingap needs at least two keys".into()));
    }
    Ok(sorted.windows(2).map(|w| w[1] - w[0]).min().expect("non-empty"))
}

/// Largest suitable gap among consecutive keys stored inside `segment`.
/// Ties go to the smaller left key.
pub fn largest_suitable_gap<C: CellIndex>(
    config: &Configuration<C>,
    segment: &Segment<C>,
) -> Option<Gap> {
    let two = BigUint::from(2u32);
    let mut best: Option<(BigUint, &Key, &Key)> = None;
    let mut prev: Option<&Key> = None;
    for (_, key) in config.stored_in(segment) {
        if let Some(p) = prev {
            let len = key - p;
            if len >= two && best.as_ref().map_or(true, |(b, _, _)| &len > b) {
                best = Some((len, p, key));
            }
        }
        prev = Some(key);
    }
    best.map(|(_, l, r)| Gap::new(l.clone(), r.clone()))
}

/// `floor((left + right) / 2)`, strictly inside a suitable gap.
pub fn gap_midpoint(gap: &Gap) -> Result<Key> {
    if !gap.is_suitable() {
        return Err(GameError::UnsuitableGap(gap.length().to_string()));
    }
    Ok((&gap.left + &gap.right) >> 1u32)
}

/// One relocation: `from` is `None` for the key loaded at this step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relocation<C: CellIndex = u64> {
    pub key: Key,
    pub from: Option<C>,
    pub to: C,
}

impl<C: CellIndex> Relocation<C> {
    pub fn trail(&self) -> Segment<C> {
        match &self.from {
            None => Segment::new(self.to.clone(), self.to.clone()),
            Some(f) if f <= &self.to => Segment::new(f.clone(), self.to.clone()),
            Some(f) => Segment::new(self.to.clone(), f.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepTrace<C: CellIndex = u64> {
    pub t: usize,
    pub loaded_key: Key,
    pub relocated: Vec<Relocation<C>>,
    /// Maximal segments whose union is the busy region.
    pub busy: Vec<Segment<C>>,
    pub cost_so_far: u64,
}

impl<C: CellIndex> StepTrace<C> {
    pub fn num_relocated(&self) -> usize {
        self.relocated.len()
    }

    pub fn trails(&self) -> impl Iterator<Item = (&Key, Segment<C>)> {
        self.relocated.iter().map(|r| (&r.key, r.trail()))
    }

    pub fn is_connected(&self) -> bool {
        self.busy.len() == 1
    }

    pub fn busy_hull(&self) -> Segment<C> {
        let lo = self.busy.first().expect("busy region is never empty").lo.clone();
        let hi = self.busy.last().expect("busy region is never empty").hi.clone();
        Segment::new(lo, hi)
    }

    /// The busy segment of a lazy step.
    pub fn busy_segment(&self) -> Result<Segment<C>> {
        if self.is_connected() {
            Ok(self.busy[0].clone())
        } else {
            Err(GameError::NotLazy { step: self.t, pieces: self.busy.len() })
        }
    }
}

/// Merge trails into maximal segments of contiguous cells.
pub fn busy_region<C: CellIndex>(trails: impl IntoIterator<Item = Segment<C>>) -> Vec<Segment<C>> {
    let mut v: Vec<Segment<C>> = trails.into_iter().collect();
    v.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut out: Vec<Segment<C>> = Vec::with_capacity(v.len());
    for s in v {
        match out.last_mut() {
            Some(last) if s.lo <= last.hi.succ() => {
                if s.hi > last.hi {
                    last.hi = s.hi;
                }
            }
            _ => out.push(s),
        }
    }
    out
}

/// Read-only view of the game handed to adversaries.
pub struct GameView<'a, C: CellIndex = u64> {
    /// Step about to be played (or just played, inside `observe`).
    pub t: usize,
    pub n: usize,
    pub m: &'a C,
    pub r: &'a BigUint,
    pub config: &'a Configuration<C>,
    pub initial: &'a BTreeSet<Key>,
    pub cost: u64,
}

impl<'a, C: CellIndex> GameView<'a, C> {
    /// Keys may be loaded strictly inside `(min Y0, max Y0)`, or in `[1, r]`
    /// when nothing was preloaded.
    pub fn key_bounds(&self) -> (Key, Key) {
        match (self.initial.first(), self.initial.last()) {
            (Some(lo), Some(hi)) => (lo.clone(), hi.clone()),
            _ => (BigUint::zero(), &*self.r + BigUint::one()),
        }
    }
}

pub trait LabelingAlgorithm<C: CellIndex = u64> {
    fn name(&self) -> String;

    /// Free initial storage `f^0` of the preloaded keys (given sorted).
    fn initialize(&mut self, keys: &[Key]) -> Result<Vec<(Key, C)>>;

    /// New cells for every key that moves, the loaded key included.
    fn insert(&mut self, key: &Key) -> Result<Vec<(Key, C)>>;
}

impl<C: CellIndex, A: LabelingAlgorithm<C> + ?Sized> LabelingAlgorithm<C> for Box<A> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn initialize(&mut self, keys: &[Key]) -> Result<Vec<(Key, C)>> {
        (**self).initialize(keys)
    }
    fn insert(&mut self, key: &Key) -> Result<Vec<(Key, C)>> {
        (**self).insert(key)
    }
}

pub trait Adversary<C: CellIndex = u64> {
    fn name(&self) -> String;

    /// Whether the adversary needs single-segment busy regions.
    fn requires_lazy(&self) -> bool {
        false
    }

    fn next_key(&mut self, view: &GameView<C>) -> Result<Key>;

    fn observe(&mut self, _view: &GameView<C>, _trace: &StepTrace<C>) -> Result<()> {
        Ok(())
    }
}

impl<C: CellIndex, A: Adversary<C> + ?Sized> Adversary<C> for Box<A> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn requires_lazy(&self) -> bool {
        (**self).requires_lazy()
    }
    fn next_key(&mut self, view: &GameView<C>) -> Result<Key> {
        (**self).next_key(view)
    }
    fn observe(&mut self, view: &GameView<C>, trace: &StepTrace<C>) -> Result<()> {
        (**self).observe(view, trace)
    }
}

/// Compact per-step row kept for the whole run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub t: usize,
    pub y_t: String,
    pub num_relocated: usize,
    pub busy_lo: String,
    pub busy_hi: String,
    pub disconnected: bool,
    pub chi_t: u64,
}

impl StepSummary {
    pub fn from_trace<C: CellIndex>(trace: &StepTrace<C>) -> Self {
        let hull = trace.busy_hull();
        StepSummary {
            t: trace.t,
            y_t: trace.loaded_key.to_string(),
            num_relocated: trace.num_relocated(),
            busy_lo: hull.lo.to_string(),
            busy_hi: hull.hi.to_string(),
            disconnected: !trace.is_connected(),
            chi_t: trace.cost_so_far,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GameOutcome<C: CellIndex = u64> {
    pub steps: Vec<StepSummary>,
    pub cost: u64,
    pub final_config: Configuration<C>,
}

pub fn run_game<C, Adv, Alg>(
    config: &GameConfig<C>,
    adversary: &mut Adv,
    algorithm: &mut Alg,
) -> Result<GameOutcome<C>>
where
    C: CellIndex,
    Adv: Adversary<C> + ?Sized,
    Alg: LabelingAlgorithm<C> + ?Sized,
{
    run_game_observed(config, adversary, algorithm, |_| {})
}

/// Play all `n` steps, handing every full [`StepTrace`] to `observer`.
pub fn run_game_observed<C, Adv, Alg, F>(
    config: &GameConfig<C>,
    adversary: &mut Adv,
    algorithm: &mut Alg,
    mut observer: F,
) -> Result<GameOutcome<C>>
where
    C: CellIndex,
    Adv: Adversary<C> + ?Sized,
    Alg: LabelingAlgorithm<C> + ?Sized,
    F: FnMut(&StepTrace<C>),
{
    config.validate()?;
    let mut sorted = config.initial_keys.clone();
    sorted.sort();
    let initial: BTreeSet<Key> = sorted.iter().cloned().collect();
    let f0 = algorithm.initialize(&sorted)?;
    let mut current = Configuration::from_placement(f0, &config.m)
        .map_err(|reason| GameError::InvalidPlacement { step: 0, reason })?;
    if current.len() != initial.len() || !initial.iter().all(|k| current.cell_of(k).is_some()) {
        return Err(GameError::InvalidPlacement {
            step: 0,
            reason: "initial placement does not store exactly Y0".into(),
        });
    }

    let lazy = adversary.requires_lazy();
    let mut cost = 0u64;
    let mut steps = Vec::with_capacity(config.n);
    for t in 1..=config.n {
        let view = GameView {
            t,
            n: config.n,
            m: &config.m,
            r: &config.r,
            config: &current,
            initial: &initial,
            cost,
        };
        let key = adversary.next_key(&view)?;
        check_key(&view, &key)?;
        let moves = algorithm.insert(&key)?;
        let trace = current.apply_placement(t, &key, &moves, &config.m, cost)?;
        if lazy && !trace.is_connected() {
            return Err(GameError::NotLazy { step: t, pieces: trace.busy.len() });
        }
        cost = trace.cost_so_far;
        let view = GameView {
            t,
            n: config.n,
            m: &config.m,
            r: &config.r,
            config: &current,
            initial: &initial,
            cost,
        };
        adversary.observe(&view, &trace)?;
        observer(&trace);
        steps.push(StepSummary::from_trace(&trace));
    }
    Ok(GameOutcome { steps, cost, final_config: current })
}

fn check_key<C: CellIndex>(view: &GameView<C>, key: &Key) -> Result<()> {
    let (lo, hi) = view.key_bounds();
    if key <= &lo || key >= &hi || view.config.cell_of(key).is_some() {
        return Err(GameError::AdversaryStuck {
            step: view.t,
            reason: format!("illegal key {key}: outside the key range or already loaded"),
        });
    }
    Ok(())
}
