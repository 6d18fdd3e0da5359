//! Wrapper turning any labeling algorithm into a lazy one.
//!
//! The wrapper runs the inner algorithm on a virtual placement `g` and emits
//! a placement `f` that only catches up with `g` inside the smallest segment
//! around the new key's cell that can be synchronized on its own. Every other
//! pending move is deferred, so the busy region is always one segment.
//!
//! A segment is closed under synchronization when every pending key whose
//! trail `[f(x), g(x)]` meets it lies inside it. Absorbing trails that merely
//! cross the segment (both ends outside) is required: leaving such a key at
//! `f(x)` while the new key lands on the other side of it would break order.

use std::collections::{BTreeMap, BTreeSet};

use crate::cell::CellIndex;
use crate::error::{GameError, Result};
use crate::segment::Segment;

use super::{Configuration, Key, LabelingAlgorithm};

/// Per-key relocation counters for the inner and the emitted placements.
#[derive(Debug, Clone, Default)]
pub struct LazyStats {
    pub inner: BTreeMap<Key, u64>,
    pub outer: BTreeMap<Key, u64>,
    /// Steps after which some key had moved more often in `f` than in `g`.
    pub dominance_violations: u64,
    pub inner_total: u64,
    pub outer_total: u64,
}

pub struct LazyWrap<A, C: CellIndex = u64> {
    inner: A,
    m: C,
    virtual_cfg: Configuration<C>,
    emitted: Configuration<C>,
    pending: BTreeSet<Key>,
    stats: LazyStats,
    step: usize,
}

impl<A, C: CellIndex> LazyWrap<A, C>
where
    A: LabelingAlgorithm<C>,
{
    pub fn new(inner: A, m: C) -> Self {
        LazyWrap {
            inner,
            m,
            virtual_cfg: Configuration::new(),
            emitted: Configuration::new(),
            pending: BTreeSet::new(),
            stats: LazyStats::default(),
            step: 0,
        }
    }

    pub fn inner(&self) -> &A {
        &self.inner
    }

    pub fn into_inner(self) -> A {
        self.inner
    }

    pub fn stats(&self) -> &LazyStats {
        &self.stats
    }

    /// Keys whose emitted cell lags behind the inner algorithm's.
    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    pub fn virtual_placement(&self) -> &Configuration<C> {
        &self.virtual_cfg
    }

    fn closure(&self, start: &C) -> Segment<C> {
        let mut trails: Vec<Segment<C>> = self
            .pending
            .iter()
            .map(|k| {
                let f = self.emitted.cell_of(k).expect("pending key is emitted");
                let g = self.virtual_cfg.cell_of(k).expect("pending key is virtual");
                if f <= g {
                    Segment::new(f.clone(), g.clone())
                } else {
                    Segment::new(g.clone(), f.clone())
                }
            })
            .collect();
        trails.sort_by(|a, b| a.lo.cmp(&b.lo));
        // Components of trails that share at least one cell.
        let mut comp: Option<Segment<C>> = None;
        for s in trails {
            match comp.as_mut() {
                Some(c) if s.lo <= c.hi => {
                    if s.hi > c.hi {
                        c.hi = s.hi;
                    }
                }
                _ => {
                    if let Some(c) = comp.take() {
                        if c.contains(start) {
                            return c;
                        }
                    }
                    comp = Some(s);
                }
            }
        }
        match comp {
            Some(c) if c.contains(start) => c,
            _ => Segment::new(start.clone(), start.clone()),
        }
    }
}

impl<A, C: CellIndex> LabelingAlgorithm<C> for LazyWrap<A, C>
where
    A: LabelingAlgorithm<C>,
{
    fn name(&self) -> String {
        format!("lazy({})", self.inner.name())
    }

    fn initialize(&mut self, keys: &[Key]) -> Result<Vec<(Key, C)>> {
        let f0 = self.inner.initialize(keys)?;
        let cfg = Configuration::from_placement(f0.clone(), &self.m)
            .map_err(|reason| GameError::InvalidPlacement { step: 0, reason })?;
        self.virtual_cfg = cfg.clone();
        self.emitted = cfg;
        Ok(f0)
    }

    fn insert(&mut self, key: &Key) -> Result<Vec<(Key, C)>> {
        self.step += 1;
        let moves = self.inner.insert(key)?;
        let before = self.stats.inner_total;
        let trace = self
            .virtual_cfg
            .apply_placement(self.step, key, &moves, &self.m, before)?;
        for r in &trace.relocated {
            *self.stats.inner.entry(r.key.clone()).or_default() += 1;
            if r.from.is_some() {
                if self.emitted.cell_of(&r.key) == Some(&r.to) {
                    self.pending.remove(&r.key);
                } else {
                    self.pending.insert(r.key.clone());
                }
            }
        }
        self.stats.inner_total = trace.cost_so_far;

        let target = self.virtual_cfg.cell_of(key).expect("just placed").clone();
        let window = self.closure(&target);
        let synced: Vec<Key> = self
            .pending
            .iter()
            .filter(|k| self.emitted.cell_of(k).map_or(false, |c| window.contains(c)))
            .cloned()
            .collect();
        let mut out = Vec::with_capacity(synced.len() + 1);
        out.push((key.clone(), target));
        for k in synced {
            self.pending.remove(&k);
            out.push((k.clone(), self.virtual_cfg.cell_of(&k).expect("virtual").clone()));
        }
        let emitted_trace =
            self.emitted
                .apply_placement(self.step, key, &out, &self.m, self.stats.outer_total)?;
        for r in &emitted_trace.relocated {
            *self.stats.outer.entry(r.key.clone()).or_default() += 1;
        }
        self.stats.outer_total = emitted_trace.cost_so_far;
        let violated = emitted_trace.relocated.iter().any(|r| {
            self.stats.outer.get(&r.key).copied().unwrap_or(0)
                > self.stats.inner.get(&r.key).copied().unwrap_or(0)
        });
        if violated {
            self.stats.dominance_violations += 1;
        }
        Ok(out)
    }
}
