use std::collections::{BTreeMap, HashSet};
use std::ops::Bound;

use crate::cell::CellIndex;
use crate::error::{GameError, Result};
use crate::segment::Segment;

use super::{busy_region, Key, Relocation, StepTrace};

/// Loaded keys plus their strictly order-preserving cells.
///
/// Stored sparsely as two ordered maps, so the cell range may be huge.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Configuration<C: CellIndex = u64> {
    by_key: BTreeMap<Key, C>,
    by_cell: BTreeMap<C, Key>,
}

impl<C: CellIndex> Configuration<C> {
    pub fn new() -> Self {
        Configuration { by_key: BTreeMap::new(), by_cell: BTreeMap::new() }
    }

    /// Build from `(key, cell)` pairs, checking cells lie in `[1, m]` and the
    /// map is strictly order preserving.
    pub fn from_placement(
        pairs: impl IntoIterator<Item = (Key, C)>,
        m: &C,
    ) -> std::result::Result<Self, String> {
        let mut cfg = Configuration::new();
        for (k, c) in pairs {
            if c.is_zero_index() || &c > m {
                return Err(format!("cell {c} outside [1, {m}]"));
            }
            if cfg.by_key.contains_key(&k) {
                return Err(format!("key {k} placed twice"));
            }
            if cfg.by_cell.contains_key(&c) {
                return Err(format!("cell {c} holds two keys"));
            }
            cfg.by_cell.insert(c.clone(), k.clone());
            cfg.by_key.insert(k, c);
        }
        cfg.check_order()?;
        Ok(cfg)
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }

    pub fn cell_of(&self, key: &Key) -> Option<&C> {
        self.by_key.get(key)
    }

    pub fn key_at(&self, cell: &C) -> Option<&Key> {
        self.by_cell.get(cell)
    }

    /// `(key, cell)` in increasing key (and cell) order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (&Key, &C)> {
        self.by_key.iter()
    }

    pub fn keys(&self) -> impl DoubleEndedIterator<Item = &Key> {
        self.by_key.keys()
    }

    /// `(cell, key)` for keys stored inside `segment`, in cell order.
    pub fn stored_in<'a>(&'a self, segment: &Segment<C>) -> impl Iterator<Item = (&'a C, &'a Key)> + 'a {
        self.by_cell.range(segment.lo.clone()..=segment.hi.clone())
    }

    pub fn count_in(&self, segment: &Segment<C>) -> usize {
        self.stored_in(segment).count()
    }

    /// Largest loaded key below `key`.
    pub fn predecessor(&self, key: &Key) -> Option<(&Key, &C)> {
        self.by_key.range((Bound::Unbounded, Bound::Excluded(key))).next_back()
    }

    /// Smallest loaded key above `key`.
    pub fn successor(&self, key: &Key) -> Option<(&Key, &C)> {
        self.by_key.range((Bound::Excluded(key), Bound::Unbounded)).next()
    }

    /// Full O(n) check that cells increase with keys.
    pub fn check_order(&self) -> std::result::Result<(), String> {
        let mut prev: Option<(&Key, &C)> = None;
        for (k, c) in &self.by_key {
            if let Some((pk, pc)) = prev {
                if pc >= c {
                    return Err(format!("order violated: {pk}@{pc} vs {k}@{c}"));
                }
            }
            prev = Some((k, c));
        }
        if self.by_key.len() != self.by_cell.len() {
            return Err("placement is not injective".into());
        }
        Ok(())
    }

    /// Apply one step: load `new_key` and move keys according to `moves`
    /// (which must mention `new_key`). Entries whose cell does not change are
    /// ignored. On error the configuration is left untouched.
    pub fn apply_placement(
        &mut self,
        t: usize,
        new_key: &Key,
        moves: &[(Key, C)],
        m: &C,
        cost_before: u64,
    ) -> Result<StepTrace<C>> {
        let invalid = |reason: String| GameError::InvalidPlacement { step: t, reason };
        if self.by_key.contains_key(new_key) {
            return Err(invalid(format!("key {new_key} is already loaded")));
        }
        let mut seen = HashSet::with_capacity(moves.len());
        let mut relocated = Vec::with_capacity(moves.len());
        let mut has_new = false;
        for (k, c) in moves {
            if !seen.insert(k) {
                return Err(invalid(format!("key {k} moved twice")));
            }
            if c.is_zero_index() || c > m {
                return Err(invalid(format!("cell {c} outside [1, {m}]")));
            }
            if k == new_key {
                has_new = true;
                relocated.push(Relocation { key: k.clone(), from: None, to: c.clone() });
                continue;
            }
            match self.by_key.get(k) {
                None => return Err(invalid(format!("moved key {k} is not loaded"))),
                Some(old) if old == c => {}
                Some(old) => relocated.push(Relocation {
                    key: k.clone(),
                    from: Some(old.clone()),
                    to: c.clone(),
                }),
            }
        }
        if !has_new {
            return Err(invalid(format!("no cell given for loaded key {new_key}")));
        }

        for r in &relocated {
            if let Some(from) = &r.from {
                self.by_cell.remove(from);
            }
        }
        let mut inserted = 0;
        let mut failure = None;
        for r in &relocated {
            if self.by_cell.contains_key(&r.to) {
                failure = Some(format!("cell {} is already occupied", r.to));
                break;
            }
            self.by_cell.insert(r.to.clone(), r.key.clone());
            inserted += 1;
        }
        if failure.is_none() {
            for r in &relocated {
                self.by_key.insert(r.key.clone(), r.to.clone());
            }
            failure = relocated.iter().find_map(|r| self.local_order_violation(&r.key));
            if failure.is_some() {
                for r in &relocated {
                    match &r.from {
                        Some(f) => {
                            self.by_key.insert(r.key.clone(), f.clone());
                        }
                        None => {
                            self.by_key.remove(&r.key);
                        }
                    }
                }
            }
        }
        if let Some(reason) = failure {
            for r in relocated.iter().take(inserted) {
                self.by_cell.remove(&r.to);
            }
            for r in &relocated {
                if let Some(from) = &r.from {
                    self.by_cell.insert(from.clone(), r.key.clone());
                }
            }
            return Err(invalid(reason));
        }

        let busy = busy_region(relocated.iter().map(|r| r.trail()));
        let cost_so_far = cost_before + relocated.len() as u64;
        Ok(StepTrace { t, loaded_key: new_key.clone(), relocated, busy, cost_so_far })
    }

    fn local_order_violation(&self, key: &Key) -> Option<String> {
        let cell = self.by_key.get(key)?;
        if let Some((pk, pc)) = self.predecessor(key) {
            if pc >= cell {
                return Some(format!("order violated: {pk}@{pc} vs {key}@{cell}"));
            }
        }
        if let Some((sk, sc)) = self.successor(key) {
            if sc <= cell {
                return Some(format!("order violated: {key}@{cell} vs {sk}@{sc}"));
            }
        }
        None
    }
}
