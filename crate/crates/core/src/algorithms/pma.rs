use std::collections::BTreeMap;

use crate::error::{GameError, Result};
use crate::game::{Key, LabelingAlgorithm};

/// The window a collision was resolved in.
#[derive(Debug, Clone, PartialEq)]
pub struct Rebalance {
    pub lo: u64,
    pub hi: u64,
    pub height: u32,
    /// Keys in the window after the insertion.
    pub count: usize,
    pub threshold: f64,
}

/// Packed-memory array over cells `1..=m`, viewed as the leaves of a binary
/// tree padded to a power of two.
///
/// A key goes to the midpoint of the free cells between its neighbours when
/// there are any. Otherwise the lowest ancestor of the collision cell whose
/// density after insertion is within `tau_h = 1 - (1 - tau_root) * h / H` is
/// redistributed evenly, with `tau_root = capacity / m`.
#[derive(Debug, Clone)]
pub struct PackedMemoryArray {
    m: u64,
    height: u32,
    tau_root: f64,
    by_key: BTreeMap<Key, u64>,
    by_cell: BTreeMap<u64, Key>,
    last_rebalance: Option<Rebalance>,
    rebalances: usize,
}

impl PackedMemoryArray {
    /// `capacity` is the most keys the array will hold (`n + n0`).
    pub fn new(m: u64, capacity: usize) -> Result<Self> {
        if m == 0 || capacity as u64 > m {
            return Err(GameError::InvalidConfig(format!("pma needs 1 <= capacity <= m (capacity {capacity}, m {m})")));
        }
        let height = 64 - (m - 1).leading_zeros();
        Ok(PackedMemoryArray {
            m,
            height,
            tau_root: capacity as f64 / m as f64,
            by_key: BTreeMap::new(),
            by_cell: BTreeMap::new(),
            last_rebalance: None,
            rebalances: 0,
        })
    }

    pub fn threshold(&self, height: u32) -> f64 {
        if self.height == 0 {
            return 1.0;
        }
        1.0 - (1.0 - self.tau_root) * height as f64 / self.height as f64
    }

    pub fn last_rebalance(&self) -> Option<&Rebalance> {
        self.last_rebalance.as_ref()
    }

    pub fn rebalances(&self) -> usize {
        self.rebalances
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }

    fn node(&self, cell: u64, height: u32) -> (u64, u64) {
        let lo = ((cell - 1) >> height << height) + 1;
        let hi = (lo + (1u64 << height) - 1).min(self.m);
        (lo, hi)
    }

    fn keys_in(&self, lo: u64, hi: u64) -> Vec<Key> {
        self.by_cell.range(lo..=hi).map(|(_, k)| k.clone()).collect()
    }

    fn spread(lo: u64, hi: u64, keys: &[Key]) -> Vec<(Key, u64)> {
        let len = hi - lo + 1;
        let c = keys.len() as u64;
        keys.iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), lo + (2 * i as u64 + 1) * len / (2 * c)))
            .collect()
    }

    fn commit(&mut self, moves: &[(Key, u64)]) {
        for (k, _) in moves {
            if let Some(old) = self.by_key.get(k) {
                self.by_cell.remove(old);
            }
        }
        for (k, c) in moves {
            self.by_key.insert(k.clone(), *c);
            self.by_cell.insert(*c, k.clone());
        }
    }
}

impl LabelingAlgorithm<u64> for PackedMemoryArray {
    fn name(&self) -> String {
        "pma".into()
    }

    fn initialize(&mut self, keys: &[Key]) -> Result<Vec<(Key, u64)>> {
        if keys.len() as u64 > self.m {
            return Err(GameError::Capacity("array is full".into()));
        }
        self.by_key.clear();
        self.by_cell.clear();
        if keys.is_empty() {
            return Ok(Vec::new());
        }
        let mut sorted = keys.to_vec();
        sorted.sort();
        let placed = Self::spread(1, self.m, &sorted);
        self.commit(&placed);
        Ok(placed)
    }

    fn insert(&mut self, key: &Key) -> Result<Vec<(Key, u64)>> {
        self.last_rebalance = None;
        let pred = self.by_key.range(..key.clone()).next_back().map(|(_, &c)| c);
        let succ = self.by_key.range(key.clone()..).next().map(|(_, &c)| c);
        let p = pred.unwrap_or(0);
        let s = succ.unwrap_or(self.m + 1);
        if s - p >= 2 {
            let moves = vec![(key.clone(), (p + s) / 2)];
            self.commit(&moves);
            return Ok(moves);
        }
        let pivot = pred.or(succ).expect("a collision needs a neighbour");
        for h in 1..=self.height {
            let (lo, hi) = self.node(pivot, h);
            let count = self.by_cell.range(lo..=hi).count() + 1;
            let threshold = self.threshold(h);
            if count as f64 <= threshold * (hi - lo + 1) as f64 + 1e-9 && count as u64 <= hi - lo + 1 {
                let mut keys = self.keys_in(lo, hi);
                let at = keys.binary_search(key).unwrap_err();
                keys.insert(at, key.clone());
                let moves: Vec<(Key, u64)> = Self::spread(lo, hi, &keys)
                    .into_iter()
                    .filter(|(k, c)| k == key || self.by_key.get(k) != Some(c))
                    .collect();
                self.commit(&moves);
                self.rebalances += 1;
                self.last_rebalance = Some(Rebalance { lo, hi, height: h, count, threshold });
                return Ok(moves);
            }
        }
        Err(GameError::Capacity(format!("array full: no window can absorb key {key}")))
    }
}
