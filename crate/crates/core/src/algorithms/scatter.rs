use rand::seq::index::sample;
use rand::Rng;

use crate::error::{GameError, Result};
use crate::game::{Configuration, Key, LabelingAlgorithm};
use crate::rng;

/// Randomized, deliberately non-lazy algorithm: every step draws a fresh
/// order-preserving placement and then lets each key keep its old cell with
/// probability 1/2 whenever that stays consistent. Used to exercise the lazy
/// wrapper.
#[derive(Debug, Clone)]
pub struct Scatter {
    m: u64,
    seed: u64,
    step: u64,
    config: Configuration<u64>,
}

impl Scatter {
    pub fn new(m: u64, seed: u64) -> Self {
        Scatter { m, seed, step: 0, config: Configuration::new() }
    }
}

impl LabelingAlgorithm<u64> for Scatter {
    fn name(&self) -> String {
        "scatter".into()
    }

    fn initialize(&mut self, keys: &[Key]) -> Result<Vec<(Key, u64)>> {
        if keys.len() as u64 > self.m {
            return Err(GameError::Capacity("more keys than cells".into()));
        }
        let placed: Vec<(Key, u64)> =
            keys.iter().enumerate().map(|(i, k)| (k.clone(), i as u64 + 1)).collect();
        self.config = Configuration::from_placement(placed.clone(), &self.m)
            .map_err(|reason| GameError::InvalidPlacement { step: 0, reason })?;
        Ok(placed)
    }

    fn insert(&mut self, key: &Key) -> Result<Vec<(Key, u64)>> {
        self.step += 1;
        let mut rng = rng::stream(self.seed, "scatter", self.step);
        let mut all: Vec<Key> = self.config.keys().cloned().collect();
        let pos = all.binary_search(key).unwrap_err();
        all.insert(pos, key.clone());
        if all.len() as u64 > self.m {
            return Err(GameError::Capacity("array is full".into()));
        }
        let mut cells: Vec<u64> =
            sample(&mut rng, self.m as usize, all.len()).into_iter().map(|c| c as u64 + 1).collect();
        cells.sort_unstable();
        for i in 0..all.len() {
            let Some(&old) = self.config.cell_of(&all[i]) else { continue };
            let above = if i == 0 { 0 } else { cells[i - 1] };
            let below = cells.get(i + 1).copied().unwrap_or(self.m + 1);
            if old > above && old < below && rng.gen_bool(0.5) {
                cells[i] = old;
            }
        }
        let moves: Vec<(Key, u64)> = all
            .into_iter()
            .zip(cells)
            .filter(|(k, c)| k == key || self.config.cell_of(k) != Some(c))
            .collect();
        self.config
            .apply_placement(self.step as usize, key, &moves, &self.m, 0)?;
        Ok(moves)
    }
}
