use num_bigint::{BigUint, RandBigInt};

use crate::cell::CellIndex;
use crate::error::{GameError, Result};
use crate::game::{Adversary, GameView, Key};
use crate::rng;

/// Consecutive key pairs of the stored keys, with the key bounds added as
/// virtual neighbours at cells `0` and `m + 1` when they are not stored.
fn gaps<C: CellIndex>(view: &GameView<C>) -> Vec<((Key, C), (Key, C))> {
    let (lo, hi) = view.key_bounds();
    let mut seq: Vec<(Key, C)> = Vec::with_capacity(view.config.len() + 2);
    if view.config.cell_of(&lo).is_none() {
        seq.push((lo, C::from_u64(0)));
    }
    seq.extend(view.config.iter().map(|(k, c)| (k.clone(), c.clone())));
    if view.config.cell_of(&hi).is_none() {
        seq.push((hi, view.m.succ()));
    }
    seq.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect()
}

fn stuck<C: CellIndex>(view: &GameView<C>, why: &str) -> GameError {
    GameError::AdversaryStuck { step: view.t, reason: why.into() }
}

fn midpoint(a: &Key, b: &Key) -> Key {
    (a + b) >> 1
}

/// Always bisects the largest key gap, ties to the leftmost.
#[derive(Debug, Default, Clone)]
pub struct BisectAdversary;

impl<C: CellIndex> Adversary<C> for BisectAdversary {
    fn name(&self) -> String {
        "bisect".into()
    }

    fn next_key(&mut self, view: &GameView<C>) -> Result<Key> {
        let mut best: Option<(BigUint, Key)> = None;
        for ((a, _), (b, _)) in gaps(view) {
            let len = &b - &a;
            if len >= BigUint::from(2u32) && best.as_ref().map_or(true, |(l, _)| &len > l) {
                best = Some((len, midpoint(&a, &b)));
            }
        }
        best.map(|(_, k)| k).ok_or_else(|| stuck(view, "no key gap of length 2 or more"))
    }
}

/// Uniformly random unused key, drawn from a per-step stream.
#[derive(Debug, Clone)]
pub struct RandomAdversary {
    seed: u64,
}

impl RandomAdversary {
    pub fn new(seed: u64) -> Self {
        RandomAdversary { seed }
    }
}

impl<C: CellIndex> Adversary<C> for RandomAdversary {
    fn name(&self) -> String {
        "random".into()
    }

    fn next_key(&mut self, view: &GameView<C>) -> Result<Key> {
        let mut rng = rng::stream(self.seed, "random-adversary", view.t as u64);
        let (lo, hi) = view.key_bounds();
        if &hi - &lo < BigUint::from(2u32) {
            return Err(stuck(view, "empty key range"));
        }
        // Rejection sampling; the game never fills more than m of r keys.
        for _ in 0..64 {
            let k = rng.gen_biguint_range(&(&lo + 1u32), &hi);
            if view.config.cell_of(&k).is_none() {
                return Ok(k);
            }
        }
        // Dense universe: fall back to the first free key in a random gap.
        let free: Vec<Key> = gaps(view)
            .into_iter()
            .filter(|((a, _), (b, _))| b - a >= BigUint::from(2u32))
            .map(|((a, _), _)| a + 1u32)
            .collect();
        if free.is_empty() {
            return Err(stuck(view, "every key is loaded"));
        }
        let i = rng.gen_biguint_below(&BigUint::from(free.len()));
        Ok(free[num_traits::ToPrimitive::to_usize(&i).unwrap_or(0)].clone())
    }
}

/// Picks the key gap whose cells are closest together (while still leaving
/// a free cell), ties to the leftmost, and loads its midpoint.
#[derive(Debug, Default, Clone)]
pub struct DensestGapAdversary;

impl<C: CellIndex> Adversary<C> for DensestGapAdversary {
    fn name(&self) -> String {
        "densest-gap".into()
    }

    fn next_key(&mut self, view: &GameView<C>) -> Result<Key> {
        let two = C::from_u64(2);
        let mut best: Option<(C, Key)> = None;
        for ((a, ca), (b, cb)) in gaps(view) {
            if &b - &a < BigUint::from(2u32) {
                continue;
            }
            let dist = cb.distance(&ca);
            if dist >= two && best.as_ref().map_or(true, |(d, _)| &dist < d) {
                best = Some((dist, midpoint(&a, &b)));
            }
        }
        best.map(|(_, k)| k).ok_or_else(|| stuck(view, "no suitable gap with a free cell"))
    }
}
