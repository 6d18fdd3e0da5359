use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{GameError, Result};
use crate::game::{Key, LabelingAlgorithm};

/// Stores key `y` in cell `y`. Only valid when `r <= m`; never relocates.
#[derive(Debug, Clone)]
pub struct DirectStore {
    m: u64,
}

impl DirectStore {
    pub fn new(m: u64, r: &BigUint) -> Result<Self> {
        if r > &BigUint::from(m) {
            return Err(GameError::Unsupported(format!("direct storage needs r <= m (r = {r}, m = {m})")));
        }
        Ok(DirectStore { m })
    }

    fn cell(&self, key: &Key) -> Result<u64> {
        key.to_u64()
            .filter(|&c| c >= 1 && c <= self.m)
            .ok_or_else(|| GameError::Unsupported(format!("key {key} has no cell in [1, {}]", self.m)))
    }
}

impl LabelingAlgorithm<u64> for DirectStore {
    fn name(&self) -> String {
        "direct".into()
    }

    fn initialize(&mut self, keys: &[Key]) -> Result<Vec<(Key, u64)>> {
        keys.iter().map(|k| Ok((k.clone(), self.cell(k)?))).collect()
    }

    fn insert(&mut self, key: &Key) -> Result<Vec<(Key, u64)>> {
        Ok(vec![(key.clone(), self.cell(key)?)])
    }
}
