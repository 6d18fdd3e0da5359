use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Index type for array cells.
///
/// `u64` covers every dense experiment; `BigUint` lets sparse algorithms
/// address arrays with up to `2^1024` cells.
pub trait CellIndex: Clone + Ord + Eq + Hash + Debug + Display + Send + Sync + 'static {
    fn from_u64(v: u64) -> Self;
    fn to_u64(&self) -> Option<u64>;
    fn succ(&self) -> Self;
    /// `self - other`, saturating at zero.
    fn distance(&self, other: &Self) -> Self;
    fn is_zero_index(&self) -> bool;
}

impl CellIndex for u64 {
    fn from_u64(v: u64) -> Self {
        v
    }
    fn to_u64(&self) -> Option<u64> {
        Some(*self)
    }
    fn succ(&self) -> Self {
        self + 1
    }
    fn distance(&self, other: &Self) -> Self {
        self.saturating_sub(*other)
    }
    fn is_zero_index(&self) -> bool {
        *self == 0
    }
}

impl CellIndex for BigUint {
    fn from_u64(v: u64) -> Self {
        BigUint::from(v)
    }
    fn to_u64(&self) -> Option<u64> {
        ToPrimitive::to_u64(self)
    }
    fn succ(&self) -> Self {
        self + BigUint::one()
    }
    fn distance(&self, other: &Self) -> Self {
        if self > other {
            self - other
        } else {
            BigUint::zero()
        }
    }
    fn is_zero_index(&self) -> bool {
        Zero::is_zero(self)
    }
}
