//! Labeling algorithms that play against the adversaries.

mod direct;
mod pma;
mod scatter;
pub mod sparse;

use std::fmt;
use std::str::FromStr;

pub use direct::DirectStore;
pub use pma::{PackedMemoryArray, Rebalance};
pub use scatter::Scatter;
pub use sparse::{excess_decompose, even_spread, middle_cell, Mark, OpenSegment, RoundStart, SparseLabeling};

/// Algorithm selected by name: `direct`, `pma`, `scatter`, or `ak:k=K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    Direct,
    Pma,
    Scatter,
    Sparse { k: u32 },
}

impl FromStr for AlgorithmKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "direct" => Ok(AlgorithmKind::Direct),
            "pma" => Ok(AlgorithmKind::Pma),
            "scatter" => Ok(AlgorithmKind::Scatter),
            other => {
                let k = other
                    .strip_prefix("ak:k=")
                    .ok_or_else(|| format!("unknown algorithm {other:?}"))?
                    .parse::<u32>()
                    .map_err(|e| format!("bad k in {other:?}: {e}"))?;
                if k == 0 {
                    return Err("k must be at least 1".into());
                }
                Ok(AlgorithmKind::Sparse { k })
            }
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgorithmKind::Direct => write!(f, "direct"),
            AlgorithmKind::Pma => write!(f, "pma"),
            AlgorithmKind::Scatter => write!(f, "scatter"),
            AlgorithmKind::Sparse { k } => write!(f, "ak:k={k}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!("direct".parse::<AlgorithmKind>().unwrap(), AlgorithmKind::Direct);
        assert_eq!("pma".parse::<AlgorithmKind>().unwrap(), AlgorithmKind::Pma);
        assert_eq!("ak:k=3".parse::<AlgorithmKind>().unwrap(), AlgorithmKind::Sparse { k: 3 });
        assert!("ak:k=0".parse::<AlgorithmKind>().is_err());
        assert!("ak".parse::<AlgorithmKind>().is_err());
        assert_eq!(AlgorithmKind::Sparse { k: 2 }.to_string(), "ak:k=2");
    }
}
