//! JSON experiment configuration.
//!
//! Sizes (`m`, `r`, key spacing) accept a JSON number or a string: a decimal
//! integer, a power `"2^1024"`, or a multiple of the step count `"2n"`.

use std::path::Path;
use std::str::FromStr;

use labeling_core::adversary::{Overrides, Profile};
use labeling_core::algorithms::AlgorithmKind;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Size {
    Number(u64),
    Text(String),
}

impl Size {
    /// Value for a game of `n` steps.
    pub fn resolve(&self, n: u64) -> Result<BigUint> {
        match self {
            Size::Number(v) => Ok(BigUint::from(*v)),
            Size::Text(s) => parse_size(s.trim(), n),
        }
    }
}

fn parse_size(s: &str, n: u64) -> Result<BigUint> {
    let bad = || HarnessError::Config(format!("cannot read size {s:?}"));
    let int = |t: &str| BigUint::from_str(t.trim()).map_err(|_| bad());
    if let Some(coef) = s.strip_suffix('n') {
        let c = if coef.trim().is_empty() { BigUint::one() } else { int(coef)? };
        return Ok(c * n);
    }
    if let Some((base, exp)) = s.split_once('^') {
        let e = exp.trim().parse::<u32>().map_err(|_| bad())?;
        return Ok(int(base)?.pow(e));
    }
    int(s)
}

/// `count` preloaded keys `spacing, 2 * spacing, ..., count * spacing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialKeys {
    pub count: u64,
    pub spacing: Size,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryName {
    Bisect,
    Random,
    DensestGap,
    /// Segment-table adversary on the stored keys.
    Table,
    /// Bisecting prefix, then the segment-table adversary.
    TablePrefix,
    /// Phased segment-table adversary.
    TablePhase,
}

impl AdversaryName {
    pub fn is_table(self) -> bool {
        matches!(self, AdversaryName::Table | AdversaryName::TablePrefix | AdversaryName::TablePhase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySpec {
    pub name: AdversaryName,
    #[serde(default)]
    pub profile: Profile,
    #[serde(default)]
    pub overrides: Overrides,
    /// Phase count for `table-phase`; derived when absent.
    #[serde(default)]
    pub phases: Option<u64>,
}

/// File names, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub steps: String,
    pub record: String,
    pub audit: String,
    pub summary: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        OutputPaths {
            steps: "steps.csv".into(),
            record: "record.csv".into(),
            audit: "audit.json".into(),
            summary: "summary.json".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Steps of the game.
    pub n: u64,
    pub m: Size,
    /// Key universe `[1, r]`; a default is chosen from the adversary.
    #[serde(default)]
    pub r: Option<Size>,
    #[serde(default)]
    pub initial_keys: Option<InitialKeys>,
    pub adversary: AdversarySpec,
    /// `direct`, `pma`, `scatter` or `ak:k=K`.
    pub algorithm: String,
    /// Wrap the algorithm to make it lazy. Forced on for table adversaries.
    #[serde(default)]
    pub lazy: bool,
    #[serde(default = "one")]
    pub repetitions: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: OutputPaths,
}

fn one() -> u32 {
    1
}

/// An [`ExperimentSpec`] with every size evaluated.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub n: u64,
    pub m: BigUint,
    pub r: BigUint,
    pub initial: Vec<BigUint>,
    pub algorithm: AlgorithmKind,
    pub lazy: bool,
}

impl Resolved {
    pub fn m_u64(&self) -> Result<u64> {
        self.m
            .to_u64()
            .ok_or_else(|| HarnessError::Config(format!("m = {} does not fit this algorithm or adversary", self.m)))
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("experiment spec: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Evaluate sizes and check that names resolve and sizes agree.
    pub fn resolve(&self) -> Result<Resolved> {
        let n = self.n;
        if n == 0 {
            return Err(HarnessError::Config("n must be positive".into()));
        }
        if self.repetitions == 0 {
            return Err(HarnessError::Config("repetitions must be positive".into()));
        }
        let algorithm = AlgorithmKind::from_str(&self.algorithm).map_err(HarnessError::Config)?;
        let m = self.m.resolve(n)?;
        let initial: Vec<BigUint> = match &self.initial_keys {
            None => Vec::new(),
            Some(k) => {
                let spacing = k.spacing.resolve(n)?;
                if spacing < BigUint::from(1u32) {
                    return Err(HarnessError::Config("initial key spacing must be positive".into()));
                }
                (1..=k.count).map(|i| &spacing * i).collect()
            }
        };
        let r = match &self.r {
            Some(r) => r.resolve(n)?,
            None => self.default_r(n, &m, &initial),
        };
        if BigUint::from(n + initial.len() as u64) > m {
            return Err(HarnessError::Config(format!(
                "{} keys do not fit into m = {m} cells",
                n + initial.len() as u64
            )));
        }
        if BigUint::from(n) > r {
            return Err(HarnessError::Config(format!("universe r = {r} is smaller than n = {n}")));
        }
        if let Some(last) = initial.last() {
            if last > &r {
                return Err(HarnessError::Config(format!("initial key {last} exceeds r = {r}")));
            }
        }
        let name = self.adversary.name;
        if name == AdversaryName::TablePrefix && !initial.is_empty() {
            return Err(HarnessError::Config("table-prefix loads its own initial keys".into()));
        }
        if name == AdversaryName::Table && initial.len() < 2 {
            return Err(HarnessError::Config("the table adversary needs at least two initial keys".into()));
        }
        if name == AdversaryName::TablePhase && !initial.is_empty() {
            return Err(HarnessError::Config("table-phase loads its own initial keys".into()));
        }
        let lazy = self.lazy || name.is_table();
        let resolved = Resolved { n, m, r, initial, algorithm, lazy };
        if matches!(resolved.algorithm, AlgorithmKind::Sparse { .. }) {
            if name.is_table() {
                return Err(HarnessError::Config("table adversaries need a machine-size m, not ak".into()));
            }
        } else {
            resolved.m_u64()?;
        }
        Ok(resolved)
    }

    fn default_r(&self, n: u64, m: &BigUint, initial: &[BigUint]) -> BigUint {
        match (self.adversary.name, initial.last()) {
            (AdversaryName::TablePrefix, _) => labeling_core::adversary::unit_weight_universe(n),
            (_, Some(last)) => last + initial.first().expect("nonempty"),
            (_, None) => (m + 1u32) << n,
        }
    }
}
