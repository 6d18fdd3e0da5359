//! Single experiments: build the players, play, audit, write artifacts.

use std::path::{Path, PathBuf};

use labeling_core::adversary::{
    audit_properties, phase_schedule_with, AuditReport, BisectAdversary, Check, DensestGapAdversary, PhaseAdversary,
    PrefixAdversary, RandomAdversary, RunRecord, SegmentTableAdversary, Status,
};
use labeling_core::algorithms::{AlgorithmKind, DirectStore, PackedMemoryArray, Scatter, SparseLabeling};
use labeling_core::game::{run_game, Adversary, GameConfig, LabelingAlgorithm, LazyWrap};
use labeling_core::game::StepSummary;
use labeling_core::CellIndex;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::record::write_record;
use crate::spec::{AdversaryName, AdversarySpec, ExperimentSpec, Resolved};

/// Everything produced by one game.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub summary: RunSummary,
    pub steps: Vec<StepSummary>,
    pub records: Vec<RunRecord>,
    pub audits: Vec<AuditEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n: u64,
    pub m: String,
    pub seed: u64,
    pub algorithm: String,
    pub adversary: String,
    pub cost: u64,
    pub cost_per_n: f64,
    pub fallbacks: u64,
    pub depth_violations: u64,
    /// Violations summed over failing audit properties.
    pub violations: u64,
    pub failed_properties: Vec<String>,
    /// Rounds started by `ak`, and how many missed their size guarantee.
    pub ak_rounds: usize,
    pub ak_rounds_below_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub phase: usize,
    pub report: AuditReport,
    pub checks: Vec<Check>,
}

/// Audit every record, phases numbered from 1.
pub fn audit_records(records: &[RunRecord]) -> Vec<AuditEntry> {
    records
        .iter()
        .enumerate()
        .map(|(i, rec)| AuditEntry {
            phase: i + 1,
            report: audit_properties(rec),
            checks: rec.params.checks(&rec.mingap0),
        })
        .collect()
}

enum TableAdversary {
    Single(SegmentTableAdversary),
    Prefix(PrefixAdversary),
    Phase(PhaseAdversary),
}

impl TableAdversary {
    fn as_dyn(&mut self) -> &mut dyn Adversary<u64> {
        match self {
            TableAdversary::Single(a) => a,
            TableAdversary::Prefix(a) => a,
            TableAdversary::Phase(a) => a,
        }
    }

    fn into_records(self) -> Vec<RunRecord> {
        match self {
            TableAdversary::Single(a) => a.into_record().into_iter().collect(),
            TableAdversary::Prefix(a) => a.into_record().into_iter().collect(),
            TableAdversary::Phase(a) => a.records(),
        }
    }
}

fn simple_adversary<C: CellIndex>(name: AdversaryName, seed: u64) -> Box<dyn Adversary<C>> {
    match name {
        AdversaryName::Bisect => Box::new(BisectAdversary),
        AdversaryName::Random => Box::new(RandomAdversary::new(seed)),
        AdversaryName::DensestGap => Box::new(DensestGapAdversary),
        _ => unreachable!("table adversaries are built separately"),
    }
}

fn machine_algorithm(res: &Resolved, m: u64, seed: u64) -> Result<Box<dyn LabelingAlgorithm<u64>>> {
    let inner: Box<dyn LabelingAlgorithm<u64>> = match res.algorithm {
        AlgorithmKind::Direct => Box::new(DirectStore::new(m, &res.r)?),
        AlgorithmKind::Pma => Box::new(PackedMemoryArray::new(m, res.n as usize + res.initial.len())?),
        AlgorithmKind::Scatter => Box::new(Scatter::new(m, seed)),
        AlgorithmKind::Sparse { .. } => unreachable!("ak runs on big cells"),
    };
    Ok(if res.lazy { Box::new(LazyWrap::new(inner, m)) } else { inner })
}

fn summarize(
    res: &Resolved,
    seed: u64,
    algorithm: String,
    adversary: String,
    cost: u64,
    audits: &[AuditEntry],
) -> RunSummary {
    let mut failed = Vec::new();
    let mut violations = 0;
    for a in audits {
        for p in &a.report.properties {
            if p.status == Status::Fail {
                violations += p.violations;
                if !failed.contains(&p.name) {
                    failed.push(p.name.clone());
                }
            }
        }
    }
    RunSummary {
        n: res.n,
        m: res.m.to_string(),
        seed,
        algorithm,
        adversary,
        cost,
        cost_per_n: cost as f64 / res.n as f64,
        fallbacks: audits.iter().map(|a| a.report.fallbacks).sum(),
        depth_violations: audits.iter().map(|a| a.report.depth_violations).sum(),
        violations,
        failed_properties: failed,
        ak_rounds: 0,
        ak_rounds_below_bound: 0,
    }
}

fn run_machine(res: &Resolved, adv: &AdversarySpec, seed: u64) -> Result<RunResult> {
    let m = res.m_u64()?;
    let mut alg = machine_algorithm(res, m, seed)?;
    let mut n = res.n;
    let mut table = match adv.name {
        AdversaryName::Table => Some(TableAdversary::Single(SegmentTableAdversary::new(adv.profile, adv.overrides.clone()))),
        AdversaryName::TablePrefix => {
            Some(TableAdversary::Prefix(PrefixAdversary::new(n, &res.r, adv.profile, adv.overrides.clone())?))
        }
        AdversaryName::TablePhase => {
            let schedule = phase_schedule_with(n, m, adv.phases)?;
            n = schedule.total();
            Some(TableAdversary::Phase(PhaseAdversary::new(schedule, &res.r, adv.profile, adv.overrides.clone())?))
        }
        _ => None,
    };
    let cfg = GameConfig::new(n as usize, m, res.r.clone()).with_initial_keys(res.initial.clone()).with_seed(seed);
    let (outcome, adversary, records) = match table.as_mut() {
        Some(t) => {
            let out = run_game(&cfg, t.as_dyn(), &mut alg)?;
            let name = t.as_dyn().name();
            (out, name, table.take().expect("table adversary").into_records())
        }
        None => {
            let mut a = simple_adversary::<u64>(adv.name, seed);
            let out = run_game(&cfg, &mut a, &mut alg)?;
            (out, a.name(), Vec::new())
        }
    };
    let audits = audit_records(&records);
    let res = Resolved { n, ..res.clone() };
    let summary = summarize(&res, seed, alg.name(), adversary, outcome.cost, &audits);
    Ok(RunResult { summary, steps: outcome.steps, records, audits })
}

fn run_sparse(res: &Resolved, adv: &AdversarySpec, k: u32, seed: u64) -> Result<RunResult> {
    let mut sparse = SparseLabeling::new(k, res.m.clone(), &res.r)?;
    let cfg = GameConfig::new(res.n as usize, res.m.clone(), res.r.clone())
        .with_initial_keys(res.initial.clone())
        .with_seed(seed);
    let mut a = simple_adversary::<BigUint>(adv.name, seed);
    let (outcome, name) = if res.lazy {
        let mut wrapped = LazyWrap::new(sparse, res.m.clone());
        let out = run_game(&cfg, &mut a, &mut wrapped)?;
        let name = wrapped.name();
        sparse = wrapped.into_inner();
        (out, name)
    } else {
        (run_game(&cfg, &mut a, &mut sparse)?, sparse.name())
    };
    let mut summary = summarize(res, seed, name, a.name(), outcome.cost, &[]);
    summary.ak_rounds = sparse.round_starts().len();
    summary.ak_rounds_below_bound = sparse.round_starts().iter().filter(|r| !r.meets_bound()).count();
    Ok(RunResult { summary, steps: outcome.steps, records: Vec::new(), audits: Vec::new() })
}

/// Play one game of `spec` with `seed`, without touching the filesystem.
pub fn run_once(spec: &ExperimentSpec, seed: u64) -> Result<RunResult> {
    let res = spec.resolve()?;
    match res.algorithm {
        AlgorithmKind::Sparse { k } => run_sparse(&res, &spec.adversary, k, seed),
        _ => run_machine(&res, &spec.adversary, seed),
    }
}

/// `steps.csv` becomes `steps_rep2.csv` and so on.
pub fn tagged(name: &str, tag: Option<String>) -> String {
    match tag {
        None => name.to_string(),
        Some(t) => match name.rsplit_once('.') {
            Some((stem, ext)) => format!("{stem}_{t}.{ext}"),
            None => format!("{name}_{t}"),
        },
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
}

pub fn write_steps(steps: &[StepSummary], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in steps {
        w.serialize(s)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Paths written by [`run_experiment`] for one repetition.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub steps: PathBuf,
    pub records: Vec<PathBuf>,
    pub audit: Option<PathBuf>,
    pub summary: PathBuf,
}

/// Run every repetition of `spec` (seeds `seed, seed + 1, ...`) and write
/// the step CSV, run-record CSVs, audit JSON and summary JSON to `out_dir`.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<Vec<(RunSummary, Artifacts)>> {
    spec.resolve()?;
    create_dir(out_dir)?;
    let reps = spec.repetitions;
    let mut out = Vec::new();
    for rep in 0..reps {
        let seed = spec.seed.wrapping_add(rep as u64);
        let result = run_once(spec, seed)?;
        let rep_tag = (reps > 1).then(|| format!("rep{}", rep + 1));
        let o = &spec.outputs;
        let mut art = Artifacts {
            steps: out_dir.join(tagged(&o.steps, rep_tag.clone())),
            summary: out_dir.join(tagged(&o.summary, rep_tag.clone())),
            ..Default::default()
        };
        write_steps(&result.steps, &art.steps)?;
        let many = result.records.len() > 1;
        for (i, rec) in result.records.iter().enumerate() {
            let name = tagged(&o.record, rep_tag.clone());
            let name = tagged(&name, many.then(|| format!("phase{}", i + 1)));
            let path = out_dir.join(name);
            write_record(rec, &path)?;
            art.records.push(path);
        }
        if !result.audits.is_empty() {
            let path = out_dir.join(tagged(&o.audit, rep_tag.clone()));
            write_json(&path, &result.audits)?;
            art.audit = Some(path);
        }
        write_json(&art.summary, &result.summary)?;
        out.push((result.summary, art));
    }
    Ok(out)
}
