//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use labeling_core::adversary::{phase_schedule, theorem1_prefix, DensestGapAdversary, Status};
use labeling_core::algorithms::{Scatter, SparseLabeling};
use labeling_core::error::Result as GameResult;
use labeling_core::game::{run_game, run_game_observed, Adversary, GameConfig, GameView, Key, LabelingAlgorithm, LazyWrap};
use labeling_core::segment::{balance, densify, CellFlag, Segment, WeightedOccupancy};
use labeling_harness::spec::{AdversaryName, AdversarySpec, InitialKeys, OutputPaths, Size};
use labeling_harness::{fit_sweep, run_once, sweep, ExperimentSpec, SweepRow};
use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

// Occupancy oracles, computed without the library's prefix sums.

struct Occ {
    flags: Vec<CellFlag>,
    lambda: f64,
    prefix: Vec<f64>,
}

impl Occ {
    fn new(flags: Vec<CellFlag>, lambda: f64) -> Self {
        let mut prefix = vec![0.0];
        for f in &flags {
            let w = match f {
                CellFlag::Empty => 0.0,
                CellFlag::Old => 1.0,
                CellFlag::New => lambda,
            };
            prefix.push(prefix.last().unwrap() + w);
        }
        Occ { flags, lambda, prefix }
    }

    fn lib(&self) -> WeightedOccupancy {
        WeightedOccupancy::from_flags(&self.flags, self.lambda)
    }

    fn weight(&self, lo: u64, hi: u64) -> f64 {
        self.prefix[hi as usize] - self.prefix[lo as usize - 1]
    }

    fn density(&self, lo: u64, hi: u64) -> f64 {
        self.weight(lo, hi) / (hi - lo + 1) as f64
    }

    fn log_phi(&self, lo: u64, hi: u64, kappa: f64) -> f64 {
        let size = (hi - lo + 1) as f64;
        size.ln() + self.density(lo, hi).ln() / kappa
    }

    /// Maximizer over all subsegments; ties (within 1e-12) to the smallest
    /// lo, then the smallest size.
    fn densify(&self, t: Segment, kappa: f64) -> Segment {
        let mut best = f64::NEG_INFINITY;
        for lo in t.lo..=t.hi {
            for hi in lo..=t.hi {
                best = best.max(self.log_phi(lo, hi, kappa));
            }
        }
        for lo in t.lo..=t.hi {
            for hi in lo..=t.hi {
                if self.log_phi(lo, hi, kappa) >= best - 1e-12 {
                    return Segment::new(lo, hi);
                }
            }
        }
        unreachable!("some subsegment attains the maximum")
    }

    fn min_density_of_quarter_subsegments(&self, s: Segment) -> f64 {
        let min_len = s.size().div_ceil(4).max(1);
        let mut out = f64::INFINITY;
        for len in min_len..=s.size() {
            for lo in s.lo..=s.hi + 1 - len {
                out = out.min(self.density(lo, lo + len - 1));
            }
        }
        out
    }
}

fn random_flags(rng: &mut StdRng, len: usize, fill: f64, new_share: f64) -> Vec<CellFlag> {
    (0..len)
        .map(|_| {
            if rng.gen::<f64>() >= fill {
                CellFlag::Empty
            } else if rng.gen::<f64>() < new_share {
                CellFlag::New
            } else {
                CellFlag::Old
            }
        })
        .collect()
}

fn criterion1() -> Verdict {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(11);
    let mut mismatches = Vec::new();
    let mut cases = 0;
    while cases < 1000 {
        let len = rng.gen_range(1..=80usize);
        let fill = rng.gen::<f64>();
        let lambda = if rng.gen_bool(0.5) { 1.0 } else { rng.gen_range(0.05..1.0) };
        let occ = Occ::new(random_flags(&mut rng, len, fill, 0.3), lambda);
        let lo = rng.gen_range(1..=len as u64);
        let hi = rng.gen_range(lo..=(lo + 63).min(len as u64));
        let t = Segment::new(lo, hi);
        if occ.weight(lo, hi) <= 0.0 {
            continue;
        }
        cases += 1;
        let lib = occ.lib();
        for kappa in [1.0, 0.5, 0.1] {
            let got = densify(&lib, &t, kappa).unwrap();
            let want = occ.densify(t, kappa);
            if got != want && mismatches.len() < 3 {
                mismatches.push(format!("T = {t}, kappa = {kappa}: {got} vs {want}"));
            }
        }
    }
    let elapsed = started.elapsed();
    verdict(
        mismatches.is_empty() && elapsed < Duration::from_secs(10),
        format!("{cases} occupancies x 3 kappas in {}; mismatches {:?}", secs(elapsed), mismatches),
    )
}

fn criterion2() -> Verdict {
    let ln4 = 4f64.ln();
    let kappas = [1.0 / (24.0 * ln4), 0.02, 0.01, 0.004];
    let mut rng = StdRng::seed_from_u64(22);
    let (mut accepted, mut attempts, mut violations) = (0, 0, Vec::new());
    while accepted < 1000 && attempts < 200_000 {
        attempts += 1;
        let len = rng.gen_range(24..=160usize);
        let fill = rng.gen_range(0.6..1.0);
        let occ = Occ::new(random_flags(&mut rng, len, fill, 0.0), 1.0);
        let t = Segment::new(1, len as u64);
        if occ.weight(t.lo, t.hi) <= 0.0 {
            continue;
        }
        let kappa = kappas[attempts % kappas.len()];
        let Ok(s) = balance(&occ.lib(), &t, kappa) else { continue };
        if s.size() < 4 {
            continue;
        }
        accepted += 1;
        let rho_t = occ.density(t.lo, t.hi);
        let rho_s = occ.density(s.lo, s.hi);
        let mut bad = Vec::new();
        if rho_s < (-24.0 * ln4 * kappa).exp() * rho_t - 1e-9 {
            bad.push("density");
        }
        if occ.min_density_of_quarter_subsegments(s) < rho_s * 4f64.powf(-25.0 * kappa) - 1e-9 {
            bad.push("lower balance");
        }
        if occ.log_phi(s.lo, s.hi, kappa) < occ.log_phi(t.lo, t.hi, kappa) - (24.0 * ln4 + 3f64.ln()) - 1e-9 {
            bad.push("potential");
        }
        if !bad.is_empty() && violations.len() < 3 {
            violations.push(format!("T = {t}, S = {s}, kappa = {kappa}: {bad:?}"));
        }
    }
    verdict(
        accepted == 1000 && violations.is_empty(),
        format!("{accepted} occupancies with |S| >= 4 ({attempts} drawn); violations {violations:?}"),
    )
}

struct Script(Vec<u64>);

impl Adversary for Script {
    fn name(&self) -> String {
        "script".into()
    }

    fn next_key(&mut self, view: &GameView) -> GameResult<Key> {
        Ok(BigUint::from(self.0[view.t - 1]))
    }
}

fn permutations(items: &[u64]) -> Vec<Vec<u64>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Per-key relocation counts of a bare algorithm after each step.
fn inner_counts(order: &[u64], m: u64, seed: u64) -> Vec<HashMap<Key, u64>> {
    let mut alg = Scatter::new(m, seed);
    alg.initialize(&[]).unwrap();
    let mut cells: HashMap<Key, u64> = HashMap::new();
    let mut counts: HashMap<Key, u64> = HashMap::new();
    let mut out = Vec::new();
    for &k in order {
        for (key, cell) in alg.insert(&BigUint::from(k)).unwrap() {
            if cells.insert(key.clone(), cell) != Some(cell) {
                *counts.entry(key).or_default() += 1;
            }
        }
        out.push(counts.clone());
    }
    out
}

fn criterion3() -> Verdict {
    let (mut games, mut split, mut over, mut undominated, mut deferred) = (0u64, 0u64, 0u64, 0u64, 0u64);
    for n in 1..=5u64 {
        let orders = permutations(&(1..=n).collect::<Vec<_>>());
        for m in n..=8 {
            for order in &orders {
                for seed in 0..100 {
                    let inner = inner_counts(order, m, seed);
                    let mut alg = LazyWrap::new(Scatter::new(m, seed), m);
                    let cfg = GameConfig::new(n as usize, m, BigUint::from(n));
                    let mut outer: HashMap<Key, u64> = HashMap::new();
                    let mut dominated = true;
                    let out = run_game_observed(&cfg, &mut Script(order.clone()), &mut alg, |trace| {
                        if trace.busy.len() != 1 {
                            split += 1;
                        }
                        for r in &trace.relocated {
                            *outer.entry(r.key.clone()).or_default() += 1;
                        }
                        let inner_now = &inner[trace.t - 1];
                        dominated &= outer.iter().all(|(k, c)| c <= inner_now.get(k).unwrap_or(&0));
                    })
                    .unwrap();
                    let inner_total: u64 = inner.last().unwrap().values().sum();
                    games += 1;
                    over += (out.cost > inner_total) as u64;
                    deferred += (out.cost < inner_total) as u64;
                    undominated += !dominated as u64;
                }
            }
        }
    }
    verdict(
        split == 0 && over == 0 && undominated == 0 && deferred > 0,
        format!(
            "{games} games: split busy regions {split}, cost above inner {over}, dominance failures {undominated}, games with deferred moves {deferred}"
        ),
    )
}

fn table_spec(n: u64) -> ExperimentSpec {
    ExperimentSpec {
        n,
        m: Size::Text("2n".into()),
        r: None,
        initial_keys: None,
        adversary: AdversarySpec {
            name: AdversaryName::TablePrefix,
            profile: labeling_core::adversary::Profile::Desk,
            overrides: Default::default(),
            phases: None,
        },
        algorithm: "pma".into(),
        lazy: true,
        repetitions: 1,
        seed: 0,
        outputs: OutputPaths::default(),
    }
}

fn criterion4() -> Verdict {
    let started = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = [1u64 << 10, 1 << 12].iter().map(|&n| s.spawn(move || (n, run_once(&table_spec(n), 0)))).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for (n, res) in results {
        let Ok(res) = res else {
            ok = false;
            notes.push(format!("n = {n}: run failed"));
            continue;
        };
        let rec = &res.records[0];
        let report = &res.audits[0].report;
        let mut bad: Vec<String> = ["nesting", "prefix_green", "green_copy", "charge_conservation"]
            .iter()
            .filter(|p| report.get(p).map(|r| r.status) != Some(Status::Pass))
            .map(|p| p.to_string())
            .collect();
        if rec.params.lambda != 1.0 {
            bad.push(format!("lambda = {}", rec.params.lambda));
        }
        if report.fallbacks != 0 {
            bad.push(format!("{} fallbacks", report.fallbacks));
        }
        if report.total_charge != report.total_cost {
            bad.push("charge total".into());
        }
        ok &= bad.is_empty();
        notes.push(format!("n = {n}: cost {} fallbacks {} issues {bad:?}", res.summary.cost, report.fallbacks));
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(120);
    verdict(ok, format!("{} in {}", notes.join("; "), secs(elapsed)))
}

fn sweep_points(rows: &[SweepRow]) -> Option<Vec<(u64, f64)>> {
    let mut pts: Vec<(u64, f64)> = rows.iter().map(|r| r.chi_per_n.map(|c| (r.n, c))).collect::<Option<_>>()?;
    pts.sort_by_key(|p| p.0);
    Some(pts)
}

fn criterion5(rows: &labeling_harness::Result<Vec<SweepRow>>) -> Verdict {
    let Ok(rows) = rows else { return verdict(false, "sweep failed") };
    let Some(pts) = sweep_points(rows) else { return verdict(false, format!("runs failed: {rows:?}")) };
    let fit = match fit_sweep(rows) {
        Ok(f) => f,
        Err(e) => return verdict(false, format!("fit failed: {e}")),
    };
    let ratios: Vec<f64> = pts.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let ok = fit.b > 0.0 && ratios.iter().all(|&r| r >= 1.3);
    let shown: Vec<String> = pts.iter().map(|(n, c)| format!("{n}:{c:.2}")).collect();
    verdict(ok, format!("chi/n {shown:?}, growth ratios {ratios:.3?}, fit b = {:.4}", fit.b))
}

fn criterion6(rows: &labeling_harness::Result<Vec<SweepRow>>) -> Verdict {
    let Ok(rows) = rows else { return verdict(false, "sweep failed") };
    let Some(pts) = sweep_points(rows) else { return verdict(false, "runs failed") };
    let norm: Vec<f64> = pts.iter().map(|&(n, c)| c / (n as f64).ln().powi(2)).collect();
    let max = norm.iter().cloned().fold(f64::MIN, f64::max);
    let min = norm.iter().cloned().fold(f64::MAX, f64::min);
    verdict(max / min < 2.0, format!("chi/(n ln^2 n) {norm:.4?}, spread {:.3}", max / min))
}

fn criterion7() -> Verdict {
    let started = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;

    let m24 = BigUint::from(24u32);
    let r: BigUint = BigUint::from(1u32) << 64;
    let mut a1 = SparseLabeling::new(1, m24.clone(), &r).unwrap();
    let out = run_game(&GameConfig::new(4, m24, r), &mut DensestGapAdversary, &mut a1);
    match out {
        Ok(o) => {
            let clean = o.cost == 4 && o.steps.iter().all(|s| s.num_relocated == 1);
            ok &= clean;
            notes.push(format!("A_1 on 24 cells: 4 keys at cost {}", o.cost));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("A_1 failed: {e}"));
        }
    }

    let spec = ExperimentSpec {
        n: 1024,
        m: Size::Text("2^1024".into()),
        r: Some(Size::Text("2^2048".into())),
        initial_keys: None,
        adversary: AdversarySpec { name: AdversaryName::DensestGap, profile: Default::default(), overrides: Default::default(), phases: None },
        algorithm: "ak:k=3".into(),
        lazy: false,
        repetitions: 1,
        seed: 0,
        outputs: OutputPaths::default(),
    };
    match run_once(&spec, 0) {
        Ok(res) => {
            let s = &res.summary;
            ok &= s.cost <= 5 * 1024 && s.ak_rounds > 0 && s.ak_rounds_below_bound == 0;
            notes.push(format!(
                "A_3 on 2^1024 cells: cost {} (limit 5120), rounds {}, below size bound {}",
                s.cost, s.ak_rounds, s.ak_rounds_below_bound
            ));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("A_3 failed: {e}"));
        }
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(60);
    verdict(ok, format!("{} in {}", notes.join("; "), secs(elapsed)))
}

fn criterion8() -> Verdict {
    let (total, m) = (999_999u64, 1_000_000u64);
    let delta = total as f64 / m as f64;
    let p_expected = ((1.0 - delta).ln() / (7.0 * (2.0f64 / 3.0).ln())).floor() as u64 - 1;
    let mut sizes = vec![m / 3];
    let mut free = m - m / 3;
    for _ in 0..p_expected {
        sizes.push(free / 3);
        free -= free / 3;
    }
    let got = phase_schedule(total, m);
    let schedule_ok = matches!(&got, Ok(s) if s.p == 3 && p_expected == 3 && s.sizes == sizes && s.sizes[0] == 333_333);
    let prefix = theorem1_prefix(10, &BigUint::from(100u32));
    let want: Vec<BigUint> = [20u32, 40, 60, 80, 100].iter().map(|&k| BigUint::from(k)).collect();
    let prefix_ok = prefix.as_ref().ok() == Some(&want);
    verdict(
        schedule_ok && prefix_ok,
        format!(
            "phase schedule {:?} (oracle p = {p_expected}, sizes {sizes:?}); prefix {:?}",
            got.map(|s| (s.p, s.sizes)),
            prefix.map(|v| v.iter().map(|k| k.to_string()).collect::<Vec<_>>())
        ),
    )
}

fn criterion9() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    for n in [8u64, 16, 32, 64] {
        let spec = ExperimentSpec {
            n,
            m: Size::Text("4n".into()),
            r: None,
            initial_keys: Some(InitialKeys { count: 2 * n, spacing: Size::Text(format!("2^{n}")) }),
            adversary: AdversarySpec {
                name: AdversaryName::Table,
                profile: labeling_core::adversary::Profile::Desk,
                overrides: Default::default(),
                phases: None,
            },
            algorithm: "pma".into(),
            lazy: true,
            repetitions: 1,
            seed: 0,
            outputs: OutputPaths::default(),
        };
        let res = match run_once(&spec, 0) {
            Ok(r) => r,
            Err(e) => {
                ok = false;
                notes.push(format!("n = {n}: {e}"));
                continue;
            }
        };
        let spacing: BigUint = BigUint::from(1u32) << n;
        let mut keys: BTreeSet<BigUint> = (1..=2 * n).map(|i| &spacing * i).collect();
        let mut brute = 0;
        for s in &res.steps {
            keys.insert(s.y_t.parse().unwrap());
            let v: Vec<&BigUint> = keys.iter().collect();
            let gap = v.windows(2).map(|w| w[1] - w[0]).min().unwrap();
            if gap < BigUint::from(1u32) << (n as usize - s.t) {
                brute += 1;
            }
        }
        let report = &res.audits[0].report;
        let audited = report.get("mingap").unwrap();
        let lambda = res.records[0].params.lambda;
        ok &= brute == 0 && audited.status == Status::Pass && audited.checked == n && lambda == 1.0;
        notes.push(format!("n = {n}: audited {}/{} violations, recomputed {brute}", audited.violations, audited.checked));
    }
    verdict(ok, notes.join("; "))
}

fn main() {
    let started = Instant::now();
    let grid = [1u64 << 10, 1 << 12, 1 << 14];
    let sweep_thread = std::thread::spawn(move || sweep(&grid, &table_spec(0)));
    let mut verdicts: Vec<(u32, &str, Verdict)> = vec![
        (1, "densify oracle equivalence", criterion1()),
        (2, "balance lemma suite", criterion2()),
        (3, "lazy wrapper exhaustive suite", criterion3()),
        (4, "adversary structural audit", criterion4()),
    ];
    let rows = sweep_thread.join().unwrap();
    verdicts.push((5, "superlinear pressure", criterion5(&rows)));
    verdicts.push((6, "normalized upper bound", criterion6(&rows)));
    verdicts.push((7, "sparse labeling reproduction", criterion7()));
    verdicts.push((8, "schedule arithmetic", criterion8()));
    verdicts.push((9, "mingap dynamics", criterion9()));
    let mut failed = 0;
    for (i, name, v) in &verdicts {
        println!("criterion {i} {name}: {} ({})", if v.ok { "PASS" } else { "FAIL" }, v.detail);
        failed += !v.ok as u32;
    }
    println!("acceptance: {}/9 passed in {}", 9 - failed, secs(started.elapsed()));
    if failed > 0 {
        std::process::exit(1);
    }
}
