//! The sparse recursive algorithm `A_k`.
//!
//! Cells are big integers so that `m` can be astronomically large. Cells 1
//! and `m` hold two sentinel keys (0 and `r + 1`) that never move and are not
//! reported as placements.
//!
//! `A_1` puts each key in the middle cell of the open segment it belongs to.
//! `A_k` first loads `q` keys through `A_{k-1}` and spreads them evenly. It
//! then works in rounds: within a round every new key goes to an independent
//! `A_{k-1}` instance owned by the open segment (between two old keys) it
//! falls into, and at the end of the round the array is cut into disjoint
//! segments of excess one, each of which is spread evenly.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::cell::CellIndex;
use crate::error::{GameError, Result};
use crate::game::{Key, LabelingAlgorithm};
use crate::segment::Segment;

/// Run of free cells together with the two occupied cells bounding it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenSegment {
    pub lo: BigUint,
    pub hi: BigUint,
}

impl OpenSegment {
    pub fn new(lo: BigUint, hi: BigUint) -> Self {
        OpenSegment { lo, hi }
    }

    pub fn size(&self) -> BigUint {
        &self.hi + 1u32 - &self.lo
    }
}

/// Leftmost cell splitting `s` into two open segments of size at least `|s|/2`.
pub fn middle_cell(s: &OpenSegment) -> Result<BigUint> {
    let size = s.size();
    if size < BigUint::from(3u32) {
        return Err(GameError::Capacity(format!("open segment [{},{}] is not usable", s.lo, s.hi)));
    }
    Ok(&s.lo + (size + 1u32) / 2u32 - 1u32)
}

/// Cells for `count` keys strictly inside `[lo, hi]` that cut it into
/// `count + 1` open segments of size at least `(hi - lo + 1) / (count + 1)`.
pub fn even_spread(lo: &BigUint, hi: &BigUint, count: usize) -> Result<Vec<BigUint>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if hi < lo || BigUint::from(count) + 1u32 > hi - lo {
        return Err(GameError::Capacity(format!("cannot spread {count} keys inside [{lo},{hi}]")));
    }
    let d = hi - lo;
    let parts = BigUint::from(count + 1);
    Ok((1..=count).map(|j| lo + &d * BigUint::from(j) / &parts).collect())
}

/// Whether a stored key was present at the start of the round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mark {
    Old,
    New,
}

/// Split a marked run of stored keys (in cell order) into disjoint segments,
/// each bounded by old keys and holding exactly one more old key than new
/// keys, that together cover every new key.
///
/// Among all such collections the one with the most segments is returned,
/// ties broken by the smallest total number of stored keys covered.
pub fn excess_decompose<C: CellIndex>(marks: &[(C, Mark)]) -> Result<Vec<Segment<C>>> {
    let structural = |why: &str| Err(GameError::Structural(why.to_string()));
    match (marks.first(), marks.last()) {
        (Some((_, Mark::Old)), Some((_, Mark::Old))) => {}
        _ => return structural("marked run must start and end with old keys"),
    }
    let olds: Vec<usize> = marks.iter().enumerate().filter(|(_, (_, m))| *m == Mark::Old).map(|(i, _)| i).collect();
    let news = marks.len() - olds.len();
    if olds.len() <= news {
        return structural("marked run has no positive excess");
    }
    if news == 0 {
        return Ok(Vec::new());
    }
    // gaps[j] = new keys between old j and old j + 1.
    let gaps: Vec<usize> = olds.windows(2).map(|w| w[1] - w[0] - 1).collect();

    #[derive(Clone, Copy)]
    enum Step {
        Start,
        Skip,
        Piece(usize),
    }
    type Best = Option<(usize, usize, Step)>;
    let better = |a: (usize, usize), b: Best| match b {
        None => true,
        Some((c, s, _)) => a.0 > c || (a.0 == c && a.1 < s),
    };

    let mut best: Vec<Best> = vec![None; olds.len()];
    let mut by_level: HashMap<i64, Vec<usize>> = HashMap::new();
    let mut level = 0i64;
    for j in 0..olds.len() {
        if j > 0 {
            level += 1 - gaps[j - 1] as i64;
        }
        let mut here: Best = None;
        if j == 0 {
            here = Some((0, 0, Step::Start));
        } else if gaps[j - 1] == 0 {
            if let Some((c, s, _)) = best[j - 1] {
                here = Some((c, s, Step::Skip));
            }
        }
        if let Some(starts) = by_level.get(&level) {
            for &a in starts {
                let before = if a == 0 {
                    Some((0, 0))
                } else if gaps[a - 1] == 0 {
                    best[a - 1].map(|(c, s, _)| (c, s))
                } else {
                    None
                };
                if let Some((c, s)) = before {
                    let cand = (c + 1, s + olds[j] - olds[a] + 1);
                    if better(cand, here) {
                        here = Some((cand.0, cand.1, Step::Piece(a)));
                    }
                }
            }
        }
        best[j] = here;
        by_level.entry(level).or_default().push(j);
    }

    let mut pieces = Vec::new();
    let mut j = olds.len() - 1;
    loop {
        match best[j] {
            None => return structural("no excess-one decomposition exists"),
            Some((_, _, Step::Start)) => break,
            Some((_, _, Step::Skip)) => j -= 1,
            Some((_, _, Step::Piece(a))) => {
                pieces.push(Segment::new(marks[olds[a]].0.clone(), marks[olds[j]].0.clone()));
                if a == 0 {
                    break;
                }
                j = a - 1;
            }
        }
    }
    pieces.reverse();
    Ok(pieces)
}

/// Approximate base-2 logarithm of a positive big integer.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return ToPrimitive::to_u64(x).map_or(0.0, |v| (v as f64).log2());
    }
    let shift = bits - 64;
    let top = ToPrimitive::to_u64(&(x >> shift)).unwrap_or(u64::MAX);
    (top as f64).log2() + shift as f64
}

/// Keys `A_k` loads through `A_{k-1}` before its first round in an interval
/// of `size` cells.
pub fn initial_load(k: u32, size: &BigUint) -> usize {
    if k <= 1 {
        return 0;
    }
    let raw = log2_big(size).max(0.0).powf((k - 1) as f64 / 3.0).floor() as usize;
    raw.min(capacity(k - 1, size, raw))
}

/// Number of keys `A_k` is guaranteed to absorb in an interval of `size`
/// cells (sentinels included), capped at `limit`.
pub fn capacity(k: u32, size: &BigUint, limit: usize) -> usize {
    let three = BigUint::from(3u32);
    if k == 0 || limit == 0 || size < &three {
        return 0;
    }
    if k == 1 {
        let mut h = size.clone();
        let mut count = 0;
        while h >= three && count < limit {
            count += 1;
            h = (h + 1u32) >> 1;
        }
        return count;
    }
    let q = initial_load(k, size);
    if q == 0 {
        return 0;
    }
    let mut total = q;
    let mut segments = q + 1;
    let mut g = (size - 1u32) / BigUint::from(q + 1) + 1u32;
    while total < limit {
        let b = capacity(k - 1, &g, segments.min(limit - total));
        if b == 0 {
            break;
        }
        total += b;
        segments += b;
        g = (g + 1u32) >> 1;
    }
    total.min(limit)
}

/// Snapshot taken when an `A_k` instance opens a round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundStart {
    pub k: u32,
    pub depth: usize,
    pub round: u32,
    /// Cells spanned by the instance, end cells included.
    pub size: BigUint,
    pub q: usize,
    pub min_open: BigUint,
    /// Integer lower bound the construction promises for `min_open`.
    pub guarantee: BigUint,
    pub budget: usize,
}

impl RoundStart {
    /// `min_open >= size / ((q + 1) * 2^(round - 1))`.
    pub fn meets_bound(&self) -> bool {
        let scale = BigUint::from(self.q + 1) << (self.round.saturating_sub(1) as usize);
        &self.min_open * scale >= self.size
    }
}

#[derive(Debug, Default)]
struct Arena {
    cells: BTreeMap<Key, BigUint>,
    moved: BTreeMap<Key, BigUint>,
}

impl Arena {
    fn cell(&self, key: &Key) -> &BigUint {
        &self.cells[key]
    }

    fn set(&mut self, key: &Key, cell: BigUint) {
        if self.cells.get(key) != Some(&cell) {
            self.moved.insert(key.clone(), cell.clone());
            self.cells.insert(key.clone(), cell);
        }
    }

    /// Keys strictly between `lo` and `hi`.
    fn between(&self, lo: &Key, hi: &Key) -> Vec<Key> {
        use std::ops::Bound::Excluded;
        self.cells.range((Excluded(lo), Excluded(hi))).map(|(k, _)| k.clone()).collect()
    }

    fn neighbours(&self, key: &Key) -> (BigUint, BigUint) {
        let p = self.cells.range(..key).next_back().map(|(_, c)| c.clone());
        let s = self.cells.range(key..).next().map(|(_, c)| c.clone());
        (p.expect("sentinel below"), s.expect("sentinel above"))
    }
}

#[derive(Debug)]
struct Instance {
    k: u32,
    depth: usize,
    lo: Key,
    hi: Key,
    size: BigUint,
    q: usize,
    stage: Stage,
}

#[derive(Debug)]
enum Stage {
    Single,
    Loading { inner: Box<Instance>, loaded: usize },
    Rounds(Box<Rounds>),
}

#[derive(Debug)]
struct Rounds {
    round: u32,
    guarantee: BigUint,
    budget: usize,
    loaded: usize,
    old: BTreeSet<Key>,
    workers: BTreeMap<Key, Instance>,
}

impl Instance {
    fn new(k: u32, depth: usize, lo: Key, hi: Key, arena: &Arena) -> Self {
        let size = arena.cell(&hi) + 1u32 - arena.cell(&lo);
        let (q, stage) = if k == 1 {
            (0, Stage::Single)
        } else {
            let inner = Instance::new(k - 1, depth + 1, lo.clone(), hi.clone(), arena);
            (initial_load(k, &size), Stage::Loading { inner: Box::new(inner), loaded: 0 })
        };
        Instance { k, depth, lo, hi, size, q, stage }
    }

    fn insert(&mut self, key: &Key, arena: &mut Arena, log: &mut Vec<RoundStart>) -> Result<()> {
        let full = |k: u32| GameError::Capacity(format!("A_{k} instance is out of budget"));
        let finished = match &mut self.stage {
            Stage::Single => {
                let (p, s) = arena.neighbours(key);
                let cell = middle_cell(&OpenSegment::new(p, s))?;
                arena.set(key, cell);
                false
            }
            Stage::Loading { inner, loaded } => {
                if *loaded >= self.q {
                    return Err(full(self.k));
                }
                inner.insert(key, arena, log)?;
                *loaded += 1;
                *loaded == self.q
            }
            Stage::Rounds(r) => {
                if r.loaded >= r.budget {
                    return Err(full(self.k));
                }
                let left = r.old.range(..key).next_back().expect("lower bound is old").clone();
                let right = r.old.range(key..).next().expect("upper bound is old").clone();
                let (k, depth) = (self.k, self.depth);
                let worker = r
                    .workers
                    .entry(left.clone())
                    .or_insert_with(|| Instance::new(k - 1, depth + 1, left, right, arena));
                worker.insert(key, arena, log)?;
                r.loaded += 1;
                r.loaded == r.budget
            }
        };
        if !finished {
            return Ok(());
        }
        let guarantee = match &self.stage {
            Stage::Loading { .. } => {
                self.spread_all(arena)?;
                (&self.size - 1u32) / BigUint::from(self.q + 1) + 1u32
            }
            Stage::Rounds(r) => {
                let g = (&r.guarantee + 1u32) >> 1;
                self.redistribute(&r.old, arena)?;
                g
            }
            Stage::Single => unreachable!(),
        };
        let round = match &self.stage {
            Stage::Rounds(r) => r.round + 1,
            _ => 1,
        };
        self.open_round(round, guarantee, arena, log);
        Ok(())
    }

    fn spread_all(&self, arena: &mut Arena) -> Result<()> {
        let keys = arena.between(&self.lo, &self.hi);
        let cells = even_spread(arena.cell(&self.lo), arena.cell(&self.hi), keys.len())?;
        for (k, c) in keys.iter().zip(cells) {
            arena.set(k, c);
        }
        Ok(())
    }

    fn redistribute(&self, old: &BTreeSet<Key>, arena: &mut Arena) -> Result<()> {
        let mut run = vec![self.lo.clone()];
        run.extend(arena.between(&self.lo, &self.hi));
        run.push(self.hi.clone());
        let marks: Vec<(BigUint, Mark)> = run
            .iter()
            .map(|k| (arena.cell(k).clone(), if old.contains(k) { Mark::Old } else { Mark::New }))
            .collect();
        for piece in excess_decompose(&marks)? {
            let inside: Vec<Key> = run
                .iter()
                .zip(&marks)
                .filter(|(_, (c, _))| c > &piece.lo && c < &piece.hi)
                .map(|(k, _)| k.clone())
                .collect();
            let cells = even_spread(&piece.lo, &piece.hi, inside.len())?;
            for (k, c) in inside.iter().zip(cells) {
                arena.set(k, c);
            }
        }
        Ok(())
    }

    fn open_round(&mut self, round: u32, guarantee: BigUint, arena: &Arena, log: &mut Vec<RoundStart>) {
        let mut old: BTreeSet<Key> = arena.between(&self.lo, &self.hi).into_iter().collect();
        old.insert(self.lo.clone());
        old.insert(self.hi.clone());
        let cells: Vec<&BigUint> = old.iter().map(|k| arena.cell(k)).collect();
        let min_open = cells.windows(2).map(|w| w[1] + 1u32 - w[0]).min().unwrap_or_default();
        let segments = old.len() - 1;
        let budget = capacity(self.k - 1, &guarantee, segments).min(segments);
        log.push(RoundStart {
            k: self.k,
            depth: self.depth,
            round,
            size: self.size.clone(),
            q: self.q,
            min_open,
            guarantee: guarantee.clone(),
            budget,
        });
        self.stage = Stage::Rounds(Box::new(Rounds {
            round,
            guarantee,
            budget,
            loaded: 0,
            old,
            workers: BTreeMap::new(),
        }));
    }
}

/// `A_k` over cells `1..=m` with big-integer cell indices.
#[derive(Debug)]
pub struct SparseLabeling {
    k: u32,
    m: BigUint,
    arena: Arena,
    root: Instance,
    rounds: Vec<RoundStart>,
}

impl SparseLabeling {
    /// Keys must lie in `[1, r]`; the sentinels are `0` and `r + 1`.
    pub fn new(k: u32, m: BigUint, r: &BigUint) -> Result<Self> {
        if k == 0 {
            return Err(GameError::InvalidConfig("A_k needs k >= 1".into()));
        }
        if m < BigUint::from(3u32) {
            return Err(GameError::InvalidConfig("A_k needs m >= 3".into()));
        }
        let lo = Key::from(0u32);
        let hi = r + 1u32;
        let mut arena = Arena::default();
        arena.cells.insert(lo.clone(), BigUint::one());
        arena.cells.insert(hi.clone(), m.clone());
        let root = Instance::new(k, 0, lo, hi, &arena);
        Ok(SparseLabeling { k, m, arena, root, rounds: Vec::new() })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> &BigUint {
        &self.m
    }

    /// Keys loaded by the top-level instance before its first round.
    pub fn initial_load(&self) -> usize {
        self.root.q
    }

    /// Guaranteed number of insertions, capped at `limit`.
    pub fn capacity(&self, limit: usize) -> usize {
        capacity(self.k, &self.m, limit)
    }

    /// Every round opened so far by every instance, in order.
    pub fn round_starts(&self) -> &[RoundStart] {
        &self.rounds
    }

    /// Current open segments between consecutive stored keys (sentinels
    /// included).
    pub fn open_segments(&self) -> Vec<OpenSegment> {
        let cells: Vec<&BigUint> = self.arena.cells.values().collect();
        cells.windows(2).map(|w| OpenSegment::new(w[0].clone(), w[1].clone())).collect()
    }
}

impl LabelingAlgorithm<BigUint> for SparseLabeling {
    fn name(&self) -> String {
        format!("ak:k={}", self.k)
    }

    fn initialize(&mut self, keys: &[Key]) -> Result<Vec<(Key, BigUint)>> {
        if keys.is_empty() {
            Ok(Vec::new())
        } else {
            Err(GameError::Unsupported("A_k starts from an empty array".into()))
        }
    }

    fn insert(&mut self, key: &Key) -> Result<Vec<(Key, BigUint)>> {
        self.arena.moved.clear();
        self.root.insert(key, &mut self.arena, &mut self.rounds)?;
        Ok(std::mem::take(&mut self.arena.moved).into_iter().collect())
    }
}

#[cfg(test)]
mod tests;
