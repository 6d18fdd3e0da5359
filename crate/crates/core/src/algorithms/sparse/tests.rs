use super::*;

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn seg(lo: u64, hi: u64) -> OpenSegment {
    OpenSegment::new(big(lo), big(hi))
}

/// Insert `n` keys, each into the tightest key gap whose open segment can
/// still take a key. Returns the total number of placements.
fn densest_run(alg: &mut SparseLabeling, n: usize) -> Result<usize> {
    let mut cost = 0;
    for _ in 0..n {
        let pairs: Vec<(Key, BigUint)> = alg.arena.cells.iter().map(|(k, c)| (k.clone(), c.clone())).collect();
        let (a, b) = pairs
            .windows(2)
            .filter(|w| &w[1].1 - &w[0].1 >= big(2) && &w[1].0 - &w[0].0 >= big(2))
            .min_by(|x, y| (&x[1].1 - &x[0].1).cmp(&(&y[1].1 - &y[0].1)))
            .map(|w| (w[0].0.clone(), w[1].0.clone()))
            .expect("a usable gap");
        let key = (a + b) >> 1;
        cost += alg.insert(&key)?.len();
    }
    Ok(cost)
}

#[test]
fn middle_cell_examples() {
    assert_eq!(middle_cell(&seg(1, 9)).unwrap(), big(5));
    assert_eq!(middle_cell(&seg(1, 4)).unwrap(), big(2));
    assert_eq!(middle_cell(&seg(1, 3)).unwrap(), big(2));
    assert!(matches!(middle_cell(&seg(1, 2)), Err(GameError::Capacity(_))));
}

#[test]
fn middle_cell_is_leftmost_qualifying() {
    for size in 3u64..60 {
        let s = seg(10, 9 + size);
        let oracle = (11..9 + size)
            .find(|&c| 2 * (c - 10 + 1) >= size && 2 * (9 + size - c + 1) >= size)
            .unwrap();
        assert_eq!(middle_cell(&s).unwrap(), big(oracle), "size {size}");
    }
}

#[test]
fn even_spread_examples() {
    assert_eq!(even_spread(&big(1), &big(9), 3).unwrap(), vec![big(3), big(5), big(7)]);
    assert!(even_spread(&big(1), &big(9), 0).unwrap().is_empty());
    assert!(even_spread(&big(1), &big(4), 3).is_err());
    for size in 3u64..40 {
        let s = seg(1, size);
        assert_eq!(even_spread(&s.lo, &s.hi, 1).unwrap(), vec![middle_cell(&s).unwrap()]);
    }
}

#[test]
fn even_spread_open_segments_are_large() {
    for size in 2u64..50 {
        for count in 0..size.saturating_sub(1) as usize {
            let mut cells = vec![1];
            cells.extend(even_spread(&big(1), &big(size), count).unwrap().iter().map(|c| ToPrimitive::to_u64(c).unwrap()));
            cells.push(size);
            for w in cells.windows(2) {
                assert!(w[1] > w[0]);
                assert!((w[1] - w[0] + 1) * (count as u64 + 1) >= size, "size {size} count {count}");
            }
        }
    }
}

fn marks(old: &[u64], new: &[u64]) -> Vec<(u64, Mark)> {
    let mut v: Vec<(u64, Mark)> = old.iter().map(|&c| (c, Mark::Old)).chain(new.iter().map(|&c| (c, Mark::New))).collect();
    v.sort();
    v
}

#[test]
fn excess_decompose_examples() {
    assert_eq!(excess_decompose(&marks(&[1, 5, 9], &[3, 7])).unwrap(), vec![Segment::new(1, 9)]);
    assert_eq!(excess_decompose(&marks(&[1, 3, 9], &[6])).unwrap(), vec![Segment::new(3, 9)]);
    assert!(excess_decompose(&marks(&[1, 9], &[])).unwrap().is_empty());
    assert_eq!(excess_decompose(&marks(&[1, 9], &[5])).unwrap(), vec![Segment::new(1, 9)]);
    assert!(matches!(excess_decompose(&marks(&[1, 9], &[4, 6])), Err(GameError::Structural(_))));
    assert!(matches!(excess_decompose(&marks(&[1], &[5])), Err(GameError::Structural(_))));
}

/// Exhaustive search over all collections of disjoint excess-one segments.
fn decompose_oracle(m: &[(u64, Mark)]) -> Option<Vec<(usize, usize)>> {
    let olds: Vec<usize> = (0..m.len()).filter(|&i| m[i].1 == Mark::Old).collect();
    let mut cands = Vec::new();
    for (x, &a) in olds.iter().enumerate() {
        for &b in &olds[x + 1..] {
            let o = (a..=b).filter(|&i| m[i].1 == Mark::Old).count();
            if o == (b - a + 1 - o) + 1 {
                cands.push((a, b));
            }
        }
    }
    let mut best: Option<(usize, usize, Vec<(usize, usize)>)> = None;
    for mask in 0u32..(1 << cands.len()) {
        let chosen: Vec<(usize, usize)> = (0..cands.len()).filter(|i| mask >> i & 1 == 1).map(|i| cands[i]).collect();
        let disjoint = chosen.windows(2).all(|w| w[0].1 < w[1].0);
        let covers = (0..m.len()).filter(|&i| m[i].1 == Mark::New).all(|i| chosen.iter().any(|&(a, b)| a < i && i < b));
        if !disjoint || !covers {
            continue;
        }
        let size: usize = chosen.iter().map(|(a, b)| b - a + 1).sum();
        let better = match &best {
            None => true,
            Some((c, s, _)) => chosen.len() > *c || (chosen.len() == *c && size < *s),
        };
        if better {
            best = Some((chosen.len(), size, chosen));
        }
    }
    best.map(|b| b.2)
}

#[test]
fn excess_decompose_matches_exhaustive_search() {
    for len in 2..=10usize {
        for bits in 0u32..(1 << (len - 2)) {
            let mut m = vec![(1u64, Mark::Old)];
            for i in 0..len - 2 {
                m.push((i as u64 + 2, if bits >> i & 1 == 1 { Mark::New } else { Mark::Old }));
            }
            m.push((len as u64, Mark::Old));
            let news = m.iter().filter(|x| x.1 == Mark::New).count();
            if 2 * news >= len {
                continue;
            }
            let got = excess_decompose(&m).unwrap();
            let want = decompose_oracle(&m).expect("feasible");
            let want: Vec<Segment> = want.iter().map(|&(a, b)| Segment::new(m[a].0, m[b].0)).collect();
            // Both sides must agree on count and total covered keys.
            let covered = |v: &[Segment]| v.iter().map(|s| s.size()).sum::<u64>();
            assert_eq!(got.len(), want.len(), "{m:?}");
            assert_eq!(covered(&got), covered(&want), "{m:?}");
        }
    }
}

#[test]
fn first_level_capacity() {
    assert_eq!(capacity(1, &big(24), usize::MAX), 4);
    assert_eq!(capacity(1, &big(3), usize::MAX), 1);
    assert_eq!(capacity(1, &big(2), usize::MAX), 0);
    assert_eq!(capacity(1, &big(24), 2), 2);
}

#[test]
fn a1_on_24_cells() {
    let mut alg = SparseLabeling::new(1, big(24), &big(1 << 20)).unwrap();
    let cost = densest_run(&mut alg, 4).unwrap();
    assert_eq!(cost, 4);
}

#[test]
fn a1_open_segments_halve_at_most() {
    let m = 1u64 << 12;
    let mut alg = SparseLabeling::new(1, big(m), &big(1 << 40)).unwrap();
    for t in 1..=10u32 {
        densest_run(&mut alg, 1).unwrap();
        for s in alg.open_segments() {
            assert!(s.size() << t as usize >= big(m), "after {t} loads");
        }
    }
}

#[test]
fn log2_of_large_values() {
    assert_eq!(log2_big(&(BigUint::one() << 1024usize)), 1024.0);
    assert!((log2_big(&big(24)) - 24f64.log2()).abs() < 1e-12);
}

#[test]
fn third_level_initial_load_at_huge_m() {
    let m = BigUint::one() << 1024usize;
    assert_eq!(initial_load(3, &m), 101);
    assert_eq!(initial_load(2, &m), 10);
    assert!(capacity(3, &m, 1024) >= 1024);
}

#[test]
fn a2_rounds_respect_guarantees() {
    let m = BigUint::one() << 64usize;
    let mut alg = SparseLabeling::new(2, m.clone(), &(BigUint::one() << 100usize)).unwrap();
    let n = capacity(2, &m, 200);
    assert!(n >= 64);
    let cost = densest_run(&mut alg, n).unwrap();
    assert!(cost <= 3 * n, "cost {cost} for {n} keys");
    assert!(!alg.round_starts().is_empty());
    for r in alg.round_starts() {
        assert!(r.min_open >= r.guarantee, "{r:?}");
        assert!(r.meets_bound(), "{r:?}");
    }
}

#[test]
fn nonempty_initial_set_is_rejected() {
    let mut alg = SparseLabeling::new(2, big(100), &big(100)).unwrap();
    assert!(alg.initialize(&[big(5)]).is_err());
}
