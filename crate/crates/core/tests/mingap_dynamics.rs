use std::collections::BTreeSet;

use labeling_core::adversary::{audit_properties, Overrides, Profile, SegmentTableAdversary, Status};
use labeling_core::algorithms::PackedMemoryArray;
use labeling_core::game::{run_game_observed, GameConfig, LazyWrap};
use num_bigint::BigUint;

fn brute_mingap(keys: &BTreeSet<BigUint>) -> BigUint {
    let v: Vec<&BigUint> = keys.iter().collect();
    v.windows(2).map(|w| w[1] - w[0]).min().unwrap()
}

fn check(n: usize) {
    let n0 = 2 * n;
    let m = 4 * n as u64;
    let spacing = BigUint::from(1u32) << n;
    let y0: Vec<BigUint> = (1..=n0 as u64).map(|i| &spacing * i).collect();
    let mut keys: BTreeSet<BigUint> = y0.iter().cloned().collect();
    let cfg = GameConfig::new(n, m, &spacing * (n0 as u64 + 1)).with_initial_keys(y0);
    let mut adv = SegmentTableAdversary::new(Profile::Desk, Overrides::default());
    let mut alg = LazyWrap::new(PackedMemoryArray::new(m, n0 + n).unwrap(), m);
    let mut violations = Vec::new();
    run_game_observed(&cfg, &mut adv, &mut alg, |trace| {
        keys.insert(trace.loaded_key.clone());
        let floor = BigUint::from(1u32) << (n - trace.t);
        if brute_mingap(&keys) < floor {
            violations.push(trace.t);
        }
    })
    .unwrap();
    assert!(violations.is_empty(), "n = {n}: steps {violations:?}");
    let rec = adv.into_record().unwrap();
    assert_eq!(rec.params.lambda, 1.0);
    let rep = audit_properties(&rec);
    let p = rep.get("mingap").unwrap();
    assert_eq!(p.status, Status::Pass, "n = {n}: {:?}", p.examples);
    assert_eq!(p.checked, n as u64);
}

#[test]
fn mingap_halves_at_most_once_per_step() {
    for n in [8, 16, 32, 64] {
        check(n);
    }
}
