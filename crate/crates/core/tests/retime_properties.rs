mod common;

use common::{
    brute_force_min_period, period_lower_bound, period_with, random_legal_lags, random_netlist,
    weights_of,
};
use cslow::corpus::{CHAIN_NET, RING_NET};
use cslow::netlist::{critical_path, Netlist};
use cslow::retime::{
    apply_retiming, check_equivalence, check_legal, cslow_transform, min_period_retime, pipeline,
    EquivalenceCheck, Retiming,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_netlists(seed: u64, count: usize) -> Vec<Netlist> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            // At most 6 nodes: up to 2 inputs, up to 2 outputs, the rest gates.
            loop {
                let gates = rng.gen_range(1..=4);
                let feedback = rng.gen_bool(0.6);
                let n = random_netlist(&mut rng, gates, feedback);
                if n.len() <= 6 {
                    return n;
                }
            }
        })
        .collect()
}

#[test]
fn oracle_period_agrees_with_critical_path() {
    for n in small_netlists(5, 50) {
        assert_eq!(period_with(&n, &weights_of(&n)), critical_path(&n).period);
    }
}

#[test]
fn min_period_matches_brute_force_on_small_netlists() {
    let mut improved = 0;
    for (i, n) in small_netlists(17, 40).into_iter().enumerate() {
        let best = min_period_retime(&n);
        assert_eq!(best.period, brute_force_min_period(&n), "netlist {i}:\n{n}");
        check_legal(&n, &best.retiming).unwrap();
        improved += (best.period < critical_path(&n).period) as usize;
    }
    // The sample must include netlists where retiming actually helps.
    assert!(improved >= 5, "only {improved} improvable netlists");
}

#[test]
fn min_period_is_legal_and_no_worse_on_large_netlists() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let gates = rng.gen_range(10..=44);
        let feedback = rng.gen_bool(0.5);
        let n = random_netlist(&mut rng, gates, feedback);
        let best = min_period_retime(&n);
        let w = check_legal(&n, &best.retiming).unwrap();
        assert!(w.iter().all(|&x| x as i64 >= 0));
        assert!(best.period <= critical_path(&n).period);
        assert_eq!(best.period, critical_path(&best.netlist).period);
        let max_delay = n.nodes().iter().map(|v| v.delay as u64).max().unwrap();
        assert!(best.period >= max_delay);
    }
}

#[test]
fn period_respects_the_cycle_bound() {
    for n in small_netlists(31, 40) {
        let best = min_period_retime(&n);
        assert!(best.period >= period_lower_bound(&n), "\n{n}");
    }
}

#[test]
fn ring_meets_the_cycle_bound_exactly() {
    let ring: Netlist = RING_NET.parse().unwrap();
    for c in 1..=6 {
        let slow = cslow_transform(&ring, c).unwrap();
        let best = min_period_retime(&slow);
        assert_eq!(best.period, period_lower_bound(&slow), "C={c}");
        assert_eq!(best.period, brute_force_min_period(&slow), "C={c}");
    }
}

#[test]
fn period_is_non_increasing_in_c() {
    let mut nets = small_netlists(41, 15);
    nets.push(RING_NET.parse().unwrap());
    nets.push(CHAIN_NET.parse().unwrap());
    for n in nets {
        let periods: Vec<u64> = (1..=5)
            .map(|c| min_period_retime(&cslow_transform(&n, c).unwrap()).period)
            .collect();
        assert!(periods.windows(2).all(|w| w[1] <= w[0]), "{periods:?}\n{n}");
    }
}

#[test]
fn retiming_preserves_registers_on_every_cycle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in small_netlists(43, 30) {
        let lags = random_legal_lags(&mut rng, &n, 30);
        let r = Retiming { lags };
        let moved = apply_retiming(&n, &r).unwrap();
        for cycle in common::simple_cycles(&n) {
            let before: u32 = cycle.iter().map(|&e| n.edges()[e].weight).sum();
            let after: u32 = cycle.iter().map(|&e| moved.edges()[e].weight).sum();
            assert_eq!(before, after);
        }
    }
}

#[test]
fn random_legal_retimings_are_equivalent() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..25 {
        let gates = rng.gen_range(2..=10);
        let feedback = rng.gen_bool(0.5);
        let n = random_netlist(&mut rng, gates, feedback);
        let r = Retiming {
            lags: random_legal_lags(&mut rng, &n, 40),
        };
        let moved = apply_retiming(&n, &r).unwrap();
        let report = check_equivalence(&n, &moved, &EquivalenceCheck::new(10, 128, 1)).unwrap();
        assert!(report.pass, "{report:?}\n{n}");
    }
}

#[test]
fn pipelining_adds_exactly_k_latency() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..15 {
        let gates = rng.gen_range(2..=8);
        let n = random_netlist(&mut rng, gates, false);
        let k = rng.gen_range(0..=3);
        let p = pipeline(&n, k).unwrap();
        assert!(p.period <= critical_path(&n).period);
        let check = EquivalenceCheck::new(10, 128, 2).with_latency(k as usize);
        assert!(
            check_equivalence(&n, &p.netlist, &check).unwrap().pass,
            "k={k}\n{n}"
        );
    }
}

#[test]
fn cslow_pairs_are_exact_from_cycle_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..15 {
        let gates = rng.gen_range(2..=8);
        // Any gate kind: no retiming happens, so zero-init states line up.
        let n = random_netlist(&mut rng, gates, false);
        let c = rng.gen_range(2..=4);
        let slow = cslow_transform(&n, c).unwrap();
        let check = EquivalenceCheck::new(10, 64, 4)
            .interleaved(c)
            .with_warmup(0);
        assert!(check_equivalence(&n, &slow, &check).unwrap().pass);
    }
}
