use std::time::Duration;

use rand::rngs::StdRng;
use rand::SeedableRng;

use muskit::enumerate::{
    hybrid_enumerate_with, is_mus, oracle_enumerate, seed_shrink_enumerate, RunConfig, ORACLE_CAP,
};
use muskit::generate::{graph_coloring, random_coloring_instance};
use muskit::{count_mus, Budget, CnfFormula, Engine, HeuristicFlags, HybridPolicy};

#[test]
fn engines_agree_beyond_oracle_size() {
    let mut rng = StdRng::seed_from_u64(11);
    let budget = Budget::unlimited().with_time_limit(Duration::from_secs(60));
    for k in 0..12 {
        let f = random_coloring_instance(&mut rng, 7 + k % 4, 2 + k % 2, 4 + k);
        assert!(f.ncl() > 20, "instance {k} has only {} clauses", f.ncl());
        let plain = seed_shrink_enumerate(&f, None, &budget);
        assert!(plain.complete, "instance {k}");
        for m in &plain.muses {
            assert!(is_mus(&f, m), "instance {k}: {m:?}");
        }
        for (bits, seed) in [(0b11111, 0), (0b01001, 7), (0b10100, 3)] {
            let run = RunConfig {
                seed,
                ..RunConfig::default()
            };
            let pruned = hybrid_enumerate_with(
                &f,
                &HybridPolicy::default(),
                HeuristicFlags::from_bits(bits),
                &budget,
                &run,
            );
            assert_eq!(pruned.engine, Engine::AspRoute);
            assert!(pruned.complete);
            assert_eq!(
                pruned.mus_set(),
                plain.mus_set(),
                "instance {k}, flags {bits:05b}"
            );
        }
    }
}

#[test]
fn triangle_two_colours() {
    // dropping any clause admits a colouring, so the whole formula is the only MUS
    let f = graph_coloring(3, &[(0, 1), (1, 2), (0, 2)], 2);
    assert_eq!(count_mus(&f, &Budget::unlimited()), (1, true));
    assert_eq!(
        oracle_enumerate(&f, ORACLE_CAP).unwrap().muses,
        vec![(1..=9).collect::<Vec<_>>()]
    );
}

#[test]
fn exponentially_many_muses_respect_the_budget() {
    // 2^n MUSes: each x_i is derived along one of two paths
    let n = 18;
    let mut clauses = Vec::new();
    for i in 0..n {
        let (a, b, x) = (3 * i + 1, 3 * i + 2, 3 * i + 3);
        clauses.extend([vec![a], vec![b], vec![-a, x], vec![-b, x]]);
    }
    clauses.push((0..n).map(|i| -(3 * i + 3)).collect());
    let f = CnfFormula::from_clauses(clauses);
    let r = hybrid_enumerate_with(
        &f,
        &HybridPolicy::default(),
        HeuristicFlags::ALL,
        &Budget::unlimited().with_time_limit(Duration::from_millis(300)),
        &RunConfig::default(),
    );
    assert!(!r.complete);
    assert!(r.elapsed < Duration::from_secs(5));
    assert!(r.count > 0);
    assert!(r
        .muses
        .iter()
        .take(20)
        .all(|m| is_mus(&f, m) && m.len() == 2 * n as usize + 1));
}
