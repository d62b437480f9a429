//! Acceptance criteria, one line of output per criterion.

use std::collections::BTreeSet;
use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use muskit::aspsem::{
    enumerate_answer_sets, enumerate_models, subset_minimal_filter, Atom, BruteForceCap,
};
use muskit::bench::{
    load_instances, par2, rank_configs, run_bench, BenchConfig, RunRecord, Scoreboard,
};
use muskit::enumerate::{
    asp_route_enumerate, oracle_report, seed_shrink_enumerate, OracleReport, Pruning, RunConfig,
    ORACLE_CAP,
};
use muskit::generate::{random_coloring_instance, random_formula};
use muskit::heuristics::{card_bounds, enumerate_mcs, minimal_hitting_sets, HeuristicBundle};
use muskit::{
    build_program, hybrid_enumerate, Budget, CnfFormula, EncodingOptions, Engine, HeuristicFlags,
    HybridPolicy,
};

type Outcome = Result<String, String>;

fn two_mus() -> CnfFormula {
    CnfFormula::from_clauses([vec![1], vec![-1], vec![2], vec![-1, -2]])
}

fn set_of(v: &[Vec<usize>]) -> BTreeSet<Vec<usize>> {
    v.iter().cloned().collect()
}

/// 2 to 4 variables, 2 to 6 clauses; every other formula has clauses of width
/// at most 2, which makes about half of the corpus unsatisfiable.
fn small_corpus(n: usize, seed: u64) -> Vec<CnfFormula> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let width = if k % 2 == 0 { 1..=2 } else { 1..=3 };
            random_formula(&mut rng, 2..=4, 2..=6, width)
        })
        .collect()
}

fn small_unsat_corpus(n: usize, seed: u64) -> Vec<(CnfFormula, OracleReport)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let f = random_formula(&mut rng, 2..=4, 3..=7, 1..=2);
        let r = oracle_report(&f, ORACLE_CAP).unwrap();
        if !r.muses.is_empty() {
            out.push((f, r));
        }
    }
    out
}

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn four_clause_formula() -> Outcome {
    let started = Instant::now();
    let f = two_mus();
    let r = oracle_report(&f, ORACLE_CAP).map_err(|e| e.to_string())?;
    check(r.cores.len() == 5, || format!("{} cores", r.cores.len()))?;
    check(r.mcses == vec![vec![1], vec![2, 3], vec![2, 4]], || {
        format!("MCSes {:?}", r.mcses)
    })?;
    check(r.muses == vec![vec![1, 2], vec![1, 3, 4]], || {
        format!("MUSes {:?}", r.muses)
    })?;
    let mcs = enumerate_mcs(&f, &Budget::unlimited());
    check(set_of(&mcs.mcses) == set_of(&r.mcses), || {
        format!("SAT MCSes {:?}", mcs.mcses)
    })?;
    let program = build_program(&f, &EncodingOptions::default()).map_err(|e| e.to_string())?;
    let answer_sets =
        enumerate_answer_sets(&program, BruteForceCap::default()).map_err(|e| e.to_string())?;
    check(answer_sets.len() == 5, || {
        format!("{} answer sets", answer_sets.len())
    })?;
    let minimal: BTreeSet<Vec<usize>> =
        subset_minimal_filter(&answer_sets, &program.selector_atoms())
            .iter()
            .map(|m| m.selected_clauses(&program))
            .collect();
    check(minimal == set_of(&r.muses), || {
        format!("minimal answer sets {minimal:?}")
    })?;
    let elapsed = started.elapsed();
    check(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "5 cores, 3 MCSes, 2 MUSes, 5 answer sets in {elapsed:?}"
    ))
}

fn bijection() -> Outcome {
    let corpus = small_corpus(500, 1);
    let (mut sat, mut unsat) = (0, 0);
    for (k, f) in corpus.iter().enumerate() {
        let r = oracle_report(f, ORACLE_CAP).unwrap();
        if r.cores.is_empty() {
            sat += 1;
        } else {
            unsat += 1;
        }
        let program = build_program(f, &EncodingOptions::default()).unwrap();
        let answer_sets = enumerate_answer_sets(&program, BruteForceCap::default()).unwrap();
        let projections: BTreeSet<Vec<usize>> = answer_sets
            .iter()
            .map(|m| m.selected_clauses(&program))
            .collect();
        check(answer_sets.len() == r.cores.len(), || {
            format!(
                "formula {k}: {} answer sets vs {} cores",
                answer_sets.len(),
                r.cores.len()
            )
        })?;
        check(projections == set_of(&r.cores), || {
            format!("formula {k}: projections differ")
        })?;
    }
    check(sat > 0 && unsat > 0, || {
        format!("corpus not mixed: {sat} sat, {unsat} unsat")
    })?;
    Ok(format!(
        "500 formulas ({sat} satisfiable, {unsat} unsatisfiable), 0 mismatches"
    ))
}

fn saturation() -> Outcome {
    let mut models = 0;
    for (k, f) in small_corpus(500, 1).iter().enumerate() {
        let program = build_program(f, &EncodingOptions::default()).unwrap();
        let required: Vec<_> = program
            .atoms()
            .iter()
            .enumerate()
            .filter(|(_, a)| matches!(a, Atom::Pos(_) | Atom::Neg(_) | Atom::Unsat))
            .map(|(i, _)| muskit::aspsem::AtomId(i as u32))
            .collect();
        for m in enumerate_models(&program, BruteForceCap::default()).unwrap() {
            models += 1;
            check(required.iter().all(|&a| m.contains(a)), || {
                format!("formula {k}: model misses a saturated atom")
            })?;
        }
    }
    Ok(format!("{models} models, 0 violations"))
}

fn heuristic_invariance() -> Outcome {
    let corpus = small_unsat_corpus(100, 2);
    let mut runs = 0;
    for (k, (f, r)) in corpus.iter().enumerate() {
        let reference = set_of(&r.muses);
        let bundle = HeuristicBundle::compute(f, &Budget::unlimited());
        for bits in 0..32u8 {
            let flags = HeuristicFlags::from_bits(bits);
            let opts = EncodingOptions::with_heuristics(flags, bundle.clone());
            let asp = asp_route_enumerate(f, &opts, BruteForceCap::default())
                .map_err(|e| e.to_string())?;
            check(asp.mus_set() == reference, || {
                format!(
                    "formula {k}, flags {:?}: answer-set route differs",
                    flags.enabled()
                )
            })?;
            let pruning = Pruning {
                flags,
                bundle: &bundle,
            };
            let ss = seed_shrink_enumerate(f, Some(pruning), &Budget::unlimited());
            check(ss.complete && ss.mus_set() == reference, || {
                format!(
                    "formula {k}, flags {:?}: seed-shrink differs",
                    flags.enabled()
                )
            })?;
            runs += 2;
        }
    }
    Ok(format!(
        "100 formulas x 32 subsets, {runs} runs, 0 mismatches"
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let mut total_muses = 0;
    for k in 0..200 {
        let f = random_formula(&mut rng, 3..=6, 6..=12, 1..=2);
        let r = oracle_report(&f, ORACLE_CAP).unwrap();
        let ss = seed_shrink_enumerate(&f, None, &Budget::unlimited());
        check(ss.complete, || format!("formula {k}: incomplete"))?;
        check(
            ss.mus_set() == set_of(&r.muses) && ss.count == r.muses.len(),
            || format!("formula {k}: {:?} vs {:?}", ss.muses, r.muses),
        )?;
        let hy = hybrid_enumerate(
            &f,
            &HybridPolicy::default(),
            HeuristicFlags::ALL,
            &Budget::unlimited(),
        );
        check(hy.mus_set() == set_of(&r.muses), || {
            format!("formula {k}: hybrid differs")
        })?;
        total_muses += r.muses.len();
    }
    Ok(format!("200 formulas, {total_muses} MUSes, 0 mismatches"))
}

fn duality() -> Outcome {
    for (k, (f, r)) in small_unsat_corpus(200, 4).iter().enumerate() {
        check(
            set_of(&minimal_hitting_sets(&r.mcses)) == set_of(&r.muses),
            || format!("formula {k}: oracle MCSes"),
        )?;
        let mcs = enumerate_mcs(f, &Budget::unlimited());
        check(
            mcs.complete && set_of(&mcs.mcses) == set_of(&r.mcses),
            || format!("formula {k}: MCS enumeration"),
        )?;
        check(
            set_of(&minimal_hitting_sets(&mcs.mcses)) == set_of(&r.muses),
            || format!("formula {k}: SAT MCSes"),
        )?;
    }
    Ok("200 formulas, 0 mismatches".into())
}

fn bounds() -> Outcome {
    let f = two_mus();
    let mcs = enumerate_mcs(&f, &Budget::unlimited());
    let b = card_bounds(&f, &mcs.mcses, f.ncl(), &Budget::unlimited().start());
    check(b == (2, 4), || format!("example bounds {b:?}"))?;
    for (k, (f, r)) in small_unsat_corpus(200, 5).iter().enumerate() {
        let bundle = HeuristicBundle::compute(f, &Budget::unlimited());
        let (lb, ub) = bundle.card_bounds;
        check(r.muses.iter().all(|m| (lb..=ub).contains(&m.len())), || {
            format!(
                "formula {k}: bounds ({lb}, {ub}) exclude a MUS of {:?}",
                r.muses
            )
        })?;
    }
    Ok("example (2, 4); 200 formulas, 0 violations".into())
}

fn threshold() -> Outcome {
    let policy = HybridPolicy::default();
    check(policy.engine_for(4999) == Engine::AspRoute, || {
        "4999 clauses".into()
    })?;
    check(policy.engine_for(5000) == Engine::SeedShrink, || {
        "5000 clauses".into()
    })?;
    let budget = Budget::unlimited().with_time_limit(Duration::from_secs(120));
    for (ncl, engine) in [(4999, Engine::AspRoute), (5000, Engine::SeedShrink)] {
        let f = CnfFormula::from_clauses((1..ncl as i32).map(|v| vec![v]).chain([vec![-1]]));
        let r = hybrid_enumerate(&f, &policy, HeuristicFlags::ALL, &budget);
        check(
            r.engine == engine && r.complete && r.muses == vec![vec![1, ncl]],
            || {
                format!(
                    "{ncl} clauses: {:?}, complete={}, {} MUSes",
                    r.engine, r.complete, r.count
                )
            },
        )?;
    }
    Ok("4999 -> asp-route, 5000 -> seed-shrink".into())
}

fn record(
    instance: &str,
    config: &str,
    mus_count: usize,
    solved: bool,
    elapsed: f64,
    timeout: f64,
) -> RunRecord {
    RunRecord {
        instance: instance.into(),
        config: config.into(),
        engine: "hybrid".into(),
        mus_count,
        solved,
        elapsed,
        timeout,
    }
}

fn metrics() -> Outcome {
    let ties: Vec<RunRecord> = [("a", 10), ("b", 5), ("c", 5), ("d", 1)]
        .iter()
        .map(|&(c, n)| record("i", c, n, true, 1.0, 10.0))
        .collect();
    let ranks = rank_configs(&ties).map_err(|e| e.to_string())?;
    let got: Vec<f64> = ranks.values().copied().collect();
    check(got == vec![1.0, 2.5, 2.5, 4.0], || format!("ranks {got:?}"))?;
    let cases = [
        (vec![record("i", "x", 1, true, 0.0, 3600.0)], 0.0),
        (vec![record("i", "x", 0, false, 3600.0, 3600.0)], 7200.0),
        (
            vec![
                record("i", "x", 1, true, 100.0, 100.0),
                record("j", "x", 0, false, 100.0, 100.0),
            ],
            150.0,
        ),
    ];
    for (records, expected) in cases {
        let got = par2(&records)["x"];
        check(got == expected, || {
            format!("PAR2 {got} expected {expected}")
        })?;
    }
    Ok("ranks (1, 2.5, 2.5, 4); PAR2 0, 7200, 150".into())
}

fn smoke_bench() -> Outcome {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(6);
    for k in 0..24 {
        let colors = rng.gen_range(2..=3);
        let vertices = rng.gen_range(colors + 3..=colors + 6);
        let extra = rng.gen_range(2..=8);
        let f = random_coloring_instance(&mut rng, vertices, colors, extra);
        fs::write(dir.path().join(format!("color{k:02}.cnf")), f.to_dimacs())
            .map_err(|e| e.to_string())?;
    }
    let instances = load_instances(dir.path()).map_err(|e| e.to_string())?;
    let configs = vec![
        BenchConfig {
            name: "hybrid-all".into(),
            flags: HeuristicFlags::ALL,
            threshold: 5000,
        },
        BenchConfig {
            name: "hybrid-h1h4".into(),
            flags: HeuristicFlags::from_bits(0b01001),
            threshold: 5000,
        },
        BenchConfig {
            name: "seed-shrink".into(),
            flags: HeuristicFlags::NONE,
            threshold: 1,
        },
    ];
    let records = run_bench(
        &instances,
        &configs,
        Duration::from_secs(20),
        4,
        &RunConfig::default(),
    );
    check(records.len() == instances.len() * configs.len(), || {
        format!("{} records", records.len())
    })?;
    let board = Scoreboard::from_records(&records).map_err(|e| e.to_string())?;
    check(board.instances == 24 && board.configs.len() == 3, || {
        "scoreboard shape".into()
    })?;
    let rank_sum: f64 = board.configs.iter().map(|c| c.average_rank).sum();
    check((rank_sum - 6.0).abs() < 1e-9, || {
        format!("rank sum {rank_sum}")
    })?;
    check(
        board
            .configs
            .iter()
            .all(|c| (1.0..=3.0).contains(&c.average_rank)),
        || "rank range".into(),
    )?;
    let json = serde_json::to_value(&board).map_err(|e| e.to_string())?;
    check(
        json["configs"].as_array().is_some_and(|a| a.len() == 3),
        || "scoreboard JSON".into(),
    )?;
    let elapsed = started.elapsed();
    check(elapsed < Duration::from_secs(15 * 60), || {
        format!("took {elapsed:?}")
    })?;
    let solved: usize = board.configs.iter().map(|c| c.solved).sum();
    Ok(format!(
        "24 instances x 3 configs, {solved} solved runs, {elapsed:?}"
    ))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("four-clause formula", four_clause_formula),
        ("answer sets <-> unsatisfiable cores", bijection),
        ("models are saturated", saturation),
        ("pruning preserves the MUS set", heuristic_invariance),
        ("seed-shrink matches the oracle", oracle_equivalence),
        ("hitting-set duality", duality),
        ("cardinality bounds", bounds),
        ("hybrid threshold", threshold),
        ("ranks and PAR2", metrics),
        ("smoke benchmark", smoke_bench),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} [{secs:.2}s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {why} [{secs:.2}s]", k + 1)
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
