//! MUS enumeration and counting.
//!
//! Four engines share one result type:
//!
//! * the brute-force oracle, which classifies every clause subset;
//! * the ASP route, which builds `P_F`, enumerates its answer sets with the
//!   semantic oracle and keeps the ones minimal on the selector atoms;
//! * seed-shrink, a MARCO-style loop over a map of the selector space, with
//!   the pruning rules H1, H3, H4 and H5 loaded as map clauses;
//! * the hybrid dispatcher, which sends formulas below a clause threshold to
//!   the pruned engine and larger ones to plain seed-shrink.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aspsem::{enumerate_answer_sets, subset_minimal_filter, BruteForceCap, OracleError};
use crate::budget::{Budget, Limits};
use crate::cnf::CnfFormula;
use crate::encoder::{build_program, EncodeError, EncodingOptions, HeuristicFlags};
use crate::heuristics::{complement, grow, BundleSummary, HeuristicBundle, HeuristicConfig};
use crate::satcore::{SLit, SatInstance, SatOutcome, SolveResult, Solver};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    AspRoute,
    SeedShrink,
    Hybrid,
    Oracle,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::AspRoute => "asp-route",
            Engine::SeedShrink => "seed-shrink",
            Engine::Hybrid => "hybrid",
            Engine::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationResult {
    /// Each MUS as sorted clause indices, in discovery order.
    pub muses: Vec<Vec<usize>>,
    /// True when every MUS was found.
    pub complete: bool,
    /// Number of MUSes found; exact when `complete`.
    pub count: usize,
    pub elapsed: Duration,
    pub engine: Engine,
    /// Pruning information used, if any.
    pub bundle: Option<BundleSummary>,
}

impl EnumerationResult {
    fn new(engine: Engine, muses: Vec<Vec<usize>>, complete: bool, started: Instant) -> Self {
        EnumerationResult {
            count: muses.len(),
            muses,
            complete,
            elapsed: started.elapsed(),
            engine,
            bundle: None,
        }
    }

    /// MUSes as an order-insensitive set.
    pub fn mus_set(&self) -> BTreeSet<Vec<usize>> {
        self.muses.iter().cloned().collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("formula has {ncl} clauses, above the brute-force cap of {cap}")]
    CapExceeded { ncl: usize, cap: usize },
    #[error("seed clauses {0:?} are satisfiable")]
    SatisfiableSeed(Vec<usize>),
    #[error("clause index {0} is out of range")]
    BadIndex(usize),
    #[error("budget exhausted")]
    Budget,
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Everything the brute-force oracle learns about a formula.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleReport {
    pub muses: Vec<Vec<usize>>,
    /// All unsatisfiable subsets.
    pub cores: Vec<Vec<usize>>,
    pub mcses: Vec<Vec<usize>>,
}

/// Default clause cap for [`oracle_enumerate`].
pub const ORACLE_CAP: usize = 20;

fn mask_to_indices(mask: u64, ncl: usize) -> Vec<usize> {
    (1..=ncl).filter(|i| mask >> (i - 1) & 1 == 1).collect()
}

/// Satisfiability of every clause subset, indexed by bitmask. Truth tables
/// are used when the formula has at most 20 variables; otherwise one SAT call
/// per maximal candidate.
fn subset_satisfiability(formula: &CnfFormula) -> Vec<bool> {
    let ncl = formula.ncl();
    let size = 1usize << ncl;
    let mut sat = vec![false; size];
    let nvars = formula.nvars() as usize;
    if nvars <= 20 {
        let masks: Vec<(u32, u32)> = formula
            .clauses()
            .iter()
            .map(|c| {
                c.lits().iter().fold((0u32, 0u32), |(p, n), l| {
                    let bit = 1u32 << (l.var().id() - 1);
                    if l.is_positive() {
                        (p | bit, n)
                    } else {
                        (p, n | bit)
                    }
                })
            })
            .collect();
        for assignment in 0u32..(1u32 << nvars) {
            let satisfied = masks.iter().enumerate().fold(0usize, |acc, (i, &(p, n))| {
                if p & assignment != 0 || n & !assignment != 0 {
                    acc | 1 << i
                } else {
                    acc
                }
            });
            sat[satisfied] = true;
        }
    } else {
        let mut inst = SatInstance::new(formula);
        for mask in (0..size).rev() {
            if !sat[mask] {
                let subset = mask_to_indices(mask as u64, ncl);
                sat[mask] = inst.solve(&subset, &Limits::none()).is_sat();
            }
            if sat[mask] {
                // mark direct subsets; the downward pass below finishes the job
                for b in 0..ncl {
                    if mask >> b & 1 == 1 {
                        sat[mask ^ (1 << b)] = true;
                    }
                }
            }
        }
    }
    // subsets of satisfiable sets are satisfiable
    for b in 0..ncl {
        for mask in 0..size {
            if mask >> b & 1 == 1 && sat[mask] {
                sat[mask ^ (1 << b)] = true;
            }
        }
    }
    sat
}

pub fn oracle_report(formula: &CnfFormula, cap: usize) -> Result<OracleReport, EnumError> {
    let ncl = formula.ncl();
    if ncl > cap.min(30) {
        return Err(EnumError::CapExceeded {
            ncl,
            cap: cap.min(30),
        });
    }
    let sat = subset_satisfiability(formula);
    let full = (1usize << ncl) - 1;
    let mut report = OracleReport::default();
    for mask in 0..=full {
        let bits = (0..ncl).filter(|b| mask >> b & 1 == 1);
        if !sat[mask] {
            report.cores.push(mask_to_indices(mask as u64, ncl));
            if bits.clone().all(|b| sat[mask ^ (1 << b)]) {
                report.muses.push(mask_to_indices(mask as u64, ncl));
            }
        }
        let rest = full ^ mask;
        if sat[rest] && mask != 0 && bits.clone().all(|b| !sat[rest | (1 << b)]) {
            report.mcses.push(mask_to_indices(mask as u64, ncl));
        }
    }
    report.muses.sort();
    report.cores.sort();
    report.mcses.sort();
    Ok(report)
}

/// Exact MUS enumeration over all `2^ncl` subsets.
pub fn oracle_enumerate(formula: &CnfFormula, cap: usize) -> Result<EnumerationResult, EnumError> {
    let started = Instant::now();
    let report = oracle_report(formula, cap)?;
    Ok(EnumerationResult::new(
        Engine::Oracle,
        report.muses,
        true,
        started,
    ))
}

/// MUSes as the selector projections of the answer sets of `P_F` that are
/// subset-minimal on the selectors.
pub fn asp_route_enumerate(
    formula: &CnfFormula,
    opts: &EncodingOptions,
    cap: BruteForceCap,
) -> Result<EnumerationResult, EnumError> {
    let started = Instant::now();
    let program = build_program(formula, opts)?;
    let answer_sets = enumerate_answer_sets(&program, cap)?;
    let selectors = program.selector_atoms();
    let mut muses: Vec<Vec<usize>> = subset_minimal_filter(&answer_sets, &selectors)
        .iter()
        .map(|m| m.selected_clauses(&program))
        .collect();
    muses.sort();
    muses.dedup();
    let mut result = EnumerationResult::new(Engine::AspRoute, muses, true, started);
    result.bundle = opts.bundle.as_ref().map(HeuristicBundle::summary);
    Ok(result)
}

pub(crate) enum Shrunk {
    Mus(Vec<usize>),
    Satisfiable,
    Unknown,
}

/// Deletion-based extraction in descending index order with clause-set
/// refinement: every unsatisfiable answer replaces the working set by the
/// failed selectors.
pub(crate) fn shrink_with(inst: &mut SatInstance, seed: &[usize], limits: &Limits) -> Shrunk {
    let mut work: Vec<usize> = seed.to_vec();
    work.sort_unstable();
    work.dedup();
    match inst.solve(&work, limits) {
        SatOutcome::Unsat { failed } => work = failed,
        SatOutcome::Sat(_) => return Shrunk::Satisfiable,
        SatOutcome::Unknown => return Shrunk::Unknown,
    }
    let order: Vec<usize> = work.iter().rev().copied().collect();
    for c in order {
        let Ok(pos) = work.binary_search(&c) else {
            continue;
        };
        let mut trial = work.clone();
        trial.remove(pos);
        match inst.solve(&trial, limits) {
            SatOutcome::Unsat { failed } => work = failed,
            SatOutcome::Sat(_) => {}
            SatOutcome::Unknown => return Shrunk::Unknown,
        }
    }
    Shrunk::Mus(work)
}

/// Shrinks an unsatisfiable clause set to a MUS contained in it.
pub fn shrink(formula: &CnfFormula, seed: &[usize]) -> Result<Vec<usize>, EnumError> {
    if let Some(&bad) = seed.iter().find(|&&i| i == 0 || i > formula.ncl()) {
        return Err(EnumError::BadIndex(bad));
    }
    let mut inst = SatInstance::new(formula);
    match shrink_with(&mut inst, seed, &Limits::none()) {
        Shrunk::Mus(m) => Ok(m),
        Shrunk::Satisfiable => Err(EnumError::SatisfiableSeed(seed.to_vec())),
        Shrunk::Unknown => Err(EnumError::Budget),
    }
}

/// Checks the MUS property with the SAT engine: `set` is unsatisfiable and
/// dropping any clause makes it satisfiable.
pub fn is_mus(formula: &CnfFormula, set: &[usize]) -> bool {
    let mut inst = SatInstance::new(formula);
    is_mus_in(&mut inst, set)
}

fn is_mus_in(inst: &mut SatInstance, set: &[usize]) -> bool {
    if !inst.solve(set, &Limits::none()).is_unsat() {
        return false;
    }
    (0..set.len()).all(|k| {
        let mut rest = set.to_vec();
        rest.remove(k);
        inst.solve(&rest, &Limits::none()).is_sat()
    })
}

/// Pruning information applied by the seed-shrink map.
#[derive(Clone, Copy, Debug)]
pub struct Pruning<'a> {
    pub flags: HeuristicFlags,
    pub bundle: &'a HeuristicBundle,
}

/// Knobs that are not part of the budget.
#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Solver order perturbation; 0 keeps the default order.
    pub seed: u64,
    pub heuristics: HeuristicConfig,
    /// Same meaning as [`EncodingOptions::h3_pair_limit`].
    pub h3_pair_limit: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            heuristics: HeuristicConfig::default(),
            h3_pair_limit: 1_000_000,
        }
    }
}

/// Map solver over the selector space: variable `i - 1` is "clause `i` is in
/// the seed".
struct Map {
    solver: Solver,
    ncl: usize,
}

impl Map {
    fn new(ncl: usize, pruning: Option<Pruning<'_>>, config: &RunConfig) -> Self {
        let mut solver = Solver::new();
        solver.ensure_vars(ncl);
        for v in 0..ncl {
            solver.set_preferred_phase(v, true);
        }
        let mut map = Map { solver, ncl };
        if let Some(p) = pruning {
            map.load(p, config);
        }
        map.solver.set_seed(config.seed);
        map
    }

    fn sel(i: usize) -> SLit {
        SLit::pos(i - 1)
    }

    fn load(&mut self, pruning: Pruning<'_>, config: &RunConfig) {
        let b = pruning.bundle;
        let ncl = self.ncl;
        if pruning.flags.h1 {
            let keep: BTreeSet<usize> = b.union_overapprox.iter().copied().collect();
            for i in (1..=ncl).filter(|i| !keep.contains(i)) {
                self.solver.add_clause(&[!Self::sel(i)]);
            }
        }
        if pruning.flags.h3 && b.components.len() > 1 {
            let comp = b.component_of();
            let sizes: u128 = b.components.iter().map(|c| (c.len() as u128).pow(2)).sum();
            let cross_pairs = ((ncl as u128).pow(2) - sizes) / 2;
            if cross_pairs <= config.h3_pair_limit as u128 {
                for i in 1..=ncl {
                    for j in (i + 1)..=ncl {
                        if comp[i] != comp[j] {
                            self.solver.add_clause(&[!Self::sel(i), !Self::sel(j)]);
                        }
                    }
                }
            } else {
                // one indicator per component, at most one of them true
                let base = self.solver.num_vars();
                let k = b.components.len();
                self.solver.ensure_vars(base + 2 * k);
                let used = |c: usize| SLit::pos(base + c);
                let upto = |c: usize| SLit::pos(base + k + c);
                for (i, &c) in comp.iter().enumerate().skip(1) {
                    self.solver.add_clause(&[!Self::sel(i), used(c)]);
                }
                for c in 0..k {
                    self.solver.add_clause(&[!used(c), upto(c)]);
                    if c > 0 {
                        self.solver.add_clause(&[!upto(c - 1), upto(c)]);
                        self.solver.add_clause(&[!upto(c - 1), !used(c)]);
                    }
                }
            }
        }
        if pruning.flags.h4 {
            for mcs in &b.mcses {
                let lits: Vec<SLit> = mcs.iter().map(|&i| Self::sel(i)).collect();
                self.solver.add_clause(&lits);
            }
        }
        if pruning.flags.h5 {
            for rule in &b.cover_rules {
                let mut lits = vec![!Self::sel(rule.trigger)];
                lits.extend(rule.candidates.iter().map(|&j| Self::sel(j)));
                self.solver.add_clause(&lits);
            }
        }
    }

    fn next_seed(&mut self, limits: &Limits) -> Option<Option<Vec<usize>>> {
        match self.solver.solve_with(&[], limits) {
            SolveResult::Sat => Some(Some(
                (1..=self.ncl)
                    .filter(|&i| self.solver.model_value(Self::sel(i)))
                    .collect(),
            )),
            SolveResult::Unsat => Some(None),
            SolveResult::Unknown => None,
        }
    }

    /// Forbid the seed region below a maximal satisfiable subset.
    fn block_down(&mut self, mcs: &[usize]) {
        let lits: Vec<SLit> = mcs.iter().map(|&i| Self::sel(i)).collect();
        self.solver.add_clause(&lits);
    }

    /// Forbid supersets of a MUS.
    fn block_up(&mut self, mus: &[usize]) {
        let lits: Vec<SLit> = mus.iter().map(|&i| !Self::sel(i)).collect();
        self.solver.add_clause(&lits);
    }
}

pub fn seed_shrink_enumerate(
    formula: &CnfFormula,
    pruning: Option<Pruning<'_>>,
    budget: &Budget,
) -> EnumerationResult {
    seed_shrink_with(
        formula,
        pruning,
        &budget.start(),
        budget.max_results,
        &RunConfig::default(),
    )
}

pub fn seed_shrink_with(
    formula: &CnfFormula,
    pruning: Option<Pruning<'_>>,
    limits: &Limits,
    max_results: Option<usize>,
    config: &RunConfig,
) -> EnumerationResult {
    let started = Instant::now();
    let ncl = formula.ncl();
    let mut inst = SatInstance::with_seed(formula, config.seed);
    let mut map = Map::new(ncl, pruning, config);
    let bounds = pruning.filter(|p| p.flags.h2).map(|p| p.bundle.card_bounds);
    let mut muses: Vec<Vec<usize>> = Vec::new();
    let mut complete = false;

    loop {
        if max_results.is_some_and(|m| muses.len() >= m) || limits.expired() {
            break;
        }
        let seed = match map.next_seed(limits) {
            Some(Some(seed)) => seed,
            Some(None) => {
                complete = true;
                break;
            }
            None => break,
        };
        match inst.solve(&seed, limits) {
            SatOutcome::Sat(model) => {
                let Some(mss) = grow(&mut inst, formula, &seed, &model, limits) else {
                    break;
                };
                let mcs = complement(&mss, ncl);
                if mcs.is_empty() {
                    // the whole formula is satisfiable
                    complete = true;
                    break;
                }
                map.block_down(&mcs);
            }
            SatOutcome::Unsat { failed } => {
                let mus = match shrink_with(&mut inst, &failed, limits) {
                    Shrunk::Mus(m) => m,
                    Shrunk::Unknown => break,
                    Shrunk::Satisfiable => {
                        unreachable!("failed selectors form an unsatisfiable set")
                    }
                };
                debug_assert!(is_mus_in(&mut inst, &mus), "not a MUS: {mus:?}");
                debug_assert!(!muses.contains(&mus), "MUS found twice: {mus:?}");
                if let Some((lb, ub)) = bounds {
                    debug_assert!(
                        (lb..=ub).contains(&mus.len()),
                        "MUS {mus:?} outside cardinality bounds [{lb}, {ub}]"
                    );
                }
                map.block_up(&mus);
                muses.push(mus);
            }
            SatOutcome::Unknown => break,
        }
    }
    let mut result = EnumerationResult::new(Engine::SeedShrink, muses, complete, started);
    result.bundle = pruning.map(|p| p.bundle.summary());
    result
}

/// Chooses the engine by formula size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridPolicy {
    pub clause_threshold: usize,
}

impl Default for HybridPolicy {
    fn default() -> Self {
        HybridPolicy {
            clause_threshold: 5000,
        }
    }
}

impl HybridPolicy {
    /// Panics on a zero threshold.
    pub fn new(clause_threshold: usize) -> Self {
        assert!(clause_threshold > 0, "clause threshold must be positive");
        HybridPolicy { clause_threshold }
    }

    /// Formulas with fewer clauses than the threshold take the ASP route.
    pub fn engine_for(&self, ncl: usize) -> Engine {
        if ncl < self.clause_threshold {
            Engine::AspRoute
        } else {
            Engine::SeedShrink
        }
    }
}

/// Runs the engine chosen by `policy`. The ASP route is realised in process
/// as seed-shrink over the selector space with the enabled pruning rules,
/// which is the selector projection of the pruned `P_F`.
pub fn hybrid_enumerate(
    formula: &CnfFormula,
    policy: &HybridPolicy,
    flags: HeuristicFlags,
    budget: &Budget,
) -> EnumerationResult {
    hybrid_enumerate_with(formula, policy, flags, budget, &RunConfig::default())
}

pub fn hybrid_enumerate_with(
    formula: &CnfFormula,
    policy: &HybridPolicy,
    flags: HeuristicFlags,
    budget: &Budget,
    config: &RunConfig,
) -> EnumerationResult {
    let started = Instant::now();
    let limits = budget.start();
    let engine = policy.engine_for(formula.ncl());
    let mut result = match engine {
        Engine::AspRoute if flags.any() => {
            let bundle = HeuristicBundle::compute_with(formula, &limits, &config.heuristics);
            let pruning = Pruning {
                flags,
                bundle: &bundle,
            };
            seed_shrink_with(formula, Some(pruning), &limits, budget.max_results, config)
        }
        _ => seed_shrink_with(formula, None, &limits, budget.max_results, config),
    };
    result.engine = engine;
    result.elapsed = started.elapsed();
    result
}

/// `(count, complete)`; the count is exact when `complete` holds.
pub fn count_mus(formula: &CnfFormula, budget: &Budget) -> (usize, bool) {
    let r = hybrid_enumerate(
        formula,
        &HybridPolicy::default(),
        HeuristicFlags::ALL,
        budget,
    );
    (r.count, r.complete)
}
