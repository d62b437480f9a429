//! Pruning information about a formula's MUSes.
//!
//! Every artifact computed here is sound: each MUS of the formula lies inside
//! the union over-approximation and inside a single clause component, has a
//! size within the cardinality bounds, hits every collected MCS and satisfies
//! every cover rule. None of them is required to be tight.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::budget::{Budget, Limits};
use crate::cnf::CnfFormula;
use crate::satcore::{add_at_most, SLit, SatInstance, SatOutcome, SolveResult, Solver};

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Connected components of the clause graph in which `C_j` and `C_k` are
/// adjacent when some literal occurs in `C_j` and its negation in `C_k`.
/// Components are sorted by their smallest clause index.
pub fn components(formula: &CnfFormula) -> Vec<Vec<usize>> {
    let ncl = formula.ncl();
    let mut uf = UnionFind::new(ncl);
    let nv = formula.nvars() as usize;
    // first clause seen with each polarity of each variable
    let mut pos_occ: Vec<Vec<usize>> = vec![Vec::new(); nv + 1];
    let mut neg_occ: Vec<Vec<usize>> = vec![Vec::new(); nv + 1];
    for (i, clause) in formula.indexed() {
        for lit in clause.lits() {
            let v = lit.var().id() as usize;
            if lit.is_positive() {
                pos_occ[v].push(i - 1);
            } else {
                neg_occ[v].push(i - 1);
            }
        }
    }
    for v in 1..=nv {
        if pos_occ[v].is_empty() || neg_occ[v].is_empty() {
            continue;
        }
        let anchor = pos_occ[v][0];
        for &c in pos_occ[v].iter().chain(&neg_occ[v]) {
            uf.union(anchor, c);
        }
    }
    let mut by_root: HashMap<usize, Vec<usize>> = HashMap::new();
    for c in 0..ncl {
        let root = uf.find(c);
        by_root.entry(root).or_default().push(c + 1);
    }
    let mut out: Vec<Vec<usize>> = by_root.into_values().collect();
    out.sort_unstable_by_key(|c| c[0]);
    out
}

/// Collected minimal correction sets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct McsList {
    pub mcses: Vec<Vec<usize>>,
    /// True when every MCS of the formula is listed.
    pub complete: bool,
    /// The formula itself is satisfiable (it has no MCS).
    pub satisfiable: bool,
}

/// Grows `seed` to a maximal satisfiable subset, adding clauses in index order.
/// Clauses satisfied by an intermediate model are taken without a SAT call.
/// Returns `None` when the budget runs out.
pub(crate) fn grow(
    inst: &mut SatInstance,
    formula: &CnfFormula,
    seed: &[usize],
    model: &crate::cnf::Assignment,
    limits: &Limits,
) -> Option<Vec<usize>> {
    let ncl = formula.ncl();
    let mut inside = vec![false; ncl + 1];
    for &i in seed {
        inside[i] = true;
    }
    let absorb = |inside: &mut Vec<bool>, model: &crate::cnf::Assignment| {
        for (i, clause) in formula.indexed() {
            if !inside[i] && model.clause_value(clause) == crate::cnf::Evaluation::Satisfied {
                inside[i] = true;
            }
        }
    };
    absorb(&mut inside, model);
    for candidate in 1..=ncl {
        if inside[candidate] {
            continue;
        }
        let mut trial: Vec<usize> = (1..=ncl).filter(|&i| inside[i]).collect();
        trial.push(candidate);
        match inst.solve(&trial, limits) {
            SatOutcome::Sat(m) => {
                inside[candidate] = true;
                absorb(&mut inside, &m);
            }
            SatOutcome::Unsat { .. } => {}
            SatOutcome::Unknown => return None,
        }
    }
    Some((1..=ncl).filter(|&i| inside[i]).collect())
}

/// Enumerates MCSes as complements of maximal satisfiable subsets. Each found
/// MCS is blocked by the clause `∨_{i∈S} s_i` over selectors.
pub fn enumerate_mcs(formula: &CnfFormula, budget: &Budget) -> McsList {
    enumerate_mcs_with(formula, &budget.start(), budget.max_results)
}

pub(crate) fn enumerate_mcs_with(
    formula: &CnfFormula,
    limits: &Limits,
    max_results: Option<usize>,
) -> McsList {
    let ncl = formula.ncl();
    let mut inst = SatInstance::new(formula);
    let all: Vec<usize> = (1..=ncl).collect();
    let mut out = McsList::default();
    match inst.solve(&all, limits) {
        SatOutcome::Sat(_) => {
            out.complete = true;
            out.satisfiable = true;
            return out;
        }
        SatOutcome::Unknown => return out,
        SatOutcome::Unsat { .. } => {}
    }
    for i in 1..=ncl {
        let s = inst.selector(i);
        inst.solver_mut().set_preferred_phase(s.var(), true);
    }
    loop {
        if max_results.is_some_and(|m| out.mcses.len() >= m) || limits.expired() {
            return out;
        }
        // any model hits every MCS found so far
        let model = match inst.solve(&[], limits) {
            SatOutcome::Sat(m) => m,
            SatOutcome::Unsat { .. } => {
                out.complete = true;
                return out;
            }
            SatOutcome::Unknown => return out,
        };
        let seed: Vec<usize> = (1..=ncl).filter(|&i| inst.selector_in_model(i)).collect();
        let Some(mss) = grow(&mut inst, formula, &seed, &model, limits) else {
            return out;
        };
        let mcs: Vec<usize> = complement(&mss, ncl);
        debug_assert!(!mcs.is_empty());
        let block: Vec<SLit> = mcs.iter().map(|&i| inst.selector(i)).collect();
        inst.add_clause(&block);
        out.mcses.push(mcs);
    }
}

pub(crate) fn complement(set: &[usize], ncl: usize) -> Vec<usize> {
    let mut inside = vec![false; ncl + 1];
    for &i in set {
        inside[i] = true;
    }
    (1..=ncl).filter(|&i| !inside[i]).collect()
}

/// Lean kernel: the clauses left after repeatedly removing every clause
/// touched by an autarky. A superset of the union of all MUSes. When the
/// budget runs out the clauses not yet removed are returned, which is still
/// a superset.
pub fn union_overapprox(formula: &CnfFormula, limits: &Limits) -> Vec<usize> {
    let mut remaining: Vec<usize> = (1..=formula.ncl()).collect();
    loop {
        match find_autarky(formula, &remaining, limits) {
            Some(touched) if !touched.is_empty() => {
                remaining.retain(|i| !touched.contains(i));
            }
            _ => return remaining,
        }
    }
}

/// One non-trivial autarky of the clauses `within`, returned as the indices it
/// touches. Variable `v` becomes two solver variables, "assigned true" and
/// "assigned false"; a clause mentioning an assigned variable must contain a
/// true literal.
fn find_autarky(formula: &CnfFormula, within: &[usize], limits: &Limits) -> Option<Vec<usize>> {
    let is_true = |v: u32| SLit::pos(2 * (v as usize - 1));
    let is_false = |v: u32| SLit::pos(2 * (v as usize - 1) + 1);
    let mut solver = Solver::new();
    let mut used: Vec<u32> = Vec::new();
    for &i in within {
        for lit in formula.clause(i).lits() {
            used.push(lit.var().id());
        }
    }
    used.sort_unstable();
    used.dedup();
    if used.is_empty() {
        return None;
    }
    for &v in &used {
        solver.add_clause(&[!is_true(v), !is_false(v)]);
        solver.set_preferred_phase(is_true(v).var(), true);
        solver.set_preferred_phase(is_false(v).var(), true);
    }
    for &i in within {
        let clause = formula.clause(i);
        let satisfied: Vec<SLit> = clause
            .lits()
            .iter()
            .map(|l| {
                if l.is_positive() {
                    is_true(l.var().id())
                } else {
                    is_false(l.var().id())
                }
            })
            .collect();
        for lit in clause.lits() {
            let v = lit.var().id();
            for touched in [is_true(v), is_false(v)] {
                let mut c = vec![!touched];
                c.extend_from_slice(&satisfied);
                solver.add_clause(&c);
            }
        }
    }
    let nontrivial: Vec<SLit> = used
        .iter()
        .flat_map(|&v| [is_true(v), is_false(v)])
        .collect();
    solver.add_clause(&nontrivial);
    if solver.solve_with(&[], limits) != SolveResult::Sat {
        return None;
    }
    let assigned = |v: u32| solver.model_value(is_true(v)) || solver.model_value(is_false(v));
    Some(
        within
            .iter()
            .copied()
            .filter(|&i| {
                formula
                    .clause(i)
                    .lits()
                    .iter()
                    .any(|l| assigned(l.var().id()))
            })
            .collect(),
    )
}

/// Size of a minimum hitting set of `sets`, by branch and bound. If the node
/// limit is reached the best proven lower bound is returned instead.
pub fn min_hitting_set_size(sets: &[Vec<usize>]) -> usize {
    const NODE_LIMIT: usize = 1_000_000;
    if sets.is_empty() {
        return 0;
    }
    let sets: Vec<&[usize]> = sets.iter().map(|s| s.as_slice()).collect();
    let root_bound = disjoint_lower_bound(&sets);
    let mut best = greedy_hitting_set(&sets);
    let mut nodes = 0usize;
    let mut chosen = Vec::new();
    let exhausted = branch(&sets, &mut chosen, &mut best, &mut nodes, NODE_LIMIT);
    if exhausted {
        best
    } else {
        root_bound
    }
}

fn disjoint_lower_bound(sets: &[&[usize]]) -> usize {
    let mut order: Vec<&[usize]> = sets.to_vec();
    order.sort_by_key(|s| s.len());
    let mut used: Vec<usize> = Vec::new();
    let mut count = 0;
    for s in order {
        if s.iter().all(|e| !used.contains(e)) {
            used.extend_from_slice(s);
            count += 1;
        }
    }
    count
}

fn greedy_hitting_set(sets: &[&[usize]]) -> usize {
    let mut open: Vec<&[usize]> = sets.to_vec();
    let mut size = 0;
    while !open.is_empty() {
        let mut freq: HashMap<usize, usize> = HashMap::new();
        for s in &open {
            for &e in *s {
                *freq.entry(e).or_default() += 1;
            }
        }
        let (&e, _) = freq
            .iter()
            .max_by_key(|(&e, &n)| (n, std::cmp::Reverse(e)))
            .expect("open sets are non-empty");
        open.retain(|s| !s.contains(&e));
        size += 1;
    }
    size
}

/// Returns false if the node limit cut the search.
fn branch(
    sets: &[&[usize]],
    chosen: &mut Vec<usize>,
    best: &mut usize,
    nodes: &mut usize,
    limit: usize,
) -> bool {
    *nodes += 1;
    if *nodes > limit {
        return false;
    }
    let open: Vec<&[usize]> = sets
        .iter()
        .copied()
        .filter(|s| !s.iter().any(|e| chosen.contains(e)))
        .collect();
    if open.is_empty() {
        *best = (*best).min(chosen.len());
        return true;
    }
    if chosen.len() + disjoint_lower_bound(&open) >= *best {
        return true;
    }
    let pivot = open.iter().min_by_key(|s| s.len()).expect("non-empty");
    for &e in pivot.iter() {
        chosen.push(e);
        let ok = branch(&open, chosen, best, nodes, limit);
        chosen.pop();
        if !ok {
            return false;
        }
    }
    true
}

/// All inclusion-minimal hitting sets of `sets` (Berge's incremental
/// transversal). Exponential; intended for small collections.
pub fn minimal_hitting_sets(sets: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut current: Vec<Vec<usize>> = vec![Vec::new()];
    for s in sets {
        let mut next: Vec<Vec<usize>> = Vec::new();
        for h in &current {
            if h.iter().any(|e| s.contains(e)) {
                next.push(h.clone());
            } else {
                for &e in s {
                    let mut g = h.clone();
                    g.push(e);
                    g.sort_unstable();
                    next.push(g);
                }
            }
        }
        next.sort();
        next.dedup();
        let minimal: Vec<Vec<usize>> = next
            .iter()
            .filter(|h| {
                !next
                    .iter()
                    .any(|g| g.len() < h.len() && g.iter().all(|e| h.contains(e)))
            })
            .cloned()
            .collect();
        current = minimal;
    }
    current
}

/// Maximum number of simultaneously satisfiable clauses, by SAT-UNSAT linear
/// search with a sequential-counter bound on falsified selectors. `at_least`
/// is a known achievable value. `None` if the budget runs out.
pub fn max_satisfiable(formula: &CnfFormula, at_least: usize, limits: &Limits) -> Option<usize> {
    let ncl = formula.ncl();
    let satisfied_by = |m: &crate::cnf::Assignment| {
        formula
            .clauses()
            .iter()
            .filter(|c| m.clause_value(c) == crate::cnf::Evaluation::Satisfied)
            .count()
    };
    let mut best = at_least;
    {
        let mut inst = SatInstance::new(formula);
        for i in 1..=ncl {
            let s = inst.selector(i);
            inst.solver_mut().set_preferred_phase(s.var(), true);
        }
        match inst.solve(&[], limits) {
            SatOutcome::Sat(m) => best = best.max(satisfied_by(&m)),
            SatOutcome::Unknown => return None,
            SatOutcome::Unsat { .. } => unreachable!("selectors are unconstrained"),
        }
    }
    while best < ncl {
        let mut inst = SatInstance::new(formula);
        let falsified: Vec<SLit> = (1..=ncl).map(|i| !inst.selector(i)).collect();
        add_at_most(&mut inst, &falsified, ncl - best - 1);
        match inst.solve(&[], limits) {
            SatOutcome::Sat(m) => {
                let got = satisfied_by(&m);
                debug_assert!(got > best);
                best = got;
            }
            SatOutcome::Unsat { .. } => return Some(best),
            SatOutcome::Unknown => return None,
        }
    }
    Some(best)
}

/// `(lb, ub)` on MUS sizes. `lb` is the minimum hitting set size of the known
/// MCSes; `ub` is one more than the maximum number of satisfiable clauses,
/// because a MUS minus any clause is satisfiable. If MaxSAT runs out of
/// budget `ub` falls back to `fallback_ub`.
pub fn card_bounds(
    formula: &CnfFormula,
    mcses: &[Vec<usize>],
    fallback_ub: usize,
    limits: &Limits,
) -> (usize, usize) {
    let ncl = formula.ncl();
    let lb = min_hitting_set_size(mcses);
    let hint = mcses.iter().map(|m| ncl - m.len()).max().unwrap_or(0);
    let ub = match max_satisfiable(formula, hint, limits) {
        Some(opt) => (opt + 1).min(ncl),
        None => fallback_ub.min(ncl),
    };
    (lb.min(ub), ub)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverRule {
    pub trigger: usize,
    /// Literal of the trigger clause, DIMACS encoded.
    pub literal: i32,
    /// Clauses containing the negated literal.
    pub candidates: Vec<usize>,
}

/// One rule per clause and literal: a MUS containing `C_i` with `ℓ ∈ C_i`
/// also contains a clause with `¬ℓ`. An empty candidate list means `C_i` is in
/// no MUS.
pub fn cover_rules(formula: &CnfFormula) -> Vec<CoverRule> {
    let mut occ: HashMap<i32, Vec<usize>> = HashMap::new();
    for (i, clause) in formula.indexed() {
        for lit in clause.lits() {
            occ.entry(lit.to_dimacs()).or_default().push(i);
        }
    }
    let mut out = Vec::new();
    for (i, clause) in formula.indexed() {
        for lit in clause.lits() {
            out.push(CoverRule {
                trigger: i,
                literal: lit.to_dimacs(),
                candidates: occ.get(&-lit.to_dimacs()).cloned().unwrap_or_default(),
            });
        }
    }
    out
}

/// Time split for [`HeuristicBundle::compute`], as fractions of the budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeuristicConfig {
    pub mcs_time_fraction: f64,
    pub kernel_time_fraction: f64,
    pub maxsat_time_fraction: f64,
    /// Cap on the number of collected MCSes.
    pub mcs_limit: Option<usize>,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            mcs_time_fraction: 0.1,
            kernel_time_fraction: 0.1,
            maxsat_time_fraction: 0.1,
            mcs_limit: Some(1000),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicBundle {
    pub ncl: usize,
    /// Lean kernel (H1).
    pub union_overapprox: Vec<usize>,
    /// `(lb, ub)` on MUS sizes (H2).
    pub card_bounds: (usize, usize),
    /// Clause components (H3).
    pub components: Vec<Vec<usize>>,
    /// Known MCSes (H4).
    pub mcses: Vec<Vec<usize>>,
    pub mcs_complete: bool,
    /// Negative literal cover (H5).
    pub cover_rules: Vec<CoverRule>,
}

impl HeuristicBundle {
    pub fn compute(formula: &CnfFormula, budget: &Budget) -> Self {
        HeuristicBundle::compute_with(formula, &budget.start(), &HeuristicConfig::default())
    }

    pub fn compute_with(formula: &CnfFormula, limits: &Limits, config: &HeuristicConfig) -> Self {
        let mcs = enumerate_mcs_with(
            formula,
            &limits.share(config.mcs_time_fraction),
            config.mcs_limit,
        );
        let union_overapprox =
            union_overapprox(formula, &limits.share(config.kernel_time_fraction));
        let card_bounds = card_bounds(
            formula,
            &mcs.mcses,
            union_overapprox.len(),
            &limits.share(config.maxsat_time_fraction),
        );
        HeuristicBundle {
            ncl: formula.ncl(),
            union_overapprox,
            card_bounds,
            components: components(formula),
            mcses: mcs.mcses,
            mcs_complete: mcs.complete,
            cover_rules: cover_rules(formula),
        }
    }

    /// Component ordinal of every clause, indexed by clause index (slot 0 unused).
    pub fn component_of(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.ncl + 1];
        for (k, comp) in self.components.iter().enumerate() {
            for &i in comp {
                out[i] = k;
            }
        }
        out
    }

    pub fn summary(&self) -> BundleSummary {
        BundleSummary {
            kernel_size: self.union_overapprox.len(),
            lb: self.card_bounds.0,
            ub: self.card_bounds.1,
            components: self.components.len(),
            mcs_count: self.mcses.len(),
            mcs_complete: self.mcs_complete,
            cover_rules: self.cover_rules.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleSummary {
    pub kernel_size: usize,
    pub lb: usize,
    pub ub: usize,
    pub components: usize,
    pub mcs_count: usize,
    pub mcs_complete: bool,
    pub cover_rules: usize,
}
