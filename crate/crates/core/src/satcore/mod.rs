//! Embedded SAT engine with clause selectors.
//!
//! [`SatInstance`] loads every clause `C_i` of a formula as `¬s_i ∨ C_i`, so
//! assuming the selector `s_i` activates `C_i`. Repeated calls with different
//! selector sets reuse the same solver state.

pub mod solver;

use crate::budget::Limits;
use crate::cnf::{Assignment, CnfFormula, Lit, Var};

pub use solver::{SLit, SolveResult, Solver};

/// Result of a selector-based satisfiability query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    /// The activated clauses are satisfiable; the model is total over the
    /// formula variables.
    Sat(Assignment),
    /// Unsatisfiable. `failed` is a subset of the assumed clause indices
    /// whose clauses are already unsatisfiable together.
    Unsat { failed: Vec<usize> },
    /// The budget ran out first.
    Unknown,
}

impl SatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SatOutcome::Unsat { .. })
    }
}

#[derive(Debug)]
pub struct SatInstance {
    solver: Solver,
    nvars: usize,
    ncl: usize,
}

impl SatInstance {
    pub fn new(formula: &CnfFormula) -> Self {
        SatInstance::with_seed(formula, 0)
    }

    pub fn with_seed(formula: &CnfFormula, seed: u64) -> Self {
        let nvars = formula.nvars() as usize;
        let ncl = formula.ncl();
        let mut solver = Solver::new();
        solver.ensure_vars(nvars + ncl);
        let mut inst = SatInstance { solver, nvars, ncl };
        for (i, clause) in formula.indexed() {
            let mut lits = vec![!inst.selector(i)];
            lits.extend(clause.lits().iter().map(|&l| inst.formula_lit(l)));
            inst.solver.add_clause(&lits);
        }
        inst.solver.set_seed(seed);
        inst
    }

    pub fn ncl(&self) -> usize {
        self.ncl
    }

    /// Solver literal of selector `s_i` (1-based clause index).
    pub fn selector(&self, index: usize) -> SLit {
        assert!(
            index >= 1 && index <= self.ncl,
            "clause index {index} out of range"
        );
        SLit::pos(self.nvars + index - 1)
    }

    pub fn formula_lit(&self, lit: Lit) -> SLit {
        SLit::new(lit.var().id() as usize - 1, !lit.is_positive())
    }

    /// Allocates an auxiliary solver variable for side constraints.
    pub fn new_aux_var(&mut self) -> usize {
        self.solver.new_var()
    }

    /// Adds a permanent side constraint (blocking clauses, cardinality
    /// encodings) in terms of solver literals.
    pub fn add_clause(&mut self, lits: &[SLit]) -> bool {
        self.solver.add_clause(lits)
    }

    pub fn solver_mut(&mut self) -> &mut Solver {
        &mut self.solver
    }

    /// Checks the clauses with the given indices. Clauses not listed are
    /// inactive unless side constraints force their selectors.
    pub fn solve(&mut self, clauses: &[usize], limits: &Limits) -> SatOutcome {
        let assumptions: Vec<SLit> = clauses.iter().map(|&i| self.selector(i)).collect();
        self.solve_lits(&assumptions, limits)
    }

    /// Like [`SatInstance::solve`] with raw solver assumptions. Failed
    /// assumptions that are not selectors are dropped from the result.
    pub fn solve_lits(&mut self, assumptions: &[SLit], limits: &Limits) -> SatOutcome {
        match self.solver.solve_with(assumptions, limits) {
            SolveResult::Sat => SatOutcome::Sat(self.model()),
            SolveResult::Unsat => {
                let mut failed: Vec<usize> = self
                    .solver
                    .failed_assumptions()
                    .iter()
                    .filter_map(|&l| self.selector_index(l))
                    .collect();
                failed.sort_unstable();
                failed.dedup();
                SatOutcome::Unsat { failed }
            }
            SolveResult::Unknown => SatOutcome::Unknown,
        }
    }

    /// Selector value in the last model.
    pub fn selector_in_model(&self, index: usize) -> bool {
        self.solver.model_value(self.selector(index))
    }

    fn selector_index(&self, lit: SLit) -> Option<usize> {
        let v = lit.var();
        (!lit.is_negated() && v >= self.nvars && v < self.nvars + self.ncl)
            .then(|| v - self.nvars + 1)
    }

    fn model(&self) -> Assignment {
        let mut a = Assignment::new();
        let model = self.solver.model();
        for (v, &value) in model.iter().take(self.nvars).enumerate() {
            a.set(Var::new(v as u32 + 1), value);
        }
        a
    }
}

/// Adds clauses forcing at most `k` of `lits` to be true (sequential counter).
pub fn add_at_most(inst: &mut SatInstance, lits: &[SLit], k: usize) {
    let n = lits.len();
    if k >= n {
        return;
    }
    if k == 0 {
        for &l in lits {
            inst.add_clause(&[!l]);
        }
        return;
    }
    // reg[i][j]: at least j+1 of lits[..=i] are true
    let mut prev: Vec<SLit> = Vec::new();
    for (i, &x) in lits.iter().enumerate() {
        let width = k.min(i + 1);
        let cur: Vec<SLit> = (0..width).map(|_| SLit::pos(inst.new_aux_var())).collect();
        inst.add_clause(&[!x, cur[0]]);
        for j in 0..width {
            if j < prev.len() {
                inst.add_clause(&[!prev[j], cur[j]]);
            }
            if j > 0 && j - 1 < prev.len() {
                inst.add_clause(&[!x, !prev[j - 1], cur[j]]);
            }
        }
        if prev.len() == k {
            inst.add_clause(&[!x, !prev[k - 1]]);
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Evaluation;
    use crate::generate::random_formula;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn two_mus() -> CnfFormula {
        CnfFormula::from_clauses([vec![1], vec![-1], vec![2], vec![-1, -2]])
    }

    fn truth_table_sat(f: &CnfFormula) -> bool {
        let n = f.nvars() as usize;
        (0u32..(1 << n)).any(|bits| {
            let values: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            f.evaluate(&Assignment::total(&values)) == Evaluation::Satisfied
        })
    }

    #[test]
    fn example_core() {
        let f = two_mus();
        let mut inst = SatInstance::new(&f);
        match inst.solve(&[1, 2], &Limits::none()) {
            SatOutcome::Unsat { failed } => {
                assert!(failed.iter().all(|i| [1, 2].contains(i)));
                assert!(!truth_table_sat(&f.subformula(&failed)));
            }
            other => panic!("expected unsat, got {other:?}"),
        }
        match inst.solve(&[2, 3, 4], &Limits::none()) {
            SatOutcome::Sat(model) => {
                assert_eq!(model.get(Var::new(1)), Some(false));
                assert_eq!(model.get(Var::new(2)), Some(true));
            }
            other => panic!("expected sat, got {other:?}"),
        }
        assert!(inst.solve(&[], &Limits::none()).is_sat());
    }

    #[test]
    fn empty_clause_fails_alone() {
        let f = CnfFormula::from_clauses([vec![1], vec![]]);
        let mut inst = SatInstance::new(&f);
        assert_eq!(
            inst.solve(&[1, 2], &Limits::none()),
            SatOutcome::Unsat { failed: vec![2] }
        );
        assert!(inst.solve(&[1], &Limits::none()).is_sat());
    }

    #[test]
    fn at_most_k_counts_exactly() {
        for n in 1..6usize {
            for k in 0..=n {
                for forced in 0..=n {
                    let mut inst = SatInstance::new(&CnfFormula::new(n as u32));
                    let lits: Vec<SLit> = (0..n).map(SLit::pos).collect();
                    add_at_most(&mut inst, &lits, k);
                    for &l in &lits[..forced] {
                        inst.add_clause(&[l]);
                    }
                    let sat = inst.solve(&[], &Limits::none()).is_sat();
                    assert_eq!(sat, forced <= k, "n={n} k={k} forced={forced}");
                }
            }
        }
    }

    #[test]
    fn agrees_with_truth_tables() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..3000 {
            let f = random_formula(&mut rng, 1..=12, 1..=40, 1..=4);
            let mut inst = SatInstance::new(&f);
            let all: Vec<usize> = (1..=f.ncl()).collect();
            let expected = truth_table_sat(&f);
            match inst.solve(&all, &Limits::none()) {
                SatOutcome::Sat(model) => {
                    assert!(expected);
                    assert_eq!(f.evaluate(&model), Evaluation::Satisfied);
                }
                SatOutcome::Unsat { failed } => {
                    assert!(!expected);
                    assert!(!truth_table_sat(&f.subformula(&failed)));
                }
                SatOutcome::Unknown => panic!("no budget was set"),
            }
        }
    }

    #[test]
    fn incremental_subsets_agree_with_truth_tables() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let f = random_formula(&mut rng, 2..=6, 3..=10, 1..=3);
            let mut inst = SatInstance::new(&f);
            for mask in 0u32..(1 << f.ncl()) {
                let subset: Vec<usize> =
                    (1..=f.ncl()).filter(|i| mask >> (i - 1) & 1 == 1).collect();
                let expected = truth_table_sat(&f.subformula(&subset));
                match inst.solve(&subset, &Limits::none()) {
                    SatOutcome::Sat(model) => {
                        assert!(expected);
                        assert_eq!(
                            f.subformula(&subset).evaluate(&model),
                            Evaluation::Satisfied
                        );
                    }
                    SatOutcome::Unsat { failed } => {
                        assert!(!expected);
                        assert!(failed.iter().all(|i| subset.contains(i)));
                        assert!(!truth_table_sat(&f.subformula(&failed)));
                    }
                    SatOutcome::Unknown => unreachable!(),
                }
            }
        }
    }
}
