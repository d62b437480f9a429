//! Construction of the answer-set program `P_F` for a CNF formula `F`.
//!
//! ```text
//! pos_x ∨ neg_x ← ⊤.                          for every variable x
//! unsat ← cls_i, neg_x.., pos_y..             for every clause C_i
//! ⊥ ← not unsat.
//! pos_x ← unsat.   neg_x ← unsat.             for every variable x
//! {cls_1; …; cls_ncl} ≥ 0 ← ⊤.
//! ```
//!
//! The guessed `pos/neg` atoms describe an assignment; `unsat` is derived when
//! a selected clause is falsified and then saturates every `pos/neg` atom.
//! Answer sets therefore select exactly the unsatisfiable cores of `F`, and the
//! answer sets minimal on the `cls_i` atoms select the MUSes.
//!
//! Optional pruning rules (H1–H5) come from a [`HeuristicBundle`]; none of them
//! removes a MUS.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aspsem::{AspProgram, AspRule, Atom, RuleForm, Section};
use crate::cnf::CnfFormula;
use crate::heuristics::HeuristicBundle;

/// Which pruning rules to add.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HeuristicFlags {
    /// Exclude clauses outside the union over-approximation.
    #[serde(default)]
    pub h1: bool,
    /// Bound the number of selected clauses.
    #[serde(default)]
    pub h2: bool,
    /// Forbid selecting clauses from different components.
    #[serde(default)]
    pub h3: bool,
    /// Hit every known MCS.
    #[serde(default)]
    pub h4: bool,
    /// Negative literal cover.
    #[serde(default)]
    pub h5: bool,
}

impl HeuristicFlags {
    pub const NONE: HeuristicFlags = HeuristicFlags {
        h1: false,
        h2: false,
        h3: false,
        h4: false,
        h5: false,
    };

    pub const ALL: HeuristicFlags = HeuristicFlags {
        h1: true,
        h2: true,
        h3: true,
        h4: true,
        h5: true,
    };

    /// Bit `k` enables heuristic `k + 1`; `0..32` covers every combination.
    pub fn from_bits(bits: u8) -> Self {
        HeuristicFlags {
            h1: bits & 1 != 0,
            h2: bits & 2 != 0,
            h3: bits & 4 != 0,
            h4: bits & 8 != 0,
            h5: bits & 16 != 0,
        }
    }

    pub fn any(self) -> bool {
        self.h1 || self.h2 || self.h3 || self.h4 || self.h5
    }

    pub fn enabled(self) -> Vec<&'static str> {
        [
            (self.h1, "h1"),
            (self.h2, "h2"),
            (self.h3, "h3"),
            (self.h4, "h4"),
            (self.h5, "h5"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodingOptions {
    pub flags: HeuristicFlags,
    pub bundle: Option<HeuristicBundle>,
    /// Emit `#show` directives for the selector atoms.
    pub emit_show_directive: bool,
    /// Emit `#heuristic` directives preferring selectors false, so a solver
    /// run with `--enum-mode=domRec --heuristic=domain` enumerates answer sets
    /// that are subset-minimal on the selectors.
    pub emit_domain_heuristic: bool,
    /// Above this many cross-component clause pairs, H3 switches from pairwise
    /// constraints to a linear "one component only" formulation.
    pub h3_pair_limit: usize,
    /// Represent the H2 upper bound by rules inside the program. The emitted
    /// text always uses the choice-rule upper bound instead.
    pub expand_upper_bound: bool,
}

impl Default for EncodingOptions {
    fn default() -> Self {
        EncodingOptions {
            flags: HeuristicFlags::NONE,
            bundle: None,
            emit_show_directive: true,
            emit_domain_heuristic: true,
            h3_pair_limit: 1_000_000,
            expand_upper_bound: true,
        }
    }
}

impl EncodingOptions {
    pub fn with_heuristics(flags: HeuristicFlags, bundle: HeuristicBundle) -> Self {
        EncodingOptions {
            flags,
            bundle: Some(bundle),
            ..EncodingOptions::default()
        }
    }

    fn upper_bound(&self) -> Option<usize> {
        match (&self.bundle, self.flags.h2) {
            (Some(b), true) => Some(b.card_bounds.1),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("heuristic {0} is enabled but no heuristic bundle was supplied")]
    MissingBundle(&'static str),
    #[error("heuristic bundle was computed for {bundle} clauses, formula has {formula}")]
    BundleMismatch { bundle: usize, formula: usize },
}

/// `Λ = {cls_1, …, cls_ncl}` in clause order.
pub fn selector_set(ncl: usize) -> Vec<Atom> {
    (1..=ncl).map(Atom::Cls).collect()
}

pub fn build_program(
    formula: &CnfFormula,
    opts: &EncodingOptions,
) -> Result<AspProgram, EncodeError> {
    let bundle = match (&opts.bundle, opts.flags.enabled().first()) {
        (None, Some(name)) => return Err(EncodeError::MissingBundle(name)),
        (Some(b), _) if b.ncl != formula.ncl() => {
            return Err(EncodeError::BundleMismatch {
                bundle: b.ncl,
                formula: formula.ncl(),
            })
        }
        (b, _) => b.as_ref(),
    };

    let mut vars: Vec<u32> = formula
        .clauses()
        .iter()
        .flat_map(|c| c.lits().iter().map(|l| l.var().id()))
        .collect();
    vars.sort_unstable();
    vars.dedup();

    let mut p = AspProgram::new();
    for &x in &vars {
        p.add_disjunctive(Section::Guess, &[Atom::Pos(x), Atom::Neg(x)], &[], &[]);
    }
    for (i, clause) in formula.indexed() {
        let mut body = vec![Atom::Cls(i)];
        body.extend(clause.lits().iter().map(|l| {
            // the clause is falsified when each of its literals is false
            if l.is_positive() {
                Atom::Neg(l.var().id())
            } else {
                Atom::Pos(l.var().id())
            }
        }));
        p.add_disjunctive(Section::Detect, &[Atom::Unsat], &body, &[]);
    }
    p.add_disjunctive(Section::RequireUnsat, &[], &[], &[Atom::Unsat]);
    for &x in &vars {
        p.add_disjunctive(Section::Saturate, &[Atom::Pos(x)], &[Atom::Unsat], &[]);
        p.add_disjunctive(Section::Saturate, &[Atom::Neg(x)], &[Atom::Unsat], &[]);
    }

    let selectors = selector_set(formula.ncl());
    let (lb, ub) = match (bundle, opts.flags.h2) {
        (Some(b), true) => b.card_bounds,
        _ => (0, formula.ncl()),
    };
    p.add_cardinality(
        Section::Select,
        &selectors,
        lb.min(selectors.len()),
        &[],
        &[],
    );
    if opts.flags.h2 && opts.expand_upper_bound {
        add_upper_bound(&mut p, &selectors, ub);
    }

    let Some(bundle) = bundle else {
        return Ok(p);
    };
    if opts.flags.h1 {
        apply_h1(&mut p, formula.ncl(), &bundle.union_overapprox);
    }
    if opts.flags.h3 {
        apply_h3(
            &mut p,
            formula.ncl(),
            &bundle.components,
            opts.h3_pair_limit,
        );
    }
    if opts.flags.h4 {
        apply_h4(&mut p, &bundle.mcses);
    }
    if opts.flags.h5 {
        apply_h5(&mut p, bundle);
    }
    Ok(p)
}

/// `⊥ ← cls_i` for every clause outside `overapprox`.
pub fn apply_h1(program: &mut AspProgram, ncl: usize, overapprox: &[usize]) {
    let keep: BTreeSet<usize> = overapprox.iter().copied().collect();
    for i in (1..=ncl).filter(|i| !keep.contains(i)) {
        program.add_disjunctive(Section::H1, &[], &[Atom::Cls(i)], &[]);
    }
}

// Upper bounds with at most this many (ub+1)-subsets are written as one
// constraint per subset; larger ones use a sequential counter.
const SUBSET_CONSTRAINT_LIMIT: u128 = 4096;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Rejects interpretations selecting more than `ub` of `selectors`.
pub fn add_upper_bound(program: &mut AspProgram, selectors: &[Atom], ub: usize) {
    upper_bound_rules(program, selectors, ub, SUBSET_CONSTRAINT_LIMIT);
}

fn upper_bound_rules(program: &mut AspProgram, selectors: &[Atom], ub: usize, subset_limit: u128) {
    let n = selectors.len();
    if ub >= n {
        return;
    }
    let k = ub + 1;
    if binomial(n, k) <= subset_limit {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            let body: Vec<Atom> = combo.iter().map(|&c| selectors[c].clone()).collect();
            program.add_disjunctive(Section::H2, &[], &body, &[]);
            // next k-combination in lexicographic order
            let Some(pos) = (0..k).rev().find(|&p| combo[p] < n - k + p) else {
                break;
            };
            combo[pos] += 1;
            for q in pos + 1..k {
                combo[q] = combo[q - 1] + 1;
            }
        }
        return;
    }
    // atleast_i_j: at least j of the first i selectors are true
    let counter = |i: usize, j: usize| Atom::Other(format!("atleast_{i}_{j}"));
    for i in 1..=n {
        let x = &selectors[i - 1];
        for j in 1..=k.min(i) {
            if j == 1 {
                program.add_disjunctive(
                    Section::H2,
                    &[counter(i, 1)],
                    std::slice::from_ref(x),
                    &[],
                );
            } else {
                program.add_disjunctive(
                    Section::H2,
                    &[counter(i, j)],
                    &[counter(i - 1, j - 1), x.clone()],
                    &[],
                );
            }
            if j < i {
                program.add_disjunctive(Section::H2, &[counter(i, j)], &[counter(i - 1, j)], &[]);
            }
        }
    }
    program.add_disjunctive(Section::H2, &[], &[counter(n, k)], &[]);
}

/// All selected clauses must come from one component.
pub fn apply_h3(
    program: &mut AspProgram,
    ncl: usize,
    components: &[Vec<usize>],
    pair_limit: usize,
) {
    if components.len() < 2 {
        return;
    }
    let sizes: u128 = components.iter().map(|c| (c.len() as u128).pow(2)).sum();
    let cross_pairs = ((ncl as u128).pow(2) - sizes) / 2;
    if cross_pairs <= pair_limit as u128 {
        let mut comp = vec![0usize; ncl + 1];
        for (k, c) in components.iter().enumerate() {
            for &i in c {
                comp[i] = k;
            }
        }
        for i in 1..=ncl {
            for j in (i + 1)..=ncl {
                if comp[i] != comp[j] {
                    program.add_disjunctive(Section::H3, &[], &[Atom::Cls(i), Atom::Cls(j)], &[]);
                }
            }
        }
        return;
    }
    // comp_k: some clause of component k is selected; upto_k: some clause of
    // components 1..=k is selected. At most one comp_k may hold.
    let comp = |k: usize| Atom::Other(format!("comp_{k}"));
    let upto = |k: usize| Atom::Other(format!("upto_{k}"));
    for (k, members) in components.iter().enumerate() {
        let k = k + 1;
        for &i in members {
            program.add_disjunctive(Section::H3, &[comp(k)], &[Atom::Cls(i)], &[]);
        }
        program.add_disjunctive(Section::H3, &[upto(k)], &[comp(k)], &[]);
        if k > 1 {
            program.add_disjunctive(Section::H3, &[upto(k)], &[upto(k - 1)], &[]);
            program.add_disjunctive(Section::H3, &[], &[upto(k - 1), comp(k)], &[]);
        }
    }
}

/// `⊥ ← not cls_i1, …, not cls_ik` for every known MCS.
pub fn apply_h4(program: &mut AspProgram, mcses: &[Vec<usize>]) {
    for mcs in mcses {
        let neg: Vec<Atom> = mcs.iter().map(|&i| Atom::Cls(i)).collect();
        program.add_disjunctive(Section::H4, &[], &[], &neg);
    }
}

/// `{cls_j1; …; cls_jk} ≥ 1 ← cls_i`, or `⊥ ← cls_i` when no clause holds the
/// complementary literal. Identical rules are emitted once.
pub fn apply_h5(program: &mut AspProgram, bundle: &HeuristicBundle) {
    let mut seen: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    for rule in &bundle.cover_rules {
        if !seen.insert((rule.trigger, rule.candidates.clone())) {
            continue;
        }
        let trigger = [Atom::Cls(rule.trigger)];
        if rule.candidates.is_empty() {
            program.add_disjunctive(Section::H5, &[], &trigger, &[]);
        } else {
            let head: Vec<Atom> = rule.candidates.iter().map(|&j| Atom::Cls(j)).collect();
            program.add_cardinality(Section::H5, &head, 1, &trigger, &[]);
        }
    }
}

fn write_rule(out: &mut String, program: &AspProgram, rule: &AspRule, ub: Option<usize>) {
    let names = |ids: &[crate::aspsem::AtomId]| {
        ids.iter()
            .map(|&i| program.atom(i).to_string())
            .collect::<Vec<_>>()
    };
    let head = match rule.form {
        RuleForm::Disjunctive => names(&rule.head).join(" | "),
        RuleForm::Cardinality { lb } => {
            let elems = names(&rule.head).join("; ");
            match ub {
                Some(ub) => format!("{lb} {{ {elems} }} {ub}"),
                None => format!("{lb} {{ {elems} }}"),
            }
        }
    };
    let mut body = names(&rule.body_pos);
    body.extend(
        names(&rule.body_neg)
            .into_iter()
            .map(|n| format!("not {n}")),
    );
    let _ = match (head.is_empty(), body.is_empty()) {
        (_, true) => writeln!(out, "{head}."),
        (true, false) => writeln!(out, ":- {}.", body.join(", ")),
        (false, false) => writeln!(out, "{head} :- {}.", body.join(", ")),
    };
}

/// Renders the program as ASP-Core-2 text, one rule per line, with a
/// `% [section]` banner whenever the section changes. Upper-bound rules are
/// replaced by the bound on the selector choice rule.
pub fn emit_aspcore2(program: &AspProgram, opts: &EncodingOptions) -> String {
    let mut out = String::new();
    let ub = opts.upper_bound();
    let mut current: Option<Section> = None;
    for (rule, &section) in program.rules().iter().zip(program.sections()) {
        if section == Section::H2 {
            continue;
        }
        if current != Some(section) {
            let _ = writeln!(out, "% [{}]", section.tag());
            current = Some(section);
        }
        let bound = if section == Section::Select { ub } else { None };
        write_rule(&mut out, program, rule, bound);
    }
    let selectors = program.selector_atoms();
    if opts.emit_show_directive && !selectors.is_empty() {
        for &s in &selectors {
            let _ = writeln!(out, "#show {}/0.", program.atom(s));
        }
    }
    if opts.emit_domain_heuristic && !selectors.is_empty() {
        for &s in &selectors {
            let _ = writeln!(out, "#heuristic {}. [1,false]", program.atom(s));
        }
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct AspParseError {
    pub line: usize,
    pub message: String,
}

/// Reads back the subset of ASP-Core-2 produced by [`emit_aspcore2`]:
/// disjunctive rules, constraints, choice rules with optional bounds, `not`
/// in bodies, `%` comments (section banners are honoured) and `#` directives
/// (skipped). An upper bound on the selector choice rule is expanded into
/// rules when `expand_upper_bound` is set.
pub fn parse_aspcore2(text: &str, expand_upper_bound: bool) -> Result<AspProgram, AspParseError> {
    let mut program = AspProgram::new();
    let mut section = Section::Other;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(comment) = line.strip_prefix('%') {
            let comment = comment.trim();
            if let Some(tag) = comment.strip_prefix('[').and_then(|c| c.split(']').next()) {
                if let Some(s) = Section::from_tag(tag) {
                    section = s;
                }
            }
            continue;
        }
        let err = |message: &str| AspParseError {
            line: line_no,
            message: message.to_string(),
        };
        let stmt = line
            .strip_suffix('.')
            .ok_or_else(|| err("statement must end with '.'"))?;
        let (head, body) = match stmt.split_once(":-") {
            Some((h, b)) => (h.trim(), Some(b.trim())),
            None => (stmt.trim(), None),
        };
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        if let Some(body) = body {
            for lit in body.split(',') {
                let lit = lit.trim();
                match lit.strip_prefix("not ") {
                    Some(a) => neg.push(atom_token(a.trim()).ok_or_else(|| err("bad atom"))?),
                    None => pos.push(atom_token(lit).ok_or_else(|| err("bad atom"))?),
                }
            }
        }
        if let Some(open) = head.find('{') {
            let close = head.rfind('}').ok_or_else(|| err("unclosed '{'"))?;
            let lb_text = head[..open].trim();
            let lb: usize = if lb_text.is_empty() {
                0
            } else {
                lb_text.parse().map_err(|_| err("bad lower bound"))?
            };
            let ub_text = head[close + 1..].trim();
            let ub: Option<usize> = if ub_text.is_empty() {
                None
            } else {
                Some(ub_text.parse().map_err(|_| err("bad upper bound"))?)
            };
            let elems: Vec<Atom> = head[open + 1..close]
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| atom_token(s).ok_or_else(|| err("bad atom")))
                .collect::<Result<_, _>>()?;
            if lb > elems.len() {
                return Err(err("lower bound exceeds element count"));
            }
            program.add_cardinality(section, &elems, lb, &pos, &neg);
            if let (Some(ub), true) = (ub, expand_upper_bound) {
                add_upper_bound(&mut program, &elems, ub);
            }
        } else {
            let head_atoms: Vec<Atom> = head
                .split('|')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| atom_token(s).ok_or_else(|| err("bad atom")))
                .collect::<Result<_, _>>()?;
            if head_atoms.is_empty() && body.is_none() {
                return Err(err("empty statement"));
            }
            program.add_disjunctive(section, &head_atoms, &pos, &neg);
        }
    }
    Ok(program)
}

fn atom_token(s: &str) -> Option<Atom> {
    let valid = s.chars().next().is_some_and(|c| c.is_ascii_lowercase())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    valid.then(|| Atom::parse(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::{cover_rules, CoverRule};

    fn two_mus() -> CnfFormula {
        CnfFormula::from_clauses([vec![1], vec![-1], vec![2], vec![-1, -2]])
    }

    fn rendered(p: &AspProgram) -> Vec<String> {
        p.rules().iter().map(|r| p.display_rule(r)).collect()
    }

    fn bundle_for(f: &CnfFormula) -> HeuristicBundle {
        HeuristicBundle::compute(f, &crate::Budget::unlimited())
    }

    #[test]
    fn example_program_matches_listing() {
        let p = build_program(&two_mus(), &EncodingOptions::default()).unwrap();
        assert_eq!(
            rendered(&p),
            vec![
                "pos_x1 | neg_x1.",
                "pos_x2 | neg_x2.",
                "unsat :- cls_1, neg_x1.",
                "unsat :- cls_2, pos_x1.",
                "unsat :- cls_3, neg_x2.",
                "unsat :- cls_4, pos_x1, pos_x2.",
                ":- not unsat.",
                "pos_x1 :- unsat.",
                "neg_x1 :- unsat.",
                "pos_x2 :- unsat.",
                "neg_x2 :- unsat.",
                "0 { cls_1; cls_2; cls_3; cls_4 }.",
            ]
        );
        assert_eq!(p.atoms().len(), 9);
    }

    #[test]
    fn unit_clause_detection_rule() {
        let p = build_program(
            &CnfFormula::from_clauses([[1]]),
            &EncodingOptions::default(),
        )
        .unwrap();
        assert_eq!(p.rules_in(Section::Detect).count(), 1);
        assert_eq!(
            p.display_rule(p.rules_in(Section::Detect).next().unwrap()),
            "unsat :- cls_1, neg_x1."
        );
    }

    #[test]
    fn empty_formula_program() {
        let p = build_program(&CnfFormula::new(0), &EncodingOptions::default()).unwrap();
        assert_eq!(rendered(&p), vec![":- not unsat.", "0 {  }."]);
    }

    #[test]
    fn flags_without_bundle_are_rejected() {
        let opts = EncodingOptions {
            flags: HeuristicFlags {
                h3: true,
                ..HeuristicFlags::NONE
            },
            ..EncodingOptions::default()
        };
        assert_eq!(
            build_program(&two_mus(), &opts),
            Err(EncodeError::MissingBundle("h3"))
        );
    }

    #[test]
    fn h1_adds_exclusions_outside_overapprox() {
        let f = two_mus();
        let mut p = build_program(&f, &EncodingOptions::default()).unwrap();
        let before = p.clone();
        apply_h1(&mut p, 4, &[1, 2, 3, 4]);
        assert_eq!(p, before);

        let g = CnfFormula::from_clauses([[1], [-1], [2]]);
        let mut p = build_program(&g, &EncodingOptions::default()).unwrap();
        apply_h1(&mut p, 3, &[1, 2]);
        let h1: Vec<String> = p.rules_in(Section::H1).map(|r| p.display_rule(r)).collect();
        assert_eq!(h1, vec![":- cls_3."]);
    }

    #[test]
    fn upper_bound_by_subsets_and_by_counter_agree() {
        use crate::aspsem::{enumerate_answer_sets, BruteForceCap};
        let sel = selector_set(5);
        for ub in 0..=5 {
            let sizes = |subset_limit: u128| {
                let mut p = AspProgram::new();
                p.add_cardinality(Section::Select, &sel, 0, &[], &[]);
                upper_bound_rules(&mut p, &sel, ub, subset_limit);
                let mut out: Vec<usize> = enumerate_answer_sets(&p, BruteForceCap(40))
                    .unwrap()
                    .iter()
                    .map(|m| m.selected_clauses(&p).len())
                    .collect();
                out.sort_unstable();
                out
            };
            let by_subsets = sizes(u128::MAX);
            let by_counter = sizes(0);
            assert_eq!(by_subsets, by_counter, "ub={ub}");
            assert!(by_subsets.iter().all(|&s| s <= ub));
            let expected: u128 = (0..=ub).map(|k| binomial(5, k)).sum();
            assert_eq!(by_subsets.len() as u128, expected);
        }
    }

    #[test]
    fn h3_linear_form_matches_pairs() {
        use crate::aspsem::{enumerate_answer_sets, BruteForceCap};
        let comps = vec![vec![1, 2], vec![3], vec![4]];
        let sel = selector_set(4);
        let project = |limit: usize| {
            let mut p = AspProgram::new();
            p.add_cardinality(Section::Select, &sel, 0, &[], &[]);
            apply_h3(&mut p, 4, &comps, limit);
            let ids = p.selector_atoms();
            let mut out: Vec<Vec<usize>> = enumerate_answer_sets(&p, BruteForceCap(30))
                .unwrap()
                .iter()
                .map(|m| m.selected_clauses(&p))
                .collect();
            out.sort();
            assert_eq!(ids.len(), 4);
            out
        };
        let pairs = project(usize::MAX);
        let linear = project(0);
        assert_eq!(pairs, linear);
        assert_eq!(pairs.len(), 1 + 3 + 1 + 1); // {}, {1},{2},{1,2}, {3}, {4}
    }

    #[test]
    fn h5_rules_and_exclusions() {
        let f = CnfFormula::from_clauses([vec![1, 2], vec![-1]]);
        let bundle = HeuristicBundle {
            ncl: 2,
            union_overapprox: vec![1, 2],
            card_bounds: (0, 2),
            components: vec![vec![1, 2]],
            mcses: vec![],
            mcs_complete: false,
            cover_rules: cover_rules(&f),
        };
        assert_eq!(
            bundle.cover_rules[0],
            CoverRule {
                trigger: 1,
                literal: 1,
                candidates: vec![2]
            }
        );
        let opts = EncodingOptions::with_heuristics(
            HeuristicFlags {
                h5: true,
                ..HeuristicFlags::NONE
            },
            bundle,
        );
        let p = build_program(&f, &opts).unwrap();
        let h5: Vec<String> = p.rules_in(Section::H5).map(|r| p.display_rule(r)).collect();
        assert_eq!(
            h5,
            vec![
                "1 { cls_2 } :- cls_1.",
                ":- cls_1.",
                "1 { cls_1 } :- cls_2."
            ]
        );
    }

    #[test]
    fn emitted_text_for_example() {
        let f = two_mus();
        let opts = EncodingOptions::default();
        let p = build_program(&f, &opts).unwrap();
        let text = emit_aspcore2(&p, &opts);
        let rules = text
            .lines()
            .filter(|l| !l.starts_with('%') && !l.starts_with('#'))
            .count();
        assert_eq!(rules, 12);
        assert!(text.contains("pos_x1 | neg_x1.\n"));
        assert!(text.contains(":- not unsat.\n"));
        assert!(text.contains("0 { cls_1; cls_2; cls_3; cls_4 }.\n"));
        assert_eq!(text.lines().filter(|l| l.starts_with("#show")).count(), 4);
        assert_eq!(
            text.lines().filter(|l| l.starts_with("#heuristic")).count(),
            4
        );
        assert!(text.contains("#heuristic cls_3. [1,false]\n"));

        let bare = EncodingOptions {
            emit_show_directive: false,
            emit_domain_heuristic: false,
            ..EncodingOptions::default()
        };
        assert!(!emit_aspcore2(&p, &bare).contains('#'));
    }

    #[test]
    fn empty_program_text() {
        let text = emit_aspcore2(&AspProgram::new(), &EncodingOptions::default());
        assert!(text.is_empty());
    }

    #[test]
    fn h2_bounds_appear_on_choice_rule() {
        let f = two_mus();
        let opts = EncodingOptions::with_heuristics(HeuristicFlags::ALL, bundle_for(&f));
        let p = build_program(&f, &opts).unwrap();
        let text = emit_aspcore2(&p, &opts);
        assert!(
            text.contains("2 { cls_1; cls_2; cls_3; cls_4 } 4.\n"),
            "{text}"
        );
        assert!(!text.contains("[h2]"));
    }

    #[test]
    fn text_round_trip() {
        let f = CnfFormula::from_clauses([
            vec![1, 2],
            vec![-1],
            vec![-2, 3],
            vec![-3],
            vec![4],
            vec![-4, 1],
        ]);
        let bundle = bundle_for(&f);
        for bits in 0..32u8 {
            let mut opts =
                EncodingOptions::with_heuristics(HeuristicFlags::from_bits(bits), bundle.clone());
            // squeeze the bound so H2 emits rules
            opts.bundle.as_mut().unwrap().card_bounds = (1, 3);
            let p = build_program(&f, &opts).unwrap();
            let back = parse_aspcore2(&emit_aspcore2(&p, &opts), true).unwrap();
            assert_eq!(back, p, "flags {bits:05b}");
        }
    }

    #[test]
    fn reader_rejects_garbage() {
        assert!(parse_aspcore2("a :- b", true).is_err());
        assert!(parse_aspcore2("3 { a; b }.", true).is_err());
        assert!(parse_aspcore2("Foo.", true).is_err());
        let p = parse_aspcore2("% hi\na | b.\n:- a, not b.\n{ c }.\n", true).unwrap();
        assert_eq!(p.rules().len(), 3);
    }
}
