//! Ground answer-set semantics: rule satisfaction, the Gelfond-Lifschitz
//! reduct, answer-set checking and exhaustive enumeration.
//!
//! Two rule forms exist. A disjunctive rule `a1 ∨ … ∨ ak ← b+, not b-` (an
//! empty head is a constraint) and a cardinality rule
//! `{a1; …; ak} ≥ lb ← b+, not b-`. Empty bodies stand for `⊤`.
//!
//! Everything here is exponential and meant as a reference oracle for small
//! programs. Enumeration refuses programs with more atoms than the configured
//! cap.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// Clause selector for the clause with this 1-based index.
    Cls(usize),
    /// Variable with this id may be true.
    Pos(u32),
    /// Variable with this id may be false.
    Neg(u32),
    Unsat,
    Other(String),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Cls(i) => write!(f, "cls_{i}"),
            Atom::Pos(v) => write!(f, "pos_x{v}"),
            Atom::Neg(v) => write!(f, "neg_x{v}"),
            Atom::Unsat => write!(f, "unsat"),
            Atom::Other(name) => write!(f, "{name}"),
        }
    }
}

impl Atom {
    /// Inverse of `Display`.
    pub fn parse(name: &str) -> Atom {
        let num = |prefix: &str| {
            name.strip_prefix(prefix)
                .filter(|s| {
                    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && !s.starts_with('0')
                })
                .and_then(|s| s.parse::<u64>().ok())
        };
        if name == "unsat" {
            Atom::Unsat
        } else if let Some(i) = num("cls_") {
            Atom::Cls(i as usize)
        } else if let Some(v) = num("pos_x") {
            Atom::Pos(v as u32)
        } else if let Some(v) = num("neg_x") {
            Atom::Neg(v as u32)
        } else {
            Atom::Other(name.to_string())
        }
    }
}

/// Index of an interned atom within its program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub u32);

impl AtomId {
    fn bit(self) -> u64 {
        1u64 << self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleForm {
    Disjunctive,
    Cardinality { lb: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AspRule {
    pub form: RuleForm,
    pub head: Vec<AtomId>,
    pub body_pos: Vec<AtomId>,
    pub body_neg: Vec<AtomId>,
}

impl AspRule {
    pub fn is_constraint(&self) -> bool {
        self.form == RuleForm::Disjunctive && self.head.is_empty()
    }
}

/// Which part of the construction produced a rule. Only used for grouping
/// and round-tripping text; semantics ignore it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Section {
    /// `pos_x ∨ neg_x ← ⊤`
    Guess,
    /// `unsat ← cls_i, …`
    Detect,
    /// `⊥ ← not unsat`
    RequireUnsat,
    /// `pos_x ← unsat`, `neg_x ← unsat`
    Saturate,
    /// The selector choice rule.
    Select,
    H1,
    H2,
    H3,
    H4,
    H5,
    Other,
}

impl Section {
    pub const ALL: [Section; 11] = [
        Section::Guess,
        Section::Detect,
        Section::RequireUnsat,
        Section::Saturate,
        Section::Select,
        Section::H1,
        Section::H2,
        Section::H3,
        Section::H4,
        Section::H5,
        Section::Other,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Section::Guess => "guess",
            Section::Detect => "detect",
            Section::RequireUnsat => "require-unsat",
            Section::Saturate => "saturate",
            Section::Select => "select",
            Section::H1 => "h1",
            Section::H2 => "h2",
            Section::H3 => "h3",
            Section::H4 => "h4",
            Section::H5 => "h5",
            Section::Other => "other",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Section> {
        Section::ALL.into_iter().find(|s| s.tag() == tag)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AspProgram {
    atoms: Vec<Atom>,
    index: HashMap<Atom, AtomId>,
    rules: Vec<AspRule>,
    sections: Vec<Section>,
}

impl AspProgram {
    pub fn new() -> Self {
        AspProgram::default()
    }

    /// Interns atoms and appends the rule.
    pub fn add_rule(
        &mut self,
        section: Section,
        form: RuleForm,
        head: &[Atom],
        body_pos: &[Atom],
        body_neg: &[Atom],
    ) {
        let rule = AspRule {
            form,
            head: head.iter().map(|a| self.intern(a)).collect(),
            body_pos: body_pos.iter().map(|a| self.intern(a)).collect(),
            body_neg: body_neg.iter().map(|a| self.intern(a)).collect(),
        };
        self.rules.push(rule);
        self.sections.push(section);
    }

    /// `head ← body_pos, not body_neg` with a single or disjunctive head.
    pub fn add_disjunctive(
        &mut self,
        section: Section,
        head: &[Atom],
        body_pos: &[Atom],
        body_neg: &[Atom],
    ) {
        self.add_rule(section, RuleForm::Disjunctive, head, body_pos, body_neg);
    }

    pub fn add_cardinality(
        &mut self,
        section: Section,
        head: &[Atom],
        lb: usize,
        body_pos: &[Atom],
        body_neg: &[Atom],
    ) {
        assert!(
            lb <= head.len(),
            "cardinality bound {lb} exceeds head size {}",
            head.len()
        );
        self.add_rule(
            section,
            RuleForm::Cardinality { lb },
            head,
            body_pos,
            body_neg,
        );
    }

    fn intern(&mut self, atom: &Atom) -> AtomId {
        if let Some(&id) = self.index.get(atom) {
            return id;
        }
        let id = AtomId(self.atoms.len() as u32);
        self.atoms.push(atom.clone());
        self.index.insert(atom.clone(), id);
        id
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id.0 as usize]
    }

    pub fn lookup(&self, atom: &Atom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    pub fn rules(&self) -> &[AspRule] {
        &self.rules
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn rules_in(&self, section: Section) -> impl Iterator<Item = &AspRule> {
        self.rules
            .iter()
            .zip(&self.sections)
            .filter(move |(_, &s)| s == section)
            .map(|(r, _)| r)
    }

    /// The selector atoms `cls_i` present in the program, by clause index.
    pub fn selector_atoms(&self) -> Vec<AtomId> {
        let mut sel: Vec<(usize, AtomId)> = self
            .atoms
            .iter()
            .enumerate()
            .filter_map(|(i, a)| match a {
                Atom::Cls(c) => Some((*c, AtomId(i as u32))),
                _ => None,
            })
            .collect();
        sel.sort_unstable();
        sel.into_iter().map(|(_, id)| id).collect()
    }

    /// Same atom table, no rules.
    fn empty_like(&self) -> AspProgram {
        AspProgram {
            atoms: self.atoms.clone(),
            index: self.index.clone(),
            rules: Vec::new(),
            sections: Vec::new(),
        }
    }

    pub fn interpretation(&self, atoms: &[Atom]) -> Interpretation {
        Interpretation::new(atoms.iter().map(|a| {
            self.lookup(a)
                .unwrap_or_else(|| panic!("atom {a} does not occur in the program"))
        }))
    }

    pub fn display_rule(&self, rule: &AspRule) -> String {
        let names = |ids: &[AtomId]| {
            ids.iter()
                .map(|&i| self.atom(i).to_string())
                .collect::<Vec<_>>()
        };
        let head = match rule.form {
            RuleForm::Disjunctive => names(&rule.head).join(" | "),
            RuleForm::Cardinality { lb } => format!("{lb} {{ {} }}", names(&rule.head).join("; ")),
        };
        let mut body = names(&rule.body_pos);
        body.extend(
            names(&rule.body_neg)
                .into_iter()
                .map(|n| format!("not {n}")),
        );
        match (head.is_empty(), body.is_empty()) {
            (_, true) => format!("{head}."),
            (true, false) => format!(":- {}.", body.join(", ")),
            (false, false) => format!("{head} :- {}.", body.join(", ")),
        }
    }
}

/// The set of atoms assigned true.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interpretation {
    atoms: BTreeSet<AtomId>,
}

impl Interpretation {
    pub fn new(atoms: impl IntoIterator<Item = AtomId>) -> Self {
        Interpretation {
            atoms: atoms.into_iter().collect(),
        }
    }

    pub fn contains(&self, atom: AtomId) -> bool {
        self.atoms.contains(&atom)
    }

    pub fn atoms(&self) -> &BTreeSet<AtomId> {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `τ ∩ O`.
    pub fn project(&self, onto: &[AtomId]) -> BTreeSet<AtomId> {
        onto.iter()
            .copied()
            .filter(|a| self.atoms.contains(a))
            .collect()
    }

    /// Indices of the clauses whose selectors are true.
    pub fn selected_clauses(&self, program: &AspProgram) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .atoms
            .iter()
            .filter_map(|&a| match program.atom(a) {
                Atom::Cls(i) => Some(*i),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out
    }

    fn to_mask(&self) -> u64 {
        self.atoms.iter().fold(0, |m, a| m | a.bit())
    }

    fn from_mask(mask: u64) -> Self {
        Interpretation::new((0..64).filter(|i| mask >> i & 1 == 1).map(AtomId))
    }
}

pub fn satisfies_rule(tau: &Interpretation, rule: &AspRule) -> bool {
    let body_fails = rule.body_pos.iter().any(|a| !tau.contains(*a))
        || rule.body_neg.iter().any(|a| tau.contains(*a));
    match rule.form {
        RuleForm::Disjunctive => body_fails || rule.head.iter().any(|a| tau.contains(*a)),
        RuleForm::Cardinality { lb } => {
            body_fails || rule.head.iter().filter(|a| tau.contains(**a)).count() >= lb
        }
    }
}

pub fn is_model(program: &AspProgram, tau: &Interpretation) -> bool {
    program.rules().iter().all(|r| satisfies_rule(tau, r))
}

/// Gelfond-Lifschitz reduct. The result shares the atom table of `program`.
pub fn gl_reduct(program: &AspProgram, tau: &Interpretation) -> AspProgram {
    let mut out = program.empty_like();
    for (rule, &section) in program.rules.iter().zip(&program.sections) {
        if rule.body_neg.iter().any(|a| tau.contains(*a)) {
            continue;
        }
        match rule.form {
            RuleForm::Disjunctive => {
                out.rules.push(AspRule {
                    form: RuleForm::Disjunctive,
                    head: rule.head.clone(),
                    body_pos: rule.body_pos.clone(),
                    body_neg: Vec::new(),
                });
                out.sections.push(section);
            }
            RuleForm::Cardinality { .. } => {
                for &a in rule.head.iter().filter(|a| tau.contains(**a)) {
                    out.rules.push(AspRule {
                        form: RuleForm::Disjunctive,
                        head: vec![a],
                        body_pos: rule.body_pos.clone(),
                        body_neg: Vec::new(),
                    });
                    out.sections.push(section);
                }
            }
        }
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("program has {atoms} atoms, above the brute-force cap of {cap}")]
    CapExceeded { atoms: usize, cap: usize },
}

/// Upper limit on the atom count for exhaustive enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteForceCap(pub usize);

impl Default for BruteForceCap {
    fn default() -> Self {
        BruteForceCap(24)
    }
}

impl BruteForceCap {
    // interpretations are u64 bitsets
    const HARD_LIMIT: usize = 62;

    fn check(self, atoms: usize) -> Result<(), OracleError> {
        let cap = self.0.min(Self::HARD_LIMIT);
        if atoms > cap {
            Err(OracleError::CapExceeded { atoms, cap })
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct MaskRule {
    head: u64,
    pos: u64,
    neg: u64,
    lb: Option<u32>,
}

impl MaskRule {
    fn compile(rule: &AspRule) -> Self {
        let mask = |ids: &[AtomId]| ids.iter().fold(0u64, |m, a| m | a.bit());
        MaskRule {
            head: mask(&rule.head),
            pos: mask(&rule.body_pos),
            neg: mask(&rule.body_neg),
            lb: match rule.form {
                RuleForm::Disjunctive => None,
                RuleForm::Cardinality { lb } => Some(lb as u32),
            },
        }
    }

    #[inline]
    fn satisfied(&self, tau: u64) -> bool {
        if self.pos & !tau != 0 || self.neg & tau != 0 {
            return true;
        }
        match self.lb {
            None => self.head & tau != 0,
            Some(lb) => (self.head & tau).count_ones() >= lb,
        }
    }
}

fn compile(program: &AspProgram) -> Vec<MaskRule> {
    program.rules.iter().map(MaskRule::compile).collect()
}

/// Reduct of compiled rules for the interpretation `m`; only positive rules remain.
fn reduct_masks(rules: &[MaskRule], m: u64) -> Vec<MaskRule> {
    let mut out = Vec::new();
    for r in rules {
        if r.neg & m != 0 {
            continue;
        }
        match r.lb {
            None => out.push(MaskRule { neg: 0, ..*r }),
            Some(_) => {
                let mut chosen = r.head & m;
                while chosen != 0 {
                    let bit = chosen & chosen.wrapping_neg();
                    out.push(MaskRule {
                        head: bit,
                        pos: r.pos,
                        neg: 0,
                        lb: None,
                    });
                    chosen ^= bit;
                }
            }
        }
    }
    out
}

/// True iff some strict subset of `m` satisfies the (positive) reduct.
///
/// Every model of a positive program contains the least fixpoint of its
/// single-head rules, so only supersets of that closure inside `m` are tried.
fn has_smaller_model(reduct: &[MaskRule], m: u64) -> bool {
    let mut closure = 0u64;
    loop {
        let mut next = closure;
        for r in reduct {
            if r.head.count_ones() == 1 && r.pos & !next == 0 {
                next |= r.head;
            }
        }
        if next == closure {
            break;
        }
        closure = next;
    }
    // the closure is inside every model of the reduct, hence inside m
    debug_assert_eq!(closure & !m, 0);
    let free = m & !closure;
    // strict submasks of `free`, largest first
    let mut sub = free;
    while sub != 0 {
        sub = (sub - 1) & free;
        let candidate = closure | sub;
        if reduct.iter().all(|r| r.satisfied(candidate)) {
            return true;
        }
    }
    false
}

/// `M ⊨ P` and no strict subset of `M` is a model of `P^M`.
pub fn is_answer_set(program: &AspProgram, m: &Interpretation) -> bool {
    if !is_model(program, m) {
        return false;
    }
    if program.atoms.len() <= BruteForceCap::HARD_LIMIT {
        let mask = m.to_mask();
        let reduct = reduct_masks(&compile(program), mask);
        return !has_smaller_model(&reduct, mask);
    }
    let reduct = gl_reduct(program, m);
    let members: Vec<AtomId> = m.atoms.iter().copied().collect();
    assert!(
        members.len() < 64,
        "answer-set check over {} true atoms is out of reach",
        members.len()
    );
    let full = (1u64 << members.len()) - 1;
    (0..full).all(|bits| {
        let sub = Interpretation::new(
            members
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|(_, &a)| a),
        );
        !is_model(&reduct, &sub)
    })
}

/// Every interpretation over `at(P)` that satisfies all rules.
pub fn enumerate_models(
    program: &AspProgram,
    cap: BruteForceCap,
) -> Result<Vec<Interpretation>, OracleError> {
    let n = program.atoms.len();
    cap.check(n)?;
    let rules = compile(program);
    Ok((0u64..(1u64 << n))
        .filter(|&tau| rules.iter().all(|r| r.satisfied(tau)))
        .map(Interpretation::from_mask)
        .collect())
}

/// `AS(P)` by exhaustive search over all subsets of `at(P)`.
pub fn enumerate_answer_sets(
    program: &AspProgram,
    cap: BruteForceCap,
) -> Result<Vec<Interpretation>, OracleError> {
    let n = program.atoms.len();
    cap.check(n)?;
    let rules = compile(program);
    let mut out = Vec::new();
    for m in 0u64..(1u64 << n) {
        if !rules.iter().all(|r| r.satisfied(m)) {
            continue;
        }
        let reduct = reduct_masks(&rules, m);
        if !has_smaller_model(&reduct, m) {
            out.push(Interpretation::from_mask(m));
        }
    }
    Ok(out)
}

/// Keeps `M` iff no other input set has a strictly smaller projection onto `onto`.
pub fn subset_minimal_filter(sets: &[Interpretation], onto: &[AtomId]) -> Vec<Interpretation> {
    let projections: Vec<BTreeSet<AtomId>> = sets.iter().map(|s| s.project(onto)).collect();
    sets.iter()
        .zip(&projections)
        .filter(|(_, p)| {
            !projections
                .iter()
                .any(|q| q.len() < p.len() && q.is_subset(p))
        })
        .map(|(s, _)| s.clone())
        .collect()
}
