//! CNF formulas, DIMACS reading/writing and assignment evaluation.
//!
//! A formula is an indexed multiset of clauses. Clause indices are 1-based and
//! follow the textual order of the input; they never change after parsing, so
//! every other module refers to clauses by index.

use std::fmt;
use std::ops::Not;

use thiserror::Error;

/// A propositional variable, numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Panics if `id` is zero.
    pub fn new(id: u32) -> Self {
        assert!(id >= 1, "variable ids start at 1");
        Var(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn positive(self) -> Lit {
        Lit(self.0 as i32)
    }

    pub fn negative(self) -> Lit {
        Lit(-(self.0 as i32))
    }
}

/// A literal in DIMACS convention: `v` or `-v`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(i32);

impl Lit {
    /// Panics on zero.
    pub fn from_dimacs(value: i32) -> Self {
        assert!(value != 0, "0 is the clause terminator, not a literal");
        Lit(value)
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A disjunction of literals. Duplicate literals are removed on construction;
/// complementary pairs (tautologies) are kept.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Self {
        let mut out: Vec<Lit> = Vec::new();
        for lit in lits {
            if !out.contains(&lit) {
                out.push(lit);
            }
        }
        Clause { lits: out }
    }

    pub fn from_dimacs(values: &[i32]) -> Self {
        Clause::new(values.iter().map(|&v| Lit::from_dimacs(v)))
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.contains(&lit)
    }

    pub fn is_tautology(&self) -> bool {
        self.lits.iter().any(|&l| self.lits.contains(&!l))
    }
}

/// Truth value of a formula under a (possibly partial) assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluation {
    Satisfied,
    Falsified,
    Undetermined,
}

/// A partial map from variables to truth values.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Assignment {
    // slot 0 unused
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    /// A total assignment over variables `1..=values.len()`.
    pub fn total(values: &[bool]) -> Self {
        let mut a = Assignment::new();
        for (i, &b) in values.iter().enumerate() {
            a.set(Var::new(i as u32 + 1), b);
        }
        a
    }

    pub fn set(&mut self, var: Var, value: bool) {
        let idx = var.id() as usize;
        if self.values.len() <= idx {
            self.values.resize(idx + 1, None);
        }
        self.values[idx] = Some(value);
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(var.id() as usize).copied().flatten()
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.get(lit.var()).map(|v| v == lit.is_positive())
    }

    pub fn with(mut self, var: u32, value: bool) -> Self {
        self.set(Var::new(var), value);
        self
    }

    /// Assigned variables in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| (Var(i as u32), b)))
    }

    pub fn clause_value(&self, clause: &Clause) -> Evaluation {
        let mut open = false;
        for &lit in clause.lits() {
            match self.lit_value(lit) {
                Some(true) => return Evaluation::Satisfied,
                Some(false) => {}
                None => open = true,
            }
        }
        if open {
            Evaluation::Undetermined
        } else {
            Evaluation::Falsified
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CnfFormula {
    nvars: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(nvars: u32) -> Self {
        CnfFormula {
            nvars,
            clauses: Vec::new(),
        }
    }

    /// Builds a formula from DIMACS-style integer clauses; `nvars` is the
    /// largest variable mentioned.
    pub fn from_clauses<I, C>(clauses: I) -> Self
    where
        I: IntoIterator<Item = C>,
        C: AsRef<[i32]>,
    {
        let mut f = CnfFormula::new(0);
        for c in clauses {
            f.push(Clause::from_dimacs(c.as_ref()));
        }
        f
    }

    /// Appends a clause and returns its 1-based index. Raises `nvars` when the
    /// clause mentions a larger variable.
    pub fn push(&mut self, clause: Clause) -> usize {
        for lit in clause.lits() {
            self.nvars = self.nvars.max(lit.var().id());
        }
        self.clauses.push(clause);
        self.clauses.len()
    }

    pub fn nvars(&self) -> u32 {
        self.nvars
    }

    pub fn ncl(&self) -> usize {
        self.clauses.len()
    }

    /// Clause by 1-based index.
    pub fn clause(&self, index: usize) -> &Clause {
        &self.clauses[index - 1]
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// `(index, clause)` pairs with 1-based indices.
    pub fn indexed(&self) -> impl Iterator<Item = (usize, &Clause)> {
        self.clauses.iter().enumerate().map(|(i, c)| (i + 1, c))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (1..=self.nvars).map(Var)
    }

    /// The sub-formula made of the given clause indices, in the given order.
    pub fn subformula(&self, indices: &[usize]) -> CnfFormula {
        let mut f = CnfFormula::new(self.nvars);
        for &i in indices {
            f.clauses.push(self.clause(i).clone());
        }
        f
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Evaluation {
        let mut open = false;
        for clause in &self.clauses {
            match assignment.clause_value(clause) {
                Evaluation::Falsified => return Evaluation::Falsified,
                Evaluation::Undetermined => open = true,
                Evaluation::Satisfied => {}
            }
        }
        if open {
            Evaluation::Undetermined
        } else {
            Evaluation::Satisfied
        }
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.nvars, self.ncl());
        for clause in &self.clauses {
            for lit in clause.lits() {
                out.push_str(&lit.to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("missing `p cnf` header before clauses")]
    MissingHeader,
    #[error("duplicate header")]
    DuplicateHeader,
    #[error("not an integer: {0:?}")]
    BadToken(String),
    #[error("final clause is not terminated by 0")]
    UnterminatedClause,
    #[error("input is not valid UTF-8")]
    Encoding,
}

/// Result of a successful parse: the formula plus non-fatal diagnostics.
#[derive(Clone, Debug)]
pub struct ParsedCnf {
    pub formula: CnfFormula,
    pub warnings: Vec<String>,
}

pub fn parse_dimacs(input: &[u8]) -> Result<ParsedCnf, ParseError> {
    let text = std::str::from_utf8(input).map_err(|_| ParseError {
        line: 0,
        kind: ParseErrorKind::Encoding,
    })?;
    parse_dimacs_str(text)
}

pub fn parse_dimacs_str(text: &str) -> Result<ParsedCnf, ParseError> {
    let mut warnings = Vec::new();
    let mut header: Option<(u32, usize)> = None;
    let mut formula = CnfFormula::new(0);
    let mut current: Vec<i32> = Vec::new();
    let mut last_line = 0;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        // SATLIB files end with "%\n0\n"
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(ParseError {
                    line: line_no,
                    kind: ParseErrorKind::DuplicateHeader,
                });
            }
            header = Some(parse_header(line).map_err(|kind| ParseError {
                line: line_no,
                kind,
            })?);
            continue;
        }
        if header.is_none() {
            return Err(ParseError {
                line: line_no,
                kind: ParseErrorKind::MissingHeader,
            });
        }
        for token in line.split_whitespace() {
            let value: i32 = token.parse().map_err(|_| ParseError {
                line: line_no,
                kind: ParseErrorKind::BadToken(token.to_string()),
            })?;
            if value == 0 {
                formula.push(Clause::from_dimacs(&current));
                current.clear();
            } else {
                if value == i32::MIN {
                    return Err(ParseError {
                        line: line_no,
                        kind: ParseErrorKind::BadToken(token.to_string()),
                    });
                }
                current.push(value);
            }
        }
        last_line = line_no;
    }

    if !current.is_empty() {
        return Err(ParseError {
            line: last_line,
            kind: ParseErrorKind::UnterminatedClause,
        });
    }
    let Some((declared_vars, declared_clauses)) = header else {
        return Err(ParseError {
            line: last_line.max(1),
            kind: ParseErrorKind::MissingHeader,
        });
    };
    if formula.nvars > declared_vars {
        warnings.push(format!(
            "header declares {declared_vars} variables but literals mention variable {}; using {}",
            formula.nvars, formula.nvars
        ));
    } else {
        formula.nvars = declared_vars;
    }
    if formula.ncl() != declared_clauses {
        warnings.push(format!(
            "header declares {declared_clauses} clauses but the body has {}",
            formula.ncl()
        ));
    }
    Ok(ParsedCnf { formula, warnings })
}

fn parse_header(line: &str) -> Result<(u32, usize), ParseErrorKind> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
        return Err(ParseErrorKind::MalformedHeader(line.to_string()));
    }
    let nvars = parts[2]
        .parse()
        .map_err(|_| ParseErrorKind::MalformedHeader(line.to_string()))?;
    let ncl = parts[3]
        .parse()
        .map_err(|_| ParseErrorKind::MalformedHeader(line.to_string()))?;
    Ok((nvars, ncl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TWO_MUS: &str = "p cnf 2 4\n1 0\n-1 0\n2 0\n-1 -2 0\n";

    #[test]
    fn parses_example_formula() {
        let parsed = parse_dimacs_str(TWO_MUS).unwrap();
        let f = parsed.formula;
        assert!(parsed.warnings.is_empty());
        assert_eq!(f.ncl(), 4);
        assert_eq!(f.nvars(), 2);
        assert_eq!(f.clause(4), &Clause::from_dimacs(&[-1, -2]));
    }

    #[test]
    fn empty_formula() {
        let f = parse_dimacs_str("p cnf 0 0\n").unwrap().formula;
        assert_eq!(f.ncl(), 0);
        assert_eq!(f.nvars(), 0);
    }

    #[test]
    fn identical_clauses_are_distinct_entries() {
        let f = parse_dimacs_str("p cnf 1 2\n1 0\n1 0\n").unwrap().formula;
        assert_eq!(f.ncl(), 2);
        assert_eq!(f.clause(1), f.clause(2));
    }

    #[test]
    fn crlf_comments_and_multiline_clauses() {
        let text = "c hello\r\np cnf 3 2\r\n1 -2\r\n 3 0 -1\n0\n";
        let f = parse_dimacs_str(text).unwrap().formula;
        assert_eq!(f.ncl(), 2);
        assert_eq!(f.clause(1).lits().len(), 3);
        assert_eq!(f.clause(2), &Clause::from_dimacs(&[-1]));
    }

    #[test]
    fn duplicate_literals_are_merged_tautologies_kept() {
        let f = parse_dimacs_str("p cnf 2 2\n1 1 2 0\n1 -1 0\n")
            .unwrap()
            .formula;
        assert_eq!(f.clause(1).len(), 2);
        assert!(f.clause(2).is_tautology());
        assert_eq!(f.ncl(), 2);
    }

    #[test]
    fn empty_clause_is_accepted() {
        let f = parse_dimacs_str("p cnf 1 2\n1 0\n0\n").unwrap().formula;
        assert!(f.clause(2).is_empty());
    }

    #[test]
    fn header_mismatches_warn() {
        let parsed = parse_dimacs_str("p cnf 1 3\n1 0\n-3 0\n").unwrap();
        assert_eq!(parsed.formula.ncl(), 2);
        assert_eq!(parsed.formula.nvars(), 3);
        assert_eq!(parsed.warnings.len(), 2);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_dimacs_str("p cnf x 1\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(matches!(err.kind, ParseErrorKind::MalformedHeader(_)));

        let err = parse_dimacs_str("p cnf 2 1\n1 two 0\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(matches!(err.kind, ParseErrorKind::BadToken(_)));

        let err = parse_dimacs_str("p cnf 2 2\n1 0\n\n-1 2\n").unwrap_err();
        assert_eq!(err.line, 4);
        assert_eq!(err.kind, ParseErrorKind::UnterminatedClause);

        let err = parse_dimacs_str("1 0\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingHeader);
    }

    #[test]
    fn evaluation_examples() {
        let f = parse_dimacs_str(TWO_MUS).unwrap().formula;
        let tau = Assignment::new().with(1, false).with(2, true);
        assert_eq!(f.evaluate(&tau), Evaluation::Falsified);
        assert_eq!(
            f.evaluate(&Assignment::new().with(1, false)),
            Evaluation::Falsified
        );

        let unit = CnfFormula::from_clauses([[2]]);
        assert_eq!(
            unit.evaluate(&Assignment::new().with(2, true)),
            Evaluation::Satisfied
        );
        assert_eq!(unit.evaluate(&Assignment::new()), Evaluation::Undetermined);
    }

    #[test]
    fn literal_negation_is_an_involution() {
        let l = Lit::from_dimacs(-7);
        assert_eq!(!!l, l);
        assert_eq!((!l).var(), l.var());
    }

    fn arb_formula() -> impl Strategy<Value = CnfFormula> {
        let lit = (1i32..=6, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v });
        prop::collection::vec(prop::collection::vec(lit, 0..4), 0..8)
            .prop_map(CnfFormula::from_clauses)
    }

    proptest! {
        #[test]
        fn dimacs_round_trip(f in arb_formula()) {
            let once = parse_dimacs_str(&f.to_dimacs()).unwrap().formula;
            prop_assert_eq!(&once, &f);
            let twice = parse_dimacs_str(&once.to_dimacs()).unwrap().formula;
            prop_assert_eq!(twice, once);
        }

        #[test]
        fn total_assignments_decide(f in arb_formula(), bits in prop::collection::vec(any::<bool>(), 6)) {
            let tau = Assignment::total(&bits);
            prop_assert_ne!(f.evaluate(&tau), Evaluation::Undetermined);
        }
    }
}
