//! A small conflict-driven clause-learning solver.
//!
//! Two watched literals, VSIDS with an indexed heap, phase saving, Luby
//! restarts, learnt-clause reduction and minisat-style assumptions with final
//! conflict analysis. Everything is deterministic: the initial variable order
//! is the index order unless a seed is given.

use std::ops::Not;

use crate::budget::Limits;

/// Solver-internal literal: `2 * var + sign`, sign 1 meaning negated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SLit(u32);

impl SLit {
    pub fn new(var: usize, negated: bool) -> Self {
        SLit(((var as u32) << 1) | negated as u32)
    }

    pub fn pos(var: usize) -> Self {
        SLit::new(var, false)
    }

    pub fn neg(var: usize) -> Self {
        SLit::new(var, true)
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    fn code(self) -> usize {
        self.0 as usize
    }
}

impl Not for SLit {
    type Output = SLit;

    fn not(self) -> SLit {
        SLit(self.0 ^ 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat,
    Unsat,
    /// A limit was hit before the answer was known.
    Unknown,
}

const TRUE: i8 = 1;
const FALSE: i8 = -1;
const UNDEF: i8 = 0;

type CRef = usize;

#[derive(Clone, Copy, Debug)]
struct Watcher {
    cref: CRef,
    blocker: SLit,
}

#[derive(Debug)]
struct ClauseData {
    lits: Vec<SLit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[inline]
fn lit_value(assigns: &[i8], lit: SLit) -> i8 {
    let v = assigns[lit.var()];
    if lit.is_negated() {
        -v
    } else {
        v
    }
}

/// Max-heap of variables keyed by activity.
#[derive(Debug, Default)]
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn grow(&mut self, n: usize) {
        self.pos.resize(n, None);
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v].is_some()
    }

    fn better(act: &[f64], a: usize, b: usize) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v] = Some(i);
        self.sift_up(i, act);
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.pos[v] {
            self.sift_up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.pos[self.heap[0]] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::better(act, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i]] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= n {
                break;
            }
            let right = left + 1;
            let child = if right < n && Self::better(act, self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            if !Self::better(act, self.heap[child], v) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i]] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }
}

fn luby(y: f64, mut x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq as i32)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Stats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
}

#[derive(Debug)]
pub struct Solver {
    clauses: Vec<ClauseData>,
    learnts: Vec<CRef>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<CRef>>,
    trail: Vec<SLit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    order: VarHeap,
    saved_phase: Vec<bool>,
    preferred_phase: Vec<Option<bool>>,
    seen: Vec<bool>,
    ok: bool,
    model: Vec<bool>,
    failed: Vec<SLit>,
    max_learnts: f64,
    stats: Stats,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            clauses: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            order: VarHeap::default(),
            saved_phase: Vec::new(),
            preferred_phase: Vec::new(),
            seen: Vec::new(),
            ok: true,
            model: Vec::new(),
            failed: Vec::new(),
            max_learnts: 0.0,
            stats: Stats::default(),
        }
    }

    /// Perturbs the initial variable order deterministically. Seed 0 keeps
    /// plain index order.
    pub fn set_seed(&mut self, seed: u64) {
        if seed == 0 {
            return;
        }
        let mut state = seed;
        for v in 0..self.num_vars() {
            // splitmix64
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            self.activity[v] = (z >> 11) as f64 / (1u64 << 53) as f64 * 1e-5;
        }
        self.rebuild_order();
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn new_var(&mut self) -> usize {
        let v = self.num_vars();
        self.assigns.push(UNDEF);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.saved_phase.push(false);
        self.preferred_phase.push(None);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.order.grow(v + 1);
        self.order.insert(v, &self.activity);
        v
    }

    pub fn ensure_vars(&mut self, n: usize) {
        while self.num_vars() < n {
            self.new_var();
        }
    }

    /// Phase tried first when deciding on `var`; overrides phase saving.
    pub fn set_preferred_phase(&mut self, var: usize, value: bool) {
        self.ensure_vars(var + 1);
        self.preferred_phase[var] = Some(value);
    }

    pub fn is_ok(&self) -> bool {
        self.ok
    }

    /// Adds a permanent clause. Returns false once the clause set is known to
    /// be unsatisfiable at the top level.
    pub fn add_clause(&mut self, lits: &[SLit]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let max_var = lits.iter().map(|l| l.var() + 1).max().unwrap_or(0);
        self.ensure_vars(max_var);

        let mut clause: Vec<SLit> = lits.to_vec();
        clause.sort();
        clause.dedup();
        let mut kept = Vec::with_capacity(clause.len());
        for (i, &l) in clause.iter().enumerate() {
            if i + 1 < clause.len() && clause[i + 1] == !l {
                return true;
            }
            match lit_value(&self.assigns, l) {
                TRUE => return true,
                FALSE => {}
                _ => kept.push(l),
            }
        }
        match kept.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.unchecked_enqueue(kept[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(kept, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<SLit>, learnt: bool) -> CRef {
        let cref = self.clauses.len();
        self.watches[lits[0].code()].push(Watcher {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1].code()].push(Watcher {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(ClauseData {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    pub fn value(&self, lit: SLit) -> Option<bool> {
        match lit_value(&self.assigns, lit) {
            TRUE => Some(true),
            FALSE => Some(false),
            _ => None,
        }
    }

    /// Model of the last satisfiable call, indexed by variable.
    pub fn model(&self) -> &[bool] {
        &self.model
    }

    pub fn model_value(&self, lit: SLit) -> bool {
        self.model[lit.var()] != lit.is_negated()
    }

    /// Assumptions responsible for the last unsatisfiable call. Together with
    /// the clause set they are unsatisfiable.
    pub fn failed_assumptions(&self) -> &[SLit] {
        &self.failed
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn unchecked_enqueue(&mut self, lit: SLit, reason: Option<CRef>) {
        let v = lit.var();
        self.assigns[v] = if lit.is_negated() { FALSE } else { TRUE };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn propagate(&mut self) -> Option<CRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if lit_value(&self.assigns, w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref;
                if self.clauses[cref].deleted {
                    continue;
                }
                let lits = &mut self.clauses[cref].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let watcher = Watcher {
                    cref,
                    blocker: first,
                };
                if first != w.blocker && lit_value(&self.assigns, first) == TRUE {
                    ws[j] = watcher;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    if lit_value(&self.assigns, lits[k]) != FALSE {
                        lits.swap(1, k);
                        let new_watch = lits[1];
                        self.watches[new_watch.code()].push(watcher);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = watcher;
                j += 1;
                if lit_value(&self.assigns, first) == FALSE {
                    conflict = Some(cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.unchecked_enqueue(first, Some(cref));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: CRef) {
        let c = &mut self.clauses[cref];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn analyze(&mut self, mut confl: CRef) -> (Vec<SLit>, usize) {
        let mut learnt = vec![SLit(0)];
        let mut path_count = 0usize;
        let mut p: Option<SLit> = None;
        let mut index = self.trail.len();
        let current = self.decision_level() as u32;

        loop {
            self.bump_clause(confl);
            let start = usize::from(p.is_some());
            let lits = self.clauses[confl].lits.clone();
            for &q in &lits[start..] {
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path_count += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break;
                }
            }
            let lit = self.trail[index];
            p = Some(lit);
            self.seen[lit.var()] = false;
            path_count -= 1;
            if path_count == 0 {
                break;
            }
            confl = self.reason[lit.var()].expect("implied literal has a reason");
        }
        learnt[0] = !p.expect("conflict analysis visits at least one literal");

        // drop literals implied by the rest of the clause
        let before: Vec<SLit> = learnt.clone();
        let mut kept = vec![learnt[0]];
        for &l in &learnt[1..] {
            let redundant = match self.reason[l.var()] {
                None => false,
                Some(r) => self.clauses[r].lits[1..]
                    .iter()
                    .all(|q| self.seen[q.var()] || self.level[q.var()] == 0),
            };
            if !redundant {
                kept.push(l);
            }
        }
        for l in before {
            self.seen[l.var()] = false;
        }
        let mut learnt = kept;

        let backtrack = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var()] > self.level[learnt[max_i].var()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var()] as usize
        };
        (learnt, backtrack)
    }

    /// Collects the assumptions implying `p` being false. `p` is the negation
    /// of a violated assumption.
    fn analyze_final(&mut self, p: SLit) {
        self.failed.clear();
        self.failed.push(!p);
        if self.decision_level() == 0 {
            return;
        }
        self.seen[p.var()] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.var();
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                None => {
                    if lit != !p {
                        self.failed.push(lit);
                    }
                }
                Some(r) => {
                    for k in 1..self.clauses[r].lits.len() {
                        let q = self.clauses[r].lits[k];
                        if self.level[q.var()] > 0 {
                            self.seen[q.var()] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[p.var()] = false;
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level];
        for i in (lim..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.var();
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.saved_phase[v] = !lit.is_negated();
            self.order.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<SLit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                let phase = self.preferred_phase[v].unwrap_or(self.saved_phase[v]);
                self.stats.decisions += 1;
                return Some(SLit::new(v, !phase));
            }
        }
        None
    }

    fn rebuild_order(&mut self) {
        self.order = VarHeap::default();
        self.order.grow(self.num_vars());
        for v in 0..self.num_vars() {
            if self.assigns[v] == UNDEF {
                self.order.insert(v, &self.activity);
            }
        }
    }

    fn reduce_db(&mut self) {
        let mut candidates: Vec<CRef> = self
            .learnts
            .iter()
            .copied()
            .filter(|&c| !self.clauses[c].deleted)
            .collect();
        candidates.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .partial_cmp(&self.clauses[b].activity)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let half = candidates.len() / 2;
        for &c in &candidates[..half] {
            let lits = &self.clauses[c].lits;
            if lits.len() <= 2 {
                continue;
            }
            let first = lits[0];
            let locked =
                lit_value(&self.assigns, first) == TRUE && self.reason[first.var()] == Some(c);
            if !locked {
                self.clauses[c].deleted = true;
                self.clauses[c].lits = Vec::new();
            }
        }
        let clauses = &self.clauses;
        self.learnts.retain(|&c| !clauses[c].deleted);
        for ws in self.watches.iter_mut() {
            ws.retain(|w| !clauses[w.cref].deleted);
        }
    }

    /// Solves under `assumptions`. On `Sat` the model is available; on `Unsat`
    /// the failed assumptions are.
    pub fn solve_with(&mut self, assumptions: &[SLit], limits: &Limits) -> SolveResult {
        self.stats.solves += 1;
        self.model.clear();
        self.failed.clear();
        if !self.ok {
            return SolveResult::Unsat;
        }
        let max_var = assumptions.iter().map(|l| l.var() + 1).max().unwrap_or(0);
        self.ensure_vars(max_var);

        self.max_learnts = (self.clauses.len() as f64 / 3.0).max(2000.0);
        let start_conflicts = self.stats.conflicts;
        let mut restarts = 0u64;
        let result = loop {
            let allowed = (luby(2.0, restarts) * 100.0) as u64;
            match self.search(allowed, assumptions, limits, start_conflicts) {
                Some(r) => break r,
                None => restarts += 1,
            }
        };
        if result == SolveResult::Sat {
            self.model = self.assigns.iter().map(|&a| a == TRUE).collect();
        }
        self.cancel_until(0);
        result
    }

    pub fn solve(&mut self) -> SolveResult {
        self.solve_with(&[], &Limits::none())
    }

    fn out_of_budget(&self, limits: &Limits, start_conflicts: u64) -> bool {
        if let Some(max) = limits.max_conflicts {
            if self.stats.conflicts - start_conflicts >= max {
                return true;
            }
        }
        limits.expired()
    }

    /// `None` asks for a restart.
    fn search(
        &mut self,
        conflicts_allowed: u64,
        assumptions: &[SLit],
        limits: &Limits,
        start_conflicts: u64,
    ) -> Option<SolveResult> {
        let mut conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(SolveResult::Unsat);
                }
                let (learnt, backtrack) = self.analyze(confl);
                self.cancel_until(backtrack);
                if learnt.len() == 1 {
                    self.unchecked_enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref);
                    self.unchecked_enqueue(first, Some(cref));
                }
                self.var_inc *= 1.0 / 0.95;
                self.cla_inc *= 1.0 / 0.999;
                if self.out_of_budget(limits, start_conflicts) {
                    self.cancel_until(0);
                    return Some(SolveResult::Unknown);
                }
            } else {
                if conflicts >= conflicts_allowed {
                    self.cancel_until(0);
                    return None;
                }
                if self.learnts.len() as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                    self.max_learnts *= 1.1;
                }
                if self.stats.decisions.is_multiple_of(4096) && limits.expired() {
                    self.cancel_until(0);
                    return Some(SolveResult::Unknown);
                }

                let mut next = None;
                while self.decision_level() < assumptions.len() {
                    let p = assumptions[self.decision_level()];
                    match lit_value(&self.assigns, p) {
                        TRUE => self.trail_lim.push(self.trail.len()),
                        FALSE => {
                            self.analyze_final(!p);
                            return Some(SolveResult::Unsat);
                        }
                        _ => {
                            next = Some(p);
                            break;
                        }
                    }
                }
                if next.is_none() {
                    next = self.pick_branch();
                    if next.is_none() {
                        return Some(SolveResult::Sat);
                    }
                }
                self.trail_lim.push(self.trail.len());
                self.unchecked_enqueue(next.expect("checked above"), None);
            }
        }
    }
}
