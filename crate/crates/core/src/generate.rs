//! Instance generators for tests and smoke benchmarks.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cnf::{Clause, CnfFormula, Lit, Var};

/// Uniform random CNF: variable count, clause count and clause width are drawn
/// from the given ranges. Variables within a clause are distinct.
pub fn random_formula<R: Rng>(
    rng: &mut R,
    nvars: RangeInclusive<u32>,
    ncl: RangeInclusive<usize>,
    width: RangeInclusive<usize>,
) -> CnfFormula {
    let nvars = rng.gen_range(nvars);
    let ncl = rng.gen_range(ncl);
    let mut f = CnfFormula::new(nvars);
    let vars: Vec<u32> = (1..=nvars).collect();
    for _ in 0..ncl {
        let w = rng.gen_range(width.clone()).min(nvars as usize);
        let chosen: Vec<u32> = vars.choose_multiple(rng, w).copied().collect();
        let lits = chosen.into_iter().map(|v| {
            let var = Var::new(v);
            if rng.gen_bool(0.5) {
                var.positive()
            } else {
                var.negative()
            }
        });
        f.push(Clause::new(lits));
    }
    f
}

/// Random formula that is unsatisfiable, by rejection sampling against `is_sat`.
pub fn random_unsat_formula<R: Rng>(
    rng: &mut R,
    nvars: RangeInclusive<u32>,
    ncl: RangeInclusive<usize>,
    width: RangeInclusive<usize>,
    is_sat: impl Fn(&CnfFormula) -> bool,
) -> CnfFormula {
    loop {
        let f = random_formula(rng, nvars.clone(), ncl.clone(), width.clone());
        if !is_sat(&f) {
            return f;
        }
    }
}

/// Graph-colouring CNF: variable `x(v, c)` says vertex `v` has colour `c`.
/// Each vertex gets at least one colour and adjacent vertices differ.
pub fn graph_coloring(vertices: usize, edges: &[(usize, usize)], colors: usize) -> CnfFormula {
    let var = |v: usize, c: usize| Var::new((v * colors + c + 1) as u32);
    let mut f = CnfFormula::new((vertices * colors) as u32);
    for v in 0..vertices {
        f.push(Clause::new((0..colors).map(|c| var(v, c).positive())));
    }
    for &(u, v) in edges {
        for c in 0..colors {
            f.push(Clause::new([var(u, c).negative(), var(v, c).negative()]));
        }
    }
    f
}

/// A random graph-colouring instance that contains at least one odd cycle
/// (for two colours) or a `colors + 1` clique, so it is unsatisfiable.
pub fn random_coloring_instance<R: Rng>(
    rng: &mut R,
    vertices: usize,
    colors: usize,
    extra_edges: usize,
) -> CnfFormula {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let add = |edges: &mut Vec<(usize, usize)>, a: usize, b: usize| {
        let e = (a.min(b), a.max(b));
        if a != b && !edges.contains(&e) {
            edges.push(e);
        }
    };
    let mut order: Vec<usize> = (0..vertices).collect();
    order.shuffle(rng);
    if colors <= 2 {
        assert!(vertices >= 3, "an odd cycle needs three vertices");
        let len = if vertices % 2 == 1 {
            vertices
        } else {
            vertices - 1
        };
        for i in 0..len {
            add(&mut edges, order[i], order[(i + 1) % len]);
        }
    } else {
        let k = (colors + 1).min(vertices);
        for i in 0..k {
            for j in (i + 1)..k {
                add(&mut edges, order[i], order[j]);
            }
        }
    }
    for _ in 0..extra_edges {
        let a = rng.gen_range(0..vertices);
        let b = rng.gen_range(0..vertices);
        add(&mut edges, a, b);
    }
    edges.sort_unstable();
    graph_coloring(vertices, &edges, colors)
}

/// Clause as DIMACS integers, for readable assertions.
pub fn dimacs(lits: &[Lit]) -> Vec<i32> {
    lits.iter().map(|l| l.to_dimacs()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn triangle_is_not_two_colourable_shape() {
        let f = graph_coloring(3, &[(0, 1), (1, 2), (0, 2)], 2);
        assert_eq!(f.ncl(), 3 + 3 * 2);
        assert_eq!(f.nvars(), 6);
        assert_eq!(dimacs(f.clause(4).lits()), vec![-1, -3]);
    }

    #[test]
    fn random_formulas_respect_ranges() {
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..100 {
            let f = random_formula(&mut rng, 2..=4, 2..=6, 1..=3);
            assert!((2..=6).contains(&f.ncl()));
            assert!(f.nvars() <= 4);
            assert!(f.clauses().iter().all(|c| (1..=3).contains(&c.len())));
        }
    }
}
