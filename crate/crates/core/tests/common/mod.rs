//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use satglass::ce3::{solve, Ce3Solution};
use satglass::compiler::{compile, EnergyModel};
use satglass::formula::{parse_dimacs_str, Assignment, Clause, Formula, Literal};

/// The worked two-clause formula used across the documentation:
/// (not x1 or x2 or x4) and (x1 or not x3 or x4).
pub const TWO_CLAUSE_CNF: &str = "p cnf 4 2\n-1 2 4 0\n1 -3 4 0\n";

pub fn two_clause() -> Formula {
    parse_dimacs_str(TWO_CLAUSE_CNF).unwrap().formula
}

/// All eight sign patterns over three variables: unsatisfiable, and every
/// assignment violates exactly one clause.
pub fn all_patterns_3() -> Formula {
    let clauses = (0..8u32)
        .map(|p| {
            let lits = [
                Literal::new(1, p & 1 != 0),
                Literal::new(2, p & 2 != 0),
                Literal::new(3, p & 4 != 0),
            ];
            Clause::new(lits, p as usize).unwrap()
        })
        .collect();
    Formula::new(3, clauses).unwrap()
}

/// The accepted tailoring at the benchmark point B = 0.3, D = 1, F = 1.
pub fn reference_solution() -> Ce3Solution {
    solve(0.3, 1.0, 1.0, 0.2).unwrap().remove(0)
}

pub fn model_for(f: Formula) -> EnergyModel {
    compile(f, reference_solution()).unwrap()
}

/// Uniformly random satisfiable formula: instances are drawn from the plain
/// random generator and rejected (by exhaustive enumeration) until one has a
/// model. Requires m small enough for the oracle.
pub fn gen_satisfiable(m: usize, n: usize, seed: u64) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let f = satglass::formula::gen_random(m, n, rng.random()).unwrap();
        if satglass::oracle::count_satisfying(&f, satglass::oracle::DEFAULT_ENUM_LIMIT).unwrap() > 0
        {
            return f;
        }
    }
}

/// Independent violation count: direct clause-by-clause truth evaluation.
pub fn naive_unsat(f: &Formula, a: &Assignment) -> usize {
    f.clauses()
        .iter()
        .filter(|c| c.lits().iter().all(|l| l.negated == a.bit(l.var)))
        .count()
}
