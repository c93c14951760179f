//! Shared fixtures for the benchmark suite: canonical random instances and
//! machines compiled at the default operating point (B/D = 0.3, F/D = 1).

use satglass::ce3;
use satglass::formula::gen_random;
use satglass::{compile, EnergyModel, Formula};

/// A reproducible random 3-CNF instance.
pub fn standard_instance(m: usize, n: usize, seed: u64) -> Formula {
    gen_random(m, n, seed).expect("benchmark sizes are valid")
}

/// The instance compiled into an energy model at the default couplings,
/// keeping the largest-gap tailoring.
pub fn standard_model(m: usize, n: usize, seed: u64) -> EnergyModel {
    let formula = standard_instance(m, n, seed);
    let solutions = ce3::solve(0.3, 1.0, 1.0, 0.2).expect("default couplings are feasible");
    let best = solutions
        .into_iter()
        .reduce(|best, s| if s.gap > best.gap { s } else { best })
        .expect("at least one tailoring");
    compile(formula, best).expect("tailoring is valid")
}
