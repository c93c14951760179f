//! From formula to machine: build the wiring description (netlist) of the
//! search machine — one register wire per variable, three tapped branches per
//! clause evaluator, inverters where literals are negated — and compile a
//! formula together with a tailored parameter set into an [`EnergyModel`]
//! that evaluates the landscape exactly and supports O(fan-out) single-flip
//! energy differences.

use std::io::{self, Write};

use thiserror::Error;

use crate::ce3::{Ce3Solution, LEVEL_TOL};
use crate::formula::{Assignment, Formula};
use crate::textfmt::fmt_f64;

/// Compilation and evaluation failures.
#[derive(Debug, Clone, Error)]
pub enum ModelError {
    /// The parameter set does not satisfy the tailoring invariants.
    #[error("invalid parameter set: {0}")]
    InvalidSolution(String),
    /// Assignment width does not match the variable count.
    #[error("assignment has {got} bits, formula has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    /// Variable index outside 1..=m.
    #[error("variable {var} out of range 1..={max}")]
    IndexOutOfRange { var: u32, max: usize },
}

/// One tap from a register wire into a clause evaluator input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Branch {
    /// Clause (evaluator node) index, 0-based.
    pub clause: usize,
    /// Input slot on the evaluator, 1..=3.
    pub slot: u8,
    /// Source register wire (variable), 1-based.
    pub var: u32,
    /// True when the branch carries an inverter (negated literal).
    pub inverter: bool,
}

/// The machine wiring: m register wires, 3n branches grouped per clause
/// evaluator, and the per-wire fan-out counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Netlist {
    m: usize,
    branches: Vec<Branch>,
    fanout: Vec<usize>,
}

/// Build the netlist for a formula. Every variable gets a register wire even
/// if no clause taps it (fan-out 0).
pub fn build_netlist(f: &Formula) -> Netlist {
    let mut branches = Vec::with_capacity(3 * f.num_clauses());
    let mut fanout = vec![0usize; f.m()];
    for (ci, clause) in f.clauses().iter().enumerate() {
        for (si, lit) in clause.lits().iter().enumerate() {
            branches.push(Branch {
                clause: ci,
                slot: si as u8 + 1,
                var: lit.var,
                inverter: lit.negated,
            });
            fanout[lit.var as usize - 1] += 1;
        }
    }
    Netlist { m: f.m(), branches, fanout }
}

impl Netlist {
    /// Number of register wires.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of clause evaluator nodes.
    pub fn n(&self) -> usize {
        self.branches.len() / 3
    }

    /// All branches, clause-major, slots in order.
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// The three branches feeding evaluator node `clause`.
    pub fn node(&self, clause: usize) -> &[Branch] {
        &self.branches[3 * clause..3 * clause + 3]
    }

    /// Fan-out of each register wire, indexed by variable - 1.
    pub fn fanout(&self) -> &[usize] {
        &self.fanout
    }

    /// Total number of inverters in the machine.
    pub fn inverter_count(&self) -> usize {
        self.branches.iter().filter(|b| b.inverter).count()
    }

    /// Serialize as JSON with stable key order:
    /// `{"m":..,"n":..,"branches":[{"clause":..,"slot":..,"var":..,"inverter":..}],"fanout":[..]}`.
    pub fn write_json<W: Write>(&self, w: &mut W) -> io::Result<()> {
        write!(w, "{{\"m\":{},\"n\":{},\"branches\":[", self.m, self.n())?;
        for (i, b) in self.branches.iter().enumerate() {
            if i > 0 {
                write!(w, ",")?;
            }
            write!(
                w,
                "{{\"clause\":{},\"slot\":{},\"var\":{},\"inverter\":{}}}",
                b.clause, b.slot, b.var, b.inverter
            )?;
        }
        write!(w, "],\"fanout\":[")?;
        for (i, f) in self.fanout.iter().enumerate() {
            if i > 0 {
                write!(w, ",")?;
            }
            write!(w, "{f}")?;
        }
        writeln!(w, "]}}")
    }
}

/// Compensated (Kahan) accumulator: tracks the rounding error of each
/// addition so that long sums of clause energies stay exact to a few ulps.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// A compiled landscape: formula, tailored parameters, the four class
/// energies, per-variable occurrence lists, and the satisfied-floor energy.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    formula: Formula,
    solution: Ce3Solution,
    levels: [f64; 4],
    /// For each variable (index var - 1), the (clause, slot 0..=2) pairs
    /// where it appears.
    occurrence: Vec<Vec<(usize, u8)>>,
    e_floor: f64,
}

/// Compile a formula with a tailored parameter set shared by every clause
/// evaluator. Wires, branches and inverters contribute zero energy; the
/// model is the sum of the clause evaluator energies.
pub fn compile(formula: Formula, solution: Ce3Solution) -> Result<EnergyModel, ModelError> {
    if !solution.is_valid() {
        let d = solution.params.d;
        let reason = if d <= 0.0 {
            "responser half-splitting must be positive".to_string()
        } else if solution.gap < solution.gap_min {
            format!("gap {} below required minimum {}", solution.gap, solution.gap_min)
        } else if solution.level_residual() > LEVEL_TOL * d {
            format!(
                "satisfied classes not degenerate: residual {} exceeds {}",
                solution.level_residual(),
                LEVEL_TOL * d
            )
        } else {
            "stored levels disagree with parameters".to_string()
        };
        return Err(ModelError::InvalidSolution(reason));
    }
    let levels = solution.params.levels();
    let mut occurrence = vec![Vec::new(); formula.m()];
    for (ci, clause) in formula.clauses().iter().enumerate() {
        for (si, lit) in clause.lits().iter().enumerate() {
            occurrence[lit.var as usize - 1].push((ci, si as u8));
        }
    }
    let mut floor = Kahan::default();
    for _ in 0..formula.num_clauses() {
        floor.add(solution.u_sat);
    }
    Ok(EnergyModel {
        formula,
        solution,
        levels,
        occurrence,
        e_floor: floor.sum,
    })
}

impl EnergyModel {
    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn solution(&self) -> &Ce3Solution {
        &self.solution
    }

    /// The four class energies `[U0, U1, U2, U3]`.
    pub fn levels(&self) -> [f64; 4] {
        self.levels
    }

    /// Energy when every clause is satisfied: n · u_sat.
    pub fn e_floor(&self) -> f64 {
        self.e_floor
    }

    /// Energy cost of one violated clause.
    pub fn gap(&self) -> f64 {
        self.solution.gap
    }

    /// Clause slots where variable `v` appears.
    pub fn occurrence(&self, v: u32) -> Result<&[(usize, u8)], ModelError> {
        self.check_var(v)?;
        Ok(&self.occurrence[v as usize - 1])
    }

    fn check_var(&self, v: u32) -> Result<(), ModelError> {
        if v == 0 || v as usize > self.formula.m() {
            Err(ModelError::IndexOutOfRange { var: v, max: self.formula.m() })
        } else {
            Ok(())
        }
    }

    fn check_len(&self, a: &Assignment) -> Result<(), ModelError> {
        if a.len() != self.formula.m() {
            Err(ModelError::LengthMismatch { expected: self.formula.m(), got: a.len() })
        } else {
            Ok(())
        }
    }

    /// Total landscape energy: the compensated sum of every clause
    /// evaluator's class energy. Equal to e_floor + gap · unsat_count up to
    /// accumulated rounding.
    pub fn total_energy(&self, a: &Assignment) -> Result<f64, ModelError> {
        self.check_len(a)?;
        let mut acc = Kahan::default();
        for clause in self.formula.clauses() {
            acc.add(self.levels[clause.class(a)]);
        }
        Ok(acc.sum)
    }

    /// Energy difference from flipping variable `v`, visiting only the
    /// clauses where `v` appears.
    pub fn flip_delta(&self, a: &Assignment, v: u32) -> Result<f64, ModelError> {
        self.check_len(a)?;
        self.check_var(v)?;
        let value = a.bit(v);
        let mut delta = 0.0;
        for &(ci, si) in &self.occurrence[v as usize - 1] {
            let clause = &self.formula.clauses()[ci];
            let k = clause.class(a);
            let was_true = clause.lits()[si as usize].truth(value);
            let k_new = if was_true { k - 1 } else { k + 1 };
            delta += self.levels[k_new] - self.levels[k];
        }
        Ok(delta)
    }
}

/// Steps between automatic resynchronizations of the incrementally
/// maintained energy against a full recomputation.
const RESYNC_INTERVAL: u64 = 1 << 22;

/// A mutable walker over the landscape: holds an assignment plus cached
/// per-clause classes, the violated-clause count, and the incrementally
/// maintained total energy. Single flips cost O(fan-out).
#[derive(Debug, Clone)]
pub struct WalkState<'a> {
    model: &'a EnergyModel,
    assignment: Assignment,
    class: Vec<u8>,
    unsat: usize,
    energy: f64,
    flips_since_resync: u64,
}

impl<'a> WalkState<'a> {
    pub fn new(model: &'a EnergyModel, assignment: Assignment) -> Result<Self, ModelError> {
        model.check_len(&assignment)?;
        let mut state = WalkState {
            model,
            assignment,
            class: vec![0; model.formula.num_clauses()],
            unsat: 0,
            energy: 0.0,
            flips_since_resync: 0,
        };
        state.resync();
        Ok(state)
    }

    /// Recompute classes, violated count and energy from scratch.
    pub fn resync(&mut self) {
        self.unsat = 0;
        let mut acc = Kahan::default();
        for (ci, clause) in self.model.formula.clauses().iter().enumerate() {
            let k = clause.class(&self.assignment);
            self.class[ci] = k as u8;
            if k == 0 {
                self.unsat += 1;
            }
            acc.add(self.model.levels[k]);
        }
        self.energy = acc.sum;
        self.flips_since_resync = 0;
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    /// Incrementally maintained total energy.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Number of violated clauses.
    pub fn unsat(&self) -> usize {
        self.unsat
    }

    /// Energy difference a flip of `v` would cause, from the cached classes.
    pub fn flip_delta(&self, v: u32) -> Result<f64, ModelError> {
        self.model.check_var(v)?;
        let value = self.assignment.bit(v);
        let mut delta = 0.0;
        for &(ci, si) in &self.model.occurrence[v as usize - 1] {
            let k = self.class[ci] as usize;
            let was_true = self.model.formula.clauses()[ci].lits()[si as usize].truth(value);
            let k_new = if was_true { k - 1 } else { k + 1 };
            delta += self.model.levels[k_new] - self.model.levels[k];
        }
        Ok(delta)
    }

    /// Apply the flip of `v`, updating caches; returns the energy change.
    pub fn flip(&mut self, v: u32) -> Result<f64, ModelError> {
        self.model.check_var(v)?;
        let value = self.assignment.bit(v);
        let mut delta = 0.0;
        for &(ci, si) in &self.model.occurrence[v as usize - 1] {
            let k = self.class[ci] as usize;
            let was_true = self.model.formula.clauses()[ci].lits()[si as usize].truth(value);
            let k_new = if was_true { k - 1 } else { k + 1 };
            delta += self.model.levels[k_new] - self.model.levels[k];
            self.class[ci] = k_new as u8;
            if k == 0 {
                self.unsat -= 1;
            } else if k_new == 0 {
                self.unsat += 1;
            }
        }
        self.assignment.flip(v);
        self.energy += delta;
        self.flips_since_resync += 1;
        if self.flips_since_resync >= RESYNC_INTERVAL {
            self.resync();
        }
        Ok(delta)
    }
}

/// Write a tailored parameter set as JSON with stable key order and
/// round-trip-exact floats.
pub fn write_solution_json<W: Write>(s: &Ce3Solution, w: &mut W) -> io::Result<()> {
    write!(
        w,
        "{{\"a\":{},\"b\":{},\"d\":{},\"e\":{},\"f\":{},\"u_sat\":{},\"u_unsat\":{},\"gap\":{},\"gap_min\":{}}}",
        fmt_f64(s.params.a),
        fmt_f64(s.params.b),
        fmt_f64(s.params.d),
        fmt_f64(s.params.e),
        fmt_f64(s.params.f),
        fmt_f64(s.u_sat),
        fmt_f64(s.u_unsat),
        fmt_f64(s.gap),
        fmt_f64(s.gap_min)
    )
}
