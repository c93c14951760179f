//! 3SAT instances: literals, clauses, formulas, assignments, DIMACS CNF I/O,
//! and a seeded random instance generator.
//!
//! Clauses are strict: exactly three literals over pairwise distinct variables.
//! Tautological or repeated-variable clauses are rejected at construction.

use std::fmt;
use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Errors raised by formula construction, evaluation, and DIMACS parsing.
#[derive(Debug, Error)]
pub enum FormulaError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("invalid token {token:?} on line {line}")]
    InvalidToken { token: String, line: usize },
    #[error("clause count mismatch: header declares {declared}, found {found} terminated clauses")]
    ClauseCountMismatch {
        declared: usize,
        found: usize,
        /// True when trailing literals were never closed by a `0`.
        unterminated: bool,
    },
    #[error("variable {var} out of range 1..={max}")]
    VariableOutOfRange { var: i64, max: usize },
    #[error("not strict 3SAT: clause {clause}: {reason}")]
    NotThreeSat { clause: usize, reason: String },
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("assignment length {got} does not match variable count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// A variable or its negation. Variables are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: u32,
    pub negated: bool,
}

impl Literal {
    pub fn new(var: u32, negated: bool) -> Self {
        Literal { var, negated }
    }

    /// Build from a DIMACS-style signed code (negative means negated, never 0).
    pub fn from_code(code: i64) -> Self {
        debug_assert!(code != 0);
        Literal {
            var: code.unsigned_abs() as u32,
            negated: code < 0,
        }
    }

    /// Signed DIMACS code of this literal.
    pub fn code(self) -> i64 {
        let v = i64::from(self.var);
        if self.negated {
            -v
        } else {
            v
        }
    }

    /// Truth value of the literal when its variable holds `value`.
    pub fn truth(self, value: bool) -> bool {
        value != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// A clause of exactly three literals over pairwise distinct variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Clause {
    lits: [Literal; 3],
}

impl Clause {
    /// Checks the distinct-variable invariant; `index` is only used in diagnostics.
    pub fn new(lits: [Literal; 3], index: usize) -> Result<Self, FormulaError> {
        for i in 0..3 {
            for j in i + 1..3 {
                if lits[i].var == lits[j].var {
                    return Err(FormulaError::NotThreeSat {
                        clause: index,
                        reason: format!("variable {} repeated", lits[i].var),
                    });
                }
            }
        }
        Ok(Clause { lits })
    }

    pub fn lits(&self) -> &[Literal; 3] {
        &self.lits
    }

    /// Class index k in {0,1,2,3}: the number of literals true under `a`.
    /// k = 0 exactly when the clause is unsatisfied.
    pub fn class(&self, a: &Assignment) -> usize {
        self.lits
            .iter()
            .filter(|l| l.truth(a.bit(l.var)))
            .count()
    }

    /// Literals sorted by (var, negated); used for duplicate detection.
    fn canonical(&self) -> [Literal; 3] {
        let mut c = self.lits;
        c.sort_unstable();
        c
    }
}

/// A truth assignment: bit i holds the value of variable i+1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    /// All-false assignment over `m` variables.
    pub fn zeros(m: usize) -> Self {
        Assignment {
            bits: vec![false; m],
        }
    }

    /// Decode from a mask where bit v-1 holds the value of variable v.
    pub fn from_mask(m: usize, mask: u64) -> Self {
        Assignment {
            bits: (0..m).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    /// Parse a 0/1 string, variable 1 leftmost.
    pub fn from_bit_str(s: &str) -> Option<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return None,
            }
        }
        Some(Assignment { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Value of 1-based variable `var`.
    pub fn bit(&self, var: u32) -> bool {
        self.bits[var as usize - 1]
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.bits[var as usize - 1] = value;
    }

    pub fn flip(&mut self, var: u32) {
        let i = var as usize - 1;
        self.bits[i] = !self.bits[i];
    }

    /// Mask encoding, bit v-1 = variable v. Requires m <= 64.
    pub fn to_mask(&self) -> u64 {
        debug_assert!(self.bits.len() <= 64);
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i))
    }
}

impl fmt::Display for Assignment {
    /// Renders as a 0/1 string, variable 1 leftmost.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Result of evaluating a formula under an assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evaluation {
    pub satisfied: bool,
    pub unsat_count: usize,
}

/// A 3SAT instance: `m` variables and an ordered list of three-literal clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    m: usize,
    clauses: Vec<Clause>,
}

/// Loose upper bound on the clause count: the number of three-element subsets
/// of the 2m literals.
pub fn max_clauses(m: usize) -> u128 {
    let t = 2 * m as u128;
    if t < 3 {
        0
    } else {
        t * (t - 1) * (t - 2) / 6
    }
}

impl Formula {
    /// Validates m >= 1, variable ranges, and the clause-count bound.
    pub fn new(m: usize, clauses: Vec<Clause>) -> Result<Self, FormulaError> {
        if m == 0 {
            return Err(FormulaError::InvalidSize(
                "variable count must be at least 1".into(),
            ));
        }
        if clauses.len() as u128 > max_clauses(m) {
            return Err(FormulaError::InvalidSize(format!(
                "{} clauses exceed the bound C(2m,3) = {} for m = {}",
                clauses.len(),
                max_clauses(m),
                m
            )));
        }
        for (i, c) in clauses.iter().enumerate() {
            for l in c.lits() {
                if l.var == 0 || l.var as usize > m {
                    return Err(FormulaError::VariableOutOfRange {
                        var: i64::from(l.var),
                        max: m,
                    });
                }
            }
            let _ = Clause::new(*c.lits(), i)?; // re-assert distinctness
        }
        Ok(Formula { m, clauses })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Count unsatisfied clauses under `a`.
    pub fn evaluate(&self, a: &Assignment) -> Result<Evaluation, FormulaError> {
        if a.len() != self.m {
            return Err(FormulaError::LengthMismatch {
                expected: self.m,
                got: a.len(),
            });
        }
        let unsat_count = self.clauses.iter().filter(|c| c.class(a) == 0).count();
        Ok(Evaluation {
            satisfied: unsat_count == 0,
            unsat_count,
        })
    }

    /// Pairs (first, dup) of clauses equal up to literal order. Duplicates are
    /// legal (their energies add) but usually unintended, so callers surface
    /// them as warnings.
    pub fn duplicate_clauses(&self) -> Vec<(usize, usize)> {
        let mut seen: std::collections::HashMap<[Literal; 3], usize> =
            std::collections::HashMap::new();
        let mut dups = Vec::new();
        for (i, c) in self.clauses.iter().enumerate() {
            match seen.entry(c.canonical()) {
                std::collections::hash_map::Entry::Occupied(e) => dups.push((*e.get(), i)),
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(i);
                }
            }
        }
        dups
    }

    /// Canonical DIMACS serialization: clauses and literals in input order, LF.
    pub fn write_dimacs<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "p cnf {} {}", self.m, self.clauses.len())?;
        for c in &self.clauses {
            let l = c.lits();
            writeln!(w, "{} {} {} 0", l[0], l[1], l[2])?;
        }
        Ok(())
    }

    pub fn to_dimacs(&self) -> String {
        let mut buf = Vec::new();
        self.write_dimacs(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("dimacs is ascii")
    }
}

/// A parsed DIMACS file: the formula plus read-time diagnostics.
#[derive(Debug, Clone)]
pub struct ParsedCnf {
    pub formula: Formula,
    /// Comment lines, `c ` prefix stripped. Not round-tripped.
    pub comments: Vec<String>,
    /// Human-readable warnings (currently: duplicate clauses).
    pub warnings: Vec<String>,
}

/// Parse DIMACS CNF: optional `c` comment lines, one `p cnf m n` header, then
/// clauses as whitespace-separated signed integers each terminated by 0.
/// Accepts LF or CRLF.
pub fn parse_dimacs<R: BufRead>(reader: R) -> Result<ParsedCnf, FormulaError> {
    let mut header: Option<(usize, usize)> = None;
    let mut comments = Vec::new();
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<Literal> = Vec::new();
    let mut pending_valid = true; // length check deferred to the terminator
    let mut pending_line = 0;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        let lineno = lineno + 1;
        let trimmed = line.trim_start();
        if trimmed.starts_with('c') {
            comments.push(
                trimmed
                    .strip_prefix("c ")
                    .unwrap_or_else(|| trimmed.strip_prefix('c').unwrap())
                    .to_string(),
            );
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(FormulaError::MalformedHeader(format!(
                    "second header on line {lineno}"
                )));
            }
            let toks: Vec<&str> = trimmed.split_whitespace().collect();
            if toks.len() != 4 || toks[0] != "p" || toks[1] != "cnf" {
                return Err(FormulaError::MalformedHeader(format!(
                    "expected `p cnf <vars> <clauses>`, got {trimmed:?} on line {lineno}"
                )));
            }
            let m: usize = toks[2].parse().map_err(|_| {
                FormulaError::MalformedHeader(format!("bad variable count {:?}", toks[2]))
            })?;
            let n: usize = toks[3].parse().map_err(|_| {
                FormulaError::MalformedHeader(format!("bad clause count {:?}", toks[3]))
            })?;
            header = Some((m, n));
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let Some((m, _)) = header else {
            return Err(FormulaError::MalformedHeader(format!(
                "clause data before header on line {lineno}"
            )));
        };
        for tok in trimmed.split_whitespace() {
            let code: i64 = tok.parse().map_err(|_| FormulaError::InvalidToken {
                token: tok.to_string(),
                line: lineno,
            })?;
            if code == 0 {
                let index = clauses.len();
                if pending.len() != 3 || !pending_valid {
                    return Err(FormulaError::NotThreeSat {
                        clause: index,
                        reason: format!("{} literals, expected 3", pending.len()),
                    });
                }
                clauses.push(Clause::new([pending[0], pending[1], pending[2]], index)?);
                pending.clear();
                pending_valid = true;
            } else {
                if code.unsigned_abs() > m as u64 {
                    return Err(FormulaError::VariableOutOfRange { var: code, max: m });
                }
                if pending.is_empty() {
                    pending_line = lineno;
                }
                if pending.len() == 3 {
                    pending_valid = false; // over-long clause; report at terminator
                }
                pending.push(Literal::from_code(code));
            }
        }
    }

    let Some((m, n)) = header else {
        return Err(FormulaError::MalformedHeader("missing `p cnf` header".into()));
    };
    if !pending.is_empty() {
        return Err(FormulaError::ClauseCountMismatch {
            declared: n,
            found: clauses.len(),
            unterminated: true,
        });
    }
    let _ = pending_line;
    if clauses.len() != n {
        return Err(FormulaError::ClauseCountMismatch {
            declared: n,
            found: clauses.len(),
            unterminated: false,
        });
    }
    let formula = Formula::new(m, clauses)?;
    let warnings = formula
        .duplicate_clauses()
        .iter()
        .map(|(a, b)| format!("clause {b} duplicates clause {a}"))
        .collect();
    Ok(ParsedCnf {
        formula,
        comments,
        warnings,
    })
}

/// Parse from an in-memory string.
pub fn parse_dimacs_str(text: &str) -> Result<ParsedCnf, FormulaError> {
    parse_dimacs(text.as_bytes())
}

/// Generate a random strict-3SAT instance: each clause picks 3 distinct
/// variables uniformly and independent uniform negation flags. Deterministic
/// for a fixed seed.
pub fn gen_random(m: usize, n: usize, seed: u64) -> Result<Formula, FormulaError> {
    if m < 3 {
        return Err(FormulaError::InvalidSize(format!(
            "need at least 3 variables, got {m}"
        )));
    }
    if n == 0 {
        return Err(FormulaError::InvalidSize("need at least 1 clause".into()));
    }
    if n as u128 > max_clauses(m) {
        return Err(FormulaError::InvalidSize(format!(
            "{n} clauses exceed the bound C(2m,3) = {} for m = {m}",
            max_clauses(m)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clauses = Vec::with_capacity(n);
    for i in 0..n {
        let vars = rand::seq::index::sample(&mut rng, m, 3);
        let mut lits = [Literal::new(1, false); 3];
        for (slot, v) in vars.iter().enumerate() {
            lits[slot] = Literal::new(v as u32 + 1, rng.random());
        }
        clauses.push(Clause::new(lits, i).expect("sampled variables are distinct"));
    }
    Formula::new(m, clauses)
}
