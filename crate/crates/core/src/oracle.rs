//! Exhaustive ground truth for small machines: enumerate the full energy
//! spectrum over all 2^m assignments, extract the ground-state set, and
//! certify the central encoding property — the machine is in a ground state
//! exactly when every clause is satisfied (and, for unsatisfiable formulas,
//! the ground level sits at the minimum-violation energy).

use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::compiler::EnergyModel;
use crate::formula::{Assignment, Formula};
use crate::textfmt::fmt_f64;

/// Default cap on exhaustive enumeration (2^24 assignments).
pub const DEFAULT_ENUM_LIMIT: usize = 24;

/// Degeneracy bucketing tolerance, relative to the responser splitting D.
/// Coarser than evaluation rounding so exactly-degenerate satisfied levels
/// are never split; far finer than the level gap (at least 0.2 D).
pub const BUCKET_TOL: f64 = 1e-9;

/// Enumeration refused.
#[derive(Debug, Clone, Error)]
pub enum OracleError {
    #[error("m = {m} exceeds the exhaustive-enumeration limit {limit}")]
    TooLarge { m: usize, limit: usize },
}

/// One spectrum level: a representative energy and the number of assignments
/// bucketed onto it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumLevel {
    pub energy: f64,
    pub degeneracy: u64,
}

/// Full landscape census for one compiled model.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub m: usize,
    /// Levels in ascending energy order; degeneracies sum to 2^m.
    pub levels: Vec<SpectrumLevel>,
    /// Exact minimum energy encountered.
    pub ground_energy: f64,
    /// Masks (bit v-1 = variable v) of the assignments within the bucketing
    /// tolerance of the minimum, ascending.
    pub ground_assignments: Vec<u64>,
}

/// Verdict on the ground-state encoding property.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodingReport {
    pub ok: bool,
    /// Number of satisfying assignments, counted by clause logic alone.
    pub sat_count: u64,
    /// Number of assignments at the ground energy level.
    pub ground_degeneracy: u64,
    /// Minimum number of violated clauses over all assignments.
    pub min_unsat: usize,
}

/// Sorted level accumulator with tolerance-based bucketing. The anchor of a
/// bucket is the first energy that opened it; insertion order is fixed by
/// the (deterministic) enumeration order, so reports are reproducible.
#[derive(Debug, Clone, Default)]
struct LevelBuckets {
    levels: Vec<(f64, u64)>,
}

impl LevelBuckets {
    fn add(&mut self, energy: f64, count: u64, tol: f64) {
        let i = self.levels.partition_point(|&(e, _)| e < energy);
        if i < self.levels.len() && (self.levels[i].0 - energy).abs() <= tol {
            self.levels[i].1 += count;
        } else if i > 0 && (self.levels[i - 1].0 - energy).abs() <= tol {
            self.levels[i - 1].1 += count;
        } else {
            self.levels.insert(i, (energy, count));
        }
    }

    fn merge(&mut self, other: &LevelBuckets, tol: f64) {
        for &(e, c) in &other.levels {
            self.add(e, c, tol);
        }
    }
}

/// Running minimum plus every (mask, energy) candidate near it.
#[derive(Debug, Clone)]
struct GroundTracker {
    min: f64,
    near: Vec<(u64, f64)>,
}

impl GroundTracker {
    fn new() -> Self {
        GroundTracker { min: f64::INFINITY, near: Vec::new() }
    }

    fn add(&mut self, mask: u64, energy: f64, tol: f64) {
        if energy < self.min - tol {
            self.min = energy;
            self.near.clear();
            self.near.push((mask, energy));
        } else if energy <= self.min + tol {
            if energy < self.min {
                self.min = energy;
            }
            self.near.push((mask, energy));
        }
    }

    /// Masks within tolerance of the final minimum, original order.
    fn members(&self, tol: f64) -> Vec<u64> {
        self.near
            .iter()
            .filter(|&&(_, e)| e <= self.min + tol)
            .map(|&(mask, _)| mask)
            .collect()
    }
}

struct SubcubeCensus {
    buckets: LevelBuckets,
    ground: GroundTracker,
}

/// Walk one prefix-fixed subcube in Gray-code order, reusing the O(fan-out)
/// incremental evaluator for each single-bit step.
fn census_subcube(model: &EnergyModel, m: usize, low: usize, sub: u64, tol: f64) -> SubcubeCensus {
    let base = sub << low;
    let mut walk = crate::compiler::WalkState::new(model, Assignment::from_mask(m, base))
        .expect("assignment width matches model");
    let mut buckets = LevelBuckets::default();
    let mut ground = GroundTracker::new();
    buckets.add(walk.energy(), 1, tol);
    ground.add(base, walk.energy(), tol);
    for i in 1..(1u64 << low) {
        let var = i.trailing_zeros() + 1;
        walk.flip(var).expect("gray-code variable in range");
        let mask = base | (i ^ (i >> 1));
        buckets.add(walk.energy(), 1, tol);
        ground.add(mask, walk.energy(), tol);
    }
    SubcubeCensus { buckets, ground }
}

fn check_limit(m: usize, limit: usize) -> Result<(), OracleError> {
    if m > limit || m >= 64 {
        Err(OracleError::TooLarge { m, limit: limit.min(63) })
    } else {
        Ok(())
    }
}

/// Number of high variables whose values index the parallel subcubes. A pure
/// function of m, so the partition — and therefore the report — does not
/// depend on the worker pool.
fn default_prefix_bits(m: usize) -> usize {
    m.saturating_sub(16).min(8)
}

/// Enumerate all 2^m assignments and report the spectrum. Refuses m > limit.
pub fn enumerate_spectrum(
    model: &EnergyModel,
    limit: usize,
) -> Result<SpectrumReport, OracleError> {
    enumerate_spectrum_with(model, limit, default_prefix_bits(model.formula().m()))
}

/// [`enumerate_spectrum`] with an explicit subcube split: the 2^prefix_bits
/// subcubes (fixed high variables) are walked independently, possibly in
/// parallel, and merged in index order. Any split yields the same report.
pub fn enumerate_spectrum_with(
    model: &EnergyModel,
    limit: usize,
    prefix_bits: usize,
) -> Result<SpectrumReport, OracleError> {
    let m = model.formula().m();
    check_limit(m, limit)?;
    let p = prefix_bits.min(m);
    let low = m - p;
    let tol = BUCKET_TOL * model.solution().params.d;

    let parts: Vec<SubcubeCensus> = (0..1u64 << p)
        .into_par_iter()
        .map(|sub| census_subcube(model, m, low, sub, tol))
        .collect();

    let mut buckets = LevelBuckets::default();
    let mut min = f64::INFINITY;
    for part in &parts {
        buckets.merge(&part.buckets, tol);
        min = min.min(part.ground.min);
    }
    let mut ground_assignments: Vec<u64> = parts
        .iter()
        .flat_map(|part| {
            part.ground
                .near
                .iter()
                .filter(|&&(_, e)| e <= min + tol)
                .map(|&(mask, _)| mask)
        })
        .collect();
    ground_assignments.sort_unstable();

    Ok(SpectrumReport {
        m,
        levels: buckets
            .levels
            .iter()
            .map(|&(energy, degeneracy)| SpectrumLevel { energy, degeneracy })
            .collect(),
        ground_energy: min,
        ground_assignments,
    })
}

/// Slow independent spectrum: every assignment re-summed from scratch, no
/// incremental updates, no partitioning. Retained as a cross-check for the
/// Gray-code path.
pub fn naive_spectrum(model: &EnergyModel, limit: usize) -> Result<SpectrumReport, OracleError> {
    let m = model.formula().m();
    check_limit(m, limit)?;
    let tol = BUCKET_TOL * model.solution().params.d;
    let mut buckets = LevelBuckets::default();
    let mut ground = GroundTracker::new();
    for mask in 0..1u64 << m {
        let e = model
            .total_energy(&Assignment::from_mask(m, mask))
            .expect("assignment width matches model");
        buckets.add(e, 1, tol);
        ground.add(mask, e, tol);
    }
    let mut ground_assignments = ground.members(tol);
    ground_assignments.sort_unstable();
    Ok(SpectrumReport {
        m,
        levels: buckets
            .levels
            .iter()
            .map(|&(energy, degeneracy)| SpectrumLevel { energy, degeneracy })
            .collect(),
        ground_energy: ground.min,
        ground_assignments,
    })
}

/// Integer-exact census of clause violations: walks the hypercube in the
/// same subcube/Gray order but maintains only per-clause true-literal
/// counts, never touching an energy. Returns (sat_count, min_unsat, masks
/// attaining min_unsat, ascending).
fn violation_census(f: &Formula, prefix_bits: usize) -> (u64, usize, Vec<u64>) {
    let m = f.m();
    let p = prefix_bits.min(m);
    let low = m - p;

    // Occurrence lists rebuilt here so this path shares nothing with the
    // energy model's bookkeeping.
    let mut occ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m];
    for (ci, clause) in f.clauses().iter().enumerate() {
        for (si, lit) in clause.lits().iter().enumerate() {
            occ[lit.var as usize - 1].push((ci, si));
        }
    }

    struct Part {
        sat: u64,
        min_unsat: usize,
        argmin: Vec<u64>,
    }

    let parts: Vec<Part> = (0..1u64 << p)
        .into_par_iter()
        .map(|sub| {
            let base = sub << low;
            let mut a = Assignment::from_mask(m, base);
            let mut truecount: Vec<u8> =
                f.clauses().iter().map(|c| c.class(&a) as u8).collect();
            let mut unsat = truecount.iter().filter(|&&k| k == 0).count();
            let mut part = Part { sat: 0, min_unsat: usize::MAX, argmin: Vec::new() };
            let record = |mask: u64, unsat: usize, part: &mut Part| {
                if unsat == 0 {
                    part.sat += 1;
                }
                match unsat.cmp(&part.min_unsat) {
                    std::cmp::Ordering::Less => {
                        part.min_unsat = unsat;
                        part.argmin.clear();
                        part.argmin.push(mask);
                    }
                    std::cmp::Ordering::Equal => part.argmin.push(mask),
                    std::cmp::Ordering::Greater => {}
                }
            };
            record(base, unsat, &mut part);
            for i in 1..(1u64 << low) {
                let var = i.trailing_zeros() as usize + 1;
                let value = a.bit(var as u32);
                for &(ci, si) in &occ[var - 1] {
                    let lit = f.clauses()[ci].lits()[si];
                    if lit.truth(value) {
                        truecount[ci] -= 1;
                        if truecount[ci] == 0 {
                            unsat += 1;
                        }
                    } else {
                        if truecount[ci] == 0 {
                            unsat -= 1;
                        }
                        truecount[ci] += 1;
                    }
                }
                a.flip(var as u32);
                record(base | (i ^ (i >> 1)), unsat, &mut part);
            }
            part
        })
        .collect();

    let sat = parts.iter().map(|p| p.sat).sum();
    let min_unsat = parts.iter().map(|p| p.min_unsat).min().unwrap_or(0);
    let mut argmin: Vec<u64> = parts
        .iter()
        .filter(|p| p.min_unsat == min_unsat)
        .flat_map(|p| p.argmin.iter().copied())
        .collect();
    argmin.sort_unstable();
    (sat, min_unsat, argmin)
}

/// Count satisfying assignments by exhaustive clause-logic enumeration —
/// no energies involved. Usable standalone as a brute-force #SAT oracle.
pub fn count_satisfying(f: &Formula, limit: usize) -> Result<u64, OracleError> {
    check_limit(f.m(), limit)?;
    let (sat, _, _) = violation_census(f, default_prefix_bits(f.m()));
    Ok(sat)
}

/// Certify the encoding property for one compiled model by exhaustive
/// enumeration. The satisfying-assignment side is computed by pure clause
/// logic; the ground-state side by the energy spectrum; `ok` records whether
/// the two coincide (for unsatisfiable formulas: whether the ground level
/// sits exactly one gap per violated clause above the floor and collects
/// precisely the minimum-violation assignments).
pub fn check_encoding(model: &EnergyModel, limit: usize) -> Result<EncodingReport, OracleError> {
    let m = model.formula().m();
    check_limit(m, limit)?;
    let spectrum = enumerate_spectrum(model, limit)?;
    let (sat_count, min_unsat, argmin) =
        violation_census(model.formula(), default_prefix_bits(m));

    let ground_degeneracy = spectrum.ground_assignments.len() as u64;
    let sets_match = spectrum.ground_assignments == argmin;
    let n = model.formula().num_clauses().max(1) as f64;
    let expected = model.e_floor() + model.gap() * min_unsat as f64;
    let energy_ok =
        (spectrum.ground_energy - expected).abs() <= 1e-9 * n * model.solution().params.d;

    let ok = if sat_count > 0 {
        min_unsat == 0 && sets_match && ground_degeneracy == sat_count
    } else {
        sets_match && energy_ok
    };

    Ok(EncodingReport { ok, sat_count, ground_degeneracy, min_unsat })
}

impl SpectrumReport {
    /// JSON with stable key order; assignments rendered as 0/1 strings with
    /// variable 1 leftmost.
    pub fn write_json<W: Write>(&self, w: &mut W) -> io::Result<()> {
        write!(
            w,
            "{{\"m\":{},\"ground_energy\":{},\"levels\":[",
            self.m,
            fmt_f64(self.ground_energy)
        )?;
        for (i, level) in self.levels.iter().enumerate() {
            if i > 0 {
                write!(w, ",")?;
            }
            write!(
                w,
                "{{\"energy\":{},\"degeneracy\":{}}}",
                fmt_f64(level.energy),
                level.degeneracy
            )?;
        }
        write!(w, "],\"ground_assignments\":[")?;
        for (i, &mask) in self.ground_assignments.iter().enumerate() {
            if i > 0 {
                write!(w, ",")?;
            }
            write!(w, "\"{}\"", Assignment::from_mask(self.m, mask))?;
        }
        writeln!(w, "]}}")
    }
}

impl EncodingReport {
    pub fn write_json<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(
            w,
            "{{\"ok\":{},\"sat_count\":{},\"ground_degeneracy\":{},\"min_unsat\":{}}}",
            self.ok, self.sat_count, self.ground_degeneracy, self.min_unsat
        )
    }
}
