//! Thermal relaxation on the compiled landscape: Metropolis single-variable
//! flips under a temperature schedule, with restarts and reproducible
//! observables. The engine is the experimental probe for how quickly (or
//! slowly) the machine relaxes into its ground state.

use std::io::{self, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::compiler::{EnergyModel, ModelError, WalkState};
use crate::formula::Assignment;
use crate::textfmt::fmt_f64;

/// Configuration and input failures.
#[derive(Debug, Clone, Error)]
pub enum DynamicsError {
    #[error("restart aggregation requires a target energy")]
    MissingTarget,
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Temperature schedule, in the same units as energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// Fixed temperature. As t approaches 0 the walk becomes greedy: uphill
    /// moves are rejected, zero-cost moves still diffuse among degenerate
    /// states.
    Constant { t: f64 },
    /// Stage-wise geometric cooling: temperature t0 * ratio^(step / stage_length).
    Geometric { t0: f64, ratio: f64, stage_length: u64 },
}

impl Schedule {
    /// Default cooling for a landscape with the given clause gap: starts at
    /// twice the gap (hot enough to cross single-clause barriers), cools by
    /// 3% every 10·m steps.
    pub fn default_geometric(gap: f64, m: usize) -> Schedule {
        Schedule::Geometric { t0: 2.0 * gap, ratio: 0.97, stage_length: 10 * m.max(1) as u64 }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        match *self {
            Schedule::Constant { t } => {
                if !(t > 0.0) || !t.is_finite() {
                    return Err(DynamicsError::InvalidConfig(format!(
                        "constant temperature must be positive and finite, got {t}"
                    )));
                }
            }
            Schedule::Geometric { t0, ratio, stage_length } => {
                if !(t0 > 0.0) || !t0.is_finite() {
                    return Err(DynamicsError::InvalidConfig(format!(
                        "initial temperature must be positive and finite, got {t0}"
                    )));
                }
                if !(ratio > 0.0 && ratio < 1.0) {
                    return Err(DynamicsError::InvalidConfig(format!(
                        "cooling ratio must lie in (0, 1), got {ratio}"
                    )));
                }
                if stage_length == 0 {
                    return Err(DynamicsError::InvalidConfig(
                        "stage length must be at least 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Temperature for the 0-based step index.
    pub fn temperature(&self, step: u64) -> f64 {
        match *self {
            Schedule::Constant { t } => t,
            Schedule::Geometric { t0, ratio, stage_length } => {
                t0 * ratio.powi((step / stage_length) as i32)
            }
        }
    }
}

/// Per-run knobs. `target_energy` enables early termination; `record_every`
/// is the trace sampling stride.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub max_steps: u64,
    pub target_energy: Option<f64>,
    pub record_every: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: 0, max_steps: 100_000, target_energy: None, record_every: 1000 }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), DynamicsError> {
        if self.max_steps == 0 {
            return Err(DynamicsError::InvalidConfig("max_steps must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(DynamicsError::InvalidConfig("record_every must be at least 1".into()));
        }
        if let Some(t) = self.target_energy {
            if !t.is_finite() {
                return Err(DynamicsError::InvalidConfig(format!(
                    "target energy must be finite, got {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of one annealing run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    /// Lowest energy visited.
    pub best_energy: f64,
    /// An assignment attaining `best_energy`.
    pub best_assignment: Assignment,
    /// First step (0 = initial state) at which the energy reached the
    /// target, within the run's rounding slack; absent if never reached.
    pub steps_to_target: Option<u64>,
    /// Sampled (step, current energy) points: the initial state, every
    /// `record_every`-th step, and the final state.
    pub trace: Vec<(u64, f64)>,
    pub accept_count: u64,
    pub reject_count: u64,
}

/// Absolute slack used when comparing the incrementally maintained energy
/// against a target: accumulated rounding over n summed clause energies.
fn target_slack(model: &EnergyModel) -> f64 {
    1e-9 * model.formula().num_clauses().max(1) as f64 * model.solution().params.d
}

/// The Metropolis acceptance rule: downhill and zero-cost moves always pass;
/// uphill moves pass with probability exp(-delta/temp). At non-positive
/// temperature uphill moves are always rejected.
pub fn metropolis_accept<R: Rng + ?Sized>(delta: f64, temp: f64, rng: &mut R) -> bool {
    if delta <= 0.0 {
        true
    } else if temp <= 0.0 {
        false
    } else {
        rng.random::<f64>() < (-delta / temp).exp()
    }
}

/// Run annealed single-flip dynamics from a uniformly random initial
/// assignment drawn from the seed stream. Fully deterministic given
/// (model, config, schedule).
pub fn metropolis_run(
    model: &EnergyModel,
    cfg: &RunConfig,
    schedule: &Schedule,
) -> Result<RunResult, DynamicsError> {
    cfg.validate()?;
    schedule.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = model.formula().m();
    let start = Assignment::new((0..m).map(|_| rng.random::<bool>()).collect());
    run_with_rng(model, cfg, schedule, start, rng)
}

/// [`metropolis_run`] from a fixed starting assignment (the seed stream then
/// drives only the moves). Exposed for experiments that need a controlled
/// start.
pub fn metropolis_run_from(
    model: &EnergyModel,
    cfg: &RunConfig,
    schedule: &Schedule,
    start: Assignment,
) -> Result<RunResult, DynamicsError> {
    cfg.validate()?;
    schedule.validate()?;
    let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    run_with_rng(model, cfg, schedule, start, rng)
}

fn run_with_rng(
    model: &EnergyModel,
    cfg: &RunConfig,
    schedule: &Schedule,
    start: Assignment,
    mut rng: ChaCha8Rng,
) -> Result<RunResult, DynamicsError> {
    let m = model.formula().m() as u32;
    let slack = target_slack(model);
    let reached = |e: f64| cfg.target_energy.is_some_and(|t| e <= t + slack);

    let mut walk = WalkState::new(model, start)?;
    let mut best_energy = walk.energy();
    let mut best_assignment = walk.assignment().clone();
    let mut steps_to_target = if reached(walk.energy()) { Some(0) } else { None };
    let mut trace = vec![(0u64, walk.energy())];
    let (mut accept_count, mut reject_count) = (0u64, 0u64);

    let mut step = 0u64;
    while step < cfg.max_steps && steps_to_target.is_none() {
        let temp = schedule.temperature(step);
        step += 1;
        let v = rng.random_range(1..=m);
        let delta = walk.flip_delta(v)?;
        if metropolis_accept(delta, temp, &mut rng) {
            walk.flip(v)?;
            accept_count += 1;
            if walk.energy() < best_energy {
                best_energy = walk.energy();
                best_assignment = walk.assignment().clone();
            }
            if steps_to_target.is_none() && reached(walk.energy()) {
                steps_to_target = Some(step);
            }
        } else {
            reject_count += 1;
        }
        if step % cfg.record_every == 0 {
            debug_assert!(
                (walk.energy() - model.total_energy(walk.assignment()).unwrap()).abs() <= slack,
                "incremental energy drifted beyond tolerance at step {step}"
            );
            trace.push((step, walk.energy()));
        }
    }
    if trace.last().map(|&(s, _)| s) != Some(step) {
        trace.push((step, walk.energy()));
    }

    Ok(RunResult {
        seed: cfg.seed,
        best_energy,
        best_assignment,
        steps_to_target,
        trace,
        accept_count,
        reject_count,
    })
}

/// The scalar observables of one run, as serialized in summaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub best_energy: f64,
    pub steps_to_target: Option<u64>,
    pub accepts: u64,
    pub rejects: u64,
}

impl From<&RunResult> for RunSummary {
    fn from(r: &RunResult) -> Self {
        RunSummary {
            seed: r.seed,
            best_energy: r.best_energy,
            steps_to_target: r.steps_to_target,
            accepts: r.accept_count,
            rejects: r.reject_count,
        }
    }
}

/// Aggregate over independent restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiRestartReport {
    /// Fraction of runs that reached the target.
    pub success_rate: f64,
    /// Median steps-to-target over successful runs only.
    pub median_steps_to_target: Option<f64>,
    /// One summary per run, ordered by restart index.
    pub runs: Vec<RunSummary>,
}

/// Run `restarts` independent seeds (template.seed + i), in parallel, and
/// aggregate. Requires a target energy so success is well-defined.
pub fn multi_restart(
    model: &EnergyModel,
    restarts: u64,
    cfg_template: &RunConfig,
    schedule: &Schedule,
) -> Result<MultiRestartReport, DynamicsError> {
    if cfg_template.target_energy.is_none() {
        return Err(DynamicsError::MissingTarget);
    }
    if restarts == 0 {
        return Err(DynamicsError::InvalidConfig("restarts must be at least 1".into()));
    }
    cfg_template.validate()?;
    schedule.validate()?;

    let summaries: Result<Vec<RunSummary>, DynamicsError> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let cfg = RunConfig { seed: cfg_template.seed.wrapping_add(i), ..*cfg_template };
            metropolis_run(model, &cfg, schedule).map(|r| RunSummary::from(&r))
        })
        .collect();
    let runs = summaries?;

    let mut hits: Vec<u64> = runs.iter().filter_map(|r| r.steps_to_target).collect();
    hits.sort_unstable();
    let success_rate = hits.len() as f64 / restarts as f64;
    let median_steps_to_target = if hits.is_empty() {
        None
    } else if hits.len() % 2 == 1 {
        Some(hits[hits.len() / 2] as f64)
    } else {
        Some((hits[hits.len() / 2 - 1] + hits[hits.len() / 2]) as f64 / 2.0)
    };

    Ok(MultiRestartReport { success_rate, median_steps_to_target, runs })
}

/// Write a run trace as CSV (`step,energy`).
pub fn write_trace_csv<W: Write>(result: &RunResult, w: &mut W) -> io::Result<()> {
    writeln!(w, "step,energy")?;
    for &(step, energy) in &result.trace {
        writeln!(w, "{step},{}", fmt_f64(energy))?;
    }
    Ok(())
}

impl RunSummary {
    pub fn write_json<W: Write>(&self, w: &mut W) -> io::Result<()> {
        write!(
            w,
            "{{\"seed\":{},\"best_energy\":{},\"steps_to_target\":{},\"accepts\":{},\"rejects\":{}}}",
            self.seed,
            fmt_f64(self.best_energy),
            match self.steps_to_target {
                Some(s) => s.to_string(),
                None => "null".to_string(),
            },
            self.accepts,
            self.rejects
        )
    }
}

impl MultiRestartReport {
    pub fn write_json<W: Write>(&self, w: &mut W) -> io::Result<()> {
        write!(
            w,
            "{{\"success_rate\":{},\"median_steps_to_target\":{},\"runs\":[",
            fmt_f64(self.success_rate),
            match self.median_steps_to_target {
                Some(s) => fmt_f64(s),
                None => "null".to_string(),
            }
        )?;
        for (i, run) in self.runs.iter().enumerate() {
            if i > 0 {
                write!(w, ",")?;
            }
            run.write_json(w)?;
        }
        writeln!(w, "]}}")
    }
}
