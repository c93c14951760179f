//! Command-line front end: wires the formula, tailoring, compilation,
//! oracle and dynamics layers together behind reproducible subcommands.
//!
//! Exit codes: 0 success, 1 usage error, 2 parse/validation error,
//! 3 no feasible tailoring, 4 search budget exhausted without reaching the
//! target. Every failure prints a single line `error: <code>: <message>` to
//! the diagnostic stream.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use satglass::ce3::{self, scan_region, Ce3Solution, NoSolution, ScanError, ScanSpec};
use satglass::compiler::{build_netlist, compile, write_solution_json, EnergyModel, ModelError};
use satglass::dynamics::{
    metropolis_run, multi_restart, write_trace_csv, DynamicsError, RunConfig, Schedule,
};
use satglass::formula::{gen_random, parse_dimacs, Assignment, Formula, FormulaError, ParsedCnf};
use satglass::oracle::{check_encoding, enumerate_spectrum, OracleError, DEFAULT_ENUM_LIMIT};
use satglass::textfmt::{fmt_f64, json_escape};

/// What a CLI invocation produced: a process exit code plus the files it
/// wrote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
}

/// Internal failure channel; carries the diagnostic code and exit status.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Parse(String),
    Infeasible(String),
    Budget(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Parse(_) => "parse",
            Failure::Infeasible(_) => "infeasible",
            Failure::Budget(_) => "budget",
            Failure::Io(_) => "io",
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) | Failure::Io(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Budget(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m)
            | Failure::Parse(m)
            | Failure::Infeasible(m)
            | Failure::Budget(m)
            | Failure::Io(m) => m,
        }
    }
}

impl From<FormulaError> for Failure {
    fn from(e: FormulaError) -> Self {
        match e {
            FormulaError::Io(io) => Failure::Io(io.to_string()),
            other => Failure::Parse(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<NoSolution> for Failure {
    fn from(e: NoSolution) -> Self {
        Failure::Infeasible(e.to_string())
    }
}

impl From<ScanError> for Failure {
    fn from(e: ScanError) -> Self {
        Failure::Parse(e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Parse(e.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure::Parse(e.to_string())
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::MissingTarget => Failure::Usage(e.to_string()),
            other => Failure::Parse(other.to_string()),
        }
    }
}

/// An inclusive numeric interval given on the command line as `LO:HI`.
#[derive(Debug, Clone, Copy)]
struct Interval {
    lo: f64,
    hi: f64,
}

fn parse_interval(s: &str) -> Result<Interval, String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower bound {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper bound {hi:?}"))?;
    Ok(Interval { lo, hi })
}

/// Tailoring inputs that must be given explicitly.
#[derive(Debug, Args, Clone, Copy)]
struct Coupling {
    /// Pairwise coupling as the ratio B/D.
    #[arg(long)]
    b: f64,
    /// Per-wire field step as the ratio F/D.
    #[arg(long)]
    f: f64,
    /// Responser half-splitting D: the absolute energy scale.
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    /// Minimum acceptable gap between the violated and satisfied levels,
    /// as a ratio to D.
    #[arg(long = "gap-min", default_value_t = 0.2)]
    gap_min: f64,
}

/// Tailoring inputs with the benchmark defaults (B/D = 0.3, F/D = 1).
#[derive(Debug, Args, Clone, Copy)]
struct CouplingOrDefault {
    /// Pairwise coupling as the ratio B/D.
    #[arg(long, default_value_t = 0.3)]
    b: f64,
    /// Per-wire field step as the ratio F/D.
    #[arg(long, default_value_t = 1.0)]
    f: f64,
    /// Responser half-splitting D: the absolute energy scale.
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    /// Minimum acceptable gap between the violated and satisfied levels,
    /// as a ratio to D.
    #[arg(long = "gap-min", default_value_t = 0.2)]
    gap_min: f64,
}

impl From<CouplingOrDefault> for Coupling {
    fn from(c: CouplingOrDefault) -> Self {
        Coupling { b: c.b, f: c.f, d: c.d, gap_min: c.gap_min }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "satglass",
    version,
    about = "Reduce 3SAT to the ground state of a tailored energy landscape",
    disable_help_subcommand = true
)]
struct Cli {
    /// Worker pool size for parallel subcommands (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Parse a DIMACS CNF file ("-" for stdin) and report its shape.
    Validate { cnf: String },
    /// Tailor the clause-evaluator parameters (A, E) for given couplings.
    Ce3Solve {
        #[command(flatten)]
        coupling: Coupling,
    },
    /// Map the feasible region of the coupling plane to CSV and PGM files.
    Ce3Scan {
        /// B/D interval, inclusive, as LO:HI.
        #[arg(long = "b-range", value_parser = parse_interval, default_value = "0.01:1.0")]
        b_range: Interval,
        /// F/D interval, inclusive, as LO:HI.
        #[arg(long = "f-range", value_parser = parse_interval, default_value = "0.1:3.0")]
        f_range: Interval,
        /// Number of B samples.
        #[arg(long, default_value_t = 100)]
        nb: usize,
        /// Number of F samples.
        #[arg(long, default_value_t = 100)]
        nf: usize,
        /// Minimum acceptable gap, as a ratio to D.
        #[arg(long = "gap-min", default_value_t = 0.2)]
        gap_min: f64,
        /// Output CSV path (one row per cell).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Output PGM image path (black = feasible).
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Tailor, compile, and emit the machine netlist with its parameters.
    Compile {
        cnf: String,
        #[command(flatten)]
        coupling: Coupling,
    },
    /// Evaluate the landscape energy of one assignment.
    Energy {
        cnf: String,
        /// Assignment as a 0/1 string, variable 1 leftmost.
        #[arg(long)]
        assignment: String,
        #[command(flatten)]
        coupling: CouplingOrDefault,
    },
    /// Exhaustively enumerate the energy spectrum (small m only).
    Spectrum {
        cnf: String,
        /// Refuse instances with more than this many variables.
        #[arg(long, default_value_t = DEFAULT_ENUM_LIMIT)]
        limit: usize,
        #[command(flatten)]
        coupling: CouplingOrDefault,
    },
    /// Certify that ground states encode satisfying assignments.
    Verify {
        cnf: String,
        /// Refuse instances with more than this many variables.
        #[arg(long, default_value_t = DEFAULT_ENUM_LIMIT)]
        limit: usize,
        #[command(flatten)]
        coupling: CouplingOrDefault,
    },
    /// Relax the machine by Metropolis single-flip annealing.
    Anneal {
        cnf: String,
        /// Base random seed (restart i uses seed + i).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Step budget per run.
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        /// Temperature schedule: const:T or geo:T0,RATIO,STAGE
        /// (default: geo with T0 = 2*gap, ratio 0.97, stage 10*m).
        #[arg(long)]
        schedule: Option<String>,
        /// Independent restarts (requires --target when > 1).
        #[arg(long, default_value_t = 1)]
        restarts: u64,
        /// Write the single-run energy trace CSV here (restarts = 1 only).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Stop when the energy reaches this value: "floor" (all clauses
        /// satisfied), "oracle" (exhaustive ground energy), or a number.
        #[arg(long)]
        target: Option<String>,
        /// Trace sampling stride in steps.
        #[arg(long = "record-every", default_value_t = 1000)]
        record_every: u64,
        #[command(flatten)]
        coupling: CouplingOrDefault,
    },
    /// Generate a random 3-CNF instance to stdout.
    Gen {
        /// Number of variables.
        #[arg(long)]
        m: usize,
        /// Number of clauses.
        #[arg(long)]
        n: usize,
        /// Generator seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Run the CLI against captured streams; never panics on user input, never
/// touches process exit. The binary wraps this with real stdio.
pub fn run_cli<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> CommandOutcome
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(out, "{e}");
                    CommandOutcome { exit_code: 0, artifacts: Vec::new() }
                }
                ErrorKind::ValueValidation | ErrorKind::InvalidValue => {
                    let _ = writeln!(err, "error: parse: {}", first_line(&e));
                    CommandOutcome { exit_code: 2, artifacts: Vec::new() }
                }
                _ => {
                    let _ = writeln!(err, "error: usage: {}", first_line(&e));
                    CommandOutcome { exit_code: 1, artifacts: Vec::new() }
                }
            };
        }
    };

    let mut artifacts = Vec::new();
    match dispatch(cli, out, &mut artifacts) {
        Ok(()) => CommandOutcome { exit_code: 0, artifacts },
        Err(f) => {
            let _ = writeln!(err, "error: {}: {}", f.code(), f.message());
            CommandOutcome { exit_code: f.exit_code(), artifacts }
        }
    }
}

fn first_line(e: &clap::Error) -> String {
    let text = e.to_string();
    let line = text.lines().next().unwrap_or_default();
    line.strip_prefix("error: ").unwrap_or(line).to_string()
}

fn dispatch(cli: Cli, out: &mut dyn Write, artifacts: &mut Vec<PathBuf>) -> Result<(), Failure> {
    let threads = cli.threads;
    match cli.cmd {
        Cmd::Validate { cnf } => cmd_validate(&cnf, out),
        Cmd::Ce3Solve { coupling } => cmd_solve(&coupling, out),
        Cmd::Ce3Scan { b_range, f_range, nb, nf, gap_min, csv, pgm } => {
            cmd_scan(b_range, f_range, nb, nf, gap_min, csv, pgm, threads, out, artifacts)
        }
        Cmd::Compile { cnf, coupling } => cmd_compile(&cnf, &coupling, out),
        Cmd::Energy { cnf, assignment, coupling } => {
            cmd_energy(&cnf, &assignment, &coupling.into(), out)
        }
        Cmd::Spectrum { cnf, limit, coupling } => {
            cmd_spectrum(&cnf, limit, &coupling.into(), out)
        }
        Cmd::Verify { cnf, limit, coupling } => cmd_verify(&cnf, limit, &coupling.into(), out),
        Cmd::Anneal {
            cnf,
            seed,
            steps,
            schedule,
            restarts,
            trace,
            target,
            record_every,
            coupling,
        } => cmd_anneal(
            &cnf,
            seed,
            steps,
            schedule.as_deref(),
            restarts,
            trace,
            target.as_deref(),
            record_every,
            &coupling.into(),
            threads,
            out,
            artifacts,
        ),
        Cmd::Gen { m, n, seed } => cmd_gen(m, n, seed, out),
    }
}

/// Read a formula from a path or stdin ("-").
fn read_formula(path: &str) -> Result<ParsedCnf, Failure> {
    let parsed = if path == "-" {
        parse_dimacs(BufReader::new(io::stdin()))?
    } else {
        parse_dimacs(BufReader::new(File::open(path).map_err(|e| {
            Failure::Io(format!("{path}: {e}"))
        })?))?
    };
    Ok(parsed)
}

/// Solve at the given ratios (absolute values scale with d) and keep the
/// best solution: largest gap, ties toward smaller E.
fn best_solution(c: &Coupling) -> Result<Ce3Solution, Failure> {
    if !(c.d > 0.0) || !c.d.is_finite() {
        return Err(Failure::Parse(format!("d must be positive and finite, got {}", c.d)));
    }
    if c.gap_min < 0.0 {
        return Err(Failure::Parse(format!("gap-min must be non-negative, got {}", c.gap_min)));
    }
    let sols = ce3::solve(c.b * c.d, c.d, c.f * c.d, c.gap_min * c.d)?;
    let mut best = sols[0];
    for s in sols.into_iter().skip(1) {
        if s.gap > best.gap {
            best = s;
        }
    }
    Ok(best)
}

fn compile_from(c: &Coupling, formula: Formula) -> Result<EnergyModel, Failure> {
    let solution = best_solution(c)?;
    Ok(compile(formula, solution)?)
}

/// Render a writer-producing value into an owned single-line JSON fragment.
fn embed<F>(write: F) -> Result<String, Failure>
where
    F: FnOnce(&mut Vec<u8>) -> io::Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf)?;
    let s = String::from_utf8(buf).expect("writers emit UTF-8");
    Ok(s.trim_end().to_string())
}

fn solution_with_ratios(s: &Ce3Solution) -> Result<String, Failure> {
    let d = s.params.d;
    let params = embed(|b| write_solution_json(s, b))?;
    Ok(format!(
        "{{\"params\":{params},\"ratios\":{{\"a_over_d\":{},\"b_over_d\":{},\"e_over_d\":{},\
         \"f_over_d\":{},\"u_sat_over_d\":{},\"u_unsat_over_d\":{},\"gap_over_d\":{}}}}}",
        fmt_f64(s.params.a / d),
        fmt_f64(s.params.b / d),
        fmt_f64(s.params.e / d),
        fmt_f64(s.params.f / d),
        fmt_f64(s.u_sat / d),
        fmt_f64(s.u_unsat / d),
        fmt_f64(s.gap / d)
    ))
}

fn cmd_validate(cnf: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let parsed = read_formula(cnf)?;
    let warnings: Vec<String> = parsed.warnings.iter().map(|w| json_escape(w)).collect();
    writeln!(
        out,
        "{{\"m\":{},\"n\":{},\"warnings\":[{}]}}",
        parsed.formula.m(),
        parsed.formula.num_clauses(),
        warnings
            .iter()
            .map(|w| format!("\"{w}\""))
            .collect::<Vec<_>>()
            .join(",")
    )?;
    Ok(())
}

fn cmd_solve(c: &Coupling, out: &mut dyn Write) -> Result<(), Failure> {
    if !(c.d > 0.0) || !c.d.is_finite() {
        return Err(Failure::Parse(format!("d must be positive and finite, got {}", c.d)));
    }
    if c.gap_min < 0.0 {
        return Err(Failure::Parse(format!("gap-min must be non-negative, got {}", c.gap_min)));
    }
    let sols = ce3::solve(c.b * c.d, c.d, c.f * c.d, c.gap_min * c.d)?;
    let rendered: Result<Vec<String>, Failure> =
        sols.iter().map(solution_with_ratios).collect();
    writeln!(
        out,
        "{{\"b_over_d\":{},\"f_over_d\":{},\"d\":{},\"gap_min_over_d\":{},\"solutions\":[{}]}}",
        fmt_f64(c.b),
        fmt_f64(c.f),
        fmt_f64(c.d),
        fmt_f64(c.gap_min),
        rendered?.join(",")
    )?;
    Ok(())
}

fn in_pool<T: Send>(
    threads: Option<usize>,
    work: impl FnOnce() -> T + Send,
) -> Result<T, Failure> {
    match threads {
        None => Ok(work()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Failure::Io(e.to_string()))?;
            Ok(pool.install(work))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    b_range: Interval,
    f_range: Interval,
    nb: usize,
    nf: usize,
    gap_min: f64,
    csv: Option<PathBuf>,
    pgm: Option<PathBuf>,
    threads: Option<usize>,
    out: &mut dyn Write,
    artifacts: &mut Vec<PathBuf>,
) -> Result<(), Failure> {
    let spec = ScanSpec {
        b_min: b_range.lo,
        b_max: b_range.hi,
        f_min: f_range.lo,
        f_max: f_range.hi,
        nb,
        nf,
        gap_min,
    };
    let grid = in_pool(threads, || scan_region(&spec))??;

    if let Some(path) = &csv {
        let mut w = BufWriter::new(File::create(path)?);
        grid.write_csv(&mut w)?;
        w.flush()?;
        artifacts.push(path.clone());
    }
    if let Some(path) = &pgm {
        let mut w = BufWriter::new(File::create(path)?);
        grid.write_pgm(&mut w)?;
        w.flush()?;
        artifacts.push(path.clone());
    }

    let components = grid
        .component_sizes()
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",");
    writeln!(
        out,
        "{{\"nb\":{},\"nf\":{},\"gap_min\":{},\"feasible_fraction\":{},\"component_sizes\":[{}],\
         \"csv\":{},\"pgm\":{}}}",
        nb,
        nf,
        fmt_f64(gap_min),
        fmt_f64(grid.feasible_fraction()),
        components,
        json_path(&csv),
        json_path(&pgm)
    )?;
    Ok(())
}

fn json_path(p: &Option<PathBuf>) -> String {
    match p {
        Some(p) => format!("\"{}\"", json_escape(&p.display().to_string())),
        None => "null".to_string(),
    }
}

fn cmd_compile(cnf: &str, c: &Coupling, out: &mut dyn Write) -> Result<(), Failure> {
    let parsed = read_formula(cnf)?;
    let solution = best_solution(c)?;
    let netlist = embed(|b| build_netlist(&parsed.formula).write_json(b))?;
    let model = compile(parsed.formula, solution)?;
    let levels = model
        .levels()
        .iter()
        .map(|&u| fmt_f64(u))
        .collect::<Vec<_>>()
        .join(",");
    writeln!(
        out,
        "{{\"netlist\":{netlist},\"solution\":{},\"levels\":[{levels}],\"e_floor\":{},\
         \"gap\":{},\"e_floor_over_d\":{},\"gap_over_d\":{}}}",
        solution_with_ratios(model.solution())?,
        fmt_f64(model.e_floor()),
        fmt_f64(model.gap()),
        fmt_f64(model.e_floor() / c.d),
        fmt_f64(model.gap() / c.d)
    )?;
    Ok(())
}

fn cmd_energy(
    cnf: &str,
    assignment: &str,
    c: &Coupling,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let parsed = read_formula(cnf)?;
    let a = Assignment::from_bit_str(assignment)
        .ok_or_else(|| Failure::Parse(format!("assignment must be a 0/1 string, got {assignment:?}")))?;
    let model = compile_from(c, parsed.formula)?;
    let energy = model.total_energy(&a)?;
    let eval = model.formula().evaluate(&a)?;
    writeln!(
        out,
        "{{\"energy\":{},\"unsat_count\":{},\"satisfied\":{},\"e_floor\":{},\"gap\":{},\
         \"energy_over_d\":{}}}",
        fmt_f64(energy),
        eval.unsat_count,
        eval.satisfied,
        fmt_f64(model.e_floor()),
        fmt_f64(model.gap()),
        fmt_f64(energy / c.d)
    )?;
    Ok(())
}

fn cmd_spectrum(
    cnf: &str,
    limit: usize,
    c: &Coupling,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let parsed = read_formula(cnf)?;
    let model = compile_from(c, parsed.formula)?;
    let report = enumerate_spectrum(&model, limit)?;
    let mut sink = out;
    report.write_json(&mut sink)?;
    Ok(())
}

fn cmd_verify(cnf: &str, limit: usize, c: &Coupling, out: &mut dyn Write) -> Result<(), Failure> {
    let parsed = read_formula(cnf)?;
    let model = compile_from(c, parsed.formula)?;
    let report = check_encoding(&model, limit)?;
    let mut sink = out;
    report.write_json(&mut sink)?;
    Ok(())
}

fn parse_schedule(s: &str) -> Result<Schedule, Failure> {
    let bad = || Failure::Parse(format!("bad schedule {s:?}: expected const:T or geo:T0,RATIO,STAGE"));
    let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
    let sched = match kind {
        "const" => Schedule::Constant { t: rest.trim().parse().map_err(|_| bad())? },
        "geo" => {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            Schedule::Geometric {
                t0: parts[0].parse().map_err(|_| bad())?,
                ratio: parts[1].parse().map_err(|_| bad())?,
                stage_length: parts[2].parse().map_err(|_| bad())?,
            }
        }
        _ => return Err(bad()),
    };
    sched.validate()?;
    Ok(sched)
}

fn resolve_target(
    spec: Option<&str>,
    model: &EnergyModel,
    limit: usize,
) -> Result<Option<f64>, Failure> {
    match spec {
        None => Ok(None),
        Some("floor") => Ok(Some(model.e_floor())),
        Some("oracle") => {
            let report = enumerate_spectrum(model, limit)?;
            Ok(Some(report.ground_energy))
        }
        Some(text) => {
            let value: f64 = text
                .parse()
                .map_err(|_| Failure::Parse(format!("bad target {text:?}: expected floor, oracle, or a number")))?;
            if !value.is_finite() {
                return Err(Failure::Parse(format!("target must be finite, got {value}")));
            }
            Ok(Some(value))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_anneal(
    cnf: &str,
    seed: u64,
    steps: u64,
    schedule: Option<&str>,
    restarts: u64,
    trace: Option<PathBuf>,
    target: Option<&str>,
    record_every: u64,
    c: &Coupling,
    threads: Option<usize>,
    out: &mut dyn Write,
    artifacts: &mut Vec<PathBuf>,
) -> Result<(), Failure> {
    if restarts > 1 && trace.is_some() {
        return Err(Failure::Usage(
            "--trace records a single run; drop it or use --restarts 1".into(),
        ));
    }
    if restarts > 1 && target.is_none() {
        return Err(Failure::Usage("--restarts > 1 requires --target".into()));
    }

    let parsed = read_formula(cnf)?;
    let m = parsed.formula.m();
    let model = compile_from(c, parsed.formula)?;
    let sched = match schedule {
        Some(s) => parse_schedule(s)?,
        None => Schedule::default_geometric(model.gap(), m),
    };
    let target_energy = resolve_target(target, &model, DEFAULT_ENUM_LIMIT)?;
    let cfg = RunConfig { seed, max_steps: steps, target_energy, record_every };

    if restarts == 1 {
        let result = metropolis_run(&model, &cfg, &sched)?;
        if let Some(path) = &trace {
            let mut w = BufWriter::new(File::create(path)?);
            write_trace_csv(&result, &mut w)?;
            w.flush()?;
            artifacts.push(path.clone());
        }
        writeln!(
            out,
            "{{\"seed\":{},\"best_energy\":{},\"best_energy_over_d\":{},\"steps_to_target\":{},\
             \"accepts\":{},\"rejects\":{},\"best_assignment\":\"{}\",\"target\":{},\
             \"e_floor\":{},\"gap\":{}}}",
            result.seed,
            fmt_f64(result.best_energy),
            fmt_f64(result.best_energy / c.d),
            result
                .steps_to_target
                .map(|s| s.to_string())
                .unwrap_or_else(|| "null".to_string()),
            result.accept_count,
            result.reject_count,
            result.best_assignment,
            target_energy.map(fmt_f64).unwrap_or_else(|| "null".to_string()),
            fmt_f64(model.e_floor()),
            fmt_f64(model.gap())
        )?;
        if target_energy.is_some() && result.steps_to_target.is_none() {
            return Err(Failure::Budget(format!(
                "target not reached within {steps} steps (best energy {})",
                result.best_energy
            )));
        }
    } else {
        let report = in_pool(threads, || multi_restart(&model, restarts, &cfg, &sched))??;
        let body = embed(|b| report.write_json(b))?;
        writeln!(
            out,
            "{{\"restarts\":{restarts},\"target\":{},\"e_floor\":{},\"gap\":{},\"report\":{body}}}",
            target_energy.map(fmt_f64).unwrap_or_else(|| "null".to_string()),
            fmt_f64(model.e_floor()),
            fmt_f64(model.gap())
        )?;
        if report.success_rate == 0.0 {
            return Err(Failure::Budget(format!(
                "no run out of {restarts} reached the target within {steps} steps"
            )));
        }
    }
    Ok(())
}

fn cmd_gen(m: usize, n: usize, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    let f = gen_random(m, n, seed)?;
    let mut buf = Vec::new();
    f.write_dimacs(&mut buf)?;
    out.write_all(&buf)?;
    Ok(())
}
