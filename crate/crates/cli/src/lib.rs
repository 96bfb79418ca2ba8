// SPDX-License-Identifier: Apache-2.0

//! `cswp` command-line front end.
//!
//! [`run_cli`] takes the full argument vector and writes to the given
//! streams, so the binary and the tests share one code path. Exit codes:
//! 0 success, 1 domain error, 2 usage error or unusable path.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cswp_core::analysis::{
    brute_force_worst_case, coarse_upper_bound, knownbits_upper_bound, sat_oracle,
};
use cswp_core::energy::{
    fit_hamming_model, gen_synthetic_grid, heatmap_csv, read_measurements_csv, summarize_power,
    trace_energy, write_measurements_csv, EnergyModel, GridSpec, Measurement, Stage,
    TraceEnergyOptions,
};
use cswp_core::reductions::{
    embed_assignment, parse_clause, parse_dimacs, reduce_maxsat2, reduce_sat_gap, Clause,
    GapFactor, MaxSat2Instance, SatInstance,
};
use cswp_core::{parse_program, Assignment, Machine, Mnemonic, Program, Report, ReportFormat};

/// A bad command line or an input path that cannot be used.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser, Debug)]
#[command(
    name = "cswp",
    version,
    about = "Worst-case datapath switching toolkit"
)]
struct Cli {
    /// Write output to this file (atomically) instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,

    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => ReportFormat::Text,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Coarse,
    Knownbits,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StageArg {
    Raw,
    MinusOut,
    MinusIn,
    Residual,
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::Raw => Stage::Raw,
            StageArg::MinusOut => Stage::MinusOut,
            StageArg::MinusIn => Stage::MinusIn,
            StageArg::Residual => Stage::Residual,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a program and report its outputs and switching.
    Run {
        program: PathBuf,
        /// Free-input value, `name=value` (decimal or 0x hex).
        #[arg(long = "input", short = 'i')]
        inputs: Vec<String>,
    },
    /// Exact worst-case switching by exhaustive enumeration.
    Solve {
        program: PathBuf,
        /// Maximum number of assignments to enumerate.
        #[arg(long, default_value_t = cswp_core::analysis::DEFAULT_BUDGET)]
        budget: u64,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Sound upper bound on switching.
    Bound {
        program: PathBuf,
        /// Bound to report; both when omitted.
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Encode a MAXSAT instance with 1-2 literals per clause as a program.
    ReduceMaxsat(Formula),
    /// Encode a SAT instance as a program with a switching gap.
    ReduceSatGap {
        #[command(flatten)]
        formula: Formula,
        /// Gap factor >= 1, e.g. `2`, `3/2` or `1.5`.
        #[arg(long, default_value = "1")]
        factor: GapFactor,
    },
    /// Check the generated satisfiability gadget and gap on every assignment.
    ChecksatVerify {
        #[command(flatten)]
        formula: Formula,
        #[arg(long, default_value = "1")]
        factor: GapFactor,
    },
    /// Fit `base + c_in*H_in + c_out*H_out` to a measurement CSV.
    Fit { grid: PathBuf },
    /// Generate a synthetic measurement grid.
    GenGrid {
        #[arg(long)]
        op: Mnemonic,
        #[arg(long)]
        width: u32,
        /// Gaussian noise standard deviation, mW.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        base: f64,
        #[arg(long = "c-in", default_value_t = 1.3)]
        c_in: f64,
        #[arg(long = "c-out", default_value_t = 4.4)]
        c_out: f64,
    },
    /// Grid of one decomposition stage as CSV.
    Heatmap {
        grid: PathBuf,
        #[arg(long, value_enum, default_value_t = StageArg::Raw)]
        stage: StageArg,
    },
    /// Energy of one execution under a power model.
    Energy {
        program: PathBuf,
        /// Preset name or a file of `key=value` lines.
        #[arg(long, default_value = EnergyModel::XS1L_PRESET)]
        model: String,
        #[arg(long = "input", short = 'i')]
        inputs: Vec<String>,
        /// Also charge operand switching.
        #[arg(long)]
        include_input: bool,
    },
    /// Idle/dynamic split of measured powers.
    SummarizePower {
        /// Whole-device idle power, mW.
        #[arg(long)]
        tdual: f64,
        /// Measured powers, mW.
        powers: Vec<f64>,
        /// Take the powers from a measurement CSV.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Formula {
    /// Number of variables (inferred from the clauses when omitted).
    #[arg(long)]
    vars: Option<usize>,
    /// A clause such as `x1,-x2`; repeatable.
    #[arg(long = "clause", allow_hyphen_values = true)]
    clauses: Vec<String>,
    /// DIMACS CNF file.
    #[arg(long, conflicts_with = "clauses")]
    dimacs: Option<PathBuf>,
    /// Data width of the generated program.
    #[arg(long, default_value_t = 8)]
    width: u32,
}

impl Formula {
    fn load(&self) -> Result<(usize, Vec<Clause>)> {
        if let Some(path) = &self.dimacs {
            let (n, clauses) = parse_dimacs(&read_input(path)?)?;
            return Ok((self.vars.unwrap_or(n), clauses));
        }
        let clauses = self
            .clauses
            .iter()
            .map(|c| parse_clause(c).with_context(|| format!("clause `{c}`")))
            .collect::<Result<Vec<_>>>()?;
        let inferred = clauses.iter().flatten().map(|l| l.var).max().unwrap_or(0);
        let n = self.vars.unwrap_or(inferred);
        if n == 0 {
            return Err(usage("no variables: give --vars, --clause or --dimacs"));
        }
        Ok((n, clauses))
    }

    fn sat(&self) -> Result<SatInstance> {
        let (n, clauses) = self.load()?;
        Ok(SatInstance::new(n, clauses)?)
    }
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program> {
    let text = read_input(path)?;
    parse_program(&text).with_context(|| format!("{}", path.display()))
}

fn load_grid(path: &Path) -> Result<Vec<Measurement>> {
    let file =
        fs::File::open(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    read_measurements_csv(file).with_context(|| format!("{}", path.display()))
}

fn parse_value(s: &str) -> Option<u64> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

/// `name=value` pairs; `name` may carry the `free` prefix used in program text.
fn parse_inputs(program: &Program, pairs: &[String]) -> Result<Assignment> {
    let mut a = Assignment::new();
    for pair in pairs {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| usage(format!("expected name=value, found `{pair}`")))?;
        let name = match name.strip_prefix("free") {
            Some(bare) if program.free_index(name).is_none() => bare,
            _ => name,
        };
        let value =
            parse_value(value).ok_or_else(|| usage(format!("bad value `{value}` for `{name}`")))?;
        a.insert(name, value);
    }
    Ok(a)
}

fn run_report(program: &Program, assignment: &Assignment) -> Result<Report> {
    let trace = Machine::new(program)?.execute(assignment)?;
    let values: Vec<u64> = trace.outputs.iter().map(|b| b.value()).collect();
    let switching = cswp_core::SwitchingReport::from_outputs(&values);
    let mut r = Report::new();
    for (i, out) in trace.outputs.iter().enumerate() {
        r.push(format!("o{}", i + 1), out);
    }
    let transitions: Vec<String> = switching.transitions.iter().map(u32::to_string).collect();
    r.push("transitions", transitions.join(" "))
        .push("total", switching.total);
    Ok(r)
}

fn bound_report(program: &Program, method: Option<Method>) -> Result<Report> {
    let mut r = Report::new();
    if matches!(method, None | Some(Method::Coarse)) {
        r.push("coarse", coarse_upper_bound(program));
    }
    if matches!(method, None | Some(Method::Knownbits)) {
        r.push("knownbits", knownbits_upper_bound(program)?);
    }
    Ok(r)
}

fn solve(program: &Program, budget: u64, threads: Option<usize>) -> Result<Report> {
    let search = || brute_force_worst_case(program, budget);
    let result = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("thread pool")?
            .install(search),
        None => search(),
    }?;
    let mut r = result.report(program);
    r.extend(bound_report(program, None)?);
    Ok(r)
}

fn checksat_verify(
    instance: &SatInstance,
    width: u32,
    factor: GapFactor,
) -> Result<(Report, bool)> {
    let gap = reduce_sat_gap(instance, width, factor)?;
    let machine = Machine::new(&gap.program)?;
    let n = instance.num_vars;
    if n >= 24 {
        bail!("{n} variables is too many to enumerate");
    }
    let (mut mismatches, mut unsat_switching, mut saturating) = (0u64, 0u64, 0u64);
    for k in 0..1u64 << n {
        let bools: Vec<bool> = (0..n).map(|i| k >> (n - 1 - i) & 1 == 1).collect();
        let a = embed_assignment(&gap, &bools)?;
        let trace = machine.execute(&a)?;
        let satisfied = instance.is_satisfied_by(&bools);
        if trace.outputs[gap.check_result].value() != u64::from(satisfied) {
            mismatches += 1;
        }
        let values: Vec<u64> = trace.outputs.iter().map(|b| b.value()).collect();
        let report = cswp_core::SwitchingReport::from_outputs(&values);
        let phase = gap.switching_phase_transitions(&report);
        if satisfied {
            saturating += u64::from(phase.iter().all(|&t| t == width));
        } else if phase.iter().any(|&t| t != 0) {
            unsat_switching += 1;
        }
    }
    let satisfiable = sat_oracle(instance, u64::MAX)?.is_some();
    let gap_ok = unsat_switching == 0 && (satisfiable == (saturating > 0));
    let mut r = Report::new();
    r.push("vars", n)
        .push("clauses", instance.clauses.len())
        .push("assignments", 1u64 << n)
        .push("satisfiable", satisfiable)
        .push("decision_len", gap.decision_len)
        .push("switching_len", gap.switching_len)
        .push("gap_bits", gap.gap_bits)
        .push("mismatches", mismatches)
        .push("gap_ok", gap_ok);
    Ok((r, mismatches == 0 && gap_ok))
}

fn load_model(spec: &str) -> Result<EnergyModel> {
    if let Some(m) = EnergyModel::preset(spec) {
        return Ok(m);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(usage(format!(
            "`{spec}` is neither a model preset ({}) nor a readable file",
            EnergyModel::XS1L_PRESET
        )));
    }
    read_input(path)?
        .parse()
        .with_context(|| format!("{}", path.display()))
}

/// Output text and whether the command counts as successful.
fn dispatch(cli: &Cli) -> Result<(String, bool)> {
    let fmt = ReportFormat::from(cli.format);
    let report = |r: Report| Ok((r.render(fmt), true));
    match &cli.command {
        Command::Run { program, inputs } => {
            let p = load_program(program)?;
            let a = parse_inputs(&p, inputs)?;
            report(run_report(&p, &a)?)
        }
        Command::Solve {
            program,
            budget,
            threads,
        } => report(solve(&load_program(program)?, *budget, *threads)?),
        Command::Bound { program, method } => {
            report(bound_report(&load_program(program)?, *method)?)
        }
        Command::ReduceMaxsat(formula) => {
            let (n, clauses) = formula.load()?;
            let inst = MaxSat2Instance::new(n, clauses)?;
            Ok((reduce_maxsat2(&inst, formula.width)?.to_text(), true))
        }
        Command::ReduceSatGap { formula, factor } => {
            let gap = reduce_sat_gap(&formula.sat()?, formula.width, *factor)?;
            Ok((gap.to_text(), true))
        }
        Command::ChecksatVerify { formula, factor } => {
            let (r, ok) = checksat_verify(&formula.sat()?, formula.width, *factor)?;
            Ok((r.render(fmt), ok))
        }
        Command::Fit { grid } => report(fit_hamming_model(&load_grid(grid)?)?.report()),
        Command::GenGrid {
            op,
            width,
            sigma,
            seed,
            base,
            c_in,
            c_out,
        } => {
            let spec = GridSpec {
                width: *width,
                op: *op,
                base_mw: *base,
                c_in_mw: *c_in,
                c_out_mw: *c_out,
                sigma_mw: *sigma,
                seed: *seed,
            };
            let mut buf = Vec::new();
            write_measurements_csv(&mut buf, &gen_synthetic_grid(&spec)?)?;
            Ok((String::from_utf8(buf).expect("CSV output is ASCII"), true))
        }
        Command::Heatmap { grid, stage } => {
            let g = load_grid(grid)?;
            let fit = fit_hamming_model(&g)?;
            Ok((heatmap_csv(&g, &fit, (*stage).into())?, true))
        }
        Command::Energy {
            program,
            model,
            inputs,
            include_input,
        } => {
            let p = load_program(program)?;
            let model = load_model(model)?;
            let a = parse_inputs(&p, inputs)?;
            let options = TraceEnergyOptions {
                include_input: *include_input,
            };
            report(trace_energy(&p, &a, &model, options)?.report())
        }
        Command::SummarizePower {
            tdual,
            powers,
            grid,
        } => {
            let mut all = powers.clone();
            if let Some(path) = grid {
                all.extend(load_grid(path)?.iter().map(|m| m.power_mw));
            }
            report(summarize_power(*tdual, &all)?.report())
        }
    }
}

/// Writes `contents` next to `path` and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    if !dir.is_dir() {
        return Err(usage(format!(
            "output directory {} does not exist",
            dir.display()
        )));
    }
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<bool> {
    if let Some(path) = &cli.output {
        if path.is_dir() {
            return Err(usage(format!("{} is a directory", path.display())));
        }
    }
    let (text, ok) = dispatch(cli)?;
    match &cli.output {
        Some(path) => write_atomic(path, &text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(ok)
}

/// Runs one invocation. `argv[0]` is the program name.
pub fn run_cli<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                2
            } else {
                let _ = write!(stdout, "{e}");
                0
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}
