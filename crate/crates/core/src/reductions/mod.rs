// SPDX-License-Identifier: Apache-2.0

//! Program generators that encode Boolean problems in datapath switching.
//!
//! * [`reduce_maxsat2`]: every clause satisfied by an input assignment adds
//!   exactly two bit flips on top of a constant, so the worst-case input is
//!   an optimal MAXSAT2 assignment.
//! * [`reduce_sat_gap`]: a trailing block of all-ones/zero alternations
//!   switches only when the inputs satisfy the formula, opening a gap that
//!   dominates everything the formula check can switch.
//!
//! Both generators read variable `i` from the `Binary01` free input `x<i>`.

mod cnf;
mod gap;
mod maxsat2;

use std::fmt::Write as _;

use thiserror::Error;

use crate::machine::Assignment;
use crate::text::strip_comment;

pub use cnf::{
    clause_satisfied, parse_clause, parse_dimacs, Clause, Literal, MaxSat2Instance, SatInstance,
};
pub use gap::{emit_checksat, reduce_sat_gap, GapFactor, GapProgram};
pub use maxsat2::{lit_addr, reduce_maxsat2, ReducedProgram, CLAUSE_SAT_SWITCHING};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("invalid literal `{0}`")]
    BadLiteral(String),
    #[error("clause {clause} has {len} literal(s)")]
    ClauseSize { clause: usize, len: usize },
    #[error("clause {clause} mentions x{var}, but there are only {num_vars} variable(s)")]
    VariableOutOfRange {
        clause: usize,
        var: usize,
        num_vars: usize,
    },
    #[error("DIMACS line {line}: {message}")]
    Dimacs { line: usize, message: String },
    #[error("width {0} is outside 1..=64")]
    BadWidth(u32),
    #[error("gap factor must be a ratio >= 1, got `{0}`")]
    BadFactor(String),
    #[error("switching phase length overflows")]
    TooLarge,
    #[error("expected {expected} truth value(s), got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("witness value {value:#x} for `{name}` is not 0 or 1")]
    NonBinaryWitness { name: String, value: u64 },
    #[error("witness has no value for `{0}`")]
    MissingWitness(String),
    #[error("metadata line {line}: {message}")]
    Meta { line: usize, message: String },
}

/// Maps Boolean variables onto the free inputs of a generated program.
pub trait VariableEmbedding {
    fn num_vars(&self) -> usize;

    /// Free-input name carrying variable `var` (1-based).
    fn input_name(&self, var: usize) -> String {
        input_name(var)
    }
}

pub(crate) fn input_name(var: usize) -> String {
    format!("x{var}")
}

/// Free-input values (0 or 1) encoding `bools`.
pub fn embed_assignment(
    embedding: &impl VariableEmbedding,
    bools: &[bool],
) -> Result<Assignment, ReductionError> {
    if bools.len() != embedding.num_vars() {
        return Err(ReductionError::ArityMismatch {
            expected: embedding.num_vars(),
            found: bools.len(),
        });
    }
    Ok(bools
        .iter()
        .enumerate()
        .map(|(i, &b)| (embedding.input_name(i + 1), u64::from(b)))
        .collect())
}

/// Truth values read back from a 0/1 witness; inverse of [`embed_assignment`].
pub fn recover_assignment(
    embedding: &impl VariableEmbedding,
    witness: &Assignment,
) -> Result<Vec<bool>, ReductionError> {
    (1..=embedding.num_vars())
        .map(|var| {
            let name = embedding.input_name(var);
            match witness.get(&name) {
                Some(0) => Ok(false),
                Some(1) => Ok(true),
                Some(value) => Err(ReductionError::NonBinaryWitness { name, value }),
                None => Err(ReductionError::MissingWitness(name)),
            }
        })
        .collect()
}

/// Self-describing header carried in comment lines of generated programs:
///
/// ```text
/// # meta k_var=4 k_clause=4 decision_len=0 switching_len=0
/// # lit x1 -> m[0]
/// # lit ~x1 -> m[1]
/// ```
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReductionMeta {
    pub k_var: u64,
    pub k_clause: u64,
    pub decision_len: usize,
    pub switching_len: usize,
    pub lits: Vec<(Literal, usize)>,
}

impl ReductionMeta {
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "# meta k_var={} k_clause={} decision_len={} switching_len={}",
            self.k_var, self.k_clause, self.decision_len, self.switching_len
        )
        .unwrap();
        for (lit, addr) in &self.lits {
            writeln!(out, "# lit {lit} -> m[{addr}]").unwrap();
        }
        out
    }

    /// Extracts metadata from program text; `None` when there is no `# meta` line.
    pub fn parse(text: &str) -> Result<Option<Self>, ReductionError> {
        let mut meta: Option<Self> = None;
        let mut lits = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |message: String| ReductionError::Meta { line, message };
            let code = strip_comment(raw);
            let Some(comment) = raw[code.len()..].strip_prefix('#') else {
                continue;
            };
            let mut words = comment.split_whitespace();
            match words.next() {
                Some("meta") => {
                    let mut m = Self::default();
                    for kv in words {
                        let (k, v) = kv
                            .split_once('=')
                            .ok_or_else(|| err(format!("expected key=value, found `{kv}`")))?;
                        let bad = |_| err(format!("invalid value for `{k}`"));
                        match k {
                            "k_var" => m.k_var = v.parse().map_err(bad)?,
                            "k_clause" => m.k_clause = v.parse().map_err(bad)?,
                            "decision_len" => m.decision_len = v.parse().map_err(bad)?,
                            "switching_len" => m.switching_len = v.parse().map_err(bad)?,
                            _ => return Err(err(format!("unknown key `{k}`"))),
                        }
                    }
                    meta = Some(m);
                }
                Some("lit") => {
                    let rest: Vec<&str> = words.collect();
                    let [lit, "->", addr] = rest[..] else {
                        return Err(err("expected `lit <literal> -> m[<addr>]`".into()));
                    };
                    let lit: Literal = lit.parse().map_err(|e| err(format!("{e}")))?;
                    let addr = addr
                        .strip_prefix("m[")
                        .and_then(|a| a.strip_suffix(']'))
                        .and_then(|a| a.parse().ok())
                        .ok_or_else(|| err(format!("invalid address `{addr}`")))?;
                    lits.push((lit, addr));
                }
                _ => {}
            }
        }
        Ok(meta.map(|m| Self { lits, ..m }))
    }
}

impl VariableEmbedding for ReductionMeta {
    fn num_vars(&self) -> usize {
        self.lits.iter().map(|(l, _)| l.var).max().unwrap_or(0)
    }
}
