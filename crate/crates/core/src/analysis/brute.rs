// SPDX-License-Identifier: Apache-2.0

//! Exact worst-case switching by exhaustive enumeration of the free inputs.
//!
//! Assignments are ordered lexicographically: free inputs in declaration
//! order, first input most significant, values compared as unsigned
//! integers. Enumeration index `k` is the `k`-th assignment in that order, so
//! the smallest maximising index is the lexicographically smallest witness.

use std::ops::Range;

use rayon::prelude::*;

use crate::machine::{Assignment, Machine};
use crate::program::Program;
use crate::report::Report;

use super::AnalysisError;

/// Default cap on enumerated assignments.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// Below this many assignments enumeration stays on the calling thread.
const PARALLEL_THRESHOLD: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorstCaseResult {
    pub max_switching: u64,
    pub witness: Assignment,
    pub explored: u64,
}

impl WorstCaseResult {
    /// `max=`, one `witness.free<name>=` line per input in declaration order,
    /// then `explored=`.
    pub fn report(&self, program: &Program) -> Report {
        let mut r = Report::new();
        r.push("max", self.max_switching);
        for free in &program.free_inputs {
            let value = self.witness.get(&free.name).unwrap_or_default();
            r.push(format!("witness.free{}", free.name), format!("{value:#x}"));
        }
        r.push("explored", self.explored);
        r
    }
}

/// Best `(switching, index)` seen; ties keep the smaller index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Best {
    switching: u64,
    index: u64,
}

impl Best {
    fn merge(self, other: Best) -> Best {
        if other.switching > self.switching
            || (other.switching == self.switching && other.index < self.index)
        {
            other
        } else {
            self
        }
    }
}

struct Space {
    /// log2 of each input's domain size, declaration order.
    bits: Vec<u32>,
    total: u64,
}

impl Space {
    fn new(program: &Program, budget: u64) -> Result<Self, AnalysisError> {
        let bits: Vec<u32> = program
            .free_inputs
            .iter()
            .map(|f| f.domain.size(program.width).trailing_zeros())
            .collect();
        let total_bits: u32 = bits.iter().sum();
        let total = 1u128.checked_shl(total_bits).unwrap_or(u128::MAX);
        if total > u128::from(budget) {
            return Err(AnalysisError::BudgetExceeded {
                required_log2: total_bits,
                budget,
            });
        }
        Ok(Self {
            bits,
            total: total as u64,
        })
    }

    /// Slot values for enumeration index `index`.
    fn decode(&self, mut index: u64, slots: &mut [u64]) {
        for (slot, &b) in slots.iter_mut().zip(&self.bits).rev() {
            *slot = index & ((1u64 << b) - 1);
            index >>= b;
        }
    }

    /// Advances `slots` to the next index (odometer, last input fastest).
    fn step(&self, slots: &mut [u64]) {
        for (slot, &b) in slots.iter_mut().zip(&self.bits).rev() {
            *slot += 1;
            if *slot >> b == 0 {
                return;
            }
            *slot = 0;
        }
    }
}

fn scan(machine: &Machine, space: &Space, range: Range<u64>) -> Best {
    let mut slots = vec![0u64; space.bits.len()];
    space.decode(range.start, &mut slots);
    let (mut outputs, mut memory) = (Vec::new(), Vec::new());
    let mut best = Best {
        switching: 0,
        index: range.start,
    };
    for index in range {
        let s = machine.switching_with(&slots, &mut outputs, &mut memory);
        if s > best.switching {
            best = Best {
                switching: s,
                index,
            };
        }
        space.step(&mut slots);
    }
    best
}

fn finish(program: &Program, space: &Space, best: Best) -> WorstCaseResult {
    let mut slots = vec![0u64; space.bits.len()];
    space.decode(best.index, &mut slots);
    WorstCaseResult {
        max_switching: best.switching,
        witness: program
            .free_inputs
            .iter()
            .zip(slots)
            .map(|(f, v)| (f.name.clone(), v))
            .collect(),
        explored: space.total,
    }
}

/// Exhaustive search split into `partitions` contiguous index ranges that are
/// scanned in parallel. The result does not depend on `partitions`.
pub fn brute_force_partitioned(
    program: &Program,
    budget: u64,
    partitions: u64,
) -> Result<WorstCaseResult, AnalysisError> {
    let machine = Machine::new(program)?;
    let space = Space::new(program, budget)?;
    let parts = partitions.clamp(1, space.total);
    let chunk = space.total.div_ceil(parts);
    let best = (0..parts)
        .into_par_iter()
        .map(|p| {
            let start = p * chunk;
            let end = (start + chunk).min(space.total);
            scan(&machine, &space, start..end)
        })
        .reduce_with(Best::merge)
        .expect("at least one partition");
    Ok(finish(program, &space, best))
}

/// Single-threaded exhaustive search.
pub fn brute_force_sequential(
    program: &Program,
    budget: u64,
) -> Result<WorstCaseResult, AnalysisError> {
    let machine = Machine::new(program)?;
    let space = Space::new(program, budget)?;
    let best = scan(&machine, &space, 0..space.total);
    Ok(finish(program, &space, best))
}

/// Exact maximum switching over every assignment and its lexicographically
/// smallest witness. Fails rather than truncating when the search space
/// exceeds `budget` assignments.
pub fn brute_force_worst_case(
    program: &Program,
    budget: u64,
) -> Result<WorstCaseResult, AnalysisError> {
    let space = Space::new(program, budget)?;
    if space.total < PARALLEL_THRESHOLD {
        brute_force_sequential(program, budget)
    } else {
        let parts = 4 * rayon::current_num_threads() as u64;
        brute_force_partitioned(program, budget, parts)
    }
}
