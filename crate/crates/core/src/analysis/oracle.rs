// SPDX-License-Identifier: Apache-2.0

//! Exhaustive MAXSAT and SAT oracles. They evaluate clauses directly and
//! never touch the program machinery, so they can check the reductions.

use crate::reductions::{MaxSat2Instance, SatInstance};

use super::AnalysisError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxSatSolution {
    pub satisfied: usize,
    /// Lexicographically smallest maximising assignment (`false < true`).
    pub assignment: Vec<bool>,
}

fn assignments(
    num_vars: usize,
    budget: u64,
) -> Result<impl Iterator<Item = Vec<bool>>, AnalysisError> {
    let total = 1u128.checked_shl(num_vars as u32).unwrap_or(u128::MAX);
    if num_vars >= 128 || total > u128::from(budget) {
        return Err(AnalysisError::BudgetExceeded {
            required_log2: num_vars as u32,
            budget,
        });
    }
    let total = total as u64;
    // x1 is the most significant bit, so counting up is lexicographic.
    Ok((0..total).map(move |k| {
        (0..num_vars)
            .map(|i| k >> (num_vars - 1 - i) & 1 == 1)
            .collect()
    }))
}

pub fn maxsat_oracle(
    instance: &MaxSat2Instance,
    budget: u64,
) -> Result<MaxSatSolution, AnalysisError> {
    let mut best: Option<MaxSatSolution> = None;
    for assignment in assignments(instance.num_vars, budget)? {
        let satisfied = instance.satisfied_count(&assignment);
        if best.as_ref().is_none_or(|b| satisfied > b.satisfied) {
            best = Some(MaxSatSolution {
                satisfied,
                assignment,
            });
        }
    }
    Ok(best.expect("at least the empty assignment is enumerated"))
}

/// Lexicographically smallest model, or `None` when unsatisfiable.
pub fn sat_oracle(instance: &SatInstance, budget: u64) -> Result<Option<Vec<bool>>, AnalysisError> {
    Ok(assignments(instance.num_vars, budget)?.find(|a| instance.is_satisfied_by(a)))
}
