// SPDX-License-Identifier: Apache-2.0

//! Worst-case switching: exact enumeration, exhaustive SAT/MAXSAT oracles,
//! and two sound upper bounds (all bits flip; known-bits abstraction).

mod brute;
mod knownbits;
mod oracle;

use thiserror::Error;

use crate::machine::ExecError;
use crate::program::Mnemonic;

pub use brute::{
    brute_force_partitioned, brute_force_sequential, brute_force_worst_case, WorstCaseResult,
    DEFAULT_BUDGET,
};
pub use knownbits::{
    coarse_upper_bound, knownbits_trace, knownbits_transfer, knownbits_upper_bound, BitState,
    KnownBits,
};
pub use oracle::{maxsat_oracle, sat_oracle, MaxSatSolution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("exhaustive search needs 2^{required_log2} assignments, budget is {budget}")]
    BudgetExceeded { required_log2: u32, budget: u64 },
    #[error("`{mnemonic}` takes {expected} operand(s), found {found}")]
    Arity {
        mnemonic: Mnemonic,
        expected: usize,
        found: usize,
    },
    #[error("operand widths differ: {left} vs {right}")]
    WidthMismatch { left: u32, right: u32 },
}
