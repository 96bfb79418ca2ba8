// SPDX-License-Identifier: Apache-2.0

//! Worst-case output-datapath switching for straight-line bit-vector
//! programs.
//!
//! * [`program`], [`machine`], [`text`]: the program model, its interpreter
//!   and the canonical text format.
//! * [`analysis`]: exact worst case by enumeration, SAT/MAXSAT oracles and
//!   sound upper bounds.
//! * [`reductions`]: MAXSAT2 and gap-introducing SAT encodings.
//! * [`energy`]: Hamming-weight power model, fitting and trace energy.

pub mod analysis;
pub mod bitvec;
pub mod energy;
pub mod machine;
pub mod program;
pub mod reductions;
pub mod report;
pub mod text;

pub use bitvec::{hamming_distance, BitVector, BitVectorError};
pub use machine::{
    evaluate_switching, execute, Assignment, ExecError, ExecutionTrace, Machine, SwitchingReport,
};
pub use program::{
    validate_program, FreeDomain, FreeInput, Instruction, Mnemonic, OperandSource, Program,
    ProgramBuilder, Violation, ViolationKind,
};
pub use report::{Report, ReportFormat};
pub use text::{parse_program, serialize_program, ParseError};
