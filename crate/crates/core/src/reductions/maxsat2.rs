// SPDX-License-Identifier: Apache-2.0

//! MAXSAT2 encoded as worst-case switching.
//!
//! Layout, starting from a `mov #0` that zeroes the datapath:
//!
//! ```text
//! per variable:  mov free; xor o,#1; store o -> m[2i]; store o^1 -> m[2i+1]; mov #0
//! per clause:    load l1; xor #1; mov #0; load l2; xor #1; mov #0; or l1,l2; mov #0
//! ```
//!
//! Each variable block flips `k_var` bits whatever the input, each clause
//! block flips `k_clause` bits plus two more exactly when the clause holds.

use crate::bitvec::check_width;
use crate::machine::Machine;
use crate::program::{FreeDomain, Mnemonic, OperandSource, Program, ProgramBuilder};
use crate::text::serialize_program;

use super::{
    input_name, Literal, MaxSat2Instance, ReductionError, ReductionMeta, VariableEmbedding,
};

use OperandSource::{Const, MemRead};

/// Extra switching contributed by a satisfied clause (`or` result 1, then `mov #0`).
pub const CLAUSE_SAT_SWITCHING: u64 = 2;

/// Memory cell holding the truth value of `lit`: `x_i` at `2(i-1)`, `¬x_i` right after.
pub fn lit_addr(lit: Literal) -> usize {
    2 * (lit.var - 1) + usize::from(lit.negated)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedProgram {
    pub program: Program,
    pub num_vars: usize,
    pub num_clauses: usize,
    /// Constant switching of one variable block.
    pub k_var: u64,
    /// Constant switching of one clause block when the clause is false.
    pub k_clause: u64,
    pub k_sat: u64,
}

impl ReducedProgram {
    pub fn lit_to_addr(&self, lit: Literal) -> usize {
        lit_addr(lit)
    }

    /// Switching that the construction guarantees for an assignment
    /// satisfying `sat_count` clauses.
    pub fn predicted_switching(&self, sat_count: usize) -> u64 {
        self.base_switching() + self.k_sat * sat_count as u64
    }

    /// Assignment-independent part of the switching.
    pub fn base_switching(&self) -> u64 {
        self.k_var * self.num_vars as u64 + self.k_clause * self.num_clauses as u64
    }

    /// Satisfied-clause count implied by a measured switching total, if the
    /// total is consistent with the construction.
    pub fn satisfied_from_switching(&self, switching: u64) -> Option<usize> {
        let extra = switching.checked_sub(self.base_switching())?;
        (extra % self.k_sat == 0).then(|| (extra / self.k_sat) as usize)
    }

    pub fn meta(&self) -> ReductionMeta {
        ReductionMeta {
            k_var: self.k_var,
            k_clause: self.k_clause,
            decision_len: 0,
            switching_len: 0,
            lits: (1..=self.num_vars)
                .flat_map(|v| [Literal::pos(v), Literal::neg(v)])
                .map(|l| (l, lit_addr(l)))
                .collect(),
        }
    }

    /// Program text prefixed with the metadata comment header.
    pub fn to_text(&self) -> String {
        self.meta().render() + &serialize_program(&self.program)
    }
}

impl VariableEmbedding for ReducedProgram {
    fn num_vars(&self) -> usize {
        self.num_vars
    }
}

fn emit_variable_block(b: &mut ProgramBuilder, free: OperandSource, base_addr: usize) {
    let value = b.emit(Mnemonic::Mov, vec![free]);
    let complement = b.emit(Mnemonic::Xor, vec![value.clone(), Const(1)]);
    b.emit_to(Mnemonic::Store, vec![value], base_addr);
    b.emit_to(Mnemonic::Store, vec![complement], base_addr + 1);
    b.emit(Mnemonic::Mov, vec![Const(0)]);
}

fn emit_clause_block(b: &mut ProgramBuilder, addr1: usize, addr2: usize) {
    let lit1 = b.emit(Mnemonic::Load, vec![MemRead(addr1)]);
    b.emit(Mnemonic::Xor, vec![lit1.clone(), Const(1)]);
    b.emit(Mnemonic::Mov, vec![Const(0)]);
    let lit2 = b.emit(Mnemonic::Load, vec![MemRead(addr2)]);
    b.emit(Mnemonic::Xor, vec![lit2.clone(), Const(1)]);
    b.emit(Mnemonic::Mov, vec![Const(0)]);
    b.emit(Mnemonic::Or, vec![lit1, lit2]);
    b.emit(Mnemonic::Mov, vec![Const(0)]);
}

fn switching_of(program: &Program, slots: &[u64]) -> u64 {
    let machine = Machine::new(program).expect("gadget programs are well formed");
    machine.switching_with(slots, &mut Vec::new(), &mut Vec::new())
}

/// Switching of a lone variable block after a zeroed datapath. Both input
/// values give the same count.
fn realized_k_var(width: u32) -> u64 {
    let mut b = ProgramBuilder::new(width, 2);
    let x = b.free_input("x", FreeDomain::Binary01);
    b.emit(Mnemonic::Mov, vec![Const(0)]);
    emit_variable_block(&mut b, x, 0);
    let p = b.finish();
    let (off, on) = (switching_of(&p, &[0]), switching_of(&p, &[1]));
    assert_eq!(off, on, "variable gadget switching depends on its input");
    off
}

/// Switching of a lone clause block whose literals both read as false.
fn realized_k_clause(width: u32) -> u64 {
    let mut b = ProgramBuilder::new(width, 2);
    b.emit(Mnemonic::Mov, vec![Const(0)]);
    emit_clause_block(&mut b, 0, 1);
    switching_of(&b.finish(), &[])
}

pub fn reduce_maxsat2(
    instance: &MaxSat2Instance,
    width: u32,
) -> Result<ReducedProgram, ReductionError> {
    instance.validate()?;
    check_width(width).map_err(|_| ReductionError::BadWidth(width))?;
    let n = instance.num_vars;

    let mut b = ProgramBuilder::new(width, 2 * n);
    let inputs: Vec<OperandSource> = (1..=n)
        .map(|v| b.free_input(input_name(v), FreeDomain::Binary01))
        .collect();
    b.emit(Mnemonic::Mov, vec![Const(0)]);
    for (i, free) in inputs.into_iter().enumerate() {
        emit_variable_block(&mut b, free, 2 * i);
    }
    for clause in &instance.clauses {
        let l1 = clause[0];
        let l2 = *clause.get(1).unwrap_or(&l1);
        emit_clause_block(&mut b, lit_addr(l1), lit_addr(l2));
    }

    Ok(ReducedProgram {
        program: b.finish(),
        num_vars: n,
        num_clauses: instance.clauses.len(),
        k_var: realized_k_var(width),
        k_clause: realized_k_clause(width),
        k_sat: CLAUSE_SAT_SWITCHING,
    })
}
