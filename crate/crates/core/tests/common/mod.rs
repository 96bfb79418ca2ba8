// SPDX-License-Identifier: Apache-2.0

//! Seeded generators shared by the integration suites.

#![allow(dead_code)]

use cswp_core::reductions::{Literal, MaxSat2Instance, SatInstance};
use cswp_core::{Assignment, FreeDomain, Instruction, Mnemonic, OperandSource, Program};
use rand::Rng;

pub struct ProgramShape {
    pub max_len: usize,
    pub max_width: u32,
    pub max_full_inputs: usize,
    pub max_binary_inputs: usize,
    pub max_mem: usize,
}

impl Default for ProgramShape {
    fn default() -> Self {
        Self {
            max_len: 8,
            max_width: 4,
            max_full_inputs: 2,
            max_binary_inputs: 1,
            max_mem: 2,
        }
    }
}

fn random_source<R: Rng>(rng: &mut R, p: &Program, idx: usize) -> OperandSource {
    loop {
        match rng.random_range(0..4) {
            0 if !p.free_inputs.is_empty() => {
                let f = &p.free_inputs[rng.random_range(0..p.free_inputs.len())];
                return OperandSource::Free(f.name.clone());
            }
            1 => return OperandSource::Const(rng.random_range(0..1u64 << p.width)),
            2 if p.mem_size > 0 => return OperandSource::MemRead(rng.random_range(0..p.mem_size)),
            3 if idx > 0 => return OperandSource::PriorOutput(rng.random_range(0..idx)),
            _ => {}
        }
    }
}

/// A valid program with every mnemonic reachable.
pub fn random_program<R: Rng>(rng: &mut R, shape: &ProgramShape) -> Program {
    let width = rng.random_range(1..=shape.max_width);
    let mut p = Program::new(width, rng.random_range(0..=shape.max_mem));
    for i in 0..rng.random_range(0..=shape.max_full_inputs) {
        p.free_inputs
            .push(cswp_core::FreeInput::new(format!("f{i}"), FreeDomain::Full));
    }
    for i in 0..rng.random_range(0..=shape.max_binary_inputs) {
        p.free_inputs.push(cswp_core::FreeInput::new(
            format!("b{i}"),
            FreeDomain::Binary01,
        ));
    }
    let len = rng.random_range(1..=shape.max_len);
    for idx in 0..len {
        let mut mnemonic = Mnemonic::ALL[rng.random_range(0..Mnemonic::ALL.len())];
        if mnemonic == Mnemonic::Load && p.mem_size == 0
            || mnemonic == Mnemonic::Store && p.mem_size == 0
        {
            mnemonic = Mnemonic::Mov;
        }
        let inputs = if mnemonic == Mnemonic::Load {
            vec![OperandSource::MemRead(rng.random_range(0..p.mem_size))]
        } else {
            (0..mnemonic.arity())
                .map(|_| random_source(rng, &p, idx))
                .collect()
        };
        let mut insn = Instruction::new(mnemonic, inputs);
        if p.mem_size > 0 && (mnemonic == Mnemonic::Store || rng.random_bool(0.2)) {
            insn.mem_dest = Some(rng.random_range(0..p.mem_size));
        }
        p.instructions.push(insn);
    }
    debug_assert!(p.validate().is_empty());
    p
}

pub fn random_assignment<R: Rng>(rng: &mut R, p: &Program) -> Assignment {
    p.free_inputs
        .iter()
        .map(|f| {
            let v = match f.domain {
                FreeDomain::Binary01 => rng.random_range(0..2),
                FreeDomain::Full => rng.random_range(0..1u64 << p.width),
            };
            (f.name.clone(), v)
        })
        .collect()
}

fn random_literal<R: Rng>(rng: &mut R, n: usize) -> Literal {
    Literal {
        var: rng.random_range(1..=n),
        negated: rng.random_bool(0.5),
    }
}

pub fn random_maxsat2<R: Rng>(rng: &mut R, max_vars: usize, max_clauses: usize) -> MaxSat2Instance {
    let n = rng.random_range(1..=max_vars);
    let clauses = (0..rng.random_range(0..=max_clauses))
        .map(|_| {
            (0..rng.random_range(1..=2))
                .map(|_| random_literal(rng, n))
                .collect()
        })
        .collect();
    MaxSat2Instance::new(n, clauses).unwrap()
}

pub fn random_sat<R: Rng>(
    rng: &mut R,
    max_vars: usize,
    max_clauses: usize,
    max_len: usize,
) -> SatInstance {
    let n = rng.random_range(1..=max_vars);
    let clauses = (0..rng.random_range(1..=max_clauses))
        .map(|_| {
            (0..rng.random_range(1..=max_len))
                .map(|_| random_literal(rng, n))
                .collect()
        })
        .collect();
    SatInstance::new(n, clauses).unwrap()
}

/// All `2^n` truth assignments, `x1` most significant.
pub fn all_bools(n: usize) -> Vec<Vec<bool>> {
    (0..1u64 << n)
        .map(|k| (0..n).map(|i| k >> (n - 1 - i) & 1 == 1).collect())
        .collect()
}
