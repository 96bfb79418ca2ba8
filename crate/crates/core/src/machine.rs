// SPDX-License-Identifier: Apache-2.0

//! The abstract machine: executes a program for one assignment of its free
//! inputs and measures switching on the output datapath.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bitvec::{mask, BitVector};
use crate::program::{Mnemonic, OperandSource, Program, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("invalid program: {}", join_violations(.0))]
    InvalidProgram(Vec<Violation>),
    #[error("no value assigned to free input `{0}`")]
    MissingInput(String),
    #[error("value assigned to undeclared free input `{0}`")]
    UnknownInput(String),
    #[error("value {value:#x} is outside the domain of free input `{name}`")]
    DomainViolation { name: String, value: u64 },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Values for a program's free inputs, keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Assignment(BTreeMap<String, u64>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: u64) -> Option<u64> {
        self.0.insert(name.into(), value)
    }

    pub fn get(&self, name: &str) -> Option<u64> {
        self.0.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: Into<String>> FromIterator<(S, u64)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionTrace {
    /// One datapath value per instruction.
    pub outputs: Vec<BitVector>,
    pub final_memory: Vec<BitVector>,
    /// Resolved operand values read by each instruction.
    pub operands: Vec<Vec<BitVector>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchingReport {
    /// `transitions[i]` is the Hamming distance between outputs `i` and `i + 1`.
    pub transitions: Vec<u32>,
    pub total: u64,
}

impl SwitchingReport {
    pub fn from_outputs(outputs: &[u64]) -> Self {
        let transitions: Vec<u32> = outputs
            .windows(2)
            .map(|w| (w[0] ^ w[1]).count_ones())
            .collect();
        let total = transitions.iter().map(|&t| u64::from(t)).sum();
        Self { transitions, total }
    }
}

/// Result of `mnemonic` applied to already-resolved operand values.
///
/// `load` and `store` behave like `mov` here: the caller resolves the memory
/// read and performs the write.
pub fn apply(mnemonic: Mnemonic, args: &[u64], width: u32) -> u64 {
    let m = mask(width);
    let shift = |amount: u64| (amount % u64::from(width)) as u32;
    match mnemonic {
        Mnemonic::Mov | Mnemonic::Load | Mnemonic::Store => args[0] & m,
        Mnemonic::Add => args[0].wrapping_add(args[1]) & m,
        Mnemonic::Sub => args[0].wrapping_sub(args[1]) & m,
        Mnemonic::And => args[0] & args[1],
        Mnemonic::Or => args[0] | args[1],
        Mnemonic::Xor => args[0] ^ args[1],
        Mnemonic::Not => !args[0] & m,
        Mnemonic::Shl => args[0].checked_shl(shift(args[1])).unwrap_or(0) & m,
        Mnemonic::Shr => args[0].checked_shr(shift(args[1])).unwrap_or(0),
        Mnemonic::Ite => {
            if args[0] != 0 {
                args[1]
            } else {
                args[2]
            }
        }
        Mnemonic::Eqz => u64::from(args[0] == 0),
    }
}

#[derive(Debug, Clone, Copy)]
enum Src {
    Slot(usize),
    Const(u64),
    Mem(usize),
    Prior(usize),
}

#[derive(Debug, Clone)]
struct Op {
    mnemonic: Mnemonic,
    srcs: [Src; 3],
    arity: usize,
    dest: Option<usize>,
}

/// A validated program with free inputs resolved to positional slots, ready
/// for repeated execution.
#[derive(Debug, Clone)]
pub struct Machine<'p> {
    program: &'p Program,
    ops: Vec<Op>,
}

impl<'p> Machine<'p> {
    pub fn new(program: &'p Program) -> Result<Self, ExecError> {
        let violations = program.validate();
        if !violations.is_empty() {
            return Err(ExecError::InvalidProgram(violations));
        }
        let ops = program
            .instructions
            .iter()
            .map(|insn| {
                let mut srcs = [Src::Const(0); 3];
                for (slot, src) in srcs.iter_mut().zip(&insn.inputs) {
                    *slot = match src {
                        OperandSource::Free(name) => Src::Slot(
                            program
                                .free_index(name)
                                .expect("validated programs declare every free input"),
                        ),
                        OperandSource::Const(v) => Src::Const(*v),
                        OperandSource::MemRead(a) => Src::Mem(*a),
                        OperandSource::PriorOutput(j) => Src::Prior(*j),
                    };
                }
                Op {
                    mnemonic: insn.mnemonic,
                    srcs,
                    arity: insn.inputs.len(),
                    dest: insn.mem_dest,
                }
            })
            .collect();
        Ok(Self { program, ops })
    }

    pub fn program(&self) -> &'p Program {
        self.program
    }

    /// Free-input values in declaration order, checked against each domain.
    pub fn slots(&self, assignment: &Assignment) -> Result<Vec<u64>, ExecError> {
        let width = self.program.width;
        let mut slots = Vec::with_capacity(self.program.free_inputs.len());
        for free in &self.program.free_inputs {
            let value = assignment
                .get(&free.name)
                .ok_or_else(|| ExecError::MissingInput(free.name.clone()))?;
            if !free.domain.contains(value, width) {
                return Err(ExecError::DomainViolation {
                    name: free.name.clone(),
                    value,
                });
            }
            slots.push(value);
        }
        if let Some((extra, _)) = assignment
            .iter()
            .find(|(name, _)| self.program.free_index(name).is_none())
        {
            return Err(ExecError::UnknownInput(extra.to_string()));
        }
        Ok(slots)
    }

    /// Runs the program on positional input values. `outputs` and `memory`
    /// are scratch buffers that are cleared first; `on_operands` sees every
    /// instruction's resolved operands.
    pub(crate) fn run_into(
        &self,
        slots: &[u64],
        outputs: &mut Vec<u64>,
        memory: &mut Vec<u64>,
        mut on_operands: impl FnMut(&[u64]),
    ) {
        let width = self.program.width;
        outputs.clear();
        memory.clear();
        memory.resize(self.program.mem_size, 0);
        let mut args = [0u64; 3];
        for op in &self.ops {
            for (arg, src) in args.iter_mut().zip(&op.srcs[..op.arity]) {
                *arg = match *src {
                    Src::Slot(k) => slots[k],
                    Src::Const(v) => v,
                    Src::Mem(a) => memory[a],
                    Src::Prior(j) => outputs[j],
                };
            }
            on_operands(&args[..op.arity]);
            let out = apply(op.mnemonic, &args[..op.arity], width);
            if let Some(addr) = op.dest {
                memory[addr] = out;
            }
            outputs.push(out);
        }
    }

    /// Total switching for positional inputs, reusing caller-owned buffers.
    pub(crate) fn switching_with(
        &self,
        slots: &[u64],
        outputs: &mut Vec<u64>,
        memory: &mut Vec<u64>,
    ) -> u64 {
        self.run_into(slots, outputs, memory, |_| {});
        outputs
            .windows(2)
            .map(|w| u64::from((w[0] ^ w[1]).count_ones()))
            .sum()
    }

    pub fn execute(&self, assignment: &Assignment) -> Result<ExecutionTrace, ExecError> {
        let slots = self.slots(assignment)?;
        Ok(self.execute_slots(&slots))
    }

    pub(crate) fn execute_slots(&self, slots: &[u64]) -> ExecutionTrace {
        let width = self.program.width;
        let (mut outputs, mut memory) = (Vec::new(), Vec::new());
        let mut operands = Vec::with_capacity(self.ops.len());
        self.run_into(slots, &mut outputs, &mut memory, |args| {
            operands.push(
                args.iter()
                    .map(|&v| BitVector::from_masked(v, width))
                    .collect(),
            )
        });
        let wrap = |v: Vec<u64>| {
            v.into_iter()
                .map(|x| BitVector::from_masked(x, width))
                .collect()
        };
        ExecutionTrace {
            outputs: wrap(outputs),
            final_memory: wrap(memory),
            operands,
        }
    }

    pub fn evaluate_switching(
        &self,
        assignment: &Assignment,
    ) -> Result<SwitchingReport, ExecError> {
        let slots = self.slots(assignment)?;
        let (mut outputs, mut memory) = (Vec::new(), Vec::new());
        self.run_into(&slots, &mut outputs, &mut memory, |_| {});
        Ok(SwitchingReport::from_outputs(&outputs))
    }
}

pub fn execute(program: &Program, assignment: &Assignment) -> Result<ExecutionTrace, ExecError> {
    Machine::new(program)?.execute(assignment)
}

pub fn evaluate_switching(
    program: &Program,
    assignment: &Assignment,
) -> Result<SwitchingReport, ExecError> {
    Machine::new(program)?.evaluate_switching(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{FreeDomain, ProgramBuilder};
    use OperandSource::*;

    fn values(trace: &ExecutionTrace) -> Vec<u64> {
        trace.outputs.iter().map(|b| b.value()).collect()
    }

    fn mov_then_add_self(width: u32) -> Program {
        let mut b = ProgramBuilder::new(width, 0);
        let x = b.free_input("0", FreeDomain::Full);
        let o1 = b.emit(Mnemonic::Mov, vec![x]);
        b.emit(Mnemonic::Add, vec![o1.clone(), o1]);
        b.finish()
    }

    #[test]
    fn constants_pass_through() {
        let mut b = ProgramBuilder::new(4, 0);
        for v in [0, 0xf, 0] {
            b.emit(Mnemonic::Mov, vec![Const(v)]);
        }
        let p = b.finish();
        let t = execute(&p, &Assignment::new()).unwrap();
        assert_eq!(values(&t), vec![0, 15, 0]);
        assert_eq!(evaluate_switching(&p, &Assignment::new()).unwrap().total, 8);
    }

    #[test]
    fn xor_with_one() {
        let mut b = ProgramBuilder::new(8, 0);
        let x = b.free_input("0", FreeDomain::Full);
        let o1 = b.emit(Mnemonic::Mov, vec![x]);
        b.emit(Mnemonic::Xor, vec![o1, Const(1)]);
        let t = execute(&b.finish(), &[("0", 1)].into_iter().collect()).unwrap();
        assert_eq!(values(&t), vec![1, 0]);
    }

    #[test]
    fn add_wraps_modulo_width() {
        let p = mov_then_add_self(2);
        let t = execute(&p, &[("0", 3)].into_iter().collect()).unwrap();
        assert_eq!(values(&t), vec![3, 2]);
        let r = evaluate_switching(&p, &[("0", 1)].into_iter().collect()).unwrap();
        assert_eq!(r.transitions, vec![2]);
        assert_eq!(r.total, 2);
    }

    #[test]
    fn repeated_output_is_a_nop() {
        let mut b = ProgramBuilder::new(8, 0);
        let x = b.free_input("0", FreeDomain::Full);
        let o1 = b.emit(Mnemonic::Mov, vec![x]);
        b.emit(Mnemonic::Mov, vec![o1]);
        let p = b.finish();
        for v in 0..256 {
            let r = evaluate_switching(&p, &[("0", v)].into_iter().collect()).unwrap();
            assert_eq!(r.total, 0);
        }
    }

    #[test]
    fn store_and_load_go_through_memory() {
        let mut b = ProgramBuilder::new(8, 2);
        let x = b.free_input("a", FreeDomain::Full);
        let o1 = b.emit(Mnemonic::Mov, vec![x]);
        b.emit_to(Mnemonic::Store, vec![o1], 1);
        b.emit(Mnemonic::Load, vec![MemRead(1)]);
        b.emit(Mnemonic::Load, vec![MemRead(0)]);
        let t = execute(&b.finish(), &[("a", 0x5a)].into_iter().collect()).unwrap();
        assert_eq!(values(&t), vec![0x5a, 0x5a, 0x5a, 0]);
        assert_eq!(t.final_memory[1].value(), 0x5a);
        assert_eq!(t.final_memory[0].value(), 0);
        assert_eq!(t.operands[2][0].value(), 0x5a);
    }

    #[test]
    fn mnemonic_semantics() {
        let w = 4;
        assert_eq!(apply(Mnemonic::Sub, &[0, 1], w), 0xf);
        assert_eq!(apply(Mnemonic::Not, &[0b0101], w), 0b1010);
        assert_eq!(apply(Mnemonic::Shl, &[0b0011, 2], w), 0b1100);
        assert_eq!(apply(Mnemonic::Shl, &[0b0011, 5], w), 0b0110);
        assert_eq!(apply(Mnemonic::Shr, &[0b1100, 6], w), 0b0011);
        assert_eq!(apply(Mnemonic::Ite, &[2, 7, 9], w), 7);
        assert_eq!(apply(Mnemonic::Ite, &[0, 7, 9], w), 9);
        assert_eq!(apply(Mnemonic::Eqz, &[0], w), 1);
        assert_eq!(apply(Mnemonic::Eqz, &[8], w), 0);
        assert_eq!(apply(Mnemonic::Add, &[u64::MAX, 1], 64), 0);
        assert_eq!(apply(Mnemonic::Shl, &[1, 63], 64), 1 << 63);
    }

    #[test]
    fn assignment_errors() {
        let mut b = ProgramBuilder::new(4, 0);
        let x = b.free_input("x", FreeDomain::Binary01);
        b.emit(Mnemonic::Mov, vec![x]);
        let p = b.finish();
        assert_eq!(
            execute(&p, &Assignment::new()),
            Err(ExecError::MissingInput("x".into()))
        );
        assert_eq!(
            execute(&p, &[("x", 2)].into_iter().collect()),
            Err(ExecError::DomainViolation {
                name: "x".into(),
                value: 2
            })
        );
        assert_eq!(
            execute(&p, &[("x", 1), ("y", 0)].into_iter().collect()),
            Err(ExecError::UnknownInput("y".into()))
        );
        let mut bad = p.clone();
        bad.instructions[0].inputs.clear();
        assert!(matches!(
            execute(&bad, &[("x", 1)].into_iter().collect()),
            Err(ExecError::InvalidProgram(_))
        ));
    }
}
