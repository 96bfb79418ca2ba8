// SPDX-License-Identifier: Apache-2.0

//! Straight-line programs over fixed-width bit-vectors.
//!
//! A program is a fixed sequence of instructions. Every instruction reads up
//! to three operands and drives exactly one value onto the output datapath;
//! there is no control flow. Registers are implicit: the result of
//! instruction `i` can be read back by any later instruction as `o<i>`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::bitvec::{mask, MAX_WIDTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mnemonic {
    Mov,
    Add,
    Sub,
    And,
    Or,
    Xor,
    Not,
    Shl,
    Shr,
    Load,
    Store,
    Ite,
    Eqz,
}

impl Mnemonic {
    pub const ALL: [Mnemonic; 13] = [
        Mnemonic::Mov,
        Mnemonic::Add,
        Mnemonic::Sub,
        Mnemonic::And,
        Mnemonic::Or,
        Mnemonic::Xor,
        Mnemonic::Not,
        Mnemonic::Shl,
        Mnemonic::Shr,
        Mnemonic::Load,
        Mnemonic::Store,
        Mnemonic::Ite,
        Mnemonic::Eqz,
    ];

    pub fn arity(self) -> usize {
        match self {
            Mnemonic::Mov | Mnemonic::Not | Mnemonic::Eqz | Mnemonic::Load | Mnemonic::Store => 1,
            Mnemonic::Add
            | Mnemonic::Sub
            | Mnemonic::And
            | Mnemonic::Or
            | Mnemonic::Xor
            | Mnemonic::Shl
            | Mnemonic::Shr => 2,
            Mnemonic::Ite => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mnemonic::Mov => "mov",
            Mnemonic::Add => "add",
            Mnemonic::Sub => "sub",
            Mnemonic::And => "and",
            Mnemonic::Or => "or",
            Mnemonic::Xor => "xor",
            Mnemonic::Not => "not",
            Mnemonic::Shl => "shl",
            Mnemonic::Shr => "shr",
            Mnemonic::Load => "load",
            Mnemonic::Store => "store",
            Mnemonic::Ite => "ite",
            Mnemonic::Eqz => "eqz",
        }
    }
}

impl fmt::Display for Mnemonic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownMnemonic(pub String);

impl fmt::Display for UnknownMnemonic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown mnemonic `{}`", self.0)
    }
}

impl std::error::Error for UnknownMnemonic {}

impl FromStr for Mnemonic {
    type Err = UnknownMnemonic;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mnemonic::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| UnknownMnemonic(s.to_string()))
    }
}

/// Value range of a free input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FreeDomain {
    /// Only 0 or 1.
    Binary01,
    /// Any `width`-bit value.
    Full,
}

impl FreeDomain {
    /// Number of distinct values the input may take at `width`.
    pub fn size(self, width: u32) -> u128 {
        match self {
            FreeDomain::Binary01 => 2,
            FreeDomain::Full => 1u128 << width,
        }
    }

    pub fn contains(self, value: u64, width: u32) -> bool {
        match self {
            FreeDomain::Binary01 => value <= 1,
            FreeDomain::Full => value & !mask(width) == 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FreeInput {
    pub name: String,
    pub domain: FreeDomain,
}

impl FreeInput {
    pub fn new(name: impl Into<String>, domain: FreeDomain) -> Self {
        Self {
            name: name.into(),
            domain,
        }
    }
}

/// Where an instruction operand comes from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OperandSource {
    /// A named free input, declared in [`Program::free_inputs`].
    Free(String),
    Const(u64),
    /// Read of a fixed memory cell.
    MemRead(usize),
    /// Output of an earlier instruction, by zero-based position.
    PriorOutput(usize),
}

impl OperandSource {
    pub fn free(name: impl Into<String>) -> Self {
        OperandSource::Free(name.into())
    }
}

impl fmt::Display for OperandSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperandSource::Free(name) => write!(f, "free{name}"),
            OperandSource::Const(v) => write!(f, "#{v:#x}"),
            OperandSource::MemRead(addr) => write!(f, "m[{addr}]"),
            OperandSource::PriorOutput(idx) => write!(f, "o{}", idx + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub mnemonic: Mnemonic,
    pub inputs: Vec<OperandSource>,
    /// Memory cell that also receives the output. Required for `store`.
    pub mem_dest: Option<usize>,
}

impl Instruction {
    pub fn new(mnemonic: Mnemonic, inputs: Vec<OperandSource>) -> Self {
        Self {
            mnemonic,
            inputs,
            mem_dest: None,
        }
    }

    pub fn with_dest(mut self, addr: usize) -> Self {
        self.mem_dest = Some(addr);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub width: u32,
    pub mem_size: usize,
    pub free_inputs: Vec<FreeInput>,
    pub instructions: Vec<Instruction>,
}

impl Program {
    pub fn new(width: u32, mem_size: usize) -> Self {
        Self {
            width,
            mem_size,
            free_inputs: Vec::new(),
            instructions: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn free_index(&self, name: &str) -> Option<usize> {
        self.free_inputs.iter().position(|f| f.name == name)
    }

    /// Every invariant violation, in header-then-instruction order.
    pub fn validate(&self) -> Vec<Violation> {
        validate_program(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    WidthOutOfRange(u32),
    DuplicateFreeInput(String),
    BadFreeName(String),
    Arity {
        mnemonic: Mnemonic,
        expected: usize,
        found: usize,
    },
    UndeclaredFreeInput(String),
    ForwardReference(usize),
    ConstTooWide(u64),
    AddressOutOfRange(usize),
    LoadNeedsMemRead,
    StoreNeedsDestination,
}

/// One invariant violation. `index` is the zero-based instruction position,
/// or `None` for header problems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub index: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(i) = self.index {
            write!(f, "o{}: ", i + 1)?;
        }
        match &self.kind {
            ViolationKind::WidthOutOfRange(w) => write!(f, "width {w} outside 1..={MAX_WIDTH}"),
            ViolationKind::DuplicateFreeInput(n) => write!(f, "free input `{n}` declared twice"),
            ViolationKind::BadFreeName(n) => write!(f, "invalid free input name `{n}`"),
            ViolationKind::Arity {
                mnemonic,
                expected,
                found,
            } => write!(f, "`{mnemonic}` takes {expected} operand(s), found {found}"),
            ViolationKind::UndeclaredFreeInput(n) => write!(f, "free input `{n}` is not declared"),
            ViolationKind::ForwardReference(j) => {
                write!(f, "reference to o{} is not an earlier instruction", j + 1)
            }
            ViolationKind::ConstTooWide(v) => write!(f, "constant {v:#x} exceeds program width"),
            ViolationKind::AddressOutOfRange(a) => write!(f, "address m[{a}] outside memory"),
            ViolationKind::LoadNeedsMemRead => write!(f, "`load` operand must be a memory read"),
            ViolationKind::StoreNeedsDestination => write!(f, "`store` requires a destination"),
        }
    }
}

pub(crate) fn is_valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn validate_program(program: &Program) -> Vec<Violation> {
    let mut out = Vec::new();
    let header = |kind| Violation { index: None, kind };
    let width_ok = (1..=MAX_WIDTH).contains(&program.width);
    if !width_ok {
        out.push(header(ViolationKind::WidthOutOfRange(program.width)));
    }

    let mut seen = HashSet::new();
    for free in &program.free_inputs {
        if !is_valid_name(&free.name) {
            out.push(header(ViolationKind::BadFreeName(free.name.clone())));
        }
        if !seen.insert(free.name.as_str()) {
            out.push(header(ViolationKind::DuplicateFreeInput(free.name.clone())));
        }
    }

    for (idx, insn) in program.instructions.iter().enumerate() {
        let mut push = |kind| {
            out.push(Violation {
                index: Some(idx),
                kind,
            })
        };
        let expected = insn.mnemonic.arity();
        if insn.inputs.len() != expected {
            push(ViolationKind::Arity {
                mnemonic: insn.mnemonic,
                expected,
                found: insn.inputs.len(),
            });
        }
        for src in &insn.inputs {
            match src {
                OperandSource::Free(name) => {
                    if !seen.contains(name.as_str()) {
                        push(ViolationKind::UndeclaredFreeInput(name.clone()));
                    }
                }
                OperandSource::Const(v) => {
                    if width_ok && v & !mask(program.width) != 0 {
                        push(ViolationKind::ConstTooWide(*v));
                    }
                }
                OperandSource::MemRead(addr) => {
                    if *addr >= program.mem_size {
                        push(ViolationKind::AddressOutOfRange(*addr));
                    }
                }
                OperandSource::PriorOutput(j) => {
                    if *j >= idx {
                        push(ViolationKind::ForwardReference(*j));
                    }
                }
            }
        }
        if insn.mnemonic == Mnemonic::Load
            && !insn
                .inputs
                .iter()
                .all(|s| matches!(s, OperandSource::MemRead(_)))
        {
            push(ViolationKind::LoadNeedsMemRead);
        }
        match insn.mem_dest {
            Some(addr) if addr >= program.mem_size => push(ViolationKind::AddressOutOfRange(addr)),
            None if insn.mnemonic == Mnemonic::Store => push(ViolationKind::StoreNeedsDestination),
            _ => {}
        }
    }
    out
}

/// Incremental program construction. `emit` returns the operand that reads
/// back the emitted instruction's output.
#[derive(Debug, Clone)]
pub struct ProgramBuilder {
    program: Program,
}

impl ProgramBuilder {
    pub fn new(width: u32, mem_size: usize) -> Self {
        Self {
            program: Program::new(width, mem_size),
        }
    }

    pub fn free_input(&mut self, name: impl Into<String>, domain: FreeDomain) -> OperandSource {
        let name = name.into();
        self.program
            .free_inputs
            .push(FreeInput::new(name.clone(), domain));
        OperandSource::Free(name)
    }

    pub fn emit(&mut self, mnemonic: Mnemonic, inputs: Vec<OperandSource>) -> OperandSource {
        self.push(Instruction::new(mnemonic, inputs))
    }

    pub fn emit_to(
        &mut self,
        mnemonic: Mnemonic,
        inputs: Vec<OperandSource>,
        addr: usize,
    ) -> OperandSource {
        self.push(Instruction::new(mnemonic, inputs).with_dest(addr))
    }

    pub fn push(&mut self, insn: Instruction) -> OperandSource {
        self.program.instructions.push(insn);
        OperandSource::PriorOutput(self.program.instructions.len() - 1)
    }

    /// Number of instructions emitted so far.
    pub fn len(&self) -> usize {
        self.program.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.program.instructions.is_empty()
    }

    pub fn width(&self) -> u32 {
        self.program.width
    }

    pub fn finish(self) -> Program {
        self.program
    }
}
