// SPDX-License-Identifier: Apache-2.0

//! Three-valued per-bit abstraction of datapath values, and the switching
//! bound it yields.

use std::fmt;

use crate::bitvec::mask;
use crate::machine::Machine;
use crate::program::{FreeDomain, Mnemonic, OperandSource, Program};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BitState {
    Zero,
    One,
    Unknown,
}

impl BitState {
    fn known(self) -> Option<bool> {
        match self {
            BitState::Zero => Some(false),
            BitState::One => Some(true),
            BitState::Unknown => None,
        }
    }

    fn from_known(b: Option<bool>) -> Self {
        match b {
            Some(false) => BitState::Zero,
            Some(true) => BitState::One,
            None => BitState::Unknown,
        }
    }
}

/// Sets of bit positions known to be zero and known to be one. The two
/// masks are disjoint, so the concretisation is never empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KnownBits {
    width: u32,
    zeros: u64,
    ones: u64,
}

impl KnownBits {
    pub fn unknown(width: u32) -> Self {
        Self {
            width,
            zeros: 0,
            ones: 0,
        }
    }

    pub fn constant(value: u64, width: u32) -> Self {
        let m = mask(width);
        Self {
            width,
            zeros: !value & m,
            ones: value & m,
        }
    }

    /// Abstraction of a free input with the given domain.
    pub fn of_domain(domain: FreeDomain, width: u32) -> Self {
        match domain {
            FreeDomain::Full => Self::unknown(width),
            FreeDomain::Binary01 => Self {
                width,
                zeros: mask(width) & !1,
                ones: 0,
            },
        }
    }

    /// Bits listed least significant first.
    pub fn from_states(states: &[BitState]) -> Self {
        let mut kb = Self::unknown(states.len() as u32);
        for (i, s) in states.iter().enumerate() {
            match s {
                BitState::Zero => kb.zeros |= 1 << i,
                BitState::One => kb.ones |= 1 << i,
                BitState::Unknown => {}
            }
        }
        kb
    }

    pub fn width(self) -> u32 {
        self.width
    }

    pub fn zeros(self) -> u64 {
        self.zeros
    }

    pub fn ones(self) -> u64 {
        self.ones
    }

    pub fn known_mask(self) -> u64 {
        self.zeros | self.ones
    }

    pub fn state(self, bit: u32) -> BitState {
        if self.zeros >> bit & 1 == 1 {
            BitState::Zero
        } else if self.ones >> bit & 1 == 1 {
            BitState::One
        } else {
            BitState::Unknown
        }
    }

    /// The single concrete value, when every bit is known.
    pub fn value(self) -> Option<u64> {
        (self.known_mask() == mask(self.width)).then_some(self.ones)
    }

    /// Whether `value` is in the concretisation.
    pub fn contains(self, value: u64) -> bool {
        value & self.zeros == 0 && value & self.ones == self.ones && value & !mask(self.width) == 0
    }

    pub fn join(self, other: Self) -> Self {
        Self {
            width: self.width,
            zeros: self.zeros & other.zeros,
            ones: self.ones & other.ones,
        }
    }

    /// Positions where two values drawn from `self` and `other` might differ.
    pub fn may_differ(self, other: Self) -> u64 {
        let both_known_equal = (self.zeros & other.zeros) | (self.ones & other.ones);
        mask(self.width) & !both_known_equal
    }

    fn map2(self, other: Self, f: impl Fn(Option<bool>, Option<bool>) -> Option<bool>) -> Self {
        let states: Vec<BitState> = (0..self.width)
            .map(|i| BitState::from_known(f(self.state(i).known(), other.state(i).known())))
            .collect();
        Self::from_states(&states)
    }
}

/// Most significant bit first, `?` for unknown.
impl fmt::Display for KnownBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.width).rev() {
            f.write_str(match self.state(i) {
                BitState::Zero => "0",
                BitState::One => "1",
                BitState::Unknown => "?",
            })?;
        }
        Ok(())
    }
}

fn xor3(a: Option<bool>, b: Option<bool>, c: Option<bool>) -> Option<bool> {
    Some(a? ^ b? ^ c?)
}

fn majority(a: Option<bool>, b: Option<bool>, c: Option<bool>) -> Option<bool> {
    let bits = [a, b, c];
    let ones = bits.iter().filter(|b| **b == Some(true)).count();
    let zeros = bits.iter().filter(|b| **b == Some(false)).count();
    if ones >= 2 {
        Some(true)
    } else if zeros >= 2 {
        Some(false)
    } else {
        None
    }
}

/// Ripple-carry addition in three-valued logic: a sum bit is known when
/// both addends and the incoming carry are; a carry is known whenever two of
/// its three inputs agree.
fn add_with_carry(a: KnownBits, b: KnownBits, carry_in: bool) -> KnownBits {
    let mut carry = Some(carry_in);
    let states: Vec<BitState> = (0..a.width)
        .map(|i| {
            let (x, y) = (a.state(i).known(), b.state(i).known());
            let sum = xor3(x, y, carry);
            carry = majority(x, y, carry);
            BitState::from_known(sum)
        })
        .collect();
    KnownBits::from_states(&states)
}

fn not(a: KnownBits) -> KnownBits {
    KnownBits {
        width: a.width,
        zeros: a.ones,
        ones: a.zeros,
    }
}

fn shift(value: KnownBits, amount: KnownBits, left: bool) -> KnownBits {
    let w = value.width;
    let Some(amount) = amount.value() else {
        return KnownBits::unknown(w);
    };
    let s = (amount % u64::from(w)) as u32;
    if s == 0 {
        return value;
    }
    let m = mask(w);
    if left {
        KnownBits {
            width: w,
            zeros: ((value.zeros << s) | ((1u64 << s) - 1)) & m,
            ones: (value.ones << s) & m,
        }
    } else {
        KnownBits {
            width: w,
            zeros: (value.zeros >> s) | (m & !(m >> s)),
            ones: value.ones >> s,
        }
    }
}

/// Abstract counterpart of [`crate::machine::apply`]. For `load` the single
/// input is the abstract content of the cell being read.
pub fn knownbits_transfer(
    mnemonic: Mnemonic,
    inputs: &[KnownBits],
) -> Result<KnownBits, AnalysisError> {
    if inputs.len() != mnemonic.arity() {
        return Err(AnalysisError::Arity {
            mnemonic,
            expected: mnemonic.arity(),
            found: inputs.len(),
        });
    }
    let w = inputs[0].width;
    if let Some(other) = inputs.iter().find(|k| k.width != w) {
        return Err(AnalysisError::WidthMismatch {
            left: w,
            right: other.width,
        });
    }
    let out = match mnemonic {
        Mnemonic::Mov | Mnemonic::Load | Mnemonic::Store => inputs[0],
        Mnemonic::Not => not(inputs[0]),
        Mnemonic::And => KnownBits {
            width: w,
            zeros: inputs[0].zeros | inputs[1].zeros,
            ones: inputs[0].ones & inputs[1].ones,
        },
        Mnemonic::Or => KnownBits {
            width: w,
            zeros: inputs[0].zeros & inputs[1].zeros,
            ones: inputs[0].ones | inputs[1].ones,
        },
        Mnemonic::Xor => inputs[0].map2(inputs[1], |a, b| Some(a? ^ b?)),
        Mnemonic::Add => add_with_carry(inputs[0], inputs[1], false),
        Mnemonic::Sub => add_with_carry(inputs[0], not(inputs[1]), true),
        Mnemonic::Shl => shift(inputs[0], inputs[1], true),
        Mnemonic::Shr => shift(inputs[0], inputs[1], false),
        Mnemonic::Ite => {
            let cond = inputs[0];
            if cond.ones != 0 {
                inputs[1]
            } else if cond.value() == Some(0) {
                inputs[2]
            } else {
                inputs[1].join(inputs[2])
            }
        }
        Mnemonic::Eqz => {
            let x = inputs[0];
            if x.ones != 0 {
                KnownBits::constant(0, w)
            } else if x.value() == Some(0) {
                KnownBits::constant(1, w)
            } else {
                KnownBits {
                    width: w,
                    zeros: mask(w) & !1,
                    ones: 0,
                }
            }
        }
    };
    Ok(out)
}

/// Abstract output of every instruction, from one abstract run. Memory
/// starts all-zero; since addresses are fixed, each store replaces the
/// cell's abstract content outright.
pub fn knownbits_trace(program: &Program) -> Result<Vec<KnownBits>, AnalysisError> {
    Machine::new(program)?;
    let w = program.width;
    let mut memory = vec![KnownBits::constant(0, w); program.mem_size];
    let mut outputs: Vec<KnownBits> = Vec::with_capacity(program.len());
    for insn in &program.instructions {
        let inputs: Vec<KnownBits> = insn
            .inputs
            .iter()
            .map(|src| match src {
                OperandSource::Free(name) => {
                    let idx = program.free_index(name).expect("validated");
                    KnownBits::of_domain(program.free_inputs[idx].domain, w)
                }
                OperandSource::Const(v) => KnownBits::constant(*v, w),
                OperandSource::MemRead(a) => memory[*a],
                OperandSource::PriorOutput(j) => outputs[*j],
            })
            .collect();
        let out = knownbits_transfer(insn.mnemonic, &inputs)?;
        if let Some(addr) = insn.mem_dest {
            memory[addr] = out;
        }
        outputs.push(out);
    }
    Ok(outputs)
}

/// Sound switching bound: per adjacent pair, the number of bit positions
/// that are not known-and-equal in both abstract outputs.
pub fn knownbits_upper_bound(program: &Program) -> Result<u64, AnalysisError> {
    let trace = knownbits_trace(program)?;
    Ok(trace
        .windows(2)
        .map(|w| u64::from(w[0].may_differ(w[1]).count_ones()))
        .sum())
}

/// Bound assuming every bit flips on every transition: `(n - 1) * w`.
pub fn coarse_upper_bound(program: &Program) -> u64 {
    program.len().saturating_sub(1) as u64 * u64::from(program.width)
}
