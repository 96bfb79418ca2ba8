// SPDX-License-Identifier: Apache-2.0

//! SAT encoded as a switching gap.
//!
//! The decision phase reads and stores the variables, evaluates the formula
//! and selects an all-ones or all-zero pattern with `ite`. The switching
//! phase then alternates `mov pattern; mov #0`, long enough to outweigh the
//! decision phase by the requested factor.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_rational::Ratio;

use crate::bitvec::{check_width, mask};
use crate::machine::SwitchingReport;
use crate::program::{FreeDomain, Mnemonic, OperandSource, Program, ProgramBuilder};
use crate::text::serialize_program;

use super::{input_name, Literal, ReductionError, ReductionMeta, SatInstance, VariableEmbedding};

use OperandSource::{Const, MemRead, PriorOutput};

/// Cap on generated program length.
const MAX_INSTRUCTIONS: u128 = 1 << 24;

/// Ratio `>= 1` scaling the switching phase against the decision phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapFactor(Ratio<u64>);

impl GapFactor {
    pub const ONE: GapFactor = GapFactor(Ratio::new_raw(1, 1));

    pub fn new(numer: u64, denom: u64) -> Result<Self, ReductionError> {
        if denom == 0 || numer < denom {
            return Err(ReductionError::BadFactor(format!("{numer}/{denom}")));
        }
        Ok(Self(Ratio::new(numer, denom)))
    }

    pub fn ratio(self) -> Ratio<u64> {
        self.0
    }

    /// Number of `[mov pattern; mov #0]` pairs for a decision phase of
    /// `decision_len` instructions: `ceil(factor * decision_len / 2) + 1`.
    pub fn repetitions(self, decision_len: usize) -> u128 {
        let num = u128::from(*self.0.numer()) * decision_len as u128;
        let den = 2 * u128::from(*self.0.denom());
        num.div_ceil(den) + 1
    }
}

impl Default for GapFactor {
    fn default() -> Self {
        Self::ONE
    }
}

impl fmt::Display for GapFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Accepts `2`, `3/2` or `1.5`.
impl FromStr for GapFactor {
    type Err = ReductionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ReductionError::BadFactor(s.to_string());
        let s = s.trim();
        let (numer, denom) = if let Some((n, d)) = s.split_once('/') {
            (n.parse().map_err(|_| bad())?, d.parse().map_err(|_| bad())?)
        } else if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let denom = 10u64.pow(frac.len() as u32);
            let int: u64 = int.parse().map_err(|_| bad())?;
            let frac: u64 = frac.parse().map_err(|_| bad())?;
            let numer = int
                .checked_mul(denom)
                .and_then(|v| v.checked_add(frac))
                .ok_or_else(bad)?;
            (numer, denom)
        } else {
            (s.parse().map_err(|_| bad())?, 1)
        };
        Self::new(numer, denom).map_err(|_| bad())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapProgram {
    pub program: Program,
    pub num_vars: usize,
    /// Instructions up to and including the `ite` that selects the pattern.
    pub decision_len: usize,
    pub switching_len: usize,
    /// Switching inside the switching phase when the formula is satisfied:
    /// `width` bits on each of its `switching_len - 1` internal transitions.
    pub gap_bits: u64,
    /// Position of the instruction whose output is the formula's truth value.
    pub check_result: usize,
    /// Position of the `ite` producing the pattern.
    pub pattern: usize,
    pub factor: GapFactor,
}

impl GapProgram {
    /// Instruction positions of the switching phase.
    pub fn switching_phase(&self) -> Range<usize> {
        self.decision_len..self.decision_len + self.switching_len
    }

    /// Transitions between consecutive switching-phase instructions.
    pub fn switching_phase_transitions<'r>(&self, report: &'r SwitchingReport) -> &'r [u32] {
        &report.transitions[self.decision_len..self.decision_len + self.switching_len - 1]
    }

    pub fn meta(&self) -> ReductionMeta {
        ReductionMeta {
            k_var: 0,
            k_clause: 0,
            decision_len: self.decision_len,
            switching_len: self.switching_len,
            lits: (1..=self.num_vars)
                .map(|v| (Literal::pos(v), v - 1))
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        self.meta().render() + &serialize_program(&self.program)
    }
}

impl VariableEmbedding for GapProgram {
    fn num_vars(&self) -> usize {
        self.num_vars
    }
}

/// Emits instructions computing whether the 0/1 values stored at
/// `var_base_addr..var_base_addr + n` satisfy `instance`, and returns the
/// operand holding the answer (1 or 0).
///
/// Each clause loads its literals, inverts negated ones with `xor #1` and
/// folds them with `or`; clause results are folded with `and`. An empty
/// formula yields a `mov #1`.
pub fn emit_checksat(
    b: &mut ProgramBuilder,
    var_base_addr: usize,
    instance: &SatInstance,
) -> Result<OperandSource, ReductionError> {
    instance.validate()?;
    let mut formula: Option<OperandSource> = None;
    for clause in &instance.clauses {
        let mut acc: Option<OperandSource> = None;
        for lit in clause {
            let mut value = b.emit(Mnemonic::Load, vec![MemRead(var_base_addr + lit.var - 1)]);
            if lit.negated {
                value = b.emit(Mnemonic::Xor, vec![value, Const(1)]);
            }
            acc = Some(match acc {
                Some(prev) => b.emit(Mnemonic::Or, vec![prev, value]),
                None => value,
            });
        }
        let clause_value = acc.expect("clauses are non-empty");
        formula = Some(match formula {
            Some(prev) => b.emit(Mnemonic::And, vec![prev, clause_value]),
            None => clause_value,
        });
    }
    Ok(formula.unwrap_or_else(|| b.emit(Mnemonic::Mov, vec![Const(1)])))
}

pub fn reduce_sat_gap(
    instance: &SatInstance,
    width: u32,
    factor: GapFactor,
) -> Result<GapProgram, ReductionError> {
    instance.validate()?;
    check_width(width).map_err(|_| ReductionError::BadWidth(width))?;
    let n = instance.num_vars;

    let mut b = ProgramBuilder::new(width, n);
    let inputs: Vec<OperandSource> = (1..=n)
        .map(|v| b.free_input(input_name(v), FreeDomain::Binary01))
        .collect();
    for (i, free) in inputs.into_iter().enumerate() {
        let value = b.emit(Mnemonic::Mov, vec![free]);
        b.emit_to(Mnemonic::Store, vec![value], i);
    }
    let result = emit_checksat(&mut b, 0, instance)?;
    let pattern = b.emit(
        Mnemonic::Ite,
        vec![result.clone(), Const(mask(width)), Const(0)],
    );
    let decision_len = b.len();

    let reps = factor.repetitions(decision_len);
    if decision_len as u128 + 2 * reps > MAX_INSTRUCTIONS {
        return Err(ReductionError::TooLarge);
    }
    for _ in 0..reps {
        b.emit(Mnemonic::Mov, vec![pattern.clone()]);
        b.emit(Mnemonic::Mov, vec![Const(0)]);
    }
    let switching_len = 2 * reps as usize;

    let position = |op: &OperandSource| match op {
        PriorOutput(i) => *i,
        _ => unreachable!("emitted operands are instruction outputs"),
    };
    Ok(GapProgram {
        program: b.finish(),
        num_vars: n,
        decision_len,
        switching_len,
        gap_bits: u64::from(width) * (switching_len as u64 - 1),
        check_result: position(&result),
        pattern: position(&pattern),
        factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{evaluate_switching, execute, Assignment};
    use crate::reductions::embed_assignment;

    fn sat(n: usize, clauses: Vec<Vec<Literal>>) -> SatInstance {
        SatInstance::new(n, clauses).unwrap()
    }

    /// Stores `bools` into memory from free inputs, runs CheckSat, returns its value.
    fn checksat_value(instance: &SatInstance, bools: &[bool]) -> u64 {
        let mut b = ProgramBuilder::new(8, instance.num_vars);
        for (i, _) in bools.iter().enumerate() {
            let x = b.free_input(input_name(i + 1), FreeDomain::Binary01);
            let v = b.emit(Mnemonic::Mov, vec![x]);
            b.emit_to(Mnemonic::Store, vec![v], i);
        }
        let result = emit_checksat(&mut b, 0, instance).unwrap();
        let PriorOutput(idx) = result else {
            panic!("result must be an output")
        };
        let assignment: Assignment = bools
            .iter()
            .enumerate()
            .map(|(i, &v)| (input_name(i + 1), u64::from(v)))
            .collect();
        execute(&b.finish(), &assignment).unwrap().outputs[idx].value()
    }

    #[test]
    fn checksat_examples() {
        assert_eq!(
            checksat_value(&sat(1, vec![vec![Literal::pos(1)]]), &[true]),
            1
        );
        assert_eq!(
            checksat_value(&sat(1, vec![vec![Literal::neg(1)]]), &[true]),
            0
        );
        let two = sat(
            2,
            vec![
                vec![Literal::pos(1), Literal::pos(2)],
                vec![Literal::neg(1)],
            ],
        );
        assert_eq!(checksat_value(&two, &[false, true]), 1);
        assert_eq!(checksat_value(&two, &[true, true]), 0);
        assert_eq!(checksat_value(&sat(1, vec![]), &[false]), 1);
    }

    #[test]
    fn factor_parsing() {
        assert_eq!("1".parse::<GapFactor>().unwrap(), GapFactor::ONE);
        assert_eq!(
            "3/2".parse::<GapFactor>().unwrap(),
            GapFactor::new(3, 2).unwrap()
        );
        assert_eq!(
            "1.5".parse::<GapFactor>().unwrap(),
            GapFactor::new(3, 2).unwrap()
        );
        for bad in ["0.5", "1/2", "x", "2/0", "1.", "-1"] {
            assert!(bad.parse::<GapFactor>().is_err(), "{bad}");
        }
    }

    #[test]
    fn repetition_counts() {
        assert_eq!(GapFactor::ONE.repetitions(6), 4);
        assert_eq!(GapFactor::ONE.repetitions(7), 5);
        assert_eq!(GapFactor::new(2, 1).unwrap().repetitions(7), 8);
        assert_eq!(GapFactor::new(3, 2).unwrap().repetitions(4), 4);
    }

    #[test]
    fn satisfied_unit_activates_switching_phase() {
        let g = reduce_sat_gap(&sat(1, vec![vec![Literal::pos(1)]]), 8, GapFactor::ONE).unwrap();
        // mov, store, load, ite
        assert_eq!(g.decision_len, 4);
        assert_eq!(g.switching_len, 6);
        assert_eq!(g.gap_bits, 40);
        let on = evaluate_switching(&g.program, &embed_assignment(&g, &[true]).unwrap()).unwrap();
        assert!(g.switching_phase_transitions(&on).iter().all(|&t| t == 8));
        let off = evaluate_switching(&g.program, &embed_assignment(&g, &[false]).unwrap()).unwrap();
        assert!(g.switching_phase_transitions(&off).iter().all(|&t| t == 0));
    }

    #[test]
    fn contradiction_never_switches() {
        let g = reduce_sat_gap(
            &sat(1, vec![vec![Literal::pos(1)], vec![Literal::neg(1)]]),
            4,
            GapFactor::ONE,
        )
        .unwrap();
        for v in [false, true] {
            let r = evaluate_switching(&g.program, &embed_assignment(&g, &[v]).unwrap()).unwrap();
            assert!(g.switching_phase_transitions(&r).iter().all(|&t| t == 0));
        }
    }

    #[test]
    fn factor_two_doubles_the_phase() {
        let inst = sat(
            3,
            vec![
                vec![Literal::pos(1), Literal::neg(2)],
                vec![Literal::pos(2), Literal::pos(3)],
            ],
        );
        let g = reduce_sat_gap(&inst, 8, GapFactor::new(2, 1).unwrap()).unwrap();
        assert!(g.switching_len >= 2 * g.decision_len);
        assert_eq!(g.program.len(), g.decision_len + g.switching_len);
        assert_eq!(g.program.instructions[g.pattern].mnemonic, Mnemonic::Ite);
        for i in g.switching_phase() {
            let insn = &g.program.instructions[i];
            assert_eq!(insn.mnemonic, Mnemonic::Mov);
            let expected = if (i - g.decision_len).is_multiple_of(2) {
                PriorOutput(g.pattern)
            } else {
                Const(0)
            };
            assert_eq!(insn.inputs, vec![expected]);
        }
    }

    #[test]
    fn oversized_factor_is_rejected() {
        let inst = sat(1, vec![vec![Literal::pos(1)]]);
        assert_eq!(
            reduce_sat_gap(&inst, 8, GapFactor::new(u64::MAX, 1).unwrap()),
            Err(ReductionError::TooLarge)
        );
    }
}
