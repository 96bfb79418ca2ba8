// SPDX-License-Identifier: Apache-2.0

//! Clause sets feeding the two reductions.

use std::fmt;
use std::str::FromStr;

use super::ReductionError;

/// A variable or its negation. Variables are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Self {
            var,
            negated: false,
        }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, negated: true }
    }

    /// DIMACS-style signed literal: `3` is x3, `-3` is ¬x3.
    pub fn from_dimacs(lit: i64) -> Option<Self> {
        (lit != 0).then(|| Self {
            var: lit.unsigned_abs() as usize,
            negated: lit < 0,
        })
    }

    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var - 1] != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("~")?;
        }
        write!(f, "x{}", self.var)
    }
}

/// Accepts `x3`, `3`, and a negation prefix of `-`, `~` or `!`.
impl FromStr for Literal {
    type Err = ReductionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ReductionError::BadLiteral(s.to_string());
        let s = s.trim();
        let (negated, rest) = match s.strip_prefix(['-', '~', '!']) {
            Some(r) => (true, r),
            None => (false, s),
        };
        let digits = rest.strip_prefix('x').unwrap_or(rest);
        let var: usize = digits.parse().map_err(|_| bad())?;
        if var == 0 {
            return Err(bad());
        }
        Ok(Self { var, negated })
    }
}

pub type Clause = Vec<Literal>;

/// Parses a comma- or whitespace-separated clause such as `x1,-x2`.
pub fn parse_clause(s: &str) -> Result<Clause, ReductionError> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

pub fn clause_satisfied(clause: &[Literal], assignment: &[bool]) -> bool {
    clause.iter().any(|l| l.eval(assignment))
}

fn check_vars(num_vars: usize, clauses: &[Clause]) -> Result<(), ReductionError> {
    for (i, clause) in clauses.iter().enumerate() {
        if let Some(l) = clause.iter().find(|l| l.var == 0 || l.var > num_vars) {
            return Err(ReductionError::VariableOutOfRange {
                clause: i,
                var: l.var,
                num_vars,
            });
        }
    }
    Ok(())
}

/// MAXSAT instance whose clauses each hold one or two literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxSat2Instance {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
}

impl MaxSat2Instance {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, ReductionError> {
        let inst = Self { num_vars, clauses };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ReductionError> {
        if let Some(i) = self
            .clauses
            .iter()
            .position(|c| c.is_empty() || c.len() > 2)
        {
            return Err(ReductionError::ClauseSize {
                clause: i,
                len: self.clauses[i].len(),
            });
        }
        check_vars(self.num_vars, &self.clauses)
    }

    /// Number of clauses `assignment` satisfies.
    pub fn satisfied_count(&self, assignment: &[bool]) -> usize {
        self.clauses
            .iter()
            .filter(|c| clause_satisfied(c, assignment))
            .count()
    }
}

/// CNF formula with clauses of any positive length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatInstance {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
}

impl SatInstance {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, ReductionError> {
        let inst = Self { num_vars, clauses };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ReductionError> {
        if let Some(i) = self.clauses.iter().position(|c| c.is_empty()) {
            return Err(ReductionError::ClauseSize { clause: i, len: 0 });
        }
        check_vars(self.num_vars, &self.clauses)
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| clause_satisfied(c, assignment))
    }
}

/// Reads a DIMACS CNF file body into `(num_vars, clauses)`.
pub fn parse_dimacs(text: &str) -> Result<(usize, Vec<Clause>), ReductionError> {
    let mut num_vars = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            match fields[..] {
                ["cnf", vars, _] => {
                    num_vars = Some(vars.parse().map_err(|_| ReductionError::Dimacs {
                        line: n + 1,
                        message: format!("bad variable count `{vars}`"),
                    })?)
                }
                _ => {
                    return Err(ReductionError::Dimacs {
                        line: n + 1,
                        message: "expected `p cnf <vars> <clauses>`".into(),
                    })
                }
            }
            continue;
        }
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| ReductionError::Dimacs {
                line: n + 1,
                message: format!("bad literal `{tok}`"),
            })?;
            match Literal::from_dimacs(lit) {
                Some(l) => current.push(l),
                None => clauses.push(std::mem::take(&mut current)),
            }
        }
    }
    if !current.is_empty() {
        clauses.push(current);
    }
    let num_vars = num_vars.unwrap_or_else(|| {
        clauses
            .iter()
            .flatten()
            .map(|l: &Literal| l.var)
            .max()
            .unwrap_or(0)
    });
    Ok((num_vars, clauses))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_syntax() {
        assert_eq!("x3".parse::<Literal>().unwrap(), Literal::pos(3));
        assert_eq!("-x2".parse::<Literal>().unwrap(), Literal::neg(2));
        assert_eq!("~1".parse::<Literal>().unwrap(), Literal::neg(1));
        assert_eq!("!x1".parse::<Literal>().unwrap(), Literal::neg(1));
        assert!("x0".parse::<Literal>().is_err());
        assert!("y1".parse::<Literal>().is_err());
        assert_eq!(
            parse_clause("x1, -x2").unwrap(),
            vec![Literal::pos(1), Literal::neg(2)]
        );
    }

    #[test]
    fn instance_validation() {
        assert!(MaxSat2Instance::new(2, vec![vec![Literal::pos(1), Literal::neg(2)]]).is_ok());
        assert!(matches!(
            MaxSat2Instance::new(3, vec![vec![Literal::pos(1); 3]]),
            Err(ReductionError::ClauseSize { clause: 0, len: 3 })
        ));
        assert!(matches!(
            MaxSat2Instance::new(1, vec![vec![Literal::pos(2)]]),
            Err(ReductionError::VariableOutOfRange { var: 2, .. })
        ));
        assert!(SatInstance::new(1, vec![vec![]]).is_err());
    }

    #[test]
    fn counting() {
        let inst =
            MaxSat2Instance::new(2, vec![vec![Literal::pos(1)], vec![Literal::neg(1)]]).unwrap();
        assert_eq!(inst.satisfied_count(&[true, false]), 1);
        let sat = SatInstance::new(
            2,
            vec![
                vec![Literal::pos(1), Literal::pos(2)],
                vec![Literal::neg(1)],
            ],
        )
        .unwrap();
        assert!(sat.is_satisfied_by(&[false, true]));
        assert!(!sat.is_satisfied_by(&[true, true]));
    }

    #[test]
    fn dimacs() {
        let (n, clauses) = parse_dimacs("c demo\np cnf 3 2\n1 -2 0\n3\n0\n").unwrap();
        assert_eq!(n, 3);
        assert_eq!(
            clauses,
            vec![
                vec![Literal::pos(1), Literal::neg(2)],
                vec![Literal::pos(3)]
            ]
        );
        assert!(parse_dimacs("p cnf x 1").is_err());
    }
}
