// SPDX-License-Identifier: Apache-2.0

//! Canonical line-based text format for programs.
//!
//! ```text
//! width 4
//! mem 2
//! free x1 01
//! o1: mov freex1
//! o2: xor o1, #0x1
//! o3: store o1 -> m[0]
//! ```
//!
//! `#` starts a comment unless it introduces a `#0x` constant.

use std::fmt::Write as _;

use thiserror::Error;

use crate::program::{
    is_valid_name, FreeDomain, FreeInput, Instruction, Mnemonic, OperandSource, Program, Violation,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {violation}")]
    Invalid { line: usize, violation: Violation },
    #[error("{0}")]
    InvalidHeader(Violation),
    #[error("missing `width` header")]
    MissingWidth,
}

impl ParseError {
    /// 1-based source line, when the error can be pinned to one.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. } | ParseError::Invalid { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Text of `line` with any trailing comment removed.
pub(crate) fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'#' && !line[i + 1..].starts_with("0x") {
            return &line[..i];
        }
    }
    line
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_number<T: std::str::FromStr>(line: usize, what: &str, s: &str) -> Result<T, ParseError> {
    s.parse()
        .map_err(|_| syntax(line, format!("invalid {what} `{s}`")))
}

fn parse_addr(line: usize, s: &str) -> Result<usize, ParseError> {
    let inner = s
        .strip_prefix("m[")
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| syntax(line, format!("expected `m[<addr>]`, found `{s}`")))?;
    parse_number(line, "address", inner.trim())
}

fn parse_source(line: usize, s: &str) -> Result<OperandSource, ParseError> {
    if let Some(hex) = s.strip_prefix("#0x") {
        return u64::from_str_radix(hex, 16)
            .map(OperandSource::Const)
            .map_err(|_| syntax(line, format!("invalid constant `{s}`")));
    }
    if s.starts_with("m[") {
        return parse_addr(line, s).map(OperandSource::MemRead);
    }
    if let Some(name) = s.strip_prefix("free") {
        if !is_valid_name(name) {
            return Err(syntax(line, format!("invalid free input `{s}`")));
        }
        return Ok(OperandSource::Free(name.to_string()));
    }
    if let Some(idx) = s.strip_prefix('o') {
        let idx: usize = parse_number(line, "output reference", idx)?;
        if idx == 0 {
            return Err(syntax(line, "output references are 1-based"));
        }
        return Ok(OperandSource::PriorOutput(idx - 1));
    }
    Err(syntax(line, format!("unrecognised operand `{s}`")))
}

fn parse_instruction(line: usize, expected: usize, text: &str) -> Result<Instruction, ParseError> {
    let (label, body) = text
        .split_once(':')
        .ok_or_else(|| syntax(line, "expected `o<i>: <mnemonic> ...`"))?;
    let label = label.trim();
    let idx: usize = label
        .strip_prefix('o')
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| syntax(line, format!("invalid instruction label `{label}`")))?;
    if idx != expected {
        return Err(syntax(
            line,
            format!("instruction label o{idx} out of sequence, expected o{expected}"),
        ));
    }

    let (body, dest) = match body.split_once("->") {
        Some((b, d)) => (b, Some(parse_addr(line, d.trim())?)),
        None => (body, None),
    };
    let body = body.trim();
    let (mnemonic, operands) = match body.split_once(char::is_whitespace) {
        Some((m, rest)) => (m, rest.trim()),
        None => (body, ""),
    };
    let mnemonic: Mnemonic = mnemonic.parse().map_err(|e| syntax(line, format!("{e}")))?;
    let inputs = if operands.is_empty() {
        Vec::new()
    } else {
        operands
            .split(',')
            .map(|s| parse_source(line, s.trim()))
            .collect::<Result<Vec<_>, _>>()?
    };
    Ok(Instruction {
        mnemonic,
        inputs,
        mem_dest: dest,
    })
}

/// Parses the canonical text format, then checks every program invariant.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut width = None;
    let mut mem_size = 0usize;
    let mut free_inputs = Vec::new();
    let mut instructions = Vec::new();
    let mut insn_lines = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let keyword = words.next().unwrap_or_default();
        let header = matches!(keyword, "width" | "mem" | "free");
        if header && !instructions.is_empty() {
            return Err(syntax(line, "header line after the first instruction"));
        }
        let args: Vec<&str> = words.collect();
        match keyword {
            "width" => {
                let [w] = args[..] else {
                    return Err(syntax(line, "expected `width <w>`"));
                };
                if width.is_some() {
                    return Err(syntax(line, "duplicate `width` header"));
                }
                width = Some(parse_number(line, "width", w)?);
            }
            "mem" => {
                let [m] = args[..] else {
                    return Err(syntax(line, "expected `mem <size>`"));
                };
                mem_size = parse_number(line, "memory size", m)?;
            }
            "free" => {
                let [name, domain] = args[..] else {
                    return Err(syntax(line, "expected `free <name> <01|full>`"));
                };
                let domain = match domain {
                    "01" => FreeDomain::Binary01,
                    "full" => FreeDomain::Full,
                    other => return Err(syntax(line, format!("unknown domain `{other}`"))),
                };
                free_inputs.push(FreeInput::new(name, domain));
            }
            _ => {
                if width.is_none() {
                    return Err(syntax(line, "instruction before `width` header"));
                }
                instructions.push(parse_instruction(line, instructions.len() + 1, content)?);
                insn_lines.push(line);
            }
        }
    }

    let program = Program {
        width: width.ok_or(ParseError::MissingWidth)?,
        mem_size,
        free_inputs,
        instructions,
    };
    if let Some(violation) = program.validate().into_iter().next() {
        return Err(match violation.index {
            Some(i) => ParseError::Invalid {
                line: insn_lines[i],
                violation,
            },
            None => ParseError::InvalidHeader(violation),
        });
    }
    Ok(program)
}

/// Renders `program` in canonical form. `parse_program` inverts this for
/// every valid program.
pub fn serialize_program(program: &Program) -> String {
    let mut out = String::new();
    writeln!(out, "width {}", program.width).unwrap();
    writeln!(out, "mem {}", program.mem_size).unwrap();
    for free in &program.free_inputs {
        let domain = match free.domain {
            FreeDomain::Binary01 => "01",
            FreeDomain::Full => "full",
        };
        writeln!(out, "free {} {}", free.name, domain).unwrap();
    }
    for (i, insn) in program.instructions.iter().enumerate() {
        write!(out, "o{}: {}", i + 1, insn.mnemonic).unwrap();
        for (k, src) in insn.inputs.iter().enumerate() {
            out.push_str(if k == 0 { " " } else { ", " });
            write!(out, "{src}").unwrap();
        }
        if let Some(addr) = insn.mem_dest {
            write!(out, " -> m[{addr}]").unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::ViolationKind;

    #[test]
    fn minimal_program() {
        let p = parse_program("width 4\no1: mov #0x0").unwrap();
        assert_eq!(p.width, 4);
        assert_eq!(p.mem_size, 0);
        assert_eq!(
            p.instructions,
            vec![Instruction::new(
                Mnemonic::Mov,
                vec![OperandSource::Const(0)]
            )]
        );
    }

    #[test]
    fn wrong_arity_reports_line() {
        let err = parse_program("width 4\no1: add free0").unwrap_err();
        assert_eq!(err.line(), Some(2));
        assert!(matches!(
            err,
            ParseError::Invalid {
                violation: Violation {
                    kind: ViolationKind::Arity { .. },
                    ..
                },
                ..
            }
        ));
    }

    #[test]
    fn comments_and_constants() {
        let text = "# leading comment\nwidth 8 # trailing\n\nmem 1\nfree a full\n\
                    o1: xor freea, #0xff # flip\no2: store o1 -> m[0]\n";
        let p = parse_program(text).unwrap();
        assert_eq!(p.instructions[0].inputs[1], OperandSource::Const(0xff));
        assert_eq!(p.instructions[1].mem_dest, Some(0));
        assert_eq!(parse_program(&serialize_program(&p)).unwrap(), p);
    }

    #[test]
    fn canonical_text_is_stable() {
        let text = "width 4\nmem 2\nfree x1 01\nfree y full\n\
                    o1: mov freex1\no2: xor o1, #0x1\no3: store o1 -> m[0]\n\
                    o4: load m[0]\no5: ite o4, #0xf, freey\n";
        assert_eq!(serialize_program(&parse_program(text).unwrap()), text);
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let cases = [
            ("o1: mov #0x0", 1),
            ("width 4\no2: mov #0x0", 2),
            ("width 4\no1: mv #0x0", 2),
            ("width 4\no1: mov #0xzz", 2),
            ("width 4\no1: mov #0x0\nmem 2", 3),
            ("width 4\nfree a bits", 2),
            ("width 4\no1: mov q", 2),
            ("width 4\no1: store #0x1 -> m[x]", 2),
            ("width x", 1),
        ];
        for (text, line) in cases {
            assert_eq!(
                parse_program(text).unwrap_err().line(),
                Some(line),
                "{text}"
            );
        }
        assert_eq!(parse_program("# nothing"), Err(ParseError::MissingWidth));
    }

    #[test]
    fn header_violations() {
        assert!(matches!(
            parse_program("width 4\nfree a 01\nfree a full\no1: mov freea"),
            Err(ParseError::InvalidHeader(_))
        ));
        assert!(matches!(
            parse_program("width 99"),
            Err(ParseError::InvalidHeader(_))
        ));
    }

    #[test]
    fn forward_reference_is_rejected() {
        let err = parse_program("width 4\no1: mov #0x0\no2: mov o5").unwrap_err();
        assert_eq!(err.line(), Some(3));
    }
}
