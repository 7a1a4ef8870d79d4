//! DIMACS CNF reading and writing.

use std::fmt::Write as _;

use thiserror::Error;

use crate::clause::{Clause, ClauseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCount { declared: usize, found: usize },
}

/// A CNF formula as read from DIMACS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
}

fn syntax(line: usize, msg: impl Into<String>) -> DimacsError {
    DimacsError::Syntax { line, msg: msg.into() }
}

/// Parses `p cnf V C` followed by zero-terminated clauses, which may span
/// lines. `c` lines and a trailing `%` (as in SATLIB files) are ignored.
pub fn parse_dimacs(text: &str) -> Result<Cnf, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if header.is_some() {
                return Err(syntax(line_no, "second header"));
            }
            let fields: Vec<&str> = rest.split_whitespace().collect();
            match fields.as_slice() {
                ["cnf", v, c] => {
                    let v = v.parse().map_err(|_| syntax(line_no, format!("bad variable count {v:?}")))?;
                    let c = c.parse().map_err(|_| syntax(line_no, format!("bad clause count {c:?}")))?;
                    header = Some((v, c));
                }
                _ => return Err(syntax(line_no, "expected `p cnf <vars> <clauses>`")),
            }
            continue;
        }
        let Some((nv, _)) = header else { return Err(DimacsError::MissingHeader) };
        for tok in line.split_whitespace() {
            let x: i32 = tok.parse().map_err(|_| syntax(line_no, format!("bad literal {tok:?}")))?;
            if x == 0 {
                let c = Clause::from_dimacs(&current).map_err(|e| match e {
                    ClauseError::Tautology(v) => syntax(line_no, format!("clause contains both {v} and -{v}")),
                    e => syntax(line_no, e.to_string()),
                })?;
                clauses.push(c);
                current.clear();
            } else if x.unsigned_abs() as usize > nv {
                return Err(syntax(line_no, format!("literal {x} exceeds {nv} variables")));
            } else {
                current.push(x);
            }
        }
    }
    let (num_vars, declared) = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        clauses.push(Clause::from_dimacs(&current).map_err(|e| syntax(text.lines().count(), e.to_string()))?);
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCount { declared, found: clauses.len() });
    }
    Ok(Cnf { num_vars, clauses })
}

pub fn write_dimacs(cnf: &Cnf) -> String {
    let mut out = format!("p cnf {} {}\n", cnf.num_vars, cnf.clauses.len());
    for c in &cnf.clauses {
        for x in c.to_dimacs() {
            write!(out, "{x} ").unwrap();
        }
        out.push_str("0\n");
    }
    out
}
