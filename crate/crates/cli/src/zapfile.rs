//! The ZapFile text format: DIMACS-like clause lines, each followed by the
//! generators of its group.
//!
//! ```text
//! c x1 + ... + x5 >= 3
//! p zap 5
//! a 1 2 3 0
//! g (1 2)
//! g (2 3 4 5)
//! ```

use std::fmt::Write as _;

use thiserror::Error;
use zap_core::encoders::Theory;
use zap_core::{AugmentedClause, Clause, ClauseError, Perm, PermError, PermGroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZapError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: invalid generator: {source}")]
    Generator { line: usize, source: PermError },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZapClause {
    pub base: Clause,
    /// Never the identity.
    pub generators: Vec<Perm>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ZapFile {
    pub num_vars: usize,
    pub clauses: Vec<ZapClause>,
    /// Comment text without the leading `c`.
    pub comments: Vec<String>,
}

impl ZapFile {
    /// Builds every clause's group. Generators are already validated, so
    /// this cannot fail.
    pub fn to_theory(&self) -> Theory {
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                let g = PermGroup::new(self.num_vars, c.generators.clone());
                AugmentedClause::new(c.base.clone(), g).expect("literals checked against the header")
            })
            .collect();
        Theory { num_vars: self.num_vars, clauses }
    }

    pub fn from_theory(t: &Theory) -> Self {
        let clauses = t
            .clauses
            .iter()
            .map(|c| ZapClause {
                base: c.base().clone(),
                generators: c.group().generators().iter().filter(|g| !g.is_identity()).cloned().collect(),
            })
            .collect();
        ZapFile { num_vars: t.num_vars, clauses, comments: Vec::new() }
    }
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ZapError {
    ZapError::Syntax { line, col, msg: msg.into() }
}

/// 1-based column of `part` inside `line`; `part` must be a subslice.
fn col_of(line: &str, part: &str) -> usize {
    part.as_ptr() as usize - line.as_ptr() as usize + 1
}

pub fn parse_zap(text: &str) -> Result<ZapFile, ZapError> {
    let mut file = ZapFile::default();
    let mut header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        let body = line.trim_start();
        if body.is_empty() {
            continue;
        }
        let tag = body.chars().next().expect("nonempty");
        let rest = &body[tag.len_utf8()..];
        match tag {
            'c' => {
                file.comments.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
            }
            'p' => {
                if header {
                    return Err(syntax(line_no, col_of(line, body), "second header"));
                }
                let mut fields = rest.split_whitespace();
                if fields.next() != Some("zap") {
                    return Err(syntax(line_no, col_of(line, body), "expected `p zap <vars>`"));
                }
                let Some(v) = fields.next() else {
                    return Err(syntax(line_no, line.len() + 1, "missing variable count"));
                };
                file.num_vars =
                    v.parse().map_err(|_| syntax(line_no, col_of(line, v), format!("bad variable count {v:?}")))?;
                if let Some(extra) = fields.next() {
                    return Err(syntax(line_no, col_of(line, extra), "unexpected text after header"));
                }
                header = true;
            }
            'a' | 'g' if !header => return Err(syntax(line_no, col_of(line, body), "clause before `p zap` header")),
            'a' => file
                .clauses
                .push(ZapClause { base: parse_base(line, rest, line_no, file.num_vars)?, generators: Vec::new() }),
            'g' => {
                let Some(last) = file.clauses.last_mut() else {
                    return Err(syntax(line_no, col_of(line, body), "generator before any `a` line"));
                };
                let offset = col_of(line, rest) - 1;
                let g = Perm::parse(rest, file.num_vars).map_err(|e| match e {
                    PermError::Parse { col, msg } => syntax(line_no, offset + col, msg),
                    e => ZapError::Generator { line: line_no, source: e },
                })?;
                if !g.is_identity() {
                    last.generators.push(g);
                }
            }
            _ => return Err(syntax(line_no, col_of(line, body), format!("unknown line type {tag:?}"))),
        }
    }
    if !header {
        return Err(syntax(1, 1, "missing `p zap` header"));
    }
    Ok(file)
}

fn parse_base(line: &str, rest: &str, line_no: usize, n: usize) -> Result<Clause, ZapError> {
    let mut lits = Vec::new();
    let mut closed = false;
    for tok in rest.split_whitespace() {
        let col = col_of(line, tok);
        if closed {
            return Err(syntax(line_no, col, "text after terminating 0"));
        }
        let x: i32 = tok.parse().map_err(|_| syntax(line_no, col, format!("bad literal {tok:?}")))?;
        if x == 0 {
            closed = true;
        } else if x.unsigned_abs() as usize > n {
            return Err(syntax(line_no, col, format!("literal {x} exceeds {n} variables")));
        } else {
            lits.push(x);
        }
    }
    if !closed {
        return Err(syntax(line_no, line.len() + 1, "clause not terminated by 0"));
    }
    Clause::from_dimacs(&lits).map_err(|e| match e {
        ClauseError::Tautology(v) => syntax(line_no, 1, format!("clause contains both {v} and -{v}")),
        e => syntax(line_no, 1, e.to_string()),
    })
}

/// Canonical text: sorted base literals, generators in canonical cycle form.
pub fn write_zap(file: &ZapFile) -> String {
    let mut out = String::new();
    for c in &file.comments {
        if c.is_empty() {
            out.push_str("c\n");
        } else {
            writeln!(out, "c {c}").unwrap();
        }
    }
    writeln!(out, "p zap {}", file.num_vars).unwrap();
    for c in &file.clauses {
        out.push('a');
        for x in c.base.to_dimacs() {
            write!(out, " {x}").unwrap();
        }
        out.push_str(" 0\n");
        for g in &c.generators {
            writeln!(out, "g {}", g.format_cycles()).unwrap();
        }
    }
    out
}
