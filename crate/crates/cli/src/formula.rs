//! Text syntax for a universally quantified clause, e.g.
//! `a(x, y) | -b(y, 0) | c(x)`. Lowercase identifiers in argument position
//! are variables, numbers are domain constants counted from 0. Every
//! variable and every argument position ranges over one domain of size d.

use thiserror::Error;
use zap_core::encoders::{QuantifiedClause, QuantifiedLiteral, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("column {col}: {msg}")]
pub struct FormulaError {
    pub col: usize,
    pub msg: String,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError { col: self.pos + 1, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), FormulaError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }
}

pub fn parse_formula(text: &str, domain: usize) -> Result<QuantifiedClause, FormulaError> {
    let mut cur = Cursor { text, pos: 0 };
    let mut q = QuantifiedClause { variables: Vec::new(), relations: Vec::new(), literals: Vec::new() };
    loop {
        let positive = !(cur.eat('-') || cur.eat('~') || cur.eat('!'));
        let rel_col = cur.pos;
        let relation = cur.word();
        if !relation.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return cur.err("expected a relation name");
        }
        cur.expect('(')?;
        let mut args = Vec::new();
        if !cur.eat(')') {
            loop {
                let w = cur.word();
                let term = if let Ok(c) = w.parse::<usize>() {
                    Term::Const(c)
                } else if w.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    if !q.variables.iter().any(|(v, _)| v == w) {
                        q.variables.push((w.to_string(), domain));
                    }
                    Term::Var(w.to_string())
                } else {
                    return cur.err("expected a variable or a constant");
                };
                args.push(term);
                if cur.eat(')') {
                    break;
                }
                cur.expect(',')?;
            }
        }
        match q.relations.iter().find(|(r, _)| r == relation) {
            Some((_, doms)) if doms.len() != args.len() => {
                return Err(FormulaError {
                    col: rel_col + 1,
                    msg: format!("{relation} used with {} and {} arguments", doms.len(), args.len()),
                })
            }
            Some(_) => {}
            None => q.relations.push((relation.to_string(), vec![domain; args.len()])),
        }
        q.literals.push(QuantifiedLiteral { relation: relation.to_string(), positive, args });
        cur.skip_ws();
        if cur.peek().is_none() {
            return Ok(q);
        }
        cur.expect('|')?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_binary_relations() {
        let q = parse_formula("a(x,y) | b(y, z) | -c(x,z)", 2).unwrap();
        let names: Vec<&str> = q.variables.iter().map(|(v, _)| v.as_str()).collect();
        assert_eq!(names, ["x", "y", "z"]);
        assert_eq!(q.relations.len(), 3);
        assert!(!q.literals[2].positive);
        assert_eq!(q.literals[1].args, vec![Term::Var("y".into()), Term::Var("z".into())]);
    }

    #[test]
    fn constants_and_nullary_relations() {
        let q = parse_formula("p() | ~q(1, x)", 3).unwrap();
        assert_eq!(q.relations, vec![("p".into(), vec![]), ("q".into(), vec![3, 3])]);
        assert_eq!(q.literals[1].args[0], Term::Const(1));
    }

    #[test]
    fn malformed_text() {
        assert_eq!(parse_formula("a(x", 2).unwrap_err().col, 4);
        assert_eq!(parse_formula("a(x) b(x)", 2).unwrap_err().msg, "expected '|'");
        assert_eq!(parse_formula("a(x) | a(x, y)", 2).unwrap_err().col, 8);
        assert!(parse_formula("(x)", 2).is_err());
    }
}
