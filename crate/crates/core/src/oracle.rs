//! Brute-force deciders that share no code with the engine: clauses are plain
//! DIMACS integer lists and evaluation is done here from scratch.

use thiserror::Error;

use crate::encoders::ParityConstraint;

pub const DEFAULT_DPLL_BUDGET: usize = 24;
pub const ENUMERATION_BUDGET: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{vars} variables exceed the oracle budget of {budget}")]
    BudgetExceeded { vars: usize, budget: usize },
    #[error("literal {0} outside the declared variables")]
    BadLiteral(i32),
}

/// A plain CNF: clauses of nonzero DIMACS literals over 1..=num_vars.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundTheory {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl GroundTheory {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Self {
        GroundTheory { num_vars, clauses }
    }

    fn check(&self) -> Result<(), OracleError> {
        for &x in self.clauses.iter().flatten() {
            if x == 0 || x.unsigned_abs() as usize > self.num_vars {
                return Err(OracleError::BadLiteral(x));
            }
        }
        Ok(())
    }

    /// True iff `model` (index v-1 holds variable v) satisfies every clause.
    pub fn satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&x| model[x.unsigned_abs() as usize - 1] == (x > 0)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat(Vec<bool>),
    Unsat,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }
}

pub fn dpll_solve(t: &GroundTheory) -> Result<Verdict, OracleError> {
    dpll_solve_with_budget(t, DEFAULT_DPLL_BUDGET)
}

pub fn dpll_solve_with_budget(t: &GroundTheory, budget: usize) -> Result<Verdict, OracleError> {
    if t.num_vars > budget {
        return Err(OracleError::BudgetExceeded { vars: t.num_vars, budget });
    }
    t.check()?;
    let mut vals: Vec<Option<bool>> = vec![None; t.num_vars];
    if dpll(&t.clauses, &mut vals) {
        let model: Vec<bool> = vals.iter().map(|v| v.unwrap_or(false)).collect();
        assert!(t.satisfied_by(&model), "oracle produced a non-model");
        Ok(Verdict::Sat(model))
    } else {
        Ok(Verdict::Unsat)
    }
}

fn lit_value(vals: &[Option<bool>], x: i32) -> Option<bool> {
    vals[x.unsigned_abs() as usize - 1].map(|b| b == (x > 0))
}

fn dpll(clauses: &[Vec<i32>], vals: &mut Vec<Option<bool>>) -> bool {
    let mut set: Vec<usize> = Vec::new();
    // unit propagation to a fixpoint
    loop {
        let mut changed = false;
        for c in clauses {
            let mut open = None;
            let mut open_count = 0;
            let mut sat = false;
            for &x in c {
                match lit_value(vals, x) {
                    Some(true) => {
                        sat = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        open_count += 1;
                        open = Some(x);
                    }
                }
            }
            if sat {
                continue;
            }
            match (open_count, open) {
                (0, _) => {
                    for v in set {
                        vals[v] = None;
                    }
                    return false;
                }
                (1, Some(x)) => {
                    let v = x.unsigned_abs() as usize - 1;
                    vals[v] = Some(x > 0);
                    set.push(v);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    let Some(x) = branch_literal(clauses, vals) else {
        return true;
    };
    let v = x.unsigned_abs() as usize - 1;
    for b in [x > 0, x < 0] {
        vals[v] = Some(b);
        if dpll(clauses, vals) {
            return true;
        }
    }
    vals[v] = None;
    for v in set {
        vals[v] = None;
    }
    false
}

/// An unvalued literal from a shortest clause not yet satisfied; `None` once
/// every clause is satisfied.
fn branch_literal(clauses: &[Vec<i32>], vals: &[Option<bool>]) -> Option<i32> {
    let mut best: Option<(usize, i32)> = None;
    for c in clauses {
        if c.iter().any(|&x| lit_value(vals, x) == Some(true)) {
            continue;
        }
        let open: Vec<i32> = c.iter().copied().filter(|&x| lit_value(vals, x).is_none()).collect();
        if best.is_none_or(|(len, _)| open.len() < len) {
            best = Some((open.len(), open[0]));
        }
    }
    best.map(|(_, x)| x)
}

/// Number of satisfying assignments, by trying all of them.
pub fn enumerate_models(t: &GroundTheory) -> Result<u64, OracleError> {
    if t.num_vars > ENUMERATION_BUDGET {
        return Err(OracleError::BudgetExceeded { vars: t.num_vars, budget: ENUMERATION_BUDGET });
    }
    t.check()?;
    let n = t.num_vars;
    let mut model = vec![false; n];
    let mut count = 0;
    for bits in 0u64..(1u64 << n) {
        for (i, m) in model.iter_mut().enumerate() {
            *m = bits >> i & 1 == 1;
        }
        if t.satisfied_by(&model) {
            count += 1;
        }
    }
    Ok(count)
}

/// Gaussian elimination over GF(2). Variables absent from every constraint
/// are set false in the returned model.
pub fn gf2_solve(constraints: &[ParityConstraint]) -> Verdict {
    let n = constraints.iter().flat_map(|c| c.vars.iter().copied()).max().unwrap_or(0);
    let words = n / 64 + 1;
    // each row: coefficient bits for variables 1..=n, then the rhs
    let mut rows: Vec<(Vec<u64>, bool)> = constraints
        .iter()
        .map(|c| {
            let mut bits = vec![0u64; words];
            for &v in &c.vars {
                bits[(v - 1) / 64] ^= 1 << ((v - 1) % 64);
            }
            (bits, c.rhs)
        })
        .collect();
    let bit = |r: &[u64], v: usize| r[v / 64] >> (v % 64) & 1 == 1;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut next = 0;
    for v in 0..n {
        let Some(p) = (next..rows.len()).find(|&i| bit(&rows[i].0, v)) else { continue };
        rows.swap(next, p);
        let (pivot_bits, pivot_rhs) = rows[next].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != next && bit(&row.0, v) {
                for (a, b) in row.0.iter_mut().zip(&pivot_bits) {
                    *a ^= b;
                }
                row.1 ^= pivot_rhs;
            }
        }
        pivots.push((next, v));
        next += 1;
    }
    if rows[next..].iter().any(|(_, rhs)| *rhs) {
        return Verdict::Unsat;
    }
    // reduced form: each pivot variable equals its row's rhs when free variables are 0
    let mut model = vec![false; n];
    for &(r, v) in &pivots {
        model[v] = rows[r].1;
    }
    assert!(constraints.iter().all(|c| c.holds(&model)), "elimination produced a non-solution");
    Verdict::Sat(model)
}

/// The clause expansion of a parity constraint: one clause per assignment
/// of the wrong parity, excluding it.
pub fn parity_clauses(c: &ParityConstraint) -> Vec<Vec<i32>> {
    let k = c.vars.len();
    (0u32..1 << k)
        .filter(|mask| (mask.count_ones() % 2 == 1) != c.rhs)
        .map(|mask| {
            c.vars.iter().enumerate().map(|(i, &v)| if mask >> i & 1 == 1 { -(v as i32) } else { v as i32 }).collect()
        })
        .collect()
}
