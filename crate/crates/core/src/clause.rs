//! Literals, clauses, annotated partial assignments and ground resolution.

use std::fmt;

use thiserror::Error;

use crate::augmented::AugmentedClause;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClauseError {
    #[error("literal 0 is not a literal")]
    ZeroLiteral,
    #[error("clause contains both {0} and its negation")]
    Tautology(i32),
    #[error("clauses do not resolve: {0} clashing pairs")]
    NotResolvable(usize),
    #[error("literal {0} out of range for {1} variables")]
    OutOfRange(i32, usize),
}

/// A DIMACS-style signed variable index.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lit(i32);

impl Lit {
    pub fn new(x: i32) -> Result<Self, ClauseError> {
        if x == 0 {
            Err(ClauseError::ZeroLiteral)
        } else {
            Ok(Lit(x))
        }
    }

    /// Panics on zero; for literals known to be valid.
    pub fn from_dimacs(x: i32) -> Self {
        Lit::new(x).expect("zero literal")
    }

    pub fn pos(var: usize) -> Self {
        Lit(var as i32)
    }

    pub fn dimacs(self) -> i32 {
        self.0
    }

    /// 1-based variable index.
    pub fn var(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn negate(self) -> Self {
        Lit(-self.0)
    }

    /// Index among the 2n literal points: positives first, then negatives.
    pub fn point(self, n: usize) -> usize {
        let v = self.var() - 1;
        if self.is_positive() {
            v
        } else {
            n + v
        }
    }

    pub fn from_point(p: usize, n: usize) -> Self {
        if p < n {
            Lit((p + 1) as i32)
        } else {
            Lit(-((p - n + 1) as i32))
        }
    }
}

impl std::ops::Neg for Lit {
    type Output = Lit;
    fn neg(self) -> Lit {
        self.negate()
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

// Sort by variable, positive before negative.
impl Ord for Lit {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.var(), self.0 < 0).cmp(&(other.var(), other.0 < 0))
    }
}

impl PartialOrd for Lit {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A duplicate-free, non-tautological set of literals, kept sorted.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Clause(Vec<Lit>);

impl Clause {
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Result<Self, ClauseError> {
        let mut v: Vec<Lit> = lits.into_iter().collect();
        v.sort();
        v.dedup();
        for w in v.windows(2) {
            if w[0].var() == w[1].var() {
                return Err(ClauseError::Tautology(w[0].var() as i32));
            }
        }
        Ok(Clause(v))
    }

    pub fn from_dimacs(xs: &[i32]) -> Result<Self, ClauseError> {
        let lits = xs.iter().map(|&x| Lit::new(x)).collect::<Result<Vec<_>, _>>()?;
        Clause::new(lits)
    }

    pub fn empty() -> Self {
        Clause(Vec::new())
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, l: Lit) -> bool {
        self.0.binary_search(&l).is_ok()
    }

    pub fn max_var(&self) -> usize {
        self.0.iter().map(|l| l.var()).max().unwrap_or(0)
    }

    pub fn to_dimacs(&self) -> Vec<i32> {
        self.0.iter().map(|l| l.dimacs()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = Lit> + '_ {
        self.0.iter().copied()
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "⊥");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" ∨ "))
    }
}

/// Resolve two ground clauses on their unique clashing pair.
pub fn resolve_ground(c1: &Clause, c2: &Clause) -> Result<Clause, ClauseError> {
    let clashes: Vec<Lit> = c1.iter().filter(|&l| c2.contains(-l)).collect();
    if clashes.len() != 1 {
        return Err(ClauseError::NotResolvable(clashes.len()));
    }
    let l = clashes[0];
    Clause::new(c1.iter().filter(|&x| x != l).chain(c2.iter().filter(|&x| x != -l)))
}

/// Why a literal is on the assignment trail.
#[derive(Clone, Debug)]
pub enum Reason {
    Branch,
    Ground(Clause),
    Augmented(AugmentedClause),
}

impl Reason {
    pub fn base(&self) -> Option<&Clause> {
        match self {
            Reason::Branch => None,
            Reason::Ground(c) => Some(c),
            Reason::Augmented(ac) => Some(ac.base()),
        }
    }
}

/// Resolve two reasons; a branch marker acts as `true` and yields the other side.
pub fn resolve_reasons(r1: &Reason, r2: &Reason) -> Result<Reason, crate::resolution::ResolutionError> {
    match (r1, r2) {
        (Reason::Branch, r) | (r, Reason::Branch) => Ok(r.clone()),
        (Reason::Ground(a), Reason::Ground(b)) => Ok(Reason::Ground(resolve_ground(a, b)?)),
        (Reason::Augmented(a), Reason::Augmented(b)) => {
            Ok(Reason::Augmented(crate::resolution::resolve_augmented(a, b, None)?))
        }
        (Reason::Augmented(a), Reason::Ground(g)) => {
            let b = AugmentedClause::ground(g.clone(), a.n());
            Ok(Reason::Augmented(crate::resolution::resolve_augmented(a, &b, None)?))
        }
        (Reason::Ground(g), Reason::Augmented(b)) => {
            let a = AugmentedClause::ground(g.clone(), b.n());
            Ok(Reason::Augmented(crate::resolution::resolve_augmented(&a, b, None)?))
        }
    }
}

/// Truth value of a literal under an assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Value {
    True,
    False,
    Unvalued,
}

/// Ordered sequence of (literal, reason) pairs with O(1) value lookup.
#[derive(Clone, Debug)]
pub struct Assignment {
    entries: Vec<(Lit, Reason)>,
    // per variable: 0 unvalued, 1 true, -1 false
    vals: Vec<i8>,
    // per variable: position in `entries`
    pos: Vec<usize>,
}

impl Assignment {
    pub fn new(n: usize) -> Self {
        Assignment { entries: Vec::new(), vals: vec![0; n + 1], pos: vec![usize::MAX; n + 1] }
    }

    pub fn num_vars(&self) -> usize {
        self.vals.len() - 1
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_total(&self) -> bool {
        self.entries.len() == self.num_vars()
    }

    pub fn entries(&self) -> &[(Lit, Reason)] {
        &self.entries
    }

    pub fn value(&self, l: Lit) -> Value {
        match self.vals.get(l.var()).copied().unwrap_or(0) {
            0 => Value::Unvalued,
            v if (v > 0) == l.is_positive() => Value::True,
            _ => Value::False,
        }
    }

    /// Position of the entry that valued `l`'s variable.
    pub fn index_of(&self, l: Lit) -> Option<usize> {
        let p = *self.pos.get(l.var())?;
        (p != usize::MAX).then_some(p)
    }

    /// Append a literal; panics if its variable is already valued.
    pub fn push(&mut self, l: Lit, reason: Reason) {
        assert_eq!(self.vals[l.var()], 0, "variable {} already valued", l.var());
        self.vals[l.var()] = if l.is_positive() { 1 } else { -1 };
        self.pos[l.var()] = self.entries.len();
        self.entries.push((l, reason));
    }

    pub fn pop(&mut self) -> Option<(Lit, Reason)> {
        let (l, r) = self.entries.pop()?;
        self.vals[l.var()] = 0;
        self.pos[l.var()] = usize::MAX;
        Some((l, r))
    }

    pub fn truncate(&mut self, len: usize) {
        while self.entries.len() > len {
            self.pop();
        }
    }

    pub fn reason_of(&self, l: Lit) -> Option<&Reason> {
        self.index_of(l).map(|i| &self.entries[i].1)
    }

    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.entries.iter().map(|(l, _)| *l)
    }

    /// Model as a vector indexed by variable (index 0 unused); unvalued reads false.
    pub fn model(&self) -> Vec<bool> {
        self.vals.iter().map(|&v| v > 0).collect()
    }
}

/// Number of literals of `c` not falsified by `p`, minus one.
pub fn poss(c: &Clause, p: &Assignment) -> i64 {
    c.iter().filter(|&l| p.value(l) != Value::False).count() as i64 - 1
}

/// Number of literals of `c` satisfied by `p`, minus one.
pub fn curr(c: &Clause, p: &Assignment) -> i64 {
    c.iter().filter(|&l| p.value(l) == Value::True).count() as i64 - 1
}

pub fn is_unit(c: &Clause, p: &Assignment) -> bool {
    poss(c, p) == 0 && curr(c, p) == -1
}
