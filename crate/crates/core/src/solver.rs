//! Unit propagation and relevance-bounded learning over ground and
//! augmented clause databases.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::augmented::{AugmentedClause, Instance, Visit};
use crate::clause::{resolve_ground, Assignment, Clause, Lit, Reason, Value};
use crate::group::DEFAULT_ENUM_THRESHOLD;
use crate::resolution::{resolve_augmented_with, ResolutionError};

pub const DEFAULT_RELEVANCE: usize = 3;

/// Unsatisfied instances inspected per clause when collecting branch candidates.
const BRANCH_SAMPLE: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Heuristic {
    /// A positive unvalued literal from some unsatisfied instance.
    #[default]
    PosUnsat,
    /// The lowest unvalued variable, set true.
    FirstUnassigned,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub relevance: usize,
    pub heuristic: Heuristic,
    pub seed: u64,
    pub enum_threshold: u64,
    pub max_branches: Option<u64>,
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            relevance: DEFAULT_RELEVANCE,
            heuristic: Heuristic::PosUnsat,
            seed: 0,
            enum_threshold: DEFAULT_ENUM_THRESHOLD,
            max_branches: None,
            trace: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub branches: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub learned: u64,
    pub purged: u64,
    /// Times pos-unsat found no candidate and fell back to first-unassigned.
    pub fallbacks: u64,
    pub max_learned: usize,
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "branches={}", self.branches)?;
        writeln!(f, "propagations={}", self.propagations)?;
        writeln!(f, "conflicts={}", self.conflicts)?;
        writeln!(f, "learned={}", self.learned)?;
        writeln!(f, "purged={}", self.purged)?;
        writeln!(f, "fallbacks={}", self.fallbacks)?;
        write!(f, "max_learned={}", self.max_learned)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Branch(Lit),
    /// `reason` is the instance that became unit.
    Propagate {
        lit: Lit,
        reason: Clause,
    },
    Conflict(Clause),
    Learn(Clause),
    /// Trail cut back to this length.
    Backtrack(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Index v-1 holds variable v.
    Sat(Vec<bool>),
    Unsat,
}

impl Outcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, Outcome::Sat(_))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("branch budget of {0} exhausted")]
    BranchBudget(u64),
    #[error("clause mentions variable {var} beyond {n}")]
    OutOfRange { var: usize, n: usize },
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
}

/// Result of one propagation pass.
#[derive(Clone, Debug)]
pub enum Propagation<C> {
    /// A nogood: entailed by the clauses and falsified by the assignment.
    Conflict(C),
    Extended,
}

/// Ground unit propagation: falsified clauses are looked for before unit
/// ones, and a conflict is answered by resolving the falsified clause
/// against the reason of its most recently valued literal.
pub fn unit_propagate_ground(clauses: &[Clause], p: &mut Assignment) -> Propagation<Clause> {
    loop {
        if let Some(c) = clauses.iter().find(|c| c.iter().all(|l| p.value(l) == Value::False)) {
            let last = c.iter().max_by_key(|&l| p.index_of(l)).expect("the empty clause is never unit");
            return Propagation::Conflict(match p.reason_of(last) {
                Some(Reason::Ground(r)) => resolve_ground(c, r).expect("a reason clashes only on its literal"),
                Some(Reason::Augmented(r)) => {
                    resolve_ground(c, r.base()).expect("a reason clashes only on its literal")
                }
                _ => c.clone(),
            });
        }
        let unit = clauses.iter().find_map(|c| {
            let mut open = c.iter().filter(|&l| p.value(l) != Value::False);
            match (open.next(), open.next()) {
                (Some(l), None) if p.value(l) == Value::Unvalued => Some((l, c)),
                _ => None,
            }
        });
        match unit {
            Some((l, c)) => p.push(l, Reason::Ground(c.clone())),
            None => return Propagation::Extended,
        }
    }
}

/// Some instance with no satisfied literal and at most one unvalued one.
pub fn find_unit_instance(ac: &AugmentedClause, p: &Assignment) -> Option<Instance> {
    ac.find_sparse_instance(1, &|l| p.value(l) == Value::Unvalued, &|l| p.value(l) == Value::True)
}

/// Some instance every literal of which is false.
pub fn find_falsified_instance(ac: &AugmentedClause, p: &Assignment) -> Option<Instance> {
    ac.find_sparse_instance(0, &|l| p.value(l) != Value::False, &|_| false)
}

/// Some instance with no satisfied literal.
pub fn find_unsatisfied_instance(ac: &AugmentedClause, p: &Assignment) -> Option<Instance> {
    if ac.base().is_empty() {
        return Some(Instance { clause: Clause::empty(), perm: crate::perm::Perm::identity(ac.n()) });
    }
    let k = ac.base().len();
    ac.search(&mut |partial| {
        if p.value(*partial.last().expect("nonempty")) == Value::True {
            Visit::Prune
        } else if partial.len() == k {
            Visit::Stop
        } else {
            Visit::Continue
        }
    })
}

/// True iff some instance has at most k+1 literals that are not false.
pub fn has_relevant_instance(ac: &AugmentedClause, p: &Assignment, k: usize) -> bool {
    ac.base().len() <= k + 1 || ac.find_sparse_instance(k + 1, &|l| p.value(l) != Value::False, &|_| false).is_some()
}

/// Relevance-bounded learning over augmented clauses.
pub struct Solver {
    n: usize,
    original: Vec<AugmentedClause>,
    learned: Vec<AugmentedClause>,
    trail: Assignment,
    config: SolverConfig,
    stats: Stats,
    events: Vec<TraceEvent>,
    rng: ChaCha8Rng,
    // unit search resumes at the clause that last produced a unit
    cursor: usize,
}

impl Solver {
    pub fn new(n: usize, clauses: Vec<AugmentedClause>, config: SolverConfig) -> Result<Self, SolverError> {
        for c in &clauses {
            if c.n() != n {
                return Err(SolverError::OutOfRange { var: c.n().max(c.base().max_var()), n });
            }
        }
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Solver {
            n,
            original: clauses,
            learned: Vec::new(),
            trail: Assignment::new(n),
            config,
            stats: Stats::default(),
            events: Vec::new(),
            rng,
            cursor: 0,
        })
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn learned(&self) -> &[AugmentedClause] {
        &self.learned
    }

    pub fn assignment(&self) -> &Assignment {
        &self.trail
    }

    fn record(&mut self, e: TraceEvent) {
        if self.config.trace {
            self.events.push(e);
        }
    }

    fn clause_at(&self, i: usize) -> &AugmentedClause {
        if i < self.original.len() {
            &self.original[i]
        } else {
            &self.learned[i - self.original.len()]
        }
    }

    fn database_len(&self) -> usize {
        self.original.len() + self.learned.len()
    }

    /// Value `lit` as a branch decision.
    pub fn decide(&mut self, lit: Lit) {
        self.stats.branches += 1;
        self.record(TraceEvent::Branch(lit));
        self.trail.push(lit, Reason::Branch);
        self.cursor = 0;
    }

    /// Propagate to a fixpoint or return the learned resolvent of a conflict.
    pub fn propagate(&mut self) -> Result<Propagation<AugmentedClause>, SolverError> {
        loop {
            let total = self.database_len();
            let falsified = (0..total).find_map(|i| {
                let ac = self.clause_at(i);
                find_falsified_instance(ac, &self.trail).map(|inst| (ac.clone(), inst))
            });
            if let Some((ac, inst)) = falsified {
                self.stats.conflicts += 1;
                self.record(TraceEvent::Conflict(inst.clause.clone()));
                return Ok(Propagation::Conflict(self.analyze(&ac, inst)?));
            }
            let start = self.cursor.min(total.saturating_sub(1));
            let unit = (0..total).map(|o| (start + o) % total).find_map(|i| {
                let ac = self.clause_at(i);
                find_unit_instance(ac, &self.trail).map(|inst| (i, ac.rebase_unchecked(inst.clause)))
            });
            let Some((i, reason)) = unit else { return Ok(Propagation::Extended) };
            self.cursor = i;
            let lit = reason.base().iter().find(|&l| self.trail.value(l) == Value::Unvalued).expect("unit instance");
            self.stats.propagations += 1;
            self.record(TraceEvent::Propagate { lit, reason: reason.base().clone() });
            self.trail.push(lit, Reason::Augmented(reason));
        }
    }

    /// Resolve the falsified instance with the reason of its latest literal.
    fn analyze(&self, ac: &AugmentedClause, inst: Instance) -> Result<AugmentedClause, SolverError> {
        let conflict = ac.rebase_unchecked(inst.clause);
        let Some(last) = conflict.base().iter().max_by_key(|&l| self.trail.index_of(l)) else {
            return Ok(conflict);
        };
        match self.trail.reason_of(last) {
            Some(Reason::Augmented(r)) => Ok(resolve_augmented_with(&conflict, r, None, self.config.enum_threshold)?),
            Some(Reason::Ground(g)) => {
                let r = AugmentedClause::ground(g.clone(), self.n);
                Ok(resolve_augmented_with(&conflict, &r, None, self.config.enum_threshold)?)
            }
            Some(Reason::Branch) | None => Ok(conflict),
        }
    }

    /// Learn `c`, cut the trail back so that it is unit, and drop learned
    /// clauses left without a relevant instance. False when `c` is empty.
    pub fn learn(&mut self, c: AugmentedClause) -> bool {
        self.record(TraceEvent::Learn(c.base().clone()));
        if c.base().is_empty() {
            return false;
        }
        let cut = c.base().iter().filter_map(|l| self.trail.index_of(l)).max().expect("learned clause is falsified");
        self.trail.truncate(cut);
        self.record(TraceEvent::Backtrack(cut));
        let k = self.config.relevance;
        let before = self.learned.len();
        let trail = &self.trail;
        self.learned.retain(|d| has_relevant_instance(d, trail, k));
        self.stats.purged += (before - self.learned.len()) as u64;
        self.learned.push(c);
        self.stats.learned += 1;
        self.stats.max_learned = self.stats.max_learned.max(self.learned.len());
        self.cursor = 0;
        true
    }

    fn is_solution(&self) -> bool {
        self.original.iter().all(|ac| find_unsatisfied_instance(ac, &self.trail).is_none())
    }

    fn first_unassigned(&self) -> Option<Lit> {
        (1..=self.n).map(Lit::pos).find(|&l| self.trail.value(l) == Value::Unvalued)
    }

    fn choose_branch(&mut self) -> Option<Lit> {
        if self.config.heuristic == Heuristic::PosUnsat {
            let mut candidates: Vec<Lit> = Vec::new();
            for ac in &self.original {
                let k = ac.base().len();
                let trail = &self.trail;
                let mut seen = 0;
                ac.search(&mut |partial| {
                    if trail.value(*partial.last().expect("nonempty")) == Value::True {
                        return Visit::Prune;
                    }
                    if partial.len() < k {
                        return Visit::Continue;
                    }
                    seen += 1;
                    candidates
                        .extend(partial.iter().filter(|l| l.is_positive() && trail.value(**l) == Value::Unvalued));
                    if seen >= BRANCH_SAMPLE {
                        Visit::Stop
                    } else {
                        Visit::Continue
                    }
                });
            }
            candidates.sort();
            candidates.dedup();
            if !candidates.is_empty() {
                return Some(candidates[self.rng.gen_range(0..candidates.len())]);
            }
            self.stats.fallbacks += 1;
        }
        self.first_unassigned()
    }

    pub fn solve(&mut self) -> Result<Outcome, SolverError> {
        loop {
            match self.propagate()? {
                Propagation::Conflict(c) => {
                    if !self.learn(c) {
                        return Ok(Outcome::Unsat);
                    }
                }
                Propagation::Extended => {
                    if self.is_solution() {
                        let model = self.trail.model()[1..].to_vec();
                        return Ok(Outcome::Sat(model));
                    }
                    let lit = self.choose_branch().expect("an unsatisfied instance leaves a variable unvalued");
                    if let Some(max) = self.config.max_branches {
                        if self.stats.branches >= max {
                            return Err(SolverError::BranchBudget(max));
                        }
                    }
                    self.decide(lit);
                }
            }
        }
    }
}

/// Solve and return the outcome with the run's statistics.
pub fn rbl_solve(n: usize, clauses: &[AugmentedClause], config: SolverConfig) -> Result<(Outcome, Stats), SolverError> {
    let mut s = Solver::new(n, clauses.to_vec(), config)?;
    let out = s.solve()?;
    Ok((out, s.stats))
}

#[cfg(test)]
mod tests;
