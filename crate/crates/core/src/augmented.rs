//! Augmented clauses: a ground clause together with a group acting on it.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::clause::{Clause, Lit};
use crate::group::{lift_prefix, PermGroup, StabChain};
use crate::perm::Perm;

/// Default cap on explicit instance enumeration.
pub const DEFAULT_INSTANCE_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AugmentedError {
    #[error("more than {0} instances")]
    TooManyInstances(usize),
    #[error("{0} is not an instance")]
    NotAnInstance(Clause),
    #[error("clause mentions variable {var} but the group acts on {n} variables")]
    OutOfRange { var: usize, n: usize },
}

/// Outcome of a visit during instance search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Visit {
    /// Abandon this partial instance.
    Prune,
    /// Keep extending (or, at full length, keep searching).
    Continue,
    /// Accept; only meaningful at full length.
    Stop,
}

/// An instance found by search, with a group element producing it.
#[derive(Clone, Debug)]
pub struct Instance {
    pub clause: Clause,
    pub perm: Perm,
}

/// The pair (c, G); stands for every c^g with g in G.
#[derive(Clone)]
pub struct AugmentedClause {
    base: Clause,
    group: Arc<PermGroup>,
    adapted: Arc<OnceLock<Adapted>>,
}

/// The group's chain with the base literals as leading base points, plus
/// which base positions the group can permute freely among themselves.
struct Adapted {
    chain: StabChain,
    // position i may be swapped with any other position of the same class
    // by an element fixing every remaining base literal
    class: Vec<usize>,
    reach: Vec<Vec<(Vec<usize>, usize)>>,
}

impl Adapted {
    fn new(base: &Clause, group: &PermGroup) -> Self {
        let n = group.num_vars();
        let pts: Vec<usize> = base.iter().map(|l| l.point(n)).collect();
        let chain = group.chain_with_prefix(&pts);
        let k = pts.len();
        let mut class: Vec<usize> = (0..k).collect();
        for i in 0..k {
            for j in i + 1..k {
                if class[j] != j {
                    continue;
                }
                let mut images = pts.clone();
                images.swap(i, j);
                if lift_prefix(&chain, &images).is_some() {
                    class[j] = class[i];
                }
            }
        }
        // at each depth, the orbits of the stabilizer that hold the remaining
        // base literals, each with how many of them it holds
        let reach = (0..k)
            .map(|j| {
                let gens = &chain.levels[j].gens;
                let mut owner = vec![usize::MAX; 2 * n];
                let mut groups: Vec<(Vec<usize>, usize)> = Vec::new();
                for &b in &pts[j..] {
                    if owner[b] != usize::MAX {
                        groups[owner[b]].1 += 1;
                        continue;
                    }
                    let id = groups.len();
                    let mut orbit = Vec::new();
                    let mut stack = vec![b];
                    owner[b] = id;
                    while let Some(x) = stack.pop() {
                        orbit.push(x);
                        for g in gens {
                            let y = g.apply_point(x);
                            if owner[y] == usize::MAX {
                                owner[y] = id;
                                stack.push(y);
                            }
                        }
                    }
                    groups.push((orbit, 1));
                }
                groups
            })
            .collect();
        Adapted { chain, class, reach }
    }

    /// Images must increase within each class: every instance has such an
    /// ordering, since the class can be permuted freely.
    fn out_of_order(&self, images: &[Lit]) -> bool {
        let j = images.len() - 1;
        let c = self.class[j];
        c != j && (0..j).any(|i| self.class[i] == c && images[i] > images[j])
    }
}

impl fmt::Debug for AugmentedClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:?})", self.base, self.group)
    }
}

impl AugmentedClause {
    pub fn new(base: Clause, group: PermGroup) -> Result<Self, AugmentedError> {
        Self::with_shared(base, Arc::new(group))
    }

    pub fn with_shared(base: Clause, group: Arc<PermGroup>) -> Result<Self, AugmentedError> {
        let n = group.num_vars();
        if base.max_var() > n {
            return Err(AugmentedError::OutOfRange { var: base.max_var(), n });
        }
        Ok(AugmentedClause { base, group, adapted: Arc::new(OnceLock::new()) })
    }

    /// A ground clause: trivial group.
    pub fn ground(base: Clause, n: usize) -> Self {
        AugmentedClause::new(base, PermGroup::trivial(n)).expect("clause within range")
    }

    pub fn base(&self) -> &Clause {
        &self.base
    }

    pub fn group(&self) -> &PermGroup {
        &self.group
    }

    pub fn shared_group(&self) -> Arc<PermGroup> {
        self.group.clone()
    }

    pub fn n(&self) -> usize {
        self.group.num_vars()
    }

    pub fn is_ground(&self) -> bool {
        self.group.is_trivial()
    }

    fn adapted(&self) -> &Adapted {
        self.adapted.get_or_init(|| Adapted::new(&self.base, &self.group))
    }

    /// Every distinct c^g, failing once more than `cap` are found.
    pub fn instances(&self, cap: usize) -> Result<BTreeSet<Clause>, AugmentedError> {
        let mut seen: HashSet<Clause> = HashSet::new();
        seen.insert(self.base.clone());
        let mut queue = vec![self.base.clone()];
        let gens = self.group.generators();
        while let Some(c) = queue.pop() {
            for g in gens {
                let d = g.apply_clause(&c);
                if !seen.contains(&d) {
                    if seen.len() >= cap {
                        return Err(AugmentedError::TooManyInstances(cap));
                    }
                    seen.insert(d.clone());
                    queue.push(d);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    pub fn instance_count(&self, cap: usize) -> Result<usize, AugmentedError> {
        self.instances(cap).map(|s| s.len())
    }

    /// Depth-first search over images of the base literals, in base order.
    /// `visit` sees each partial image sequence and decides whether to go on;
    /// at full length `Visit::Stop` ends the search with that instance.
    /// Partials are non-empty unless the base itself is empty.
    pub fn search(&self, visit: &mut dyn FnMut(&[Lit]) -> Visit) -> Option<Instance> {
        let n = self.n();
        let k = self.base.len();
        if self.is_ground() || k == 0 {
            let lits: Vec<Lit> = self.base.lits().to_vec();
            for j in 1..k {
                if visit(&lits[..j]) == Visit::Prune {
                    return None;
                }
            }
            return (visit(&lits) == Visit::Stop)
                .then(|| Instance { clause: self.base.clone(), perm: Perm::identity(n) });
        }
        let adapted = self.adapted();
        let mut stack: Vec<&Perm> = Vec::with_capacity(k);
        let mut images: Vec<Lit> = Vec::with_capacity(k);
        if dfs(adapted, n, k, 0, &mut stack, &mut images, visit) {
            let mut h = Perm::identity(n);
            for u in stack.iter().rev() {
                h = h.then(u);
            }
            let clause = Clause::new(images.iter().copied()).expect("instance is a clause");
            debug_assert_eq!(h.apply_clause(&self.base), clause);
            return Some(Instance { clause, perm: h });
        }
        None
    }

    /// Some instance with no literal satisfying `reject` and at most `limit`
    /// literals satisfying `counted`. Subtrees are cut once the literals
    /// still reachable cannot fill the remaining positions within the limit.
    pub fn find_sparse_instance(
        &self,
        limit: usize,
        counted: &dyn Fn(Lit) -> bool,
        reject: &dyn Fn(Lit) -> bool,
    ) -> Option<Instance> {
        let n = self.n();
        let k = self.base.len();
        if self.is_ground() || k == 0 {
            let ok = !self.base.iter().any(reject) && self.base.iter().filter(|&l| counted(l)).count() <= limit;
            return ok.then(|| Instance { clause: self.base.clone(), perm: Perm::identity(n) });
        }
        let adapted = self.adapted();
        let mut search =
            Sparse { adapted, n, k, limit, counted, reject, elements: vec![Perm::identity(n)], images: Vec::new() };
        if search.dfs(0, 0) {
            let h = search.elements.pop().expect("found");
            let clause = Clause::new(search.images.iter().copied()).expect("instance is a clause");
            debug_assert_eq!(h.apply_clause(&self.base), clause);
            return Some(Instance { clause, perm: h });
        }
        None
    }

    /// Some g in G with base^g = c.
    pub fn instance_element(&self, c: &Clause) -> Option<Perm> {
        if c.len() != self.base.len() {
            return None;
        }
        if c.is_empty() {
            return Some(Perm::identity(self.n()));
        }
        self.search(&mut |partial| {
            let last = *partial.last().unwrap();
            if !c.contains(last) {
                Visit::Prune
            } else if partial.len() == c.len() {
                Visit::Stop
            } else {
                Visit::Continue
            }
        })
        .map(|i| i.perm)
    }

    pub fn is_instance(&self, c: &Clause) -> bool {
        self.instance_element(c).is_some()
    }

    /// Same instance sets, compared after enumeration.
    pub fn equivalent(&self, other: &AugmentedClause, cap: usize) -> Result<bool, AugmentedError> {
        if self.base.len() != other.base.len() {
            return Ok(false);
        }
        Ok(self.instances(cap)? == other.instances(cap)?)
    }

    /// (c_new, G) for an instance c_new of (c, G).
    pub fn rebase(&self, c_new: &Clause) -> Result<AugmentedClause, AugmentedError> {
        if !self.is_instance(c_new) {
            return Err(AugmentedError::NotAnInstance(c_new.clone()));
        }
        Ok(self.rebase_unchecked(c_new.clone()))
    }

    pub(crate) fn rebase_unchecked(&self, c_new: Clause) -> AugmentedClause {
        if c_new == self.base {
            return self.clone();
        }
        AugmentedClause { base: c_new, group: self.group.clone(), adapted: Arc::new(OnceLock::new()) }
    }
}

struct Sparse<'a, 'f> {
    adapted: &'a Adapted,
    n: usize,
    k: usize,
    limit: usize,
    counted: &'f dyn Fn(Lit) -> bool,
    reject: &'f dyn Fn(Lit) -> bool,
    // elements[j] sends the first j base literals to images[..j]
    elements: Vec<Perm>,
    images: Vec<Lit>,
}

impl Sparse<'_, '_> {
    fn free(&self, l: Lit) -> bool {
        !(self.counted)(l) && !(self.reject)(l)
    }

    /// Lower bound on counted literals among positions j.. : each orbit must
    /// take its positions' images from its own image under the partial element.
    fn forced(&self, j: usize, budget: usize) -> usize {
        let h = &self.elements[j];
        let mut forced = 0;
        for (orbit, positions) in &self.adapted.reach[j] {
            let mut free = 0;
            for &x in orbit {
                if self.free(Lit::from_point(h.apply_point(x), self.n)) {
                    free += 1;
                    if free >= *positions {
                        break;
                    }
                }
            }
            forced += positions - free.min(*positions);
            if forced > budget {
                break;
            }
        }
        forced
    }

    fn dfs(&mut self, j: usize, count: usize) -> bool {
        if count + (self.k - j) > self.limit && count + self.forced(j, self.limit - count) > self.limit {
            return false;
        }
        let lv = &self.adapted.chain.levels[j];
        for &d in &lv.orbit {
            let l = Lit::from_point(self.elements[j].apply_point(d), self.n);
            if (self.reject)(l) {
                continue;
            }
            let c = count + usize::from((self.counted)(l));
            if c > self.limit {
                continue;
            }
            self.images.push(l);
            if !self.adapted.out_of_order(&self.images) {
                let next = lv.rep(d).then(&self.elements[j]);
                self.elements.push(next);
                if j + 1 == self.k || self.dfs(j + 1, c) {
                    return true;
                }
                self.elements.pop();
            }
            self.images.pop();
        }
        false
    }
}

fn dfs<'a>(
    adapted: &'a Adapted,
    n: usize,
    k: usize,
    j: usize,
    stack: &mut Vec<&'a Perm>,
    images: &mut Vec<Lit>,
    visit: &mut dyn FnMut(&[Lit]) -> Visit,
) -> bool {
    let lv = &adapted.chain.levels[j];
    for &d in &lv.orbit {
        // image of the j-th base literal: apply u_{j-1} first, u_0 last
        let mut x = d;
        for u in stack.iter().rev() {
            x = u.apply_point(x);
        }
        images.push(Lit::from_point(x, n));
        if adapted.out_of_order(images) {
            images.pop();
            continue;
        }
        match visit(images) {
            Visit::Prune => {}
            Visit::Stop if j + 1 == k => {
                stack.push(lv.rep(d));
                return true;
            }
            _ if j + 1 == k => {}
            _ => {
                stack.push(lv.rep(d));
                if dfs(adapted, n, k, j + 1, stack, images, visit) {
                    return true;
                }
                stack.pop();
            }
        }
        images.pop();
    }
    false
}
