//! Permutation groups over literal points with the queries resolution and
//! propagation need.

mod chain;
mod search;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub(crate) use chain::StabChain;
pub(crate) use search::lift_prefix;

use crate::clause::{Clause, Lit};
use crate::perm::Perm;

/// Exact fallbacks enumerate the smaller group when its order is at most this.
pub const DEFAULT_ENUM_THRESHOLD: u64 = 1_000_000;

const BUILD_SEED: u64 = 0x5a9_c0de;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("no group element restricts to the requested map")]
    NoLift,
    #[error("restriction map is not defined on every point of the set")]
    BadRestriction,
    #[error("subgroup has {found} instances, expected {expected}")]
    InstanceCountMismatch { expected: usize, found: usize },
    #[error("group of order {0} is too large to enumerate")]
    TooLarge(BigUint),
}

fn build_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(BUILD_SEED)
}

/// A subgroup of W_n given by generators plus a stabilizer chain.
#[derive(Clone)]
pub struct PermGroup {
    n: usize,
    gens: Vec<Perm>,
    chain: StabChain,
}

impl fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (i, g) in self.gens.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "⟩ order {}", self.order())
    }
}

impl PermGroup {
    pub fn trivial(n: usize) -> Self {
        PermGroup { n, gens: Vec::new(), chain: StabChain::trivial(n) }
    }

    pub fn new(n: usize, gens: Vec<Perm>) -> Self {
        let gens: Vec<Perm> = gens.into_iter().filter(|g| !g.is_identity()).collect();
        for g in &gens {
            assert_eq!(g.num_vars(), n, "generator over a different literal space");
        }
        let chain = StabChain::build(n, &gens, &[], None, None, &mut build_rng());
        PermGroup { n, gens, chain }
    }

    /// Build when the order is known in advance; skips the verification pass.
    pub fn with_order(n: usize, gens: Vec<Perm>, order: &BigUint) -> Self {
        let gens: Vec<Perm> = gens.into_iter().filter(|g| !g.is_identity()).collect();
        let chain = StabChain::build(n, &gens, &[], Some(order), None, &mut build_rng());
        PermGroup { n, gens, chain }
    }

    /// Parse one generator per string in cycle notation.
    pub fn from_cycle_strs(n: usize, gens: &[&str]) -> Result<Self, crate::perm::PermError> {
        let gens = gens.iter().map(|s| Perm::parse(s, n)).collect::<Result<Vec<_>, _>>()?;
        Ok(PermGroup::new(n, gens))
    }

    /// Sign-respecting symmetric group on the given variables (no flips).
    pub fn symmetric_on_vars(n: usize, vars: &[usize]) -> Self {
        let k = vars.len();
        let mut gens = Vec::new();
        if k >= 2 {
            gens.push(Perm::from_cycles(n, &[vec![vars[0] as i32, vars[1] as i32]]).unwrap());
        }
        if k >= 3 {
            let cyc: Vec<i32> = vars.iter().map(|&v| v as i32).collect();
            gens.push(Perm::from_cycles(n, &[cyc]).unwrap());
        }
        let order: BigUint = (1..=k).fold(BigUint::one(), |a, i| a * BigUint::from(i));
        PermGroup::with_order(n, gens, &order)
    }

    /// Full W on the given variables: permutations and arbitrary flips.
    pub fn full_on_vars(n: usize, vars: &[usize]) -> Self {
        let k = vars.len();
        if k == 0 {
            return PermGroup::trivial(n);
        }
        let mut gens = PermGroup::symmetric_on_vars(n, vars).gens;
        gens.push(Perm::from_cycles(n, &[vec![vars[0] as i32, -(vars[0] as i32)]]).unwrap());
        let order: BigUint = (1..=k).fold(BigUint::one(), |a, i| a * BigUint::from(i)) * (BigUint::one() << k);
        PermGroup::with_order(n, gens, &order)
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Perm] {
        &self.gens
    }

    pub fn order(&self) -> BigUint {
        self.chain.order()
    }

    pub fn order_u64(&self) -> Option<u64> {
        self.order().to_u64()
    }

    pub fn is_trivial(&self) -> bool {
        self.chain.levels.iter().all(|l| l.orbit.len() == 1)
    }

    /// Base points as literals.
    pub fn base(&self) -> Vec<Lit> {
        self.chain.base().into_iter().map(|p| Lit::from_point(p, self.n)).collect()
    }

    pub fn strong_generators(&self) -> Vec<Perm> {
        self.chain.strong_gens()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        g.num_vars() == self.n && self.chain.contains(g)
    }

    pub fn is_subgroup_of(&self, other: &PermGroup) -> bool {
        self.gens.iter().all(|g| other.contains(g))
    }

    pub fn same_group(&self, other: &PermGroup) -> bool {
        self.order() == other.order() && self.is_subgroup_of(other)
    }

    pub(crate) fn orbit_points(&self, p: usize) -> Vec<usize> {
        let mut seen = vec![false; 2 * self.n];
        let mut out = vec![p];
        seen[p] = true;
        let mut i = 0;
        while i < out.len() {
            let x = out[i];
            for g in &self.gens {
                let y = g.apply_point(x);
                if !seen[y] {
                    seen[y] = true;
                    out.push(y);
                }
            }
            i += 1;
        }
        out
    }

    pub fn orbit(&self, l: Lit) -> BTreeSet<Lit> {
        self.orbit_points(l.point(self.n)).into_iter().map(|p| Lit::from_point(p, self.n)).collect()
    }

    /// Union of the orbits of the members of `set`.
    pub fn closure(&self, set: &[Lit]) -> BTreeSet<Lit> {
        set.iter().flat_map(|&l| self.orbit(l)).collect()
    }

    /// Orbit partition of all 2n literals, nontrivial orbits only.
    pub fn orbits(&self) -> Vec<Vec<Lit>> {
        let mut seen = vec![false; 2 * self.n];
        let mut out = Vec::new();
        for p in 0..2 * self.n {
            if seen[p] {
                continue;
            }
            let orb = self.orbit_points(p);
            for &x in &orb {
                seen[x] = true;
            }
            if orb.len() > 1 {
                let mut lits: Vec<Lit> = orb.into_iter().map(|x| Lit::from_point(x, self.n)).collect();
                lits.sort();
                out.push(lits);
            }
        }
        out
    }

    /// Vars moved by some generator.
    pub fn support_vars(&self) -> BTreeSet<usize> {
        self.gens.iter().flat_map(|g| g.moved_points().map(|p| Lit::from_point(p, self.n).var())).collect()
    }

    pub fn random_element<R: Rng>(&self, rng: &mut R) -> Perm {
        self.chain.random_element(rng)
    }

    pub fn elements(&self, cap: u64) -> Result<Vec<Perm>, GroupError> {
        let order = self.order();
        if order > BigUint::from(cap) {
            return Err(GroupError::TooLarge(order));
        }
        Ok(self.chain.elements())
    }

    pub(crate) fn chain_with_prefix(&self, prefix: &[usize]) -> StabChain {
        search::rebase(&self.chain, prefix, &mut build_rng())
    }

    /// Subgroup fixing every literal of `set`.
    pub fn pointwise_stabilizer(&self, set: &[Lit]) -> PermGroup {
        let prefix = self.points_of(set);
        let c = self.chain_with_prefix(&prefix);
        let k = prefix.len();
        let gens: Vec<Perm> = c.levels.get(k).map(|lv| lv.gens.clone()).unwrap_or_default();
        let order = c.levels[k..].iter().fold(BigUint::one(), |a, l| a * BigUint::from(l.orbit.len()));
        PermGroup::with_order(self.n, gens, &order)
    }

    /// Subgroup mapping `set` onto itself.
    pub fn set_stabilizer(&self, set: &[Lit]) -> PermGroup {
        self.set_stabilizer_with(set, DEFAULT_ENUM_THRESHOLD)
    }

    pub fn set_stabilizer_with(&self, set: &[Lit], enum_threshold: u64) -> PermGroup {
        let prefix = self.points_of(set);
        if self.order() <= BigUint::from(enum_threshold) {
            let mut in_set = vec![false; 2 * self.n];
            for &p in &prefix {
                in_set[p] = true;
            }
            let els: Vec<Perm> = self
                .chain
                .elements()
                .into_iter()
                .filter(|g| prefix.iter().all(|&p| in_set[g.apply_point(p)]))
                .collect();
            return PermGroup::from_elements(self.n, &els);
        }
        let c = self.chain_with_prefix(&prefix);
        let (gens, order) = search::set_stabilizer_chain(&c, &prefix);
        PermGroup::with_order(self.n, gens, &order)
    }

    pub fn set_stabilizer_backtrack(&self, set: &[Lit]) -> PermGroup {
        self.set_stabilizer_with(set, 0)
    }

    fn points_of(&self, set: &[Lit]) -> Vec<usize> {
        let mut pts: Vec<usize> = set.iter().map(|l| l.point(self.n)).collect();
        pts.sort_unstable();
        pts.dedup();
        pts
    }

    /// Group generated by a list of its own elements (order = list length).
    pub fn from_elements(n: usize, els: &[Perm]) -> PermGroup {
        let order = BigUint::from(els.len());
        let mut kept: Vec<Perm> = Vec::new();
        let mut g = PermGroup::trivial(n);
        for e in els {
            if g.order() == order {
                break;
            }
            if !g.contains(e) {
                kept.push(e.clone());
                g = PermGroup::new(n, kept.clone());
            }
        }
        g
    }

    /// G1 ∩ G2.
    pub fn intersect(&self, other: &PermGroup) -> PermGroup {
        self.intersect_with(other, DEFAULT_ENUM_THRESHOLD)
    }

    pub fn intersect_with(&self, other: &PermGroup, enum_threshold: u64) -> PermGroup {
        assert_eq!(self.n, other.n);
        if self.is_trivial() || other.is_trivial() {
            return PermGroup::trivial(self.n);
        }
        if self.is_subgroup_of(other) {
            return self.clone();
        }
        if other.is_subgroup_of(self) {
            return other.clone();
        }
        let (small, big) = if self.order() <= other.order() { (self, other) } else { (other, self) };
        if small.order() <= BigUint::from(enum_threshold) {
            let els: Vec<Perm> = small.chain.elements().into_iter().filter(|g| big.contains(g)).collect();
            return PermGroup::from_elements(self.n, &els);
        }
        self.intersect_backtrack(other)
    }

    pub fn intersect_backtrack(&self, other: &PermGroup) -> PermGroup {
        let (small, big) = if self.order() <= other.order() { (self, other) } else { (other, self) };
        let mut base = small.chain.base();
        for p in big.chain.base() {
            if !base.contains(&p) {
                base.push(p);
            }
        }
        let a = small.chain_with_prefix(&base);
        let b = big.chain_with_prefix(&base);
        let (gens, order) = search::intersect_chains(&a, &b);
        PermGroup::with_order(self.n, gens, &order)
    }

    /// ⟨G1, G2⟩.
    pub fn join(&self, other: &PermGroup) -> PermGroup {
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        PermGroup::new(self.n, gens)
    }

    /// Keep each generator only if it lies outside the group generated by
    /// those kept before it.
    pub fn reduce_generators(&self) -> Vec<Perm> {
        let mut kept: Vec<Perm> = Vec::new();
        let mut cur = PermGroup::trivial(self.n);
        let target = self.order();
        for g in &self.gens {
            if cur.order() == target {
                break;
            }
            if !cur.contains(g) {
                kept.push(g.clone());
                cur = PermGroup::new(self.n, kept.clone());
            }
        }
        kept
    }

    /// Some element of G agreeing with `rho` on `set`; `set` must be invariant
    /// under the sought element and `rho` must be defined on all of it.
    pub fn lift_restriction(&self, set: &[Lit], rho: &[(Lit, Lit)]) -> Result<Perm, GroupError> {
        let prefix = self.points_of(set);
        let mut images = Vec::with_capacity(prefix.len());
        for &p in &prefix {
            let l = Lit::from_point(p, self.n);
            let img = rho.iter().find(|(a, _)| *a == l).map(|(_, b)| *b).ok_or(GroupError::BadRestriction)?;
            images.push(img.point(self.n));
        }
        let c = self.chain_with_prefix(&prefix);
        search::lift_prefix(&c, &images).ok_or(GroupError::NoLift)
    }

    /// Random subgroup H with the same instance set for `c`, grown one uniform
    /// random generator at a time until the orbit of `c` reaches `d` or the
    /// generator budget runs out. The budget is
    /// ceil(multiplier * log_{4/3}(max(d-1,1)/epsilon)).
    pub fn shrink_to_transitive<R: Rng>(
        &self,
        c: &Clause,
        d: usize,
        epsilon: f64,
        multiplier: f64,
        rng: &mut R,
    ) -> Result<PermGroup, GroupError> {
        assert!(epsilon > 0.0 && epsilon < 1.0);
        if d <= 1 {
            return Ok(PermGroup::trivial(self.n));
        }
        let budget = (multiplier * (((d - 1) as f64) / epsilon).ln() / (4.0f64 / 3.0).ln()).ceil() as usize;
        let mut gens: Vec<Perm> = Vec::new();
        let mut found = 1;
        while gens.len() < budget.max(1) {
            let g = self.random_element(rng);
            if g.is_identity() {
                continue;
            }
            gens.push(g);
            found = clause_orbit_size(&gens, c, d + 1);
            if found >= d {
                break;
            }
        }
        if found != d {
            return Err(GroupError::InstanceCountMismatch { expected: d, found });
        }
        Ok(PermGroup::new(self.n, gens))
    }
}

/// Number of distinct images of `c` under ⟨gens⟩, stopping once `cap` is reached.
pub fn clause_orbit_size(gens: &[Perm], c: &Clause, cap: usize) -> usize {
    let mut seen: HashSet<Clause> = HashSet::new();
    seen.insert(c.clone());
    let mut queue = vec![c.clone()];
    while let Some(x) = queue.pop() {
        for g in gens {
            let y = g.apply_clause(&x);
            if seen.insert(y.clone()) {
                if seen.len() >= cap {
                    return seen.len();
                }
                queue.push(y);
            }
        }
    }
    seen.len()
}
