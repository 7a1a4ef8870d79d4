//! Extensions, stable extensions and resolution of augmented clauses.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::augmented::{AugmentedClause, AugmentedError};
use crate::clause::{resolve_ground, Clause, ClauseError, Lit};
use crate::group::{PermGroup, DEFAULT_ENUM_THRESHOLD};
use crate::perm::Perm;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolutionError {
    #[error("base clauses do not resolve ({0} clashing literals)")]
    NotResolvable(usize),
    #[error("{0} candidate permutations exceed the enumeration cap")]
    TooLarge(BigUint),
    #[error("witness group {0} is not a subgroup of its clause's group")]
    WitnessNotSubgroup(usize),
    #[error(transparent)]
    Clause(ClauseError),
    #[error(transparent)]
    Augmented(#[from] AugmentedError),
}

impl From<ClauseError> for ResolutionError {
    fn from(e: ClauseError) -> Self {
        match e {
            ClauseError::NotResolvable(k) => ResolutionError::NotResolvable(k),
            e => ResolutionError::Clause(e),
        }
    }
}

/// Subgroups H1 ≤ G1, H2 ≤ G2 used in place of the full groups.
#[derive(Clone, Debug)]
pub struct ResolventWitness {
    pub h1: PermGroup,
    pub h2: PermGroup,
}

impl ResolventWitness {
    pub fn new(h1: PermGroup, h2: PermGroup) -> Self {
        ResolventWitness { h1, h2 }
    }

    /// Checks h_i ≤ G_i generator by generator.
    pub fn validate(&self, g1: &PermGroup, g2: &PermGroup) -> Result<(), ResolutionError> {
        if !self.h1.is_subgroup_of(g1) {
            return Err(ResolutionError::WitnessNotSubgroup(1));
        }
        if !self.h2.is_subgroup_of(g2) {
            return Err(ResolutionError::WitnessNotSubgroup(2));
        }
        Ok(())
    }
}

fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |a, i| a * BigUint::from(i))
}

/// Calls `f` with every permutation of `items` (Heap's algorithm).
fn for_each_arrangement(items: &mut [usize], f: &mut dyn FnMut(&[usize])) {
    let k = items.len();
    let mut c = vec![0usize; k];
    f(items);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            f(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn agrees_with_some_element(g: &PermGroup, set: &[Lit], w: &Perm) -> bool {
    if set.is_empty() {
        return true;
    }
    let rho: Vec<(Lit, Lit)> = set.iter().map(|&l| (l, w.apply_lit(l))).collect();
    g.lift_restriction(set, &rho).is_ok()
}

/// All permutations of the `ambient` variables (each carried together with
/// its action on negative literals) that agree on every `ks[i]` with some
/// element of `groups[i]`. The result is generally not a group.
pub fn extn_enumerate(
    ks: &[Vec<Lit>],
    groups: &[PermGroup],
    ambient: &[usize],
    cap: usize,
) -> Result<BTreeSet<Perm>, ResolutionError> {
    assert_eq!(ks.len(), groups.len());
    let count = factorial(ambient.len());
    if count > BigUint::from(cap) {
        return Err(ResolutionError::TooLarge(count));
    }
    let n = groups.first().map(PermGroup::num_vars).unwrap_or_else(|| ambient.iter().copied().max().unwrap_or(0));
    let mut out = BTreeSet::new();
    let mut arr: Vec<usize> = ambient.to_vec();
    for_each_arrangement(&mut arr, &mut |imgs| {
        let mut map: Vec<Lit> = (1..=n).map(Lit::pos).collect();
        for (&v, &w) in ambient.iter().zip(imgs) {
            map[v - 1] = Lit::pos(w);
        }
        let w = Perm::from_positive_images(n, &map).expect("variable permutation");
        if ks.iter().zip(groups).all(|(k, g)| agrees_with_some_element(g, k, &w)) {
            out.insert(w);
        }
    });
    Ok(out)
}

/// `g` on the literals of `vars`, identity elsewhere. `g` must map those
/// literals among themselves.
fn restrict_to_vars(g: &Perm, vars: &BTreeSet<usize>) -> Perm {
    let n = g.num_vars();
    let img: Vec<u32> = (0..2 * n)
        .map(|p| if vars.contains(&Lit::from_point(p, n).var()) { g.apply_point(p) as u32 } else { p as u32 })
        .collect();
    Perm::from_images(img).expect("restriction of an invariant set")
}

fn vars_of(lits: &BTreeSet<Lit>) -> BTreeSet<usize> {
    lits.iter().map(|l| l.var()).collect()
}

/// Variables touched by the closures ks[i]^{groups[i]}.
pub fn closure_vars(ks: &[Vec<Lit>], groups: &[PermGroup]) -> BTreeSet<usize> {
    ks.iter().zip(groups).flat_map(|(k, g)| vars_of(&g.closure(k))).collect()
}

/// Stable extensions over every variable, intersected with W_n.
pub fn stab_group(ks: &[Vec<Lit>], groups: &[PermGroup]) -> PermGroup {
    let n = groups.first().map(PermGroup::num_vars).unwrap_or(0);
    let all: Vec<usize> = (1..=n).collect();
    stab_group_on(ks, groups, &all, DEFAULT_ENUM_THRESHOLD)
}

/// Stable extensions acting only on `ambient` (identity elsewhere). The
/// ambient must contain every variable of every closure.
pub fn stab_group_on(ks: &[Vec<Lit>], groups: &[PermGroup], ambient: &[usize], enum_threshold: u64) -> PermGroup {
    assert_eq!(ks.len(), groups.len());
    assert!(!groups.is_empty(), "at least one clause");
    let n = groups[0].num_vars();
    let ambient: BTreeSet<usize> = ambient.iter().copied().collect();
    let mut parts: Vec<PermGroup> = Vec::with_capacity(ks.len());
    let mut all_fixed = true;
    let mut touched: BTreeSet<usize> = BTreeSet::new();
    for (k, g) in ks.iter().zip(groups) {
        let closure = g.closure(k);
        let vars = vars_of(&closure);
        assert!(vars.is_subset(&ambient), "closure leaves the ambient variables");
        touched.extend(vars.iter().copied());
        let closure: Vec<Lit> = closure.into_iter().collect();
        // the kernel of restriction is the pointwise stabilizer of the closure
        let kernel = g.pointwise_stabilizer(&closure);
        let restricted_order = g.order() / kernel.order();
        let mut gens: Vec<Perm> =
            g.generators().iter().map(|x| restrict_to_vars(x, &vars)).filter(|x| !x.is_identity()).collect();
        gens.dedup();
        if !gens.is_empty() {
            all_fixed = false;
        }
        let off: Vec<usize> = ambient.difference(&vars).copied().collect();
        let free = PermGroup::full_on_vars(n, &off);
        let order = restricted_order * free.order();
        gens.extend(free.generators().iter().cloned());
        parts.push(PermGroup::with_order(n, gens, &order));
    }
    if all_fixed {
        let off: Vec<usize> = ambient.difference(&touched).copied().collect();
        return PermGroup::full_on_vars(n, &off);
    }
    let mut acc = parts.swap_remove(0);
    for p in &parts {
        acc = acc.intersect_with(p, enum_threshold);
    }
    acc
}

/// Resolvent of `a` and `b`; canonical when `witness` is `None`. The group
/// acts on the variables of the two closures only: further variables would
/// contribute a direct factor that fixes every instance.
pub fn resolve_augmented(
    a: &AugmentedClause,
    b: &AugmentedClause,
    witness: Option<&ResolventWitness>,
) -> Result<AugmentedClause, ResolutionError> {
    resolve_augmented_with(a, b, witness, DEFAULT_ENUM_THRESHOLD)
}

pub fn resolve_augmented_with(
    a: &AugmentedClause,
    b: &AugmentedClause,
    witness: Option<&ResolventWitness>,
    enum_threshold: u64,
) -> Result<AugmentedClause, ResolutionError> {
    let base = resolve_ground(a.base(), b.base())?;
    let (h1, h2) = match witness {
        Some(w) => {
            w.validate(a.group(), b.group())?;
            (&w.h1, &w.h2)
        }
        None => (a.group(), b.group()),
    };
    let n = a.n();
    if h1.is_trivial() && h2.is_trivial() {
        return Ok(AugmentedClause::ground(base, n));
    }
    let ks = [a.base().lits().to_vec(), b.base().lits().to_vec()];
    let groups = [h1.clone(), h2.clone()];
    let ambient: Vec<usize> = closure_vars(&ks, &groups).into_iter().collect();
    let group = stab_group_on(&ks, &groups, &ambient, enum_threshold);
    Ok(AugmentedClause::new(base, group)?)
}

/// True iff `candidate` is a resolvent of `a` and `b` certified by `witness`:
/// same base as the ground resolvent, and every generator restricted to each
/// closure c_i^{H_i} is the restriction of some element of H_i.
pub fn check_resolvent(
    candidate: &AugmentedClause,
    a: &AugmentedClause,
    b: &AugmentedClause,
    witness: &ResolventWitness,
) -> bool {
    match resolve_ground(a.base(), b.base()) {
        Ok(c) if &c == candidate.base() => {}
        _ => return false,
    }
    if witness.validate(a.group(), b.group()).is_err() {
        return false;
    }
    for (c, h) in [(a.base(), &witness.h1), (b.base(), &witness.h2)] {
        let closure: Vec<Lit> = h.closure(c.lits()).into_iter().collect();
        let members: HashSet<Lit> = closure.iter().copied().collect();
        for g in candidate.group().generators() {
            let rho: Vec<(Lit, Lit)> = closure.iter().map(|&l| (l, g.apply_lit(l))).collect();
            if rho.iter().any(|(_, img)| !members.contains(img)) {
                return false;
            }
            if h.lift_restriction(&closure, &rho).is_err() {
                return false;
            }
        }
    }
    true
}

/// Every ground resolvent of an instance of `a` with an instance of `b`.
pub fn instance_resolvents(
    a: &AugmentedClause,
    b: &AugmentedClause,
    cap: usize,
) -> Result<BTreeSet<Clause>, ResolutionError> {
    let ia = a.instances(cap)?;
    let ib = b.instances(cap)?;
    let mut out = BTreeSet::new();
    for x in &ia {
        for y in &ib {
            if let Ok(r) = resolve_ground(x, y) {
                out.insert(r);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
