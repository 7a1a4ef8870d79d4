//! Backtrack searches over stabilizer chains.

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;

use super::chain::StabChain;
use crate::perm::Perm;

/// Orbit of `p` under `gens`, as a membership table.
fn orbit_table(p: usize, gens: &[Perm], degree: usize) -> Vec<bool> {
    let mut seen = vec![false; degree];
    let mut stack = vec![p];
    seen[p] = true;
    while let Some(x) = stack.pop() {
        for g in gens {
            let y = g.apply_point(x);
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen
}

fn orbit_len(p: usize, gens: &[Perm], degree: usize) -> usize {
    orbit_table(p, gens, degree).iter().filter(|&&b| b).count()
}

/// Candidate images at level `j`, identity choice first.
fn ordered_orbit(chain: &StabChain, j: usize) -> Vec<usize> {
    let lv = &chain.levels[j];
    let mut v = lv.orbit.clone();
    v.sort_unstable_by_key(|&p| (p != lv.base, p));
    v
}

struct Partial {
    h: Perm,
    h_inv: Perm,
}

impl Partial {
    fn identity(n: usize) -> Self {
        Partial { h: Perm::identity(n), h_inv: Perm::identity(n) }
    }

    // prepend u: new product applies u first
    fn extend(&self, u: &Perm, u_inv: &Perm) -> Self {
        Partial { h: u.then(&self.h), h_inv: self.h_inv.then(u_inv) }
    }
}

/// Generators for A ∩ B. Both chains must share the same base sequence, and
/// that base must be a base for both groups.
pub(crate) fn intersect_chains(a: &StabChain, b: &StabChain) -> (Vec<Perm>, BigUint) {
    let n = a.n;
    let m = a.levels.len();
    debug_assert_eq!(a.base(), b.base());
    let orbits: Vec<Vec<usize>> = (0..m).map(|j| ordered_orbit(a, j)).collect();
    let orbits_b: Vec<Vec<usize>> = (0..m).map(|j| ordered_orbit(b, j)).collect();

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        a: &StabChain,
        b: &StabChain,
        oa: &[Vec<usize>],
        ob: &[Vec<usize>],
        j: usize,
        target: Option<usize>,
        pa: &Partial,
        pb: &Partial,
    ) -> Option<Perm> {
        if j == a.levels.len() {
            // agreeing on the base pins down one element of each group, not a common one
            return (pa.h == pb.h).then(|| pa.h.clone());
        }
        let (la, lb) = (&a.levels[j], &b.levels[j]);
        let images: Vec<usize> = match target {
            Some(t) => vec![t],
            None if ob[j].len() < oa[j].len() => ob[j].iter().map(|&d| pb.h.apply_point(d)).collect(),
            None => oa[j].iter().map(|&d| pa.h.apply_point(d)).collect(),
        };
        for img in images {
            let da = pa.h_inv.apply_point(img);
            let db = pb.h_inv.apply_point(img);
            if !la.in_orbit(da) || !lb.in_orbit(db) {
                continue;
            }
            let na = pa.extend(la.rep(da), la.rep_inv(da));
            let nb = pb.extend(lb.rep(db), lb.rep_inv(db));
            if let Some(g) = dfs(a, b, oa, ob, j + 1, None, &na, &nb) {
                return Some(g);
            }
        }
        None
    }

    let mut found: Vec<Perm> = Vec::new();
    let mut order = BigUint::one();
    for i in (0..m).rev() {
        let base = a.levels[i].base;
        let mut known = orbit_table(base, &found, 2 * n);
        for &g in &orbits[i] {
            if known[g] || !b.levels[i].in_orbit(g) {
                continue;
            }
            let id = Partial::identity(n);
            if let Some(el) = dfs(a, b, &orbits, &orbits_b, i, Some(g), &id, &id) {
                found.push(el);
                known = orbit_table(base, &found, 2 * n);
            }
        }
        order *= BigUint::from(known.iter().filter(|&&x| x).count());
    }
    (found, order)
}

/// Generators and order of the set stabilizer of `set` (points). The chain's
/// base must start with exactly the points of `set`.
pub(crate) fn set_stabilizer_chain(c: &StabChain, set: &[usize]) -> (Vec<Perm>, BigUint) {
    let n = c.n;
    let k = set.len();
    let mut in_set = vec![false; 2 * n];
    for &p in set {
        in_set[p] = true;
    }
    let mut found: Vec<Perm> = c.levels.get(k).map(|lv| lv.gens.clone()).unwrap_or_default();
    let mut order: BigUint = c.levels[k..].iter().fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()));

    fn dfs(c: &StabChain, in_set: &[bool], k: usize, j: usize, target: Option<usize>, p: &Partial) -> Option<Perm> {
        if j == k {
            return Some(p.h.clone());
        }
        let lv = &c.levels[j];
        let images: Vec<usize> = match target {
            Some(t) => vec![t],
            None => ordered_orbit(c, j).iter().map(|&d| p.h.apply_point(d)).filter(|&x| in_set[x]).collect(),
        };
        for img in images {
            let d = p.h_inv.apply_point(img);
            if !lv.in_orbit(d) {
                continue;
            }
            let np = p.extend(lv.rep(d), lv.rep_inv(d));
            if let Some(g) = dfs(c, in_set, k, j + 1, None, &np) {
                return Some(g);
            }
        }
        None
    }

    for i in (0..k).rev() {
        let base = c.levels[i].base;
        let mut known = orbit_table(base, &found, 2 * n);
        for &g in &ordered_orbit(c, i) {
            if known[g] || !in_set[g] {
                continue;
            }
            if let Some(el) = dfs(c, &in_set, k, i, Some(g), &Partial::identity(n)) {
                found.push(el);
                known = orbit_table(base, &found, 2 * n);
            }
        }
        order *= BigUint::from(orbit_len(base, &found, 2 * n));
    }
    (found, order)
}

/// Some element whose images on the leading base points are `images`.
/// The chain's base must start with the points being mapped.
pub(crate) fn lift_prefix(c: &StabChain, images: &[usize]) -> Option<Perm> {
    let mut p = Partial::identity(c.n);
    for (j, &img) in images.iter().enumerate() {
        let lv = &c.levels[j];
        let d = p.h_inv.apply_point(img);
        if !lv.in_orbit(d) {
            return None;
        }
        p = p.extend(lv.rep(d), lv.rep_inv(d));
    }
    Some(p.h)
}

/// Rebuild `c` with base `prefix` followed by whatever else is needed.
pub(crate) fn rebase<R: Rng>(c: &StabChain, prefix: &[usize], rng: &mut R) -> StabChain {
    if c.levels.len() >= prefix.len() && c.levels.iter().zip(prefix).all(|(l, &p)| l.base == p) {
        return c.clone();
    }
    c.with_base_prefix(prefix, rng)
}
