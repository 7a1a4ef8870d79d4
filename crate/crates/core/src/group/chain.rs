//! Stabilizer chains (base and strong generating set) built by Schreier-Sims.

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;

use crate::perm::Perm;

const NONE: u32 = u32::MAX;

/// One level of the chain: the stabilizer of all earlier base points,
/// its orbit on `base` and a transversal.
#[derive(Clone, Debug)]
pub(crate) struct Level {
    pub base: usize,
    pub gens: Vec<Perm>,
    pub orbit: Vec<usize>,
    // point -> index into reps
    slot: Vec<u32>,
    reps: Vec<Perm>,
    reps_inv: Vec<Perm>,
}

impl Level {
    fn new(base: usize, degree: usize) -> Self {
        let mut lv = Level {
            base,
            gens: Vec::new(),
            orbit: Vec::new(),
            slot: vec![NONE; degree],
            reps: Vec::new(),
            reps_inv: Vec::new(),
        };
        lv.recompute(degree / 2);
        lv
    }

    fn recompute(&mut self, n: usize) {
        let id = Perm::identity(n);
        self.slot.iter_mut().for_each(|s| *s = NONE);
        self.orbit.clear();
        self.reps.clear();
        self.reps_inv.clear();
        self.orbit.push(self.base);
        self.slot[self.base] = 0;
        self.reps.push(id.clone());
        self.reps_inv.push(id);
        let mut i = 0;
        while i < self.orbit.len() {
            let x = self.orbit[i];
            let ux = self.slot[x] as usize;
            for s in &self.gens {
                let y = s.apply_point(x);
                if self.slot[y] == NONE {
                    let u = self.reps[ux].then(s);
                    self.slot[y] = self.reps.len() as u32;
                    self.reps_inv.push(u.inverse());
                    self.reps.push(u);
                    self.orbit.push(y);
                }
            }
            i += 1;
        }
    }

    #[inline]
    pub fn in_orbit(&self, p: usize) -> bool {
        self.slot[p] != NONE
    }

    /// u with base^u = p.
    #[inline]
    pub fn rep(&self, p: usize) -> &Perm {
        &self.reps[self.slot[p] as usize]
    }

    #[inline]
    pub fn rep_inv(&self, p: usize) -> &Perm {
        &self.reps_inv[self.slot[p] as usize]
    }
}

#[derive(Clone, Debug)]
pub(crate) struct StabChain {
    pub n: usize,
    pub levels: Vec<Level>,
}

/// Product-replacement generator of random group elements from generators alone.
struct ProductReplacement {
    slots: Vec<Perm>,
    acc: Perm,
}

impl ProductReplacement {
    fn new<R: Rng>(n: usize, gens: &[Perm], rng: &mut R) -> Self {
        let mut slots: Vec<Perm> = gens.to_vec();
        while slots.len() < 10 {
            let k = slots.len() % gens.len().max(1);
            slots.push(gens.get(k).cloned().unwrap_or_else(|| Perm::identity(n)));
        }
        let mut pr = ProductReplacement { slots, acc: Perm::identity(n) };
        for _ in 0..50 {
            pr.next(rng);
        }
        pr
    }

    fn next<R: Rng>(&mut self, rng: &mut R) -> Perm {
        let k = self.slots.len();
        let i = rng.gen_range(0..k);
        let mut j = rng.gen_range(0..k - 1);
        if j >= i {
            j += 1;
        }
        let sj = if rng.gen_bool(0.5) { self.slots[j].clone() } else { self.slots[j].inverse() };
        self.slots[i] = if rng.gen_bool(0.5) { self.slots[i].then(&sj) } else { sj.then(&self.slots[i]) };
        self.acc = self.acc.then(&self.slots[i]);
        self.acc.clone()
    }
}

fn first_moved_outside(h: &Perm, base: &[usize]) -> usize {
    h.moved_points().find(|p| !base.contains(p)).expect("non-identity residue fixing the base")
}

impl StabChain {
    pub fn trivial(n: usize) -> Self {
        StabChain { n, levels: Vec::new() }
    }

    pub fn degree(&self) -> usize {
        2 * self.n
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn order(&self) -> BigUint {
        self.levels.iter().fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    /// Strip `g` through levels `from..`; returns the residue and the level where it stopped.
    pub fn sift(&self, g: &Perm, from: usize) -> (Perm, usize) {
        let mut g = g.clone();
        for (i, lv) in self.levels.iter().enumerate().skip(from) {
            let b = g.apply_point(lv.base);
            if !lv.in_orbit(b) {
                return (g, i);
            }
            if b != lv.base {
                g = g.then(lv.rep_inv(b));
            }
        }
        (g, self.levels.len())
    }

    pub fn contains(&self, g: &Perm) -> bool {
        self.sift(g, 0).0.is_identity()
    }

    /// Uniform random element: one independent coset representative per level.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> Perm {
        let mut g = Perm::identity(self.n);
        for lv in self.levels.iter().rev() {
            let p = lv.orbit[rng.gen_range(0..lv.orbit.len())];
            g = g.then(lv.rep(p));
        }
        g
    }

    /// Distinct generators across all levels.
    pub fn strong_gens(&self) -> Vec<Perm> {
        let mut out: Vec<Perm> = Vec::new();
        for lv in &self.levels {
            for g in &lv.gens {
                if !out.contains(g) {
                    out.push(g.clone());
                }
            }
        }
        out
    }

    /// Visit every element; intended for small groups.
    pub fn for_each_element(&self, f: &mut dyn FnMut(&Perm)) {
        // every element is u_{r-1} ... u_0, deepest level applied first
        fn walk(chain: &StabChain, level: isize, prefix: &Perm, f: &mut dyn FnMut(&Perm)) {
            if level < 0 {
                f(prefix);
                return;
            }
            let lv = &chain.levels[level as usize];
            for &p in &lv.orbit {
                walk(chain, level - 1, &prefix.then(lv.rep(p)), f);
            }
        }
        walk(self, self.levels.len() as isize - 1, &Perm::identity(self.n), f);
    }

    pub fn elements(&self) -> Vec<Perm> {
        let mut out = Vec::new();
        self.for_each_element(&mut |g| out.push(g.clone()));
        out
    }

    fn push_level(&mut self, base: usize) {
        let lv = Level::new(base, self.degree());
        self.levels.push(lv);
    }

    /// Insert residue `h` found at level `j`, visible to levels `lo..=j`.
    fn insert(&mut self, h: Perm, lo: usize, j: usize) {
        if j == self.levels.len() {
            let base = self.base();
            let p = first_moved_outside(&h, &base);
            self.push_level(p);
        }
        let n = self.n;
        for l in lo..=j {
            self.levels[l].gens.push(h.clone());
            self.levels[l].recompute(n);
        }
    }

    fn empty_with_prefix(n: usize, prefix: &[usize]) -> Self {
        let mut c = StabChain::trivial(n);
        for &p in prefix {
            if !c.base().contains(&p) {
                c.push_level(p);
            }
        }
        c
    }

    /// Build a chain for ⟨gens⟩ whose base starts with `prefix`. With a known
    /// order the randomized phase alone is exact; otherwise a deterministic
    /// Schreier generator check follows.
    pub fn build<R: Rng>(
        n: usize,
        gens: &[Perm],
        prefix: &[usize],
        known_order: Option<&BigUint>,
        sampler: Option<&StabChain>,
        rng: &mut R,
    ) -> Self {
        let gens: Vec<Perm> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        let mut chain = StabChain::empty_with_prefix(n, prefix);
        if gens.is_empty() {
            return chain;
        }
        for g in &gens {
            let (h, j) = chain.sift(g, 0);
            if !h.is_identity() {
                chain.insert(h, 0, j);
            }
        }
        if let Some(target) = known_order {
            let mut pr = if sampler.is_none() { Some(ProductReplacement::new(n, &gens, rng)) } else { None };
            let mut misses = 0usize;
            while &chain.order() < target {
                if misses > 20_000 {
                    // stated order looks wrong; fall back to the exact pass
                    chain.verify();
                    return chain;
                }
                let g = match sampler {
                    Some(s) => s.random_element(rng),
                    None => pr.as_mut().unwrap().next(rng),
                };
                let (h, j) = chain.sift(&g, 0);
                if h.is_identity() {
                    misses += 1;
                } else {
                    misses = 0;
                    chain.insert(h, 0, j);
                }
            }
            debug_assert_eq!(&chain.order(), target);
            return chain;
        }
        // randomized phase
        let mut pr = ProductReplacement::new(n, &gens, rng);
        let mut quiet = 0;
        while quiet < 24 {
            let g = pr.next(rng);
            let (h, j) = chain.sift(&g, 0);
            if h.is_identity() {
                quiet += 1;
            } else {
                quiet = 0;
                chain.insert(h, 0, j);
            }
        }
        chain.verify();
        chain
    }

    /// Deterministic Schreier-Sims pass: every Schreier generator of every level
    /// must sift through the levels below it.
    fn verify(&mut self) {
        let mut i = self.levels.len() as isize - 1;
        'outer: while i >= 0 {
            let li = i as usize;
            let lv = &self.levels[li];
            for &x in &lv.orbit {
                for s in &lv.gens {
                    let y = s.apply_point(x);
                    let sg = lv.rep(x).then(s).then(lv.rep_inv(y));
                    if sg.is_identity() {
                        continue;
                    }
                    let (h, j) = self.sift(&sg, li + 1);
                    if !h.is_identity() {
                        self.insert(h, li + 1, j);
                        i = j as isize;
                        continue 'outer;
                    }
                }
            }
            i -= 1;
        }
    }

    /// Same group, base starting with `prefix`.
    pub fn with_base_prefix<R: Rng>(&self, prefix: &[usize], rng: &mut R) -> Self {
        let order = self.order();
        StabChain::build(self.n, &self.strong_gens(), prefix, Some(&order), Some(self), rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str, n: usize) -> Perm {
        Perm::parse(s, n).unwrap()
    }

    #[test]
    fn dihedral_order_and_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gens = vec![p("(1 2 3 4)", 4), p("(1 3)", 4)];
        let c = StabChain::build(4, &gens, &[], None, None, &mut rng);
        assert_eq!(c.order(), BigUint::from(8u32));
        let mut els = c.elements();
        els.sort();
        els.dedup();
        assert_eq!(els.len(), 8);
        assert!(els.iter().all(|g| c.contains(g)));
        assert!(!c.contains(&p("(1 2)", 4)));
    }

    #[test]
    fn base_prefix_is_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gens = vec![p("(1 2)", 5), p("(2 3 4 5)", 5)];
        let c = StabChain::build(5, &gens, &[], None, None, &mut rng);
        assert_eq!(c.order(), BigUint::from(120u32));
        let d = c.with_base_prefix(&[3, 8], &mut rng);
        assert_eq!(&d.base()[..2], &[3, 8]);
        assert_eq!(d.order(), BigUint::from(120u32));
        // the negative literal -4 is fixed once 4 is
        assert_eq!(d.levels[1].orbit.len(), 1);
    }

    #[test]
    fn trivial_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = StabChain::build(3, &[], &[], None, None, &mut rng);
        assert_eq!(c.order(), BigUint::one());
        assert!(c.random_element(&mut rng).is_identity());
        assert_eq!(c.elements().len(), 1);
    }
}
