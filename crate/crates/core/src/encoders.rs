//! Compile cardinality, parity, quantified, pigeonhole and clique-coloring
//! constraints into augmented clauses.
//!
//! Variable numbering:
//! - cardinality: x1..xm are variables 1..m
//! - pigeonhole: p_ij (pigeon i of n+1, hole j of n) is (i-1)*n + j
//! - clique-coloring: e_ij for i<j in lexicographic order, then c_il (node, color)
//!   row-major, then q_ki (clique element, node) row-major
//! - quantified clauses: atoms relation by relation, each relation's argument
//!   tuples in row-major order

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::augmented::{AugmentedClause, AugmentedError};
use crate::clause::{Clause, Lit};
use crate::group::PermGroup;
use crate::oracle::GroundTheory;
use crate::perm::Perm;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("threshold {k} outside 1..={m}")]
    BadThreshold { m: usize, k: usize },
    #[error("bad size: {0}")]
    BadSize(String),
    #[error("empty domain for {0}")]
    DomainTooSmall(String),
    #[error("quantified clause: {0}")]
    Quantified(String),
}

/// Generator count and total cycle length, counted on the cycles as written
/// (a one-point cycle counts 1 even though it acts as the identity).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct RepresentationSize {
    pub generators: usize,
    pub total: usize,
}

impl RepresentationSize {
    fn of_cycles(gens: &[Vec<Vec<i32>>]) -> Self {
        RepresentationSize { generators: gens.len(), total: gens.iter().flatten().map(Vec::len).sum() }
    }
}

/// An augmented clause together with the size of its written generators.
#[derive(Clone, Debug)]
pub struct Encoded {
    pub clause: AugmentedClause,
    pub size: RepresentationSize,
}

/// A set of augmented clauses over `num_vars` variables.
#[derive(Clone, Debug)]
pub struct Theory {
    pub num_vars: usize,
    pub clauses: Vec<AugmentedClause>,
}

impl Theory {
    /// Every ground instance of every clause, deduplicated.
    pub fn expand(&self, cap: usize) -> Result<BTreeSet<Clause>, AugmentedError> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            out.extend(c.instances(cap)?);
        }
        Ok(out)
    }

    pub fn ground_theory(&self, cap: usize) -> Result<GroundTheory, AugmentedError> {
        let clauses = self.expand(cap)?.iter().map(Clause::to_dimacs).collect();
        Ok(GroundTheory::new(self.num_vars, clauses))
    }
}

fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |a, i| a * BigUint::from(i))
}

fn perm_of(n: usize, cycles: &[Vec<i32>]) -> Perm {
    let real: Vec<Vec<i32>> = cycles.iter().filter(|c| c.len() > 1).cloned().collect();
    Perm::from_cycles(n, &real).expect("encoder generators respect signs")
}

/// Transposition of the first two items and the cycle through the rest.
fn sym_cycles(items: &[i32]) -> Vec<Vec<Vec<i32>>> {
    match items.len() {
        0 | 1 => Vec::new(),
        _ => vec![vec![items[..2].to_vec()], vec![items[1..].to_vec()]],
    }
}

/// x1 + ... + xm ≥ k as (x1 ∨ ... ∨ x_{m-k+1}, Sym{x1..xm}).
pub fn encode_cardinality(m: usize, k: usize) -> Result<Encoded, EncodeError> {
    if k < 1 || k > m {
        return Err(EncodeError::BadThreshold { m, k });
    }
    let vars: Vec<i32> = (1..=m as i32).collect();
    let base = Clause::from_dimacs(&vars[..m - k + 1]).expect("distinct positive literals");
    let written = sym_cycles(&vars);
    let gens: Vec<Perm> = written.iter().map(|c| perm_of(m, c)).filter(|g| !g.is_identity()).collect();
    let group = PermGroup::with_order(m, gens, &factorial(m));
    Ok(Encoded {
        clause: AugmentedClause::new(base, group).expect("in range"),
        size: RepresentationSize::of_cycles(&written),
    })
}

/// x_{v1} + ... + x_{vk} ≡ rhs (mod 2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityConstraint {
    pub vars: Vec<usize>,
    pub rhs: bool,
}

impl ParityConstraint {
    pub fn new(vars: Vec<usize>, rhs: bool) -> Self {
        assert!(!vars.is_empty(), "parity constraint over no variables");
        ParityConstraint { vars, rhs }
    }

    pub fn holds(&self, model: &[bool]) -> bool {
        self.vars.iter().filter(|&&v| model[v - 1]).count() % 2 == usize::from(self.rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ParityForm {
    /// k-1 generators (x1 ¬x1)(xi ¬xi)
    #[default]
    FlipPairs,
    /// (x1 ¬x1)(x2 ¬x2) plus the symmetric group on the variables
    Compact,
}

pub fn encode_parity(c: &ParityConstraint, n: usize, form: ParityForm) -> Result<Encoded, EncodeError> {
    let vars: Vec<i32> = c.vars.iter().map(|&v| v as i32).collect();
    if let Some(&v) = c.vars.iter().find(|&&v| v == 0 || v > n) {
        return Err(EncodeError::BadSize(format!("variable {v} outside 1..={n}")));
    }
    let mut lits = vars.clone();
    if !c.rhs {
        lits[0] = -lits[0];
    }
    let base = Clause::from_dimacs(&lits).map_err(|e| EncodeError::BadSize(e.to_string()))?;
    let k = vars.len();
    let written: Vec<Vec<Vec<i32>>> = if k < 2 {
        Vec::new()
    } else {
        let flip = |x: i32| vec![x, -x];
        match form {
            ParityForm::FlipPairs => vars[1..].iter().map(|&x| vec![flip(vars[0]), flip(x)]).collect(),
            ParityForm::Compact => {
                let mut w = vec![vec![flip(vars[0]), flip(vars[1])]];
                w.extend(sym_cycles(&vars));
                w
            }
        }
    };
    let gens: Vec<Perm> = written.iter().map(|cy| perm_of(n, cy)).filter(|g| !g.is_identity()).collect();
    let even_flips = BigUint::one() << (k.max(1) - 1);
    let group = match form {
        ParityForm::FlipPairs => PermGroup::with_order(n, gens, &even_flips),
        ParityForm::Compact => PermGroup::with_order(n, gens, &(even_flips * factorial(k))),
    };
    Ok(Encoded {
        clause: AugmentedClause::new(base, group).expect("in range"),
        size: RepresentationSize::of_cycles(&written),
    })
}

pub fn encode_parity_theory(cs: &[ParityConstraint], n: usize, form: ParityForm) -> Result<Theory, EncodeError> {
    let clauses = cs.iter().map(|c| encode_parity(c, n, form).map(|e| e.clause)).collect::<Result<_, _>>()?;
    Ok(Theory { num_vars: n, clauses })
}

/// `m` parity constraints over random nonempty subsets of 1..=n with random
/// right-hand sides.
pub fn random_parity_theory(n: usize, m: usize, seed: u64) -> Vec<ParityConstraint> {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| loop {
            let vars: Vec<usize> = (1..=n).filter(|_| rng.gen_bool(0.5)).collect();
            if !vars.is_empty() {
                break ParityConstraint::new(vars, rng.gen_bool(0.5));
            }
        })
        .collect()
}

pub fn pigeonhole_var(pigeon: usize, hole: usize, holes: usize) -> usize {
    (pigeon - 1) * holes + hole
}

/// n+1 pigeons in n holes: (¬p11 ∨ ¬p21, G) and (p11 ∨ ... ∨ p1n, G) with G
/// exchanging pigeons and holes.
pub fn encode_pigeonhole(holes: usize) -> Result<Theory, EncodeError> {
    let n = holes;
    if n < 1 {
        return Err(EncodeError::BadSize("at least one hole".into()));
    }
    let nv = (n + 1) * n;
    let p = |i: usize, j: usize| pigeonhole_var(i, j, n) as i32;
    let mut written: Vec<Vec<Vec<i32>>> = Vec::new();
    // pigeon factor: the same pigeon permutation applied in every hole
    for pattern in sym_cycles(&(1..=(n + 1) as i32).collect::<Vec<_>>()) {
        let cyc = &pattern[0];
        written.push((1..=n).map(|j| cyc.iter().map(|&i| p(i as usize, j)).collect()).collect());
    }
    for pattern in sym_cycles(&(1..=n as i32).collect::<Vec<_>>()) {
        let cyc = &pattern[0];
        written.push((1..=n + 1).map(|i| cyc.iter().map(|&j| p(i, j as usize)).collect()).collect());
    }
    let gens: Vec<Perm> = written.iter().map(|c| perm_of(nv, c)).filter(|g| !g.is_identity()).collect();
    let group = PermGroup::with_order(nv, gens, &(factorial(n + 1) * factorial(n)));
    let at_most = Clause::from_dimacs(&[-p(1, 1), -p(2, 1)]).unwrap();
    let at_least = Clause::from_dimacs(&(1..=n).map(|j| p(1, j)).collect::<Vec<_>>()).unwrap();
    let g = std::sync::Arc::new(group);
    Ok(Theory {
        num_vars: nv,
        clauses: vec![
            AugmentedClause::with_shared(at_most, g.clone()).unwrap(),
            AugmentedClause::with_shared(at_least, g).unwrap(),
        ],
    })
}

/// Variable numbering for clique-coloring with `m` nodes and `n` colors.
#[derive(Clone, Copy, Debug)]
pub struct CliqueVars {
    pub m: usize,
    pub n: usize,
}

impl CliqueVars {
    pub fn edges(&self) -> usize {
        self.m * (self.m - 1) / 2
    }

    /// Edge between nodes i and j (any order, i ≠ j).
    pub fn e(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        // pairs (a, b) with a < i come first
        (i - 1) * self.m - (i - 1) * i / 2 + (j - i)
    }

    pub fn c(&self, node: usize, color: usize) -> usize {
        self.edges() + (node - 1) * self.n + color
    }

    pub fn q(&self, elem: usize, node: usize) -> usize {
        self.edges() + self.m * self.n + (elem - 1) * self.m + node
    }

    pub fn num_vars(&self) -> usize {
        self.edges() + self.m * self.n + (self.n + 1) * self.m
    }
}

/// Clique of n+1 nodes embedded in an m-node graph colored with n colors.
/// Every family shares the group exchanging nodes, colors and clique elements.
pub fn encode_clique_coloring(m: usize, n: usize) -> Result<Theory, EncodeError> {
    if n < 1 || m < n + 1 {
        return Err(EncodeError::BadSize(format!("need m ≥ n+1 ≥ 2, got m={m}, n={n}")));
    }
    let v = CliqueVars { m, n };
    let nv = v.num_vars();
    let node_perm = |sigma: &dyn Fn(usize) -> usize| -> Perm {
        let mut img: Vec<Lit> = (1..=nv).map(Lit::pos).collect();
        for i in 1..=m {
            for j in i + 1..=m {
                img[v.e(i, j) - 1] = Lit::pos(v.e(sigma(i), sigma(j)));
            }
            for l in 1..=n {
                img[v.c(i, l) - 1] = Lit::pos(v.c(sigma(i), l));
            }
            for k in 1..=n + 1 {
                img[v.q(k, i) - 1] = Lit::pos(v.q(k, sigma(i)));
            }
        }
        Perm::from_positive_images(nv, &img).unwrap()
    };
    let color_perm = |tau: &dyn Fn(usize) -> usize| -> Perm {
        let mut img: Vec<Lit> = (1..=nv).map(Lit::pos).collect();
        for i in 1..=m {
            for l in 1..=n {
                img[v.c(i, l) - 1] = Lit::pos(v.c(i, tau(l)));
            }
        }
        Perm::from_positive_images(nv, &img).unwrap()
    };
    let elem_perm = |pi: &dyn Fn(usize) -> usize| -> Perm {
        let mut img: Vec<Lit> = (1..=nv).map(Lit::pos).collect();
        for k in 1..=n + 1 {
            for i in 1..=m {
                img[v.q(k, i) - 1] = Lit::pos(v.q(pi(k), i));
            }
        }
        Perm::from_positive_images(nv, &img).unwrap()
    };
    let swap12 = |x: usize| match x {
        1 => 2,
        2 => 1,
        x => x,
    };
    let rotate = |size: usize| {
        move |x: usize| {
            if x == 1 {
                1
            } else if x == size {
                2
            } else {
                x + 1
            }
        }
    };
    let mut gens = Vec::new();
    for (size, mk) in
        [(m, &node_perm as &dyn Fn(&dyn Fn(usize) -> usize) -> Perm), (n, &color_perm), (n + 1, &elem_perm)]
    {
        if size >= 2 {
            gens.push(mk(&swap12));
        }
        if size >= 3 {
            gens.push(mk(&rotate(size)));
        }
    }
    let order = factorial(m) * factorial(n) * factorial(n + 1);
    let g = std::sync::Arc::new(PermGroup::with_order(nv, gens, &order));
    let cl = |xs: &[i64]| Clause::from_dimacs(&xs.iter().map(|&x| x as i32).collect::<Vec<_>>()).unwrap();
    let (e, c, q) = (|i, j| v.e(i, j) as i64, |i, l| v.c(i, l) as i64, |k, i| v.q(k, i) as i64);
    let bases = vec![
        cl(&[-e(1, 2), -c(1, 1), -c(2, 1)]),
        cl(&(1..=n).map(|l| c(1, l)).collect::<Vec<_>>()),
        cl(&(1..=m).map(|i| q(1, i)).collect::<Vec<_>>()),
        cl(&[-q(1, 1), -q(2, 1)]),
        cl(&[e(1, 2), -q(1, 1), -q(2, 2)]),
    ];
    let clauses = bases.into_iter().map(|b| AugmentedClause::with_shared(b, g.clone()).unwrap()).collect();
    Ok(Theory { num_vars: nv, clauses })
}

/// An argument of a quantified literal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantifiedLiteral {
    pub relation: String,
    pub positive: bool,
    pub args: Vec<Term>,
}

/// A universally quantified clause over finite domains. `relations` fixes
/// each relation's per-position domain sizes and the atom numbering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantifiedClause {
    pub variables: Vec<(String, usize)>,
    pub relations: Vec<(String, Vec<usize>)>,
    pub literals: Vec<QuantifiedLiteral>,
}

/// Ground atom numbering for a relation signature.
struct AtomTable {
    offsets: HashMap<String, (usize, Vec<usize>)>,
    total: usize,
}

impl AtomTable {
    fn new(relations: &[(String, Vec<usize>)]) -> Self {
        let mut offsets = HashMap::new();
        let mut total = 0;
        for (name, doms) in relations {
            offsets.insert(name.clone(), (total, doms.clone()));
            total += doms.iter().product::<usize>();
        }
        AtomTable { offsets, total }
    }

    fn atom(&self, rel: &str, args: &[usize]) -> usize {
        let (off, doms) = &self.offsets[rel];
        let idx = args.iter().zip(doms).fold(0, |acc, (&a, &d)| acc * d + a);
        off + idx + 1
    }

    /// Every argument tuple of `rel`, row-major.
    fn tuples(&self, rel: &str) -> Vec<Vec<usize>> {
        let doms = &self.offsets[rel].1;
        let mut out = vec![Vec::new()];
        for &d in doms {
            out =
                out.into_iter().flat_map(|t: Vec<usize>| (0..d).map(move |x| [t.clone(), vec![x]].concat())).collect();
        }
        out
    }
}

fn validate_quantified(q: &QuantifiedClause) -> Result<BTreeMap<String, usize>, EncodeError> {
    let err = |s: String| Err(EncodeError::Quantified(s));
    let mut dom: BTreeMap<String, usize> = BTreeMap::new();
    for (name, d) in &q.variables {
        if *d == 0 {
            return Err(EncodeError::DomainTooSmall(name.clone()));
        }
        if dom.insert(name.clone(), *d).is_some() {
            return err(format!("variable {name} declared twice"));
        }
    }
    let sig: HashMap<&str, &Vec<usize>> = q.relations.iter().map(|(n, d)| (n.as_str(), d)).collect();
    for (name, doms) in &q.relations {
        if let Some(pos) = doms.iter().position(|&d| d == 0) {
            return Err(EncodeError::DomainTooSmall(format!("{name} position {}", pos + 1)));
        }
    }
    let mut used: BTreeMap<&str, bool> = dom.keys().map(|k| (k.as_str(), false)).collect();
    for lit in &q.literals {
        let Some(doms) = sig.get(lit.relation.as_str()) else {
            return err(format!("unknown relation {}", lit.relation));
        };
        if doms.len() != lit.args.len() {
            return err(format!("{} takes {} arguments, got {}", lit.relation, doms.len(), lit.args.len()));
        }
        let mut seen: Vec<&str> = Vec::new();
        for (t, &d) in lit.args.iter().zip(doms.iter()) {
            match t {
                Term::Const(c) if *c >= d => return err(format!("constant {c} outside domain of size {d}")),
                Term::Const(_) => {}
                Term::Var(x) => {
                    let Some(&dx) = dom.get(x) else { return err(format!("undeclared variable {x}")) };
                    if dx != d {
                        return err(format!("{x} has domain size {dx} but {} expects {d}", lit.relation));
                    }
                    if seen.contains(&x.as_str()) {
                        return err(format!("{x} repeated in one {} literal", lit.relation));
                    }
                    seen.push(x);
                    used.insert(x, true);
                }
            }
        }
    }
    if let Some((x, _)) = used.iter().find(|(_, &u)| !u) {
        return err(format!("variable {x} is not used"));
    }
    // two literals of one relation must never ground to the same atom
    for (i, a) in q.literals.iter().enumerate() {
        for b in &q.literals[i + 1..] {
            if a.relation != b.relation {
                continue;
            }
            let separated =
                a.args.iter().zip(&b.args).any(|(x, y)| matches!((x, y), (Term::Const(p), Term::Const(q)) if p != q));
            if !separated {
                return err(format!("two {} literals can ground to the same atom", a.relation));
            }
        }
    }
    Ok(dom)
}

/// Ground a quantified clause: the base binds every variable to its first
/// domain element; the group is generated, per variable, by the domain
/// transposition (0 1) and cycle (1 2 .. d-1) acting on the argument
/// positions where that variable occurs.
pub fn encode_qprop(q: &QuantifiedClause) -> Result<Encoded, EncodeError> {
    let dom = validate_quantified(q)?;
    let atoms = AtomTable::new(&q.relations);
    let n = atoms.total;
    if n == 0 {
        return Err(EncodeError::Quantified("no ground atoms".into()));
    }
    let bind_first = |t: &Term| match t {
        Term::Const(c) => *c,
        Term::Var(_) => 0,
    };
    let base_lits: Vec<Lit> = q
        .literals
        .iter()
        .map(|l| {
            let a = Lit::pos(atoms.atom(&l.relation, &l.args.iter().map(bind_first).collect::<Vec<_>>()));
            if l.positive {
                a
            } else {
                -a
            }
        })
        .collect();
    let base = Clause::new(base_lits).map_err(|e| EncodeError::Quantified(e.to_string()))?;

    let mut written: Vec<Vec<Vec<i32>>> = Vec::new();
    let mut gens = Vec::new();
    let mut order = BigUint::one();
    for (x, _) in &q.variables {
        let d = dom[x];
        order *= factorial(d);
        let domain: Vec<i32> = (0..d as i32).collect();
        for cyc in sym_cycles(&domain) {
            written.push(cyc.clone());
            let cyc = &cyc[0];
            let step = |a: usize| match cyc.iter().position(|&c| c as usize == a) {
                Some(i) => cyc[(i + 1) % cyc.len()] as usize,
                None => a,
            };
            let mut img: Vec<Lit> = (1..=n).map(Lit::pos).collect();
            for lit in &q.literals {
                let positions: Vec<usize> = lit
                    .args
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| matches!(t, Term::Var(y) if y == x))
                    .map(|(i, _)| i)
                    .collect();
                if positions.is_empty() {
                    continue;
                }
                for tuple in atoms.tuples(&lit.relation) {
                    let matches_consts =
                        lit.args.iter().zip(&tuple).all(|(t, &a)| !matches!(t, Term::Const(c) if *c != a));
                    if !matches_consts {
                        continue;
                    }
                    let mut moved = tuple.clone();
                    for &p in &positions {
                        moved[p] = step(tuple[p]);
                    }
                    img[atoms.atom(&lit.relation, &tuple) - 1] = Lit::pos(atoms.atom(&lit.relation, &moved));
                }
            }
            let g = Perm::from_positive_images(n, &img).expect("domain permutation lifts to atoms");
            if !g.is_identity() {
                gens.push(g);
            }
        }
    }
    let group = PermGroup::new(n, gens);
    debug_assert!(group.order() <= order);
    Ok(Encoded {
        clause: AugmentedClause::new(base, group).expect("in range"),
        size: RepresentationSize::of_cycles(&written),
    })
}
