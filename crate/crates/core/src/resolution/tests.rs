use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::augmented::DEFAULT_INSTANCE_CAP;

const N: usize = 5;

// a..e are variables 1..5
fn v(ch: char) -> usize {
    (ch as u8 - b'a' + 1) as usize
}

fn lit(s: &str) -> Lit {
    match s.strip_prefix('-') {
        Some(r) => -Lit::pos(v(r.chars().next().unwrap())),
        None => Lit::pos(v(s.chars().next().unwrap())),
    }
}

fn clause(s: &str) -> Clause {
    Clause::new(s.split_whitespace().map(lit)).unwrap()
}

fn perm(s: &str) -> Perm {
    let digits: String =
        s.chars().map(|c| if c.is_ascii_lowercase() { char::from(b'0' + v(c) as u8) } else { c }).collect();
    let spaced: String = digits.chars().flat_map(|c| if c.is_ascii_digit() { vec![c, ' '] } else { vec![c] }).collect();
    Perm::parse(&spaced, N).unwrap()
}

fn group(gens: &[&str]) -> PermGroup {
    PermGroup::new(N, gens.iter().map(|s| perm(s)).collect())
}

fn sym_bcd() -> PermGroup {
    PermGroup::symmetric_on_vars(N, &[v('b'), v('c'), v('d')])
}

fn aug(c: &str, g: PermGroup) -> AugmentedClause {
    AugmentedClause::new(clause(c), g).unwrap()
}

fn instances(a: &AugmentedClause) -> BTreeSet<Clause> {
    a.instances(DEFAULT_INSTANCE_CAP).unwrap()
}

fn clauses(list: &[&str]) -> BTreeSet<Clause> {
    list.iter().map(|s| clause(s)).collect()
}

// independent ground truth: every element by closing the generators under products
fn all_elements(g: &PermGroup) -> BTreeSet<Perm> {
    let n = g.num_vars();
    let mut seen: BTreeSet<Perm> = BTreeSet::new();
    seen.insert(Perm::identity(n));
    let mut todo = vec![Perm::identity(n)];
    while let Some(x) = todo.pop() {
        for s in g.generators() {
            let y = x.then(s);
            if seen.insert(y.clone()) {
                todo.push(y);
            }
        }
    }
    seen
}

fn closure_oracle(g: &PermGroup, k: &[Lit]) -> BTreeSet<Lit> {
    all_elements(g).iter().flat_map(|x| k.iter().map(|&l| x.apply_lit(l)).collect::<Vec<_>>()).collect()
}

// every signed permutation of `vars`
fn signed_perms(n: usize, vars: &[usize]) -> Vec<Perm> {
    let mut out = Vec::new();
    let k = vars.len();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        for mask in 0..(1u32 << k) {
            let mut map: Vec<Lit> = (1..=n).map(Lit::pos).collect();
            for (j, &src) in vars.iter().enumerate() {
                let img = Lit::pos(vars[idx[j]]);
                map[src - 1] = if mask >> j & 1 == 1 { -img } else { img };
            }
            out.push(Perm::from_positive_images(n, &map).unwrap());
        }
        // next lexicographic arrangement
        let Some(i) = (1..k).rev().find(|&i| idx[i - 1] < idx[i]) else { break };
        let j = (i..k).rev().find(|&j| idx[j] > idx[i - 1]).unwrap();
        idx.swap(i - 1, j);
        idx[i..].reverse();
    }
    out
}

fn stab_oracle(ks: &[Vec<Lit>], gs: &[PermGroup], ambient: &[usize]) -> BTreeSet<Perm> {
    let n = gs[0].num_vars();
    let closures: Vec<BTreeSet<Lit>> = ks.iter().zip(gs).map(|(k, g)| closure_oracle(g, k)).collect();
    let elements: Vec<BTreeSet<Perm>> = gs.iter().map(all_elements).collect();
    signed_perms(n, ambient)
        .into_iter()
        .filter(|w| {
            closures
                .iter()
                .zip(&elements)
                .all(|(c, els)| els.iter().any(|g| c.iter().all(|&l| g.apply_lit(l) == w.apply_lit(l))))
        })
        .collect()
}

fn golden_ks() -> Vec<Vec<Lit>> {
    vec![vec![lit("a"), lit("b")], vec![lit("-a"), lit("e")]]
}

fn golden_groups() -> Vec<PermGroup> {
    vec![sym_bcd(), group(&["(ed)"])]
}

#[test]
fn extension_set_of_worked_example() {
    let ambient: Vec<usize> = "bcde".chars().map(v).collect();
    let ext = extn_enumerate(&golden_ks(), &golden_groups(), &ambient, 1000).unwrap();
    let listed: BTreeSet<Perm> =
        ["()", "(bc)", "(bd)", "(bcd)", "(bdc)", "(cd)", "(ed)", "(edc)", "(bc)(de)"].iter().map(|s| perm(s)).collect();
    assert!(listed.is_subset(&ext));
    // b -> c -> e -> d -> b also satisfies both restrictions: b lands in {b,c,d}, e lands on d
    let extra: BTreeSet<Perm> = ext.difference(&listed).cloned().collect();
    assert_eq!(extra, BTreeSet::from([perm("(bced)")]));
    // not closed under composition
    assert!(ext.contains(&perm("(edc)")));
    assert!(!ext.contains(&perm("(edc)").pow(2)));
    assert_eq!(perm("(edc)").pow(2), perm("(ecd)"));
}

#[test]
fn extensions_without_constraints_are_everything() {
    let ambient = [1, 2, 3, 4];
    let ks = vec![vec![], vec![]];
    let ext = extn_enumerate(&ks, &golden_groups(), &ambient, 1000).unwrap();
    assert_eq!(ext.len(), 24);
    assert!(matches!(extn_enumerate(&ks, &golden_groups(), &[1, 2, 3, 4, 5], 100), Err(ResolutionError::TooLarge(_))));
}

#[test]
fn stable_extensions_of_worked_example() {
    let s = stab_group(&golden_ks(), &golden_groups());
    assert!(s.same_group(&group(&["(bc)"])));
    assert_eq!(s.order_u64(), Some(2));
}

#[test]
fn stable_extensions_with_trivial_groups_fix_the_clauses() {
    let ks = golden_ks();
    let gs = vec![PermGroup::trivial(N), PermGroup::trivial(N)];
    let s = stab_group(&ks, &gs);
    assert!(s.same_group(&PermGroup::full_on_vars(N, &[v('c'), v('d')])));
    let oracle = stab_oracle(&ks, &gs, &[1, 2, 3, 4, 5]);
    assert_eq!(s.elements(10_000).unwrap().into_iter().collect::<BTreeSet<_>>(), oracle);
}

#[test]
fn stable_extensions_match_enumeration() {
    let cases: Vec<(Vec<Vec<Lit>>, Vec<PermGroup>)> = vec![
        (golden_ks(), golden_groups()),
        (golden_ks(), vec![group(&["(bc)"]), group(&["(ed)"])]),
        (vec![vec![lit("a"), lit("b")], vec![lit("-a"), lit("d")]], vec![group(&["(bc)"]), group(&["(dc)"])]),
        (
            vec![vec![lit("a"), lit("b")], vec![lit("-a"), lit("c")]],
            vec![group(&["(a -a)(b -b)", "(cd)"]), group(&["(bc)"])],
        ),
    ];
    for (ks, gs) in cases {
        let s = stab_group(&ks, &gs);
        let got: BTreeSet<Perm> = s.elements(100_000).unwrap().into_iter().collect();
        assert_eq!(got, stab_oracle(&ks, &gs, &[1, 2, 3, 4, 5]), "{gs:?}");
    }
}

#[test]
fn disjoint_actions_combine() {
    let gs = vec![group(&["(bc)"]), group(&["(de)"])];
    let ks = vec![vec![lit("a"), lit("b")], vec![lit("-a"), lit("d")]];
    let s = stab_group(&ks, &gs);
    let joined = gs[0].join(&gs[1]);
    assert!(joined.is_subgroup_of(&s));
    let r = resolve_augmented(&aug("a b", gs[0].clone()), &aug("-a d", gs[1].clone()), None).unwrap();
    assert_eq!(r.group().order(), joined.order());
}

#[test]
fn resolving_with_a_ground_clause() {
    let r =
        resolve_augmented(&aug("a b", group(&["(bc)"])), &AugmentedClause::ground(clause("-a d"), N), None).unwrap();
    assert_eq!(r.base(), &clause("b d"));
    assert!(r.group().same_group(&group(&["(bc)"])));
    assert_eq!(instances(&r), clauses(&["b d", "c d"]));
}

#[test]
fn witness_choices_on_worked_pair() {
    let a = aug("a b", sym_bcd());
    let b = aug("-a e", group(&["(ed)"]));
    let one = PermGroup::trivial(N);
    let cases = [
        (one.clone(), one.clone(), 1u64, vec!["b e"]),
        (one.clone(), group(&["(ed)"]), 2, vec!["b e", "b d"]),
        (sym_bcd(), one.clone(), 6, vec!["b e", "c e", "d e"]),
        (sym_bcd(), group(&["(ed)"]), 2, vec!["b e", "c e"]),
        (group(&["(bc)"]), group(&["(ed)"]), 4, vec!["b e", "c e", "b d", "c d"]),
    ];
    for (h1, h2, order, inst) in cases {
        let w = ResolventWitness::new(h1, h2);
        let r = resolve_augmented(&a, &b, Some(&w)).unwrap();
        assert_eq!(r.base(), &clause("b e"));
        assert_eq!(r.group().order_u64(), Some(order));
        assert_eq!(instances(&r), clauses(&inst));
        assert!(check_resolvent(&r, &a, &b, &w));
    }
    let canonical = resolve_augmented(&a, &b, None).unwrap();
    assert!(canonical.group().same_group(&group(&["(bc)"])));
    let r = resolve_augmented(&a, &b, Some(&ResolventWitness::new(group(&["(bc)"]), group(&["(ed)"])))).unwrap();
    assert!(r.group().same_group(&group(&["(bc)", "(de)"])));
}

#[test]
fn witness_must_be_a_subgroup() {
    let a = aug("a b", group(&["(bc)"]));
    let b = aug("-a e", group(&["(ed)"]));
    let w = ResolventWitness::new(sym_bcd(), PermGroup::trivial(N));
    assert_eq!(resolve_augmented(&a, &b, Some(&w)).unwrap_err(), ResolutionError::WitnessNotSubgroup(1));
}

#[test]
fn checker_rejects_bad_candidates() {
    let a = aug("a b", sym_bcd());
    let b = aug("-a e", group(&["(ed)"]));
    let full = ResolventWitness::new(sym_bcd(), group(&["(ed)"]));
    assert!(!check_resolvent(&aug("b e", sym_bcd()), &a, &b, &full));
    assert!(check_resolvent(&aug("b e", sym_bcd()), &a, &b, &ResolventWitness::new(sym_bcd(), PermGroup::trivial(N))));
    assert!(!check_resolvent(&aug("b c", PermGroup::trivial(N)), &a, &b, &full));
    assert!(check_resolvent(&aug("b e", PermGroup::trivial(N)), &a, &b, &full));
}

#[test]
fn representative_choice_decides_resolvability() {
    let a =
        AugmentedClause::new(Clause::from_dimacs(&[1]).unwrap(), PermGroup::from_cycle_strs(2, &["(1 2)"]).unwrap())
            .unwrap();
    let b = AugmentedClause::ground(Clause::from_dimacs(&[-1]).unwrap(), 2);
    let r = resolve_augmented(&a, &b, None).unwrap();
    assert!(r.base().is_empty());
    let rebased = a.rebase(&Clause::from_dimacs(&[2]).unwrap()).unwrap();
    assert_eq!(resolve_augmented(&rebased, &b, None).unwrap_err(), ResolutionError::NotResolvable(0));
}

#[test]
fn instance_resolvents_need_not_share_a_length() {
    let a = aug("a b", group(&["(bc)"]));
    let b = aug("-a d", group(&["(dc)"]));
    let all = instance_resolvents(&a, &b, 100).unwrap();
    assert_eq!(all, clauses(&["b d", "b c", "c d", "c"]));
    let lens: BTreeSet<usize> = all.iter().map(Clause::len).collect();
    assert_eq!(lens, BTreeSet::from([1, 2]));
}

#[test]
fn golden_resolvents_are_sound_and_complete() {
    let pairs = [
        (aug("a b", group(&["(bc)"])), AugmentedClause::ground(clause("-a d"), N)),
        (aug("a b", sym_bcd()), aug("-a e", group(&["(ed)"]))),
        (aug("a b", group(&["(bc)"])), aug("-a e", group(&["(ed)"]))),
        (aug("a b", group(&["(bc)"])), aug("-a d", group(&["(dc)"]))),
    ];
    for (a, b) in &pairs {
        let r = resolve_augmented(a, b, None).unwrap();
        let sanctioned = instance_resolvents(a, b, 100).unwrap();
        assert!(instances(&r).is_subset(&sanctioned));
        assert!(r.is_instance(&resolve_ground(a.base(), b.base()).unwrap()));
        assert!(check_resolvent(&r, a, b, &ResolventWitness::new(a.group().clone(), b.group().clone())));
    }
}

// a group flipping an even number of the given variables
fn even_flips(n: usize, vars: &[usize]) -> PermGroup {
    let gens = vars[1..]
        .iter()
        .map(|&x| {
            Perm::from_cycles(n, &[vec![vars[0] as i32, -(vars[0] as i32)], vec![x as i32, -(x as i32)]]).unwrap()
        })
        .collect();
    PermGroup::new(n, gens)
}

#[test]
fn parity_resolution_group() {
    // x1 ∨ S ∨ T1 with S = {x2}, T1 = {x3}; ¬x1 ∨ S ∨ T2 with T2 = {x4}
    let n = 4;
    let a = AugmentedClause::new(Clause::from_dimacs(&[1, 2, 3]).unwrap(), even_flips(n, &[1, 2, 3])).unwrap();
    let b = AugmentedClause::new(Clause::from_dimacs(&[-1, 2, 4]).unwrap(), even_flips(n, &[1, 2, 4])).unwrap();
    let r = resolve_augmented(&a, &b, None).unwrap();
    assert_eq!(r.base(), &Clause::from_dimacs(&[2, 3, 4]).unwrap());
    // any sign on x2, and x3, x4 flipped together
    let expected: BTreeSet<Clause> =
        [[2, 3, 4], [-2, 3, 4], [2, -3, -4], [-2, -3, -4]].iter().map(|c| Clause::from_dimacs(c).unwrap()).collect();
    assert_eq!(instances(&r), expected);
}

#[test]
fn equal_closures_keep_the_group() {
    let n = 3;
    let g = PermGroup::from_cycle_strs(n, &["(1 -1)", "(2 3)"]).unwrap();
    let a = AugmentedClause::new(Clause::from_dimacs(&[1, 2]).unwrap(), g.clone()).unwrap();
    let b = AugmentedClause::new(Clause::from_dimacs(&[-1, 2]).unwrap(), g.clone()).unwrap();
    let w = ResolventWitness::new(g.clone(), g.clone());
    let r = resolve_augmented(&a, &b, Some(&w)).unwrap();
    let expected = AugmentedClause::new(Clause::from_dimacs(&[2]).unwrap(), g).unwrap();
    assert!(r.equivalent(&expected, 100).unwrap());
}

#[test]
fn enlarging_groups_keeps_a_witnessed_resolvent() {
    let w = ResolventWitness::new(group(&["(bc)"]), group(&["(ed)"]));
    let small = (aug("a b", group(&["(bc)"])), aug("-a e", group(&["(ed)"])));
    let r = resolve_augmented(&small.0, &small.1, Some(&w)).unwrap();
    assert!(check_resolvent(&r, &small.0, &small.1, &w));
    let big = (aug("a b", sym_bcd()), aug("-a e", group(&["(ed)"])));
    assert!(check_resolvent(&r, &big.0, &big.1, &w));
}

// does the conjunction of `from` entail `to`? brute force over all assignments
fn entails(from: &BTreeSet<Clause>, to: &Clause, n: usize) -> bool {
    (0..1u32 << n).all(|m| {
        let sat = |c: &Clause| c.iter().any(|l| (m >> (l.var() - 1) & 1 == 1) == l.is_positive());
        !from.iter().all(sat) || sat(to)
    })
}

#[test]
fn canonical_resolution_is_not_monotone() {
    let a = aug("a b", sym_bcd());
    let strong = aug("-a e", group(&["(ed)"]));
    let weak = AugmentedClause::ground(clause("-a e"), N);
    // the stronger premise entails the weaker one
    assert!(instances(&weak).is_subset(&instances(&strong)));
    let from_strong = instances(&resolve_augmented(&a, &strong, None).unwrap());
    let from_weak = instances(&resolve_augmented(&a, &weak, None).unwrap());
    assert!(from_weak.iter().any(|c| !entails(&from_strong, c, N)));
}

fn arb_group(n: usize) -> impl Strategy<Value = PermGroup> {
    proptest::collection::vec(crate::perm::tests::arb_perm(n), 0..=2).prop_map(move |g| PermGroup::new(n, g))
}

// two clauses over 4 variables that clash exactly on `pivot`
fn arb_pair() -> impl Strategy<Value = (AugmentedClause, AugmentedClause)> {
    let n = 4usize;
    let side = || proptest::collection::vec(proptest::option::of(any::<bool>()), 3);
    (arb_group(n), arb_group(n), side(), side(), 1..=n, any::<bool>()).prop_map(move |(g1, g2, s1, s2, pivot, sign)| {
        let others: Vec<usize> = (1..=n).filter(|&x| x != pivot).collect();
        let p = if sign { Lit::pos(pivot) } else { -Lit::pos(pivot) };
        let (mut l1, mut l2) = (vec![p], vec![-p]);
        for (i, &x) in others.iter().enumerate() {
            let signed = |pos: bool| if pos { Lit::pos(x) } else { -Lit::pos(x) };
            if let Some(a) = s1[i] {
                l1.push(signed(a));
            }
            // agree with the first clause wherever both mention x
            if let Some(b) = s2[i] {
                l2.push(signed(s1[i].unwrap_or(b)));
            }
        }
        (
            AugmentedClause::new(Clause::new(l1).unwrap(), g1).unwrap(),
            AugmentedClause::new(Clause::new(l2).unwrap(), g2).unwrap(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_pairs_resolve_soundly((a, b) in arb_pair()) {
        let r = resolve_augmented(&a, &b, None).unwrap();
        let sanctioned = instance_resolvents(&a, &b, 10_000).unwrap();
        prop_assert!(instances(&r).is_subset(&sanctioned));
        prop_assert!(r.is_instance(&resolve_ground(a.base(), b.base()).unwrap()));
        let w = ResolventWitness::new(a.group().clone(), b.group().clone());
        prop_assert!(check_resolvent(&r, &a, &b, &w));
        let ks = vec![a.base().lits().to_vec(), b.base().lits().to_vec()];
        let gs = vec![a.group().clone(), b.group().clone()];
        let ambient: Vec<usize> = closure_vars(&ks, &gs).into_iter().collect();
        let got: BTreeSet<Perm> = r.group().elements(1_000_000).unwrap().into_iter().collect();
        prop_assert_eq!(got, stab_oracle(&ks, &gs, &ambient));
    }
}
