use proptest::prelude::*;
use rand::{Rng, SeedableRng};

use super::*;
use crate::encoders::{encode_cardinality, encode_parity, encode_pigeonhole, pigeonhole_var, ParityForm, Theory};
use crate::oracle::{dpll_solve, gf2_solve, GroundTheory};

const CAP: usize = 1 << 16;

fn cl(xs: &[i32]) -> Clause {
    Clause::from_dimacs(xs).unwrap()
}

fn lit(x: i32) -> Lit {
    Lit::from_dimacs(x)
}

/// p_ij for the 3-hole problem as a DIMACS literal.
fn p(i: usize, j: usize) -> i32 {
    pigeonhole_var(i, j, 3) as i32
}

fn ground_db(n: usize, clauses: &[Clause]) -> Vec<AugmentedClause> {
    clauses.iter().map(|c| AugmentedClause::ground(c.clone(), n)).collect()
}

fn traced() -> SolverConfig {
    SolverConfig { trace: true, ..SolverConfig::default() }
}

fn assert_model(t: &GroundTheory, out: &Outcome) {
    if let Outcome::Sat(m) = out {
        assert!(t.satisfied_by(m), "solver model violates the theory");
    }
}

#[test]
fn ground_propagation_basics() {
    let mut a = Assignment::new(1);
    assert!(matches!(unit_propagate_ground(&[cl(&[1])], &mut a), Propagation::Extended));
    assert_eq!(a.entries().len(), 1);
    assert_eq!(a.value(lit(1)), Value::True);

    let mut a = Assignment::new(1);
    match unit_propagate_ground(&[cl(&[1]), cl(&[-1])], &mut a) {
        Propagation::Conflict(c) => assert!(c.is_empty()),
        Propagation::Extended => panic!("expected a conflict"),
    }
}

#[test]
fn ground_pigeonhole_first_block() {
    let t = encode_pigeonhole(3).unwrap();
    let ground: Vec<Clause> = t.expand(CAP).unwrap().into_iter().collect();
    let mut a = Assignment::new(12);
    a.push(lit(p(1, 1)), Reason::Branch);
    assert!(matches!(unit_propagate_ground(&ground, &mut a), Propagation::Extended));
    let got: Vec<(Lit, Clause)> = a.entries()[1..].iter().map(|(l, r)| (*l, r.base().unwrap().clone())).collect();
    let want: Vec<(Lit, Clause)> = (2..=4).map(|i| (lit(-p(i, 1)), cl(&[-p(1, 1), -p(i, 1)]))).collect();
    assert_eq!(got, want);
}

#[test]
fn unit_instances_under_the_pigeonhole_group() {
    let t = encode_pigeonhole(3).unwrap();
    let mut a = Assignment::new(12);
    assert!(find_unit_instance(&t.clauses[0], &a).is_none());
    a.push(lit(p(1, 1)), Reason::Branch);
    let inst = find_unit_instance(&t.clauses[0], &a).unwrap();
    assert!(inst.clause.contains(lit(-p(1, 1))));
    assert_eq!(inst.clause.len(), 2);
    let other = inst.clause.iter().find(|&l| l != lit(-p(1, 1))).unwrap();
    assert!((2..=4).any(|i| other == lit(-p(i, 1))));
    assert_eq!(inst.perm.apply_clause(t.clauses[0].base()), inst.clause);
}

#[test]
fn relevance_examples() {
    let ac =
        AugmentedClause::new(cl(&[1, 2, 3]), crate::group::PermGroup::symmetric_on_vars(4, &[1, 2, 3, 4])).unwrap();
    let mut a = Assignment::new(4);
    assert!(has_relevant_instance(&ac, &a, 2));
    assert!(!has_relevant_instance(&ac, &a, 1));
    a.push(lit(-1), Reason::Branch);
    assert!(has_relevant_instance(&ac, &a, 1));
    assert!(!has_relevant_instance(&ac, &a, 0));
    a.push(lit(-2), Reason::Branch);
    a.push(lit(-3), Reason::Branch);
    // -1, -2, -3 falsify one instance outright
    assert!(has_relevant_instance(&ac, &a, 0));
    assert!(find_falsified_instance(&ac, &a).is_some());
}

fn propagated(s: &Solver, from: usize) -> Vec<(Lit, Clause)> {
    s.assignment().entries()[from..]
        .iter()
        .map(|(l, r)| (*l, r.base().cloned().unwrap_or_else(Clause::empty)))
        .collect()
}

#[test]
fn pigeonhole_trace_of_four_pigeons() {
    let t = encode_pigeonhole(3).unwrap();
    let mut s = Solver::new(12, t.clauses.clone(), traced()).unwrap();
    assert!(matches!(s.propagate().unwrap(), Propagation::Extended));
    s.decide(lit(p(1, 1)));
    assert!(matches!(s.propagate().unwrap(), Propagation::Extended));
    let first: Vec<(Lit, Clause)> = (2..=4).map(|i| (lit(-p(i, 1)), cl(&[-p(1, 1), -p(i, 1)]))).collect();
    assert_eq!(propagated(&s, 1), first);

    s.decide(lit(p(2, 2)));
    let conflict = match s.propagate().unwrap() {
        Propagation::Conflict(c) => c,
        Propagation::Extended => panic!("the second branch must fail"),
    };
    let second: Vec<(Lit, Clause)> = vec![
        (lit(-p(1, 2)), cl(&[-p(2, 2), -p(1, 2)])),
        (lit(-p(3, 2)), cl(&[-p(2, 2), -p(3, 2)])),
        (lit(-p(4, 2)), cl(&[-p(2, 2), -p(4, 2)])),
        (lit(p(3, 3)), cl(&[p(3, 1), p(3, 2), p(3, 3)])),
        (lit(p(4, 3)), cl(&[p(4, 1), p(4, 2), p(4, 3)])),
    ];
    assert_eq!(propagated(&s, 5), second);
    assert_eq!(s.trace().last(), Some(&TraceEvent::Conflict(cl(&[-p(3, 3), -p(4, 3)]))));
    // the falsified instance resolved against the reason for p43
    assert_eq!(conflict.base(), &cl(&[-p(3, 3), p(4, 1), p(4, 2)]));

    // keep learning until the trail is back at the first branch
    assert!(s.learn(conflict));
    let mut learned = Vec::new();
    while s.assignment().len() > 4 || learned.is_empty() {
        match s.propagate().unwrap() {
            Propagation::Conflict(c) => {
                learned.push(c.clone());
                assert!(s.learn(c));
            }
            Propagation::Extended => break,
        }
    }
    // some learned clause has p41 ∨ ¬p22 ∨ p31 and its hole swap among its instances
    let target = cl(&[p(4, 1), -p(2, 2), p(3, 1)]);
    let swapped = cl(&[p(4, 1), -p(2, 3), p(3, 1)]);
    let hit = learned.iter().find(|c| c.is_instance(&target)).expect("p41 ∨ ¬p22 ∨ p31 is learned");
    assert!(hit.is_instance(&swapped));
}

#[test]
fn pigeonhole_branches_once_per_hole_but_one() {
    for n in 3..=7 {
        let t = encode_pigeonhole(n).unwrap();
        for seed in 0..5 {
            let config = SolverConfig { seed, ..SolverConfig::default() };
            let (out, stats) = rbl_solve(t.num_vars, &t.clauses, config).unwrap();
            assert_eq!(out, Outcome::Unsat);
            assert_eq!(stats.branches, (n - 1) as u64, "n={n} seed={seed}");
            assert_eq!(stats.fallbacks, 0);
        }
    }
}

#[test]
fn pigeonhole_branches_hit_unplaced_pigeons() {
    let t = encode_pigeonhole(5).unwrap();
    for seed in 0..5 {
        let config = SolverConfig { seed, trace: true, ..SolverConfig::default() };
        let mut s = Solver::new(t.num_vars, t.clauses.clone(), config).unwrap();
        assert_eq!(s.solve().unwrap(), Outcome::Unsat);
        // each branch before the first conflict values exactly the other pigeons in its hole
        let events = s.trace();
        let first_conflict = events.iter().position(|e| matches!(e, TraceEvent::Conflict(_))).unwrap();
        let mut i = 0;
        let mut blocks = 0;
        while i < first_conflict {
            if let TraceEvent::Branch(b) = events[i] {
                assert!(b.is_positive());
                let hole = (b.var() - 1) % 5 + 1;
                let pigeon = (b.var() - 1) / 5 + 1;
                let block: Vec<Lit> = events[i + 1..]
                    .iter()
                    .take_while(|e| matches!(e, TraceEvent::Propagate { .. }))
                    .map(|e| match e {
                        TraceEvent::Propagate { lit, .. } => *lit,
                        _ => unreachable!(),
                    })
                    .collect();
                if blocks < 5 - 2 {
                    let mut want: Vec<Lit> =
                        (1..=6).filter(|&q| q != pigeon).map(|q| -Lit::pos(pigeonhole_var(q, hole, 5))).collect();
                    let mut got = block.clone();
                    want.sort();
                    got.sort();
                    assert_eq!(got, want, "seed {seed} block {blocks}");
                }
                blocks += 1;
                i += 1 + block.len();
            } else {
                i += 1;
            }
        }
        // no branch after the first conflict
        assert!(!events[first_conflict..].iter().any(|e| matches!(e, TraceEvent::Branch(_))));
    }
}

#[test]
fn tiny_satisfiable_theory() {
    let db = ground_db(2, &[cl(&[1, 2])]);
    let (out, _) = rbl_solve(2, &db, SolverConfig::default()).unwrap();
    match out {
        Outcome::Sat(m) => assert!(m[0] || m[1]),
        Outcome::Unsat => panic!("x1 ∨ x2 is satisfiable"),
    }
}

#[test]
fn branch_budget_is_reported() {
    let t = encode_pigeonhole(4).unwrap();
    let config = SolverConfig { max_branches: Some(1), ..SolverConfig::default() };
    assert_eq!(rbl_solve(t.num_vars, &t.clauses, config).unwrap_err(), SolverError::BranchBudget(1));
}

#[test]
fn branching_is_reproducible() {
    let t = encode_pigeonhole(5).unwrap();
    let run = |seed| {
        let mut s =
            Solver::new(t.num_vars, t.clauses.clone(), SolverConfig { seed, trace: true, ..Default::default() })
                .unwrap();
        s.solve().unwrap();
        s.trace().to_vec()
    };
    assert_eq!(run(3), run(3));
}

fn random_3sat(n: usize, m: usize, rng: &mut impl Rng) -> Vec<Clause> {
    (0..m)
        .map(|_| {
            let mut vars: Vec<usize> = Vec::new();
            while vars.len() < 3 {
                let v = rng.gen_range(1..=n);
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
            Clause::new(vars.iter().map(|&v| if rng.gen_bool(0.5) { Lit::pos(v) } else { -Lit::pos(v) })).unwrap()
        })
        .collect()
}

#[test]
fn ground_solving_matches_the_oracle_and_bounds_learning() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 12;
    for round in 0..40 {
        let m = [24, 52, 72][round % 3];
        let clauses = random_3sat(n, m, &mut rng);
        let g = GroundTheory::new(n, clauses.iter().map(Clause::to_dimacs).collect());
        let want = dpll_solve(&g).unwrap().is_sat();
        for k in 0..=3 {
            let config = SolverConfig { relevance: k, seed: round as u64, ..SolverConfig::default() };
            let (out, stats) = rbl_solve(n, &ground_db(n, &clauses), config).unwrap();
            assert_eq!(out.is_sat(), want, "round {round} k={k}");
            assert_model(&g, &out);
            assert!(stats.max_learned as u64 <= (2 * n as u64).pow(k as u32 + 1));
        }
    }
}

#[test]
fn learned_clauses_are_entailed() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..30 {
        let n = 8;
        let cs = crate::encoders::random_parity_theory(n, 5, seed);
        let t = crate::encoders::encode_parity_theory(&cs, n, ParityForm::FlipPairs).unwrap();
        let ground = t.ground_theory(CAP).unwrap();
        let config = SolverConfig { trace: true, seed: rng.gen(), relevance: 1, ..Default::default() };
        let mut s = Solver::new(n, t.clauses.clone(), config).unwrap();
        let out = s.solve().unwrap();
        assert_eq!(out.is_sat(), gf2_solve(&cs).is_sat());
        assert_model(&ground, &out);
        for e in s.trace() {
            if let TraceEvent::Learn(c) = e {
                // C ∧ ¬c has no model
                let mut neg = ground.clone();
                neg.clauses.extend(c.iter().map(|l| vec![-l.dimacs()]));
                assert!(!dpll_solve(&neg).unwrap().is_sat(), "learned {c} is not entailed");
            }
        }
    }
}

#[test]
fn parity_theories_match_elimination() {
    for seed in 0..60 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=12);
        let m = rng.gen_range(1..=8);
        let cs = crate::encoders::random_parity_theory(n, m, seed);
        let t = crate::encoders::encode_parity_theory(&cs, n, ParityForm::FlipPairs).unwrap();
        let (out, _) = rbl_solve(n, &t.clauses, SolverConfig { seed, ..Default::default() }).unwrap();
        assert_eq!(out.is_sat(), gf2_solve(&cs).is_sat(), "seed {seed}");
        if let Outcome::Sat(m) = &out {
            assert!(cs.iter().all(|c| c.holds(m)));
        }
    }
}

#[test]
fn first_unassigned_branching() {
    let t = encode_pigeonhole(4).unwrap();
    let config = SolverConfig { heuristic: Heuristic::FirstUnassigned, ..Default::default() };
    let (out, stats) = rbl_solve(t.num_vars, &t.clauses, config).unwrap();
    assert_eq!(out, Outcome::Unsat);
    assert_eq!(stats.fallbacks, 0);
}

#[test]
fn pos_unsat_falls_back_without_positive_candidates() {
    // every unsatisfied instance is purely negative
    let db = ground_db(3, &[cl(&[-1, -2]), cl(&[-2, -3])]);
    let (out, stats) = rbl_solve(3, &db, SolverConfig::default()).unwrap();
    assert!(out.is_sat());
    assert!(stats.fallbacks >= 1);
}

/// A small mixed database: one cardinality clause, one parity clause, a few ground clauses.
fn mixed_db(seed: u64) -> Theory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 6;
    // x1 + .. + x4 ≥ k, with the group widened to all six variables
    let card = encode_cardinality(4, rng.gen_range(1..=3)).unwrap().clause;
    let card = AugmentedClause::new(card.base().clone(), crate::group::PermGroup::symmetric_on_vars(n, &[1, 2, 3, 4]))
        .unwrap();
    let vars: Vec<usize> = (3..=6).filter(|_| rng.gen_bool(0.7)).collect();
    let vars = if vars.is_empty() { vec![5] } else { vars };
    let par = encode_parity(&crate::encoders::ParityConstraint::new(vars, rng.gen_bool(0.5)), n, ParityForm::FlipPairs)
        .unwrap()
        .clause;
    let mut clauses = vec![card, par];
    clauses.extend(ground_db(n, &random_3sat(n, rng.gen_range(0..=8), &mut rng)));
    Theory { num_vars: n, clauses }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn augmented_and_expanded_databases_agree(seed in 0u64..10_000, k in 0usize..=3) {
        let t = mixed_db(seed);
        let ground = t.ground_theory(CAP).unwrap();
        let expanded: Vec<Clause> = t.expand(CAP).unwrap().into_iter().collect();
        let config = SolverConfig { relevance: k, seed, ..Default::default() };
        let (a, _) = rbl_solve(t.num_vars, &t.clauses, config.clone()).unwrap();
        let (b, _) = rbl_solve(t.num_vars, &ground_db(t.num_vars, &expanded), config).unwrap();
        prop_assert_eq!(a.is_sat(), b.is_sat());
        prop_assert_eq!(a.is_sat(), dpll_solve(&ground).unwrap().is_sat());
        assert_model(&ground, &a);
        assert_model(&ground, &b);
    }
}
