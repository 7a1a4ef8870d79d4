//! Inputs shared by the benchmarks.

use zap_core::encoders::{encode_parity_theory, encode_pigeonhole, random_parity_theory, ParityForm, Theory};
use zap_core::{AugmentedClause, Clause, Perm, PermGroup};

/// Full signed group on variables 1..=n (every permutation and flip).
pub fn signed_symmetric(n: usize) -> (usize, Vec<Perm>) {
    let group = PermGroup::full_on_vars(n, &(1..=n).collect::<Vec<_>>());
    (n, group.generators().to_vec())
}

pub fn pigeonhole(holes: usize) -> Theory {
    encode_pigeonhole(holes).expect("holes >= 1")
}

pub fn parity(n: usize, m: usize, seed: u64) -> Theory {
    encode_parity_theory(&random_parity_theory(n, m, seed), n, ParityForm::FlipPairs).expect("valid constraints")
}

/// a ∨ b under Sym{b,c,d} and ¬a ∨ e under ⟨(d e)⟩, over a..e = 1..5.
pub fn worked_pair() -> (AugmentedClause, AugmentedClause) {
    let g1 = PermGroup::symmetric_on_vars(5, &[2, 3, 4]);
    let g2 = PermGroup::from_cycle_strs(5, &["(4 5)"]).expect("valid cycle");
    let a = AugmentedClause::new(Clause::from_dimacs(&[1, 2]).expect("clause"), g1).expect("in range");
    let b = AugmentedClause::new(Clause::from_dimacs(&[-1, 5]).expect("clause"), g2).expect("in range");
    (a, b)
}
