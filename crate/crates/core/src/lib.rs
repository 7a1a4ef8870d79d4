//! Satisfiability over augmented clauses: ground clauses paired with
//! permutation groups of literals.

pub mod augmented;
pub mod clause;
pub mod dimacs;
pub mod encoders;
pub mod group;
pub mod oracle;
pub mod perm;
pub mod resolution;
pub mod solver;

pub use augmented::{AugmentedClause, AugmentedError, Instance, Visit};
pub use clause::{resolve_ground, Assignment, Clause, ClauseError, Lit, Reason, Value};
pub use group::{GroupError, PermGroup};
pub use perm::{Perm, PermError};
pub use resolution::{resolve_augmented, stab_group, ResolutionError, ResolventWitness};
