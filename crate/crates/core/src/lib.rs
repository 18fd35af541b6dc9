//! Task-level learning from demonstration with inductive logic programming.
//!
//! The pipeline: a block-assembly domain generates labeled demonstrations
//! from a ground-truth rule set; per-target examples are extracted from the
//! grounded demonstrations; a learning-from-failures search induces definite
//! clauses for an ordered curriculum of target predicates, folding each
//! learned hypothesis back into the background knowledge; and a planner
//! consumes the learned rules to produce pick-and-place sequences.

pub mod bias;
pub mod blockworld;
pub mod curriculum;
pub mod harness;
pub mod hypothesis;
pub mod learn;
pub mod logic;
pub mod planner;
pub mod solve;

pub use logic::{
    canonical_clause_text, canonical_program_text, clause_equal_upto_renaming,
    program_equal_upto_renaming, rename_apart, theta_subsumes, unify, Atom, Clause, Program,
    Subst, Sym, Term, Var,
};
pub use solve::{answers, derivable_closure, entails, AbstractState, QueryBudget};
