//! Hand-curated example sets that pack the discriminating constraints into
//! few examples: 13 for target_z, 50 for tower_from, 14 for tower_site.
//!
//! The curated task fixes block properties so that every property-based
//! alternative to the intended rules is falsified by some negative example:
//! stones share a shape, bricks share another, and the two glass blocks
//! reuse those shapes and the stone/brick colors, so color and shape rules
//! either miss a positive or hit a negative.

use std::collections::{BTreeMap, BTreeSet};

use crate::bias::PredSig;
use crate::blockworld::{GoalSpec, Task, WorldState};
use crate::learn::Example;
use crate::logic::parse::parse_atom;
use crate::logic::Sym;

fn block(id: &str, material: Option<&str>, color: &str, shape: &str) -> crate::blockworld::Block {
    crate::blockworld::Block {
        id: Sym::new(id),
        material: material.map(Sym::new),
        color: Sym::new(color),
        shape: Sym::new(shape),
    }
}

/// The canonical task the curated example files refer to.
pub fn curated_task() -> Task {
    let blocks = vec![
        block("bs1", Some("stone"), "red", "cube"),
        block("bs2", Some("stone"), "blue", "cube"),
        block("bs3", Some("stone"), "green", "cube"),
        block("bb1", Some("brick"), "red", "sphere"),
        block("bb2", Some("brick"), "blue", "sphere"),
        block("bb3", Some("brick"), "green", "sphere"),
        block("bg1", Some("glass"), "red", "cube"),
        block("bg2", Some("glass"), "blue", "sphere"),
        block("bd1", None, "yellow", "pyramid"),
        block("bd2", None, "purple", "cube"),
        block("bd3", None, "yellow", "sphere"),
        block("bd4", None, "purple", "pyramid"),
    ];
    let blocked: BTreeSet<Sym> = [Sym::new("s23"), Sym::new("s32")].into_iter().collect();
    let initial = WorldState {
        occupancy: BTreeMap::new(),
        blocked,
        available: blocks.iter().map(|b| b.id.clone()).collect(),
        held: None,
    };
    Task { name: "curated".into(), blocks, initial, goal: GoalSpec::new(vec![3, 3, 2]) }
}

fn pos(atoms: &[&str]) -> Vec<Example> {
    atoms.iter().map(|a| Example::pos(parse_atom(a).unwrap())).collect()
}

fn neg(atoms: &[&str]) -> Vec<Example> {
    atoms.iter().map(|a| Example::neg(parse_atom(a).unwrap())).collect()
}

/// 13 examples for target_z. The negatives kill the level-correlated shape
/// rules (via the glass blocks, which reuse the stone and brick shapes at
/// wrong levels), the material rules without a level literal, and one
/// distractor placement.
pub fn target_z_examples() -> (Vec<Example>, Vec<Example>) {
    (
        pos(&[
            "target_z(bs1,z1)",
            "target_z(bs2,z1)",
            "target_z(bs3,z1)",
            "target_z(bb1,z2)",
            "target_z(bb2,z2)",
            "target_z(bb3,z2)",
            "target_z(bg1,z3)",
            "target_z(bg2,z3)",
        ]),
        neg(&[
            "target_z(bb1,z1)",
            "target_z(bs1,z2)",
            "target_z(bg1,z1)",
            "target_z(bg2,z2)",
            "target_z(bd1,z1)",
        ]),
    )
}

/// 50 examples for tower_from. The positives include singleton towers at
/// every level and mixed-block towers; the negatives cover swapped orders,
/// repeated materials, skipped levels, wrong start levels for otherwise
/// valid structures, distractors at every position, and reversals.
pub fn tower_from_examples() -> (Vec<Example>, Vec<Example>) {
    (
        pos(&[
            "tower_from([bs1,bb1,bg1],z1)",
            "tower_from([bs2,bb2,bg2],z1)",
            "tower_from([bs3,bb3,bg1],z1)",
            "tower_from([bb1,bg1],z2)",
            "tower_from([bb2,bg2],z2)",
            "tower_from([bb3,bg1],z2)",
            "tower_from([bs1,bb2],z1)",
            "tower_from([bs2,bb1],z1)",
            "tower_from([bg1],z3)",
            "tower_from([bg2],z3)",
            "tower_from([bb1],z2)",
            "tower_from([bb3],z2)",
            "tower_from([bs1],z1)",
            "tower_from([bs3],z1)",
        ]),
        neg(&[
            "tower_from([bs1],z2)",
            "tower_from([bs1],z3)",
            "tower_from([bb1],z1)",
            "tower_from([bb1],z3)",
            "tower_from([bg1],z1)",
            "tower_from([bg1],z2)",
            "tower_from([bd1],z1)",
            "tower_from([bd2],z2)",
            "tower_from([bd3],z3)",
            "tower_from([bs2],z4)",
            "tower_from([bb1,bs1],z1)",
            "tower_from([bs1,bs2],z1)",
            "tower_from([bs1,bg1],z1)",
            "tower_from([bg1,bb1],z2)",
            "tower_from([bb1,bb2],z2)",
            "tower_from([bg1,bg2],z3)",
            "tower_from([bs1,bd1],z1)",
            "tower_from([bd1,bb1],z1)",
            "tower_from([bb1,bg2],z1)",
            "tower_from([bs1,bb1],z2)",
            "tower_from([bb1,bg1],z1)",
            "tower_from([bg2,bs2],z2)",
            "tower_from([bs3,bb3],z2)",
            "tower_from([bb1,bs1,bg1],z1)",
            "tower_from([bs1,bg1,bb1],z1)",
            "tower_from([bg1,bb1,bs1],z1)",
            "tower_from([bs1,bb1,bg1],z2)",
            "tower_from([bs1,bb1,bd1],z1)",
            "tower_from([bs1,bd1,bg1],z1)",
            "tower_from([bd1,bb1,bg1],z1)",
            "tower_from([bs1,bb1,bb2],z1)",
            "tower_from([bs1,bs2,bs3],z1)",
            "tower_from([bb1,bb2,bb3],z2)",
            "tower_from([bs2,bb2,bg1],z2)",
            "tower_from([bs1,bb2,bg2],z2)",
            "tower_from([bg1,bg2,bs1],z3)",
        ]),
    )
}

/// 14 examples for tower_site. Positives cover both horizontal and vertical
/// anchor neighbors and lists up to length three; negatives cover corner
/// (diagonal) sites, the anchor out of final position, and lists missing
/// the anchor.
pub fn tower_site_examples() -> (Vec<Example>, Vec<Example>) {
    (
        pos(&[
            "tower_site([s22])",
            "tower_site([s12,s22])",
            "tower_site([s21,s22])",
            "tower_site([s32,s22])",
            "tower_site([s23,s22])",
            "tower_site([s12,s21,s22])",
        ]),
        neg(&[
            "tower_site([s11,s22])",
            "tower_site([s13,s22])",
            "tower_site([s31,s22])",
            "tower_site([s22,s12])",
            "tower_site([s12,s22,s21])",
            "tower_site([s11,s12,s22])",
            "tower_site([s12,s21])",
            "tower_site([s12])",
        ]),
    )
}

/// The curated example sets in curriculum order.
pub fn curated_example_sets() -> Vec<(PredSig, (Vec<Example>, Vec<Example>))> {
    vec![
        (PredSig::new("target_z", 2), target_z_examples()),
        (PredSig::new("tower_from", 2), tower_from_examples()),
        (PredSig::new("tower_site", 1), tower_site_examples()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockworld::{ground_truth_program, task_background};
    use crate::solve::{entails, QueryBudget};

    #[test]
    fn curated_counts_are_13_50_14() {
        let sets = curated_example_sets();
        let counts: Vec<usize> = sets.iter().map(|(_, (p, n))| p.len() + n.len()).collect();
        assert_eq!(counts, vec![13, 50, 14]);
    }

    #[test]
    fn curated_labels_agree_with_ground_truth() {
        let task = curated_task();
        let program = task_background(&task).union(&ground_truth_program());
        let budget = QueryBudget::default();
        for (pred, (pos, neg)) in curated_example_sets() {
            for e in &pos {
                assert!(
                    entails(&program, &e.atom, budget).unwrap(),
                    "{pred}: curated positive {} is not derivable",
                    e.atom
                );
            }
            for e in &neg {
                assert!(
                    !entails(&program, &e.atom, budget).unwrap(),
                    "{pred}: curated negative {} is derivable",
                    e.atom
                );
            }
        }
    }
}
