//! The ordered learning curriculum over the three target predicates:
//! extract per-target examples from grounded demonstrations, inject prior
//! knowledge where scheduled, learn each target in order, and fold every
//! found hypothesis back into the background before the next target.

use std::collections::{BTreeMap, BTreeSet};

use crate::bias::{parse_bias, BiasSpec, PredSig};
use crate::blockworld::{
    block_list_term, canonical_site_list, site_list_term, Corruption, DemoLabel, Demonstration,
    Level,
};
use crate::learn::{
    learn_target, Example, Label, LearnError, LearnResult, LearnStatus, Provenance, SearchLimits,
};
use crate::logic::{Atom, Program, Sym, Term};
use crate::solve::QueryBudget;

/// Example-extraction rule identifiers, one per target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractorKind {
    /// (block, level) pairs read from final tower states.
    FinalTowerLevels,
    /// (block-list, start-level) pairs per tower, including suffixes of
    /// positive towers, which are towers from higher levels.
    TowerLists,
    /// The canonical site-list atom per demonstration, with suffixes of
    /// positive lists.
    SiteLists,
}

impl ExtractorKind {
    pub fn name(self) -> &'static str {
        match self {
            ExtractorKind::FinalTowerLevels => "final_tower_levels",
            ExtractorKind::TowerLists => "tower_lists",
            ExtractorKind::SiteLists => "site_lists",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "final_tower_levels" => Some(ExtractorKind::FinalTowerLevels),
            "tower_lists" => Some(ExtractorKind::TowerLists),
            "site_lists" => Some(ExtractorKind::SiteLists),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TargetSpec {
    pub pred: PredSig,
    pub bias: BiasSpec,
    pub extractor: ExtractorKind,
}

/// Extraction switches. Both default on; the example flavors they control
/// can be studied separately by turning them off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ExtractOptions {
    /// Emit wrong-level negatives for distractor blocks, not only for
    /// material blocks.
    pub distractor_negatives: bool,
    /// Emit suffix examples of positive towers and site lists.
    pub suffix_positives: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { distractor_negatives: true, suffix_positives: true }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CurriculumError {
    #[error("extraction conflict: {0} received both labels")]
    ExtractionConflict(Atom),
    #[error("target {target} depends on {missing}, which is neither background nor learned earlier")]
    DependencyViolation { target: PredSig, missing: PredSig },
    #[error(transparent)]
    Learn(#[from] LearnError),
}

fn example(atom: Atom, label: Label, demo: &Demonstration) -> Example {
    Example {
        atom,
        label,
        provenance: Provenance { demo: demo.id.clone(), state_index: demo.states.len() - 1 },
    }
}

fn target_z_atom(block: &Sym, level: Level) -> Atom {
    Atom::new("target_z", vec![Term::Const(block.clone()), Term::Const(level.sym())])
}

fn tower_from_atom(blocks: &[Sym], start: Level) -> Atom {
    Atom::new("tower_from", vec![block_list_term(blocks), Term::Const(start.sym())])
}

fn tower_site_atom(sites: &[Sym]) -> Atom {
    Atom::new("tower_site", vec![site_list_term(sites)])
}

/// Extract the labeled examples one target reads from a set of grounded
/// demonstrations. Positive demonstrations contribute through their final
/// tower state; negative demonstrations contribute only the atoms their
/// recorded corruption falsifies.
pub fn extract_examples(
    demos: &[Demonstration],
    target: &TargetSpec,
    options: ExtractOptions,
) -> Result<(Vec<Example>, Vec<Example>), CurriculumError> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for demo in demos {
        let state = demo.final_state();
        let (towers, _) = state.towers();
        match (demo.label, &demo.corruption) {
            (DemoLabel::Positive, _) => match target.extractor {
                ExtractorKind::FinalTowerLevels => {
                    for stack in towers.values() {
                        for (i, b) in stack.iter().enumerate() {
                            let level = Level::from_index(i as u8 + 1).unwrap();
                            pos.push(example(target_z_atom(b, level), Label::Pos, demo));
                        }
                    }
                }
                ExtractorKind::TowerLists => {
                    for stack in towers.values() {
                        let suffixes = if options.suffix_positives { stack.len() } else { 1 };
                        for start in 0..suffixes {
                            let level = Level::from_index(start as u8 + 1).unwrap();
                            pos.push(example(
                                tower_from_atom(&stack[start..], level),
                                Label::Pos,
                                demo,
                            ));
                        }
                    }
                }
                ExtractorKind::SiteLists => {
                    let list = canonical_site_list(&towers.keys().cloned().collect());
                    let suffixes = if options.suffix_positives { list.len() } else { 1 };
                    for start in 0..suffixes {
                        pos.push(example(tower_site_atom(&list[start..]), Label::Pos, demo));
                    }
                }
            },
            (DemoLabel::Negative, Corruption::PermutedMaterials { site, lower }) => {
                let stack = &towers[site];
                match target.extractor {
                    ExtractorKind::FinalTowerLevels => {
                        let upper = lower.succ().unwrap();
                        for level in [*lower, upper] {
                            let b = &stack[level.index() as usize - 1];
                            neg.push(example(target_z_atom(b, level), Label::Neg, demo));
                        }
                    }
                    ExtractorKind::TowerLists => {
                        neg.push(example(tower_from_atom(stack, Level::Z1), Label::Neg, demo));
                    }
                    ExtractorKind::SiteLists => {}
                }
            }
            (DemoLabel::Negative, Corruption::BadSite { .. }) => {
                if target.extractor == ExtractorKind::SiteLists {
                    let list = canonical_site_list(&towers.keys().cloned().collect());
                    neg.push(example(tower_site_atom(&list), Label::Neg, demo));
                }
            }
            (DemoLabel::Negative, Corruption::DistractorUsed { site, level, distractor }) => {
                match target.extractor {
                    ExtractorKind::FinalTowerLevels => {
                        if options.distractor_negatives {
                            neg.push(example(
                                target_z_atom(distractor, *level),
                                Label::Neg,
                                demo,
                            ));
                        }
                    }
                    ExtractorKind::TowerLists => {
                        neg.push(example(
                            tower_from_atom(&towers[site], Level::Z1),
                            Label::Neg,
                            demo,
                        ));
                    }
                    ExtractorKind::SiteLists => {}
                }
            }
            (DemoLabel::Negative, Corruption::None) => {}
        }
    }
    let pos_atoms: BTreeSet<&Atom> = pos.iter().map(|e| &e.atom).collect();
    if let Some(conflict) = neg.iter().find(|e| pos_atoms.contains(&e.atom)) {
        return Err(CurriculumError::ExtractionConflict(conflict.atom.clone()));
    }
    Ok((pos, neg))
}

/// Fold clauses into the background. Injected clauses are indistinguishable
/// from learned ones afterwards; duplicates are dropped.
pub fn inject_knowledge(background: &Program, clauses: &Program) -> Program {
    background.union(clauses)
}

#[derive(Debug, Clone)]
pub struct CurriculumResult {
    pub per_target: Vec<(PredSig, LearnResult)>,
    pub final_background: Program,
    pub final_hypothesis: Program,
    /// False when some target did not reach `Found` and the run stopped with
    /// a partial result.
    pub completed: bool,
}

#[derive(Debug, Clone)]
pub struct CurriculumParams {
    pub limits: SearchLimits,
    pub budget: QueryBudget,
    pub extract: ExtractOptions,
}

impl Default for CurriculumParams {
    fn default() -> Self {
        CurriculumParams {
            limits: SearchLimits::default(),
            // candidate testing needs far less than the general default and
            // divergent candidates burn their whole budget, so keep it tight
            budget: QueryBudget { max_depth: 50, max_steps: 4000 },
            extract: ExtractOptions::default(),
        }
    }
}

/// Predicates the engine treats as built in.
fn primitive_sigs() -> Vec<PredSig> {
    vec![PredSig::new("head", 2), PredSig::new("tail", 2), PredSig::new("empty", 1)]
}

fn check_dependencies(
    background: &Program,
    targets: &[TargetSpec],
    injections: &BTreeMap<String, Program>,
) -> Result<(), CurriculumError> {
    let mut available: BTreeSet<PredSig> = background
        .predicates()
        .into_iter()
        .map(|(name, arity)| PredSig { name, arity })
        .collect();
    available.extend(primitive_sigs());
    for inj in injections.values() {
        available
            .extend(inj.predicates().into_iter().map(|(name, arity)| PredSig { name, arity }));
    }
    for t in targets {
        for b in &t.bias.body {
            if b.sig == t.pred {
                continue;
            }
            if !available.contains(&b.sig) {
                return Err(CurriculumError::DependencyViolation {
                    target: t.pred.clone(),
                    missing: b.sig.clone(),
                });
            }
        }
        available.insert(t.pred.clone());
    }
    Ok(())
}

/// Run the ordered curriculum on demonstrations, extracting the per-target
/// example sets internally. Injections keyed by target name are folded into
/// the background immediately before that target is learned.
pub fn run_curriculum(
    initial_background: &Program,
    targets: &[TargetSpec],
    demos: &[Demonstration],
    injections: &BTreeMap<String, Program>,
    params: &CurriculumParams,
) -> Result<CurriculumResult, CurriculumError> {
    let mut example_sets = Vec::new();
    for t in targets {
        example_sets.push(extract_examples(demos, t, params.extract)?);
    }
    run_curriculum_with_examples(initial_background, targets, &example_sets, injections, params)
}

/// Run the curriculum on pre-extracted example sets (one per target, in
/// target order). Used by the demonstration-count sweeps and the curated
/// example files.
pub fn run_curriculum_with_examples(
    initial_background: &Program,
    targets: &[TargetSpec],
    example_sets: &[(Vec<Example>, Vec<Example>)],
    injections: &BTreeMap<String, Program>,
    params: &CurriculumParams,
) -> Result<CurriculumResult, CurriculumError> {
    assert_eq!(targets.len(), example_sets.len());
    check_dependencies(initial_background, targets, injections)?;
    let mut background = initial_background.clone();
    let mut hypothesis = Program::new();
    let mut per_target = Vec::new();
    let mut completed = true;
    for (t, (pos, neg)) in targets.iter().zip(example_sets.iter()) {
        if let Some(inj) = injections.get(t.pred.name.as_str()) {
            background = inject_knowledge(&background, inj);
        }
        let result = learn_target(&background, &t.bias, pos, neg, params.limits, params.budget)?;
        let found = result.status == LearnStatus::Found;
        background = background.union(&result.hypothesis);
        hypothesis = hypothesis.union(&result.hypothesis);
        per_target.push((t.pred.clone(), result));
        if !found {
            completed = false;
            break;
        }
    }
    Ok(CurriculumResult {
        per_target,
        final_background: background,
        final_hypothesis: hypothesis,
        completed,
    })
}

const TARGET_Z_BIAS: &str = "\
head(target_z/2). type(target_z, (block, level)).
body(material/2). type(material, (block, material)).
body(color/2). type(color, (block, color)).
body(shape/2). type(shape, (block, shape)).
body(stone/1). type(stone, (material)).
body(brick/1). type(brick, (material)).
body(glass/1). type(glass, (material)).
body(wood/1). type(wood, (material)).
body(red/1). type(red, (color)).
body(blue/1). type(blue, (color)).
body(green/1). type(green, (color)).
body(yellow/1). type(yellow, (color)).
body(purple/1). type(purple, (color)).
body(cube/1). type(cube, (shape)).
body(sphere/1). type(sphere, (shape)).
body(pyramid/1). type(pyramid, (shape)).
body(z1/1). type(z1, (level)).
body(z2/1). type(z2, (level)).
body(z3/1). type(z3, (level)).
body(z4/1). type(z4, (level)).
max_vars(3). max_body(3). max_clauses(3).
";

const TOWER_FROM_BIAS: &str = "\
head(tower_from/2). type(tower_from, (blocklist, level)).
body(head/2). type(head, (blocklist, block)).
body(tail/2). type(tail, (blocklist, blocklist)).
body(empty/1). type(empty, (blocklist)).
body(succ_z/2). type(succ_z, (level, level)).
body(target_z/2). type(target_z, (block, level)).
body(tower_from/2).
max_vars(5). max_body(5). max_clauses(2).
enable_recursion.
";

const TOWER_SITE_BIAS: &str = "\
head(tower_site/1). type(tower_site, (sitelist)).
body(head/2). type(head, (sitelist, site)).
body(tail/2). type(tail, (sitelist, sitelist)).
body(empty/1). type(empty, (sitelist)).
body(goal_anchor/1). type(goal_anchor, (site)).
body(adj_h/2). type(adj_h, (site, site)).
body(adj_v/2). type(adj_v, (site, site)).
body(diagonal_adj/2). type(diagonal_adj, (site, site)).
body(tower_site/1).
max_vars(4). max_body(5). max_clauses(3).
enable_recursion.
";

/// The curriculum in order: material-to-level, then the recursive tower
/// definition reusing it, then admissible site lists.
pub fn default_targets() -> Vec<TargetSpec> {
    vec![
        TargetSpec {
            pred: PredSig::new("target_z", 2),
            bias: parse_bias(TARGET_Z_BIAS).expect("target_z bias parses"),
            extractor: ExtractorKind::FinalTowerLevels,
        },
        TargetSpec {
            pred: PredSig::new("tower_from", 2),
            bias: parse_bias(TOWER_FROM_BIAS).expect("tower_from bias parses"),
            extractor: ExtractorKind::TowerLists,
        },
        TargetSpec {
            pred: PredSig::new("tower_site", 1),
            bias: parse_bias(TOWER_SITE_BIAS).expect("tower_site bias parses"),
            extractor: ExtractorKind::SiteLists,
        },
    ]
}

/// The injection schedule: the wood-to-top-level mapping enters the
/// background right before tower_from, the first target whose bias draws on
/// target_z, so that target_z learning itself never sees it.
pub fn default_injections() -> BTreeMap<String, Program> {
    let mut m = BTreeMap::new();
    m.insert("tower_from".to_string(), crate::blockworld::wood_injection());
    m
}

pub mod curated;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockworld::{
        generate_demonstrations, ground_truth_program, sample_experiment, task_background,
        ClassCounts, DemoGenConfig, Task,
    };
    use crate::logic::parse::parse_atom;

    fn train_demos(seed: u64) -> (Task, Vec<Demonstration>) {
        let exp = sample_experiment(seed);
        let task = exp.train[0].clone();
        let counts: ClassCounts = DemoGenConfig::default().train;
        let demos = generate_demonstrations(
            &task,
            &ground_truth_program(),
            seed,
            &counts,
            QueryBudget::default(),
        )
        .unwrap();
        (task, demos)
    }

    #[test]
    fn per_task_example_files_total_209() {
        let (_, demos) = train_demos(0);
        let targets = default_targets();
        let opts = ExtractOptions::default();
        let mut total = 0;
        let mut per_target = Vec::new();
        for t in &targets {
            let (pos, neg) = extract_examples(&demos, t, opts).unwrap();
            per_target.push((t.pred.name.as_str().to_string(), pos.len(), neg.len()));
            total += pos.len() + neg.len();
        }
        assert_eq!(total, 209, "per-target example counts: {per_target:?}");
    }

    #[test]
    fn positive_demo_contributes_to_all_targets() {
        let (_, demos) = train_demos(1);
        let first_pos = demos.iter().find(|d| d.label == DemoLabel::Positive).unwrap();
        let one = vec![first_pos.clone()];
        let targets = default_targets();
        let opts = ExtractOptions::default();
        let (tz, _) = extract_examples(&one, &targets[0], opts).unwrap();
        let (tf, _) = extract_examples(&one, &targets[1], opts).unwrap();
        let (ts, _) = extract_examples(&one, &targets[2], opts).unwrap();
        assert_eq!(tz.len(), 8, "one block-level pair per placed block");
        assert_eq!(tf.len(), 8, "full towers plus suffixes");
        assert_eq!(ts.len(), 3, "site list plus suffixes");
        // site-list examples end at the anchor
        for e in &ts {
            if let Term::List(elems) = &e.atom.args[0] {
                assert_eq!(elems.last(), Some(&Term::constant("s22")));
            }
        }
    }

    #[test]
    fn empty_demo_set_extracts_nothing() {
        let targets = default_targets();
        let (pos, neg) = extract_examples(&[], &targets[0], ExtractOptions::default()).unwrap();
        assert!(pos.is_empty() && neg.is_empty());
    }

    #[test]
    fn extracted_labels_agree_with_ground_truth() {
        let (task, demos) = train_demos(2);
        let targets = default_targets();
        let opts = ExtractOptions::default();
        let program = task_background(&task).union(&ground_truth_program());
        for t in &targets {
            let (pos, neg) = extract_examples(&demos, t, opts).unwrap();
            for e in &pos {
                assert!(
                    crate::solve::entails(&program, &e.atom, QueryBudget::default()).unwrap(),
                    "positive {} not derivable",
                    e.atom
                );
            }
            for e in &neg {
                assert!(
                    !crate::solve::entails(&program, &e.atom, QueryBudget::default()).unwrap(),
                    "negative {} is derivable",
                    e.atom
                );
            }
        }
    }

    #[test]
    fn inject_knowledge_is_union_with_dedup() {
        let b = task_background(&sample_experiment(0).train[0]);
        let inj = crate::blockworld::wood_injection();
        let b2 = inject_knowledge(&b, &inj);
        assert_eq!(b2.len(), b.len() + 1);
        let b3 = inject_knowledge(&b2, &inj);
        assert_eq!(b3.len(), b2.len(), "duplicate injection is dropped");
        let b4 = inject_knowledge(&b, &Program::new());
        assert_eq!(b4.len(), b.len());
    }

    #[test]
    fn wood_injection_enables_z4() {
        let exp = sample_experiment(0);
        let task = &exp.test;
        let wood = task
            .blocks
            .iter()
            .find(|b| b.material.as_deref() == Some("wood"))
            .unwrap()
            .id
            .clone();
        let b = task_background(task);
        let goal = parse_atom(&format!("target_z({wood},z4)")).unwrap();
        assert!(!crate::solve::entails(&b, &goal, QueryBudget::default()).unwrap());
        let b2 = inject_knowledge(&b, &crate::blockworld::wood_injection());
        assert!(crate::solve::entails(&b2, &goal, QueryBudget::default()).unwrap());
    }

    #[test]
    fn curriculum_order_violation_detected() {
        let (task, demos) = train_demos(0);
        let mut targets = default_targets();
        targets.swap(0, 1); // tower_from before target_z
        let err = run_curriculum(
            &task_background(&task),
            &targets,
            &demos,
            &BTreeMap::new(),
            &CurriculumParams::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CurriculumError::DependencyViolation { .. }));
    }
}
