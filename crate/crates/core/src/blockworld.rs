//! The synthetic 3x3 block-assembly domain: the object ontology, discrete
//! world states, the ground-truth rule set, grounding into atoms, seeded
//! task sampling, demonstration generation (positives via the ground-truth
//! planner, negatives via corruption), and stratified subsampling.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::logic::parse::parse_program;
use crate::logic::{Atom, Program, Sym, Term};
use crate::planner::{self, PlanError};
use crate::solve::{AbstractState, QueryBudget};

pub const MATERIALS: [&str; 4] = ["stone", "brick", "glass", "wood"];
pub const COLORS: [&str; 5] = ["red", "blue", "green", "yellow", "purple"];
pub const SHAPES: [&str; 3] = ["cube", "sphere", "pyramid"];

pub const ANCHOR: &str = "s22";
pub const CARDINAL_SITES: [&str; 4] = ["s12", "s21", "s23", "s32"];
pub const CORNER_SITES: [&str; 4] = ["s11", "s13", "s31", "s33"];

/// All nine sites in row-major order.
pub fn all_sites() -> Vec<Sym> {
    let mut out = Vec::new();
    for r in 1..=3 {
        for c in 1..=3 {
            out.push(Sym::new(format!("s{r}{c}")));
        }
    }
    out
}

fn site_coords(site: &Sym) -> (i32, i32) {
    let b = site.as_str().as_bytes();
    ((b[1] - b'0') as i32, (b[2] - b'0') as i32)
}

/// Discrete tower level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Z1,
    Z2,
    Z3,
    Z4,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::Z1, Level::Z2, Level::Z3, Level::Z4];

    pub fn index(self) -> u8 {
        match self {
            Level::Z1 => 1,
            Level::Z2 => 2,
            Level::Z3 => 3,
            Level::Z4 => 4,
        }
    }

    pub fn from_index(i: u8) -> Option<Level> {
        match i {
            1 => Some(Level::Z1),
            2 => Some(Level::Z2),
            3 => Some(Level::Z3),
            4 => Some(Level::Z4),
            _ => None,
        }
    }

    pub fn succ(self) -> Option<Level> {
        Level::from_index(self.index() + 1)
    }

    pub fn sym(self) -> Sym {
        Sym::new(format!("z{}", self.index()))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z{}", self.index())
    }
}

/// A block. Distractors carry color and shape but no material label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub id: Sym,
    pub material: Option<Sym>,
    pub color: Sym,
    pub shape: Sym,
}

/// Discrete world state: grid occupancy, blocked sites, unplaced blocks, and
/// at most one block in the gripper.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WorldState {
    pub occupancy: BTreeMap<(Sym, Level), Sym>,
    pub blocked: BTreeSet<Sym>,
    pub available: BTreeSet<Sym>,
    pub held: Option<Sym>,
}

impl WorldState {
    /// Per-site block stacks read bottom-up. The flag reports whether any
    /// occupancy floats above a gap, which valid states never have.
    pub fn towers(&self) -> (BTreeMap<Sym, Vec<Sym>>, bool) {
        let mut towers: BTreeMap<Sym, Vec<Sym>> = BTreeMap::new();
        let mut floating = false;
        for ((site, level), block) in &self.occupancy {
            let stack = towers.entry(site.clone()).or_default();
            if stack.len() + 1 != level.index() as usize {
                floating = true;
            }
            stack.push(block.clone());
        }
        (towers, floating)
    }

    /// A block id appears at most once across occupancy, hand, and the
    /// available set.
    pub fn ids_consistent(&self) -> bool {
        let mut seen = BTreeSet::new();
        for b in self.occupancy.values() {
            if !seen.insert(b.clone()) {
                return false;
            }
        }
        if let Some(b) = &self.held {
            if !seen.insert(b.clone()) {
                return false;
            }
        }
        self.available.iter().all(|b| seen.insert(b.clone()))
    }
}

/// Goal: required tower heights (a multiset, kept sorted descending), with
/// placement constrained by the tower_site rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalSpec {
    pub heights: Vec<u8>,
}

impl GoalSpec {
    pub fn new(mut heights: Vec<u8>) -> Self {
        heights.sort_unstable_by(|a, b| b.cmp(a));
        GoalSpec { heights }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub name: String,
    pub blocks: Vec<Block>,
    pub initial: WorldState,
    pub goal: GoalSpec,
}

impl Task {
    pub fn block(&self, id: &Sym) -> Option<&Block> {
        self.blocks.iter().find(|b| &b.id == id)
    }

    pub fn distractors(&self) -> Vec<Sym> {
        self.blocks.iter().filter(|b| b.material.is_none()).map(|b| b.id.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoLabel {
    Positive,
    Negative,
}

/// How a negative demonstration violates the ground truth. The details name
/// exactly what was corrupted so that example extraction can label atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Corruption {
    None,
    /// Two adjacent levels of one tower swapped.
    PermutedMaterials { site: Sym, lower: Level },
    /// A tower moved to an invalid site, or the anchor tower removed.
    BadSite { kind: BadSiteKind },
    /// One tower slot filled by a distractor instead of its block.
    DistractorUsed { site: Sym, level: Level, distractor: Sym },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BadSiteKind {
    CornerSubstitution { from: Sym, to: Sym },
    AnchorSubstitution { to: Sym },
    AnchorDropped,
}

impl Corruption {
    pub fn class(&self) -> &'static str {
        match self {
            Corruption::None => "none",
            Corruption::PermutedMaterials { .. } => "permuted_materials",
            Corruption::BadSite { .. } => "bad_site",
            Corruption::DistractorUsed { .. } => "distractor_used",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Demonstration {
    pub id: String,
    pub states: Vec<WorldState>,
    pub label: DemoLabel,
    pub corruption: Corruption,
}

impl Demonstration {
    pub fn final_state(&self) -> &WorldState {
        self.states.last().expect("demonstrations hold at least one state")
    }
}

/// Static topology and ontology facts shared by every task: level succession,
/// site adjacency, the anchor, and the property vocabulary as unary facts.
pub fn static_facts() -> Vec<Atom> {
    let mut atoms = Vec::new();
    let unary = |p: &str, c: &str| Atom::new(p, vec![Term::constant(c)]);
    for m in MATERIALS {
        atoms.push(unary(m, m));
    }
    for c in COLORS {
        atoms.push(unary(c, c));
    }
    for s in SHAPES {
        atoms.push(unary(s, s));
    }
    for l in Level::ALL {
        let z = l.to_string();
        atoms.push(unary(&z, &z));
    }
    for (a, b) in [(Level::Z1, Level::Z2), (Level::Z2, Level::Z3), (Level::Z3, Level::Z4)] {
        atoms.push(Atom::new("succ_z", vec![Term::Const(a.sym()), Term::Const(b.sym())]));
    }
    let sites = all_sites();
    for s1 in &sites {
        for s2 in &sites {
            if s1 == s2 {
                continue;
            }
            let (r1, c1) = site_coords(s1);
            let (r2, c2) = site_coords(s2);
            let args = vec![Term::Const(s1.clone()), Term::Const(s2.clone())];
            match ((r1 - r2).abs(), (c1 - c2).abs()) {
                (0, 1) => atoms.push(Atom::new("adj_h", args)),
                (1, 0) => atoms.push(Atom::new("adj_v", args)),
                (1, 1) => atoms.push(Atom::new("diagonal_adj", args)),
                _ => {}
            }
        }
    }
    atoms.push(Atom::new("goal_anchor", vec![Term::constant(ANCHOR)]));
    atoms
}

/// Ground a world state into its abstract state: static facts, the task's
/// object ontology, blocked sites, and `at(Block, Site, Level)` occupancy.
pub fn ground_state(task: &Task, state: &WorldState) -> AbstractState {
    let mut atoms: BTreeSet<Atom> = static_facts().into_iter().collect();
    for b in &task.blocks {
        atoms.insert(Atom::new("block", vec![Term::Const(b.id.clone())]));
        if let Some(m) = &b.material {
            atoms.insert(Atom::new(
                "material",
                vec![Term::Const(b.id.clone()), Term::Const(m.clone())],
            ));
        }
        atoms.insert(Atom::new(
            "color",
            vec![Term::Const(b.id.clone()), Term::Const(b.color.clone())],
        ));
        atoms.insert(Atom::new(
            "shape",
            vec![Term::Const(b.id.clone()), Term::Const(b.shape.clone())],
        ));
    }
    for s in &state.blocked {
        atoms.insert(Atom::new("blocked", vec![Term::Const(s.clone())]));
    }
    for ((site, level), b) in &state.occupancy {
        atoms.insert(Atom::new(
            "at",
            vec![Term::Const(b.clone()), Term::Const(site.clone()), Term::Const(level.sym())],
        ));
    }
    AbstractState { atoms }
}

/// Background program for a task: the grounding of its initial state, which
/// carries no occupancy, so exactly the static topology plus ontology.
pub fn task_background(task: &Task) -> Program {
    ground_state(task, &task.initial).to_program()
}

/// The ground-truth rule set: the material-to-level map, the recursive tower
/// definition, and the site rules anchored at the grid center.
pub fn ground_truth_program() -> Program {
    parse_program(
        "\
target_z(B,Z):- material(B,M), stone(M), z1(Z).
target_z(B,Z):- material(B,M), brick(M), z2(Z).
target_z(B,Z):- material(B,M), glass(M), z3(Z).
target_z(B,Z):- material(B,M), wood(M), z4(Z).
tower_from(List,Z):- head(List,LHead), target_z(LHead,Z), tail(List,LRest), empty(LRest).
tower_from(List,Z):- head(List,LHead), target_z(LHead,Z), tail(List,LRest), succ_z(Z,ZNext), tower_from(LRest,ZNext).
tower_site(Sites):- head(Sites,S), goal_anchor(S), tail(Sites,Rest), empty(Rest).
tower_site(Sites):- head(Sites,S), goal_anchor(A), adj_h(A,S), tail(Sites,Rest), tower_site(Rest).
tower_site(Sites):- head(Sites,S), goal_anchor(A), adj_v(A,S), tail(Sites,Rest), tower_site(Rest).
",
    )
    .expect("ground truth parses")
}

/// The wood-to-top-level rule withheld from training data and injected as
/// prior knowledge instead.
pub fn wood_injection() -> Program {
    parse_program("target_z(B,Z):- material(B,M), wood(M), z4(Z).\n").expect("injection parses")
}

/// Canonical site-list encoding consumed by tower_site: non-anchor sites in
/// row-major order with the anchor last. Fixing the anchor position keeps
/// the admissible-site concept expressible by a single recursive predicate.
pub fn canonical_site_list(sites: &BTreeSet<Sym>) -> Vec<Sym> {
    let anchor = Sym::new(ANCHOR);
    let mut out: Vec<Sym> = sites.iter().filter(|s| **s != anchor).cloned().collect();
    out.sort();
    if sites.contains(&anchor) {
        out.push(anchor);
    }
    out
}

pub fn site_list_term(sites: &[Sym]) -> Term {
    Term::List(sites.iter().map(|s| Term::Const(s.clone())).collect())
}

pub fn block_list_term(blocks: &[Sym]) -> Term {
    Term::List(blocks.iter().map(|b| Term::Const(b.clone())).collect())
}

/// One seeded repetition: four training tasks and one held-out test task
/// drawn from the 60-block pool with disjoint identities.
#[derive(Debug, Clone)]
pub struct SampledExperiment {
    pub seed: u64,
    pub train: Vec<Task>,
    pub test: Task,
}

pub fn sample_experiment(seed: u64) -> SampledExperiment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // the 60-combination pool, ids shuffled over combinations per seed
    let mut combos = Vec::new();
    for m in MATERIALS {
        for c in COLORS {
            for s in SHAPES {
                combos.push((m, c, s));
            }
        }
    }
    combos.shuffle(&mut rng);
    let blocks: Vec<Block> = combos
        .iter()
        .enumerate()
        .map(|(i, (m, c, s))| Block {
            id: Sym::new(format!("b{}", i + 1)),
            material: Some(Sym::new(*m)),
            color: Sym::new(*c),
            shape: Sym::new(*s),
        })
        .collect();

    let by_material = |m: &str| -> Vec<Block> {
        blocks.iter().filter(|b| b.material.as_deref() == Some(m)).cloned().collect()
    };
    let mut stones = by_material("stone");
    let mut bricks = by_material("brick");
    let mut glasses = by_material("glass");
    let mut woods = by_material("wood");
    stones.shuffle(&mut rng);
    bricks.shuffle(&mut rng);
    glasses.shuffle(&mut rng);
    woods.shuffle(&mut rng);

    // glass combos beyond the ten used as glass, and woods beyond the one
    // used as wood, serve as the unlabeled distractor pool (5 + 14 = 19)
    let mut distractor_pool: Vec<Block> = glasses.split_off(10);
    distractor_pool.extend(woods.split_off(1));
    distractor_pool.shuffle(&mut rng);
    let as_distractor = |b: &Block| Block { material: None, ..b.clone() };

    // training placements use two cardinal neighbor sites, the test task the
    // other two; trained sites are blocked at test time and vice versa
    let mut cardinals: Vec<Sym> = CARDINAL_SITES.iter().map(Sym::new).collect();
    cardinals.shuffle(&mut rng);
    let train_blocked: BTreeSet<Sym> = cardinals[2..].iter().cloned().collect();
    let test_blocked: BTreeSet<Sym> = cardinals[..2].iter().cloned().collect();

    let make_task = |name: String, blocks: Vec<Block>, blocked: &BTreeSet<Sym>, heights: Vec<u8>| {
        let initial = WorldState {
            occupancy: BTreeMap::new(),
            blocked: blocked.clone(),
            available: blocks.iter().map(|b| b.id.clone()).collect(),
            held: None,
        };
        Task { name, blocks, initial, goal: GoalSpec::new(heights) }
    };

    let mut train = Vec::new();
    for t in 0..4 {
        let mut task_blocks = Vec::new();
        task_blocks.extend_from_slice(&stones[3 * t..3 * t + 3]);
        task_blocks.extend_from_slice(&bricks[3 * t..3 * t + 3]);
        task_blocks.extend_from_slice(&glasses[2 * t..2 * t + 2]);
        task_blocks.extend(distractor_pool[4 * t..4 * t + 4].iter().map(&as_distractor));
        task_blocks.sort_by(|a, b| a.id.cmp(&b.id));
        train.push(make_task(format!("train{t}"), task_blocks, &train_blocked, vec![3, 3, 2]));
    }

    let mut test_blocks = Vec::new();
    test_blocks.extend_from_slice(&stones[12..15]);
    test_blocks.extend_from_slice(&bricks[12..15]);
    test_blocks.extend_from_slice(&glasses[8..10]);
    test_blocks.push(woods[0].clone());
    test_blocks.extend(distractor_pool[16..19].iter().map(&as_distractor));
    test_blocks.sort_by(|a, b| a.id.cmp(&b.id));
    let test = make_task("test".into(), test_blocks, &test_blocked, vec![4, 3, 2]);

    SampledExperiment { seed, train, test }
}

/// Per-corruption-class negative counts plus the number of distinct positive
/// demonstrations to synthesize. The defaults make the per-task example
/// files total 209 entries across the three targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ClassCounts {
    pub positives: usize,
    pub bad_site_corner_subs: usize,
    pub bad_site_anchor_subs: usize,
    pub bad_site_anchor_drops: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DemoGenConfig {
    pub train: ClassCounts,
    pub test: ClassCounts,
}

impl Default for DemoGenConfig {
    fn default() -> Self {
        DemoGenConfig {
            train: ClassCounts {
                positives: 9,
                bad_site_corner_subs: 4,
                bad_site_anchor_subs: 2,
                bad_site_anchor_drops: 1,
            },
            test: ClassCounts {
                positives: 8,
                bad_site_corner_subs: 4,
                bad_site_anchor_subs: 0,
                bad_site_anchor_drops: 1,
            },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("task {task} is unsolvable under the given rules: {source}")]
    Unsolvable { task: String, source: PlanError },
    #[error("could not produce {wanted} distinct positive demonstrations for {task}")]
    NotEnoughPositives { task: String, wanted: usize },
    #[error("generated negative {id} does not violate the ground truth")]
    NegativeNotViolating { id: String },
}

/// Generate labeled demonstrations for one task: positives are goal-reaching
/// trajectories of the planner under `hgt`; negatives corrupt the first
/// positive's final state, one violation per demonstration, and each is
/// verified to violate `hgt` before being emitted.
pub fn generate_demonstrations(
    task: &Task,
    hgt: &Program,
    seed: u64,
    counts: &ClassCounts,
    budget: QueryBudget,
) -> Result<Vec<Demonstration>, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9).wrapping_add(17));
    let background = task_background(task);
    let rules = background.union(hgt);
    let mut demos = Vec::new();

    // positives: vary the block-to-slot assignment through the planner's
    // preference order until enough distinct trajectories exist
    let mut ids: Vec<Sym> = task.blocks.iter().map(|b| b.id.clone()).collect();
    let mut seen_plans: BTreeSet<String> = BTreeSet::new();
    let mut attempts = 0usize;
    while seen_plans.len() < counts.positives {
        attempts += 1;
        if attempts > counts.positives * 60 {
            return Err(GenError::NotEnoughPositives {
                task: task.name.clone(),
                wanted: counts.positives,
            });
        }
        if attempts > 1 {
            ids.shuffle(&mut rng);
        }
        let plan = planner::plan_with_preference(task, &rules, budget, &ids)
            .map_err(|e| GenError::Unsolvable { task: task.name.clone(), source: e })?;
        if !seen_plans.insert(plan.render()) {
            continue;
        }
        let mut states = vec![task.initial.clone()];
        for action in &plan.actions {
            let next = planner::apply_transition(states.last().unwrap(), action)
                .expect("planner output replays");
            states.push(next);
        }
        demos.push(Demonstration {
            id: format!("{}_pos{}", task.name, seen_plans.len()),
            states,
            label: DemoLabel::Positive,
            corruption: Corruption::None,
        });
    }

    let base = demos[0].final_state().clone();
    let (towers, floating) = base.towers();
    debug_assert!(!floating);
    let tower_sites: Vec<Sym> = canonical_site_list(&towers.keys().cloned().collect());

    let mut negatives = Vec::new();

    // permuted materials: every adjacent-level swap in every tower
    for site in &tower_sites {
        let stack = &towers[site];
        for lower_idx in 0..stack.len().saturating_sub(1) {
            let lower = Level::from_index(lower_idx as u8 + 1).unwrap();
            let upper = lower.succ().unwrap();
            let mut state = base.clone();
            let a = state.occupancy[&(site.clone(), lower)].clone();
            let b = state.occupancy[&(site.clone(), upper)].clone();
            state.occupancy.insert((site.clone(), lower), b);
            state.occupancy.insert((site.clone(), upper), a);
            negatives.push(Demonstration {
                id: format!("{}_neg_perm{}", task.name, negatives.len()),
                states: vec![state],
                label: DemoLabel::Negative,
                corruption: Corruption::PermutedMaterials { site: site.clone(), lower },
            });
        }
    }

    // bad sites: a tower relocated to a corner (diagonal) site, the anchor
    // tower relocated, or the anchor tower dropped entirely
    let corners: Vec<Sym> = CORNER_SITES.iter().map(Sym::new).collect();
    let first_neighbor = tower_sites.iter().find(|s| s.as_str() != ANCHOR).cloned();
    let move_tower = |state: &WorldState, from: &Sym, to: &Sym| {
        let mut next = state.clone();
        for level in Level::ALL {
            if let Some(b) = next.occupancy.remove(&(from.clone(), level)) {
                next.occupancy.insert((to.clone(), level), b);
            }
        }
        next
    };
    for i in 0..counts.bad_site_corner_subs {
        let Some(from) = first_neighbor.clone() else { break };
        let to = corners[i % corners.len()].clone();
        negatives.push(Demonstration {
            id: format!("{}_neg_site{}", task.name, i),
            states: vec![move_tower(&base, &from, &to)],
            label: DemoLabel::Negative,
            corruption: Corruption::BadSite {
                kind: BadSiteKind::CornerSubstitution { from, to },
            },
        });
    }
    for i in 0..counts.bad_site_anchor_subs {
        let to = corners[i % corners.len()].clone();
        negatives.push(Demonstration {
            id: format!("{}_neg_anchor{}", task.name, i),
            states: vec![move_tower(&base, &Sym::new(ANCHOR), &to)],
            label: DemoLabel::Negative,
            corruption: Corruption::BadSite { kind: BadSiteKind::AnchorSubstitution { to } },
        });
    }
    for i in 0..counts.bad_site_anchor_drops {
        let mut state = base.clone();
        for level in Level::ALL {
            if let Some(b) = state.occupancy.remove(&(Sym::new(ANCHOR), level)) {
                state.available.insert(b);
            }
        }
        negatives.push(Demonstration {
            id: format!("{}_neg_drop{}", task.name, i),
            states: vec![state],
            label: DemoLabel::Negative,
            corruption: Corruption::BadSite { kind: BadSiteKind::AnchorDropped },
        });
    }

    // distractors: substitute one per tower slot, cycling the pool
    let distractors = task.distractors();
    let mut d_idx = 0usize;
    for site in &tower_sites {
        let stack = &towers[site];
        for (i, replaced) in stack.iter().enumerate() {
            let level = Level::from_index(i as u8 + 1).unwrap();
            let d = distractors[d_idx % distractors.len()].clone();
            d_idx += 1;
            let mut state = base.clone();
            state.occupancy.insert((site.clone(), level), d.clone());
            state.available.remove(&d);
            state.available.insert(replaced.clone());
            negatives.push(Demonstration {
                id: format!("{}_neg_distr{}", task.name, d_idx - 1),
                states: vec![state],
                label: DemoLabel::Negative,
                corruption: Corruption::DistractorUsed {
                    site: site.clone(),
                    level,
                    distractor: d,
                },
            });
        }
    }

    for neg in &negatives {
        if planner::check_goal(neg.final_state(), &task.goal, &rules, budget) {
            return Err(GenError::NegativeNotViolating { id: neg.id.clone() });
        }
    }
    demos.extend(negatives);
    Ok(demos)
}

/// Per-class negative sampling rates; positives are always retained.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SubsampleRates {
    pub permuted_materials: f64,
    pub bad_site: f64,
    pub distractor_used: f64,
}

impl Default for SubsampleRates {
    fn default() -> Self {
        SubsampleRates { permuted_materials: 1.0, bad_site: 1.0, distractor_used: 1.0 }
    }
}

impl SubsampleRates {
    fn rate(&self, class: &str) -> f64 {
        match class {
            "permuted_materials" => self.permuted_materials,
            "bad_site" => self.bad_site,
            "distractor_used" => self.distractor_used,
            _ => 1.0,
        }
    }
}

/// Stratified subsampling: keep every positive, draw each negative with its
/// class rate from a stream offset by the target index, so different targets
/// see reproducibly different subsets under one seed.
pub fn subsample(
    demos: &[Demonstration],
    rates: &SubsampleRates,
    seed: u64,
    target_offset: u64,
) -> Vec<Demonstration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(target_offset.wrapping_add(1));
    demos
        .iter()
        .filter(|d| match d.label {
            DemoLabel::Positive => true,
            DemoLabel::Negative => rng.gen::<f64>() < rates.rate(d.corruption.class()),
        })
        .cloned()
        .collect()
}

/// Render the dataset manifest: seed, per-target offsets, then one line per
/// demonstration. Line-oriented `key=value` pairs, byte-stable per seed.
pub fn render_manifest(task: &Task, seed: u64, demos: &[Demonstration]) -> String {
    let mut out = String::new();
    out.push_str(&format!("task={}\n", task.name));
    out.push_str(&format!("seed={seed}\n"));
    for (i, t) in ["target_z", "tower_from", "tower_site"].iter().enumerate() {
        out.push_str(&format!("target_offset={t}:{i}\n"));
    }
    for d in demos {
        let label = match d.label {
            DemoLabel::Positive => "positive",
            DemoLabel::Negative => "negative",
        };
        out.push_str(&format!(
            "demo={} label={} corruption={} states={} file={}.pl\n",
            d.id,
            label,
            d.corruption.class(),
            d.states.len(),
            d.id
        ));
    }
    out
}
