//! Pick-and-place planning against a rule set. The planner enumerates
//! candidate site lists in row-major order, prunes them with the tower_site
//! rules, assigns blocks to tower slots guided by target_z membership with
//! backtracking, validates each completed tower against tower_from, and
//! compiles the first goal-reaching configuration into actions.
//!
//! The planner is only a consumer of the rule set: it behaves identically
//! under the ground truth and under any learned program with the same
//! extension over the task universe.

use std::collections::BTreeSet;
use std::fmt;

use crate::blockworld::{
    all_sites, block_list_term, canonical_site_list, site_list_term, task_background, GoalSpec,
    Level, Task, WorldState,
};
use crate::logic::{Atom, Program, Sym, Term};
use crate::solve::{entails, QueryBudget, SolveError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanAction {
    Pick { block: Sym },
    Place { block: Sym, site: Sym, level: Level },
}

impl fmt::Display for PlanAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanAction::Pick { block } => write!(f, "pick({block})."),
            PlanAction::Place { block, site, level } => {
                write!(f, "place({block},{site},{level}).")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Plan {
    pub actions: Vec<PlanAction>,
    /// Block lists per tower, keyed by site, in site-list order.
    pub towers: Vec<(Sym, Vec<Sym>)>,
}

impl Plan {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for a in &self.actions {
            out.push_str(&a.to_string());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("no goal-reaching plan exists under the given rules")]
    NoPlan,
    #[error("planning budget exhausted")]
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransitionError {
    #[error("pick: block {0} is not available")]
    NotAvailable(Sym),
    #[error("pick: the gripper already holds {0}")]
    HandFull(Sym),
    #[error("place: the gripper does not hold {0}")]
    NotHeld(Sym),
    #[error("place: site {0} is blocked")]
    Blocked(Sym),
    #[error("place: ({0},{1}) is already occupied")]
    Occupied(Sym, Level),
    #[error("place: no support under ({0},{1})")]
    NoSupport(Sym, Level),
}

/// Deterministic successor under one action; world-state invariants are
/// preserved. Violated preconditions are reported by name.
pub fn apply_transition(state: &WorldState, action: &PlanAction) -> Result<WorldState, TransitionError> {
    let mut next = state.clone();
    match action {
        PlanAction::Pick { block } => {
            if let Some(held) = &next.held {
                return Err(TransitionError::HandFull(held.clone()));
            }
            if !next.available.remove(block) {
                return Err(TransitionError::NotAvailable(block.clone()));
            }
            next.held = Some(block.clone());
        }
        PlanAction::Place { block, site, level } => {
            if next.held.as_ref() != Some(block) {
                return Err(TransitionError::NotHeld(block.clone()));
            }
            if next.blocked.contains(site) {
                return Err(TransitionError::Blocked(site.clone()));
            }
            if next.occupancy.contains_key(&(site.clone(), *level)) {
                return Err(TransitionError::Occupied(site.clone(), *level));
            }
            if let Some(below) = Level::from_index(level.index() - 1) {
                if !next.occupancy.contains_key(&(site.clone(), below)) {
                    return Err(TransitionError::NoSupport(site.clone(), *level));
                }
            }
            next.occupancy.insert((site.clone(), *level), block.clone());
            next.held = None;
        }
    }
    debug_assert!(next.ids_consistent());
    Ok(next)
}

fn rule_entails(program: &Program, goal: &Atom, budget: QueryBudget, clipped: &mut bool) -> bool {
    match entails(program, goal, budget) {
        Ok(v) => v,
        Err(SolveError::BudgetExhausted { .. }) => {
            *clipped = true;
            false
        }
    }
}

/// True iff the state's towers match the goal height multiset, every tower
/// satisfies tower_from from z1, and the canonical site list satisfies
/// tower_site. `program` must contain the rule set and the task facts.
pub fn check_goal(state: &WorldState, goal: &GoalSpec, program: &Program, budget: QueryBudget) -> bool {
    let (towers, floating) = state.towers();
    if floating || state.held.is_some() {
        return false;
    }
    let mut heights: Vec<u8> = towers.values().map(|t| t.len() as u8).collect();
    heights.sort_unstable_by(|a, b| b.cmp(a));
    if heights != goal.heights {
        return false;
    }
    if towers.is_empty() {
        return true;
    }
    let mut clipped = false;
    for stack in towers.values() {
        let goal_atom = Atom::new(
            "tower_from",
            vec![block_list_term(stack), Term::Const(Level::Z1.sym())],
        );
        if !rule_entails(program, &goal_atom, budget, &mut clipped) {
            return false;
        }
    }
    let site_list = canonical_site_list(&towers.keys().cloned().collect());
    let site_atom = Atom::new("tower_site", vec![site_list_term(&site_list)]);
    rule_entails(program, &site_atom, budget, &mut clipped)
}

/// Plan with blocks preferred in id order.
pub fn plan(task: &Task, rules: &Program, budget: QueryBudget) -> Result<Plan, PlanError> {
    let mut ids: Vec<Sym> = task.blocks.iter().map(|b| b.id.clone()).collect();
    ids.sort();
    plan_with_preference(task, rules, budget, &ids)
}

/// Plan, trying blocks in the given preference order when filling tower
/// slots. Demonstration generation uses shuffled preferences to obtain
/// distinct goal-reaching trajectories.
pub fn plan_with_preference(
    task: &Task,
    rules: &Program,
    budget: QueryBudget,
    preference: &[Sym],
) -> Result<Plan, PlanError> {
    let program = task_background(task).union(rules);
    let heights = &task.goal.heights;
    if heights.is_empty() {
        return Ok(Plan::default());
    }
    let k = heights.len();
    let valid: Vec<Sym> = all_sites()
        .into_iter()
        .filter(|s| !task.initial.blocked.contains(s))
        .collect();
    if valid.len() < k {
        return Err(PlanError::NoPlan);
    }

    let mut clipped = false;
    let mut nodes = 0usize;

    // target_z level membership, queried once per (block, level)
    let mut members: Vec<Vec<Sym>> = Vec::new();
    for level in Level::ALL {
        let mut at_level = Vec::new();
        for b in preference {
            let goal = Atom::new(
                "target_z",
                vec![Term::Const(b.clone()), Term::Const(level.sym())],
            );
            if rule_entails(&program, &goal, budget, &mut clipped) {
                at_level.push(b.clone());
            }
        }
        members.push(at_level);
    }

    // candidate site subsets in row-major lexicographic order
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        nodes += 1;
        if nodes > budget.max_steps {
            return Err(PlanError::BudgetExhausted);
        }
        let subset: BTreeSet<Sym> = combo.iter().map(|&i| valid[i].clone()).collect();
        let site_list = canonical_site_list(&subset);
        let site_atom = Atom::new("tower_site", vec![site_list_term(&site_list)]);
        if rule_entails(&program, &site_atom, budget, &mut clipped) {
            // heights sorted descending, assigned to sites in list order
            let towers: Vec<(Sym, u8)> =
                site_list.iter().cloned().zip(heights.iter().copied()).collect();
            let mut assigned: Vec<Vec<Sym>> = Vec::new();
            let mut used: BTreeSet<Sym> = BTreeSet::new();
            if assign_towers(
                &program,
                budget,
                &members,
                &towers,
                0,
                &mut assigned,
                &mut used,
                &mut nodes,
                &mut clipped,
            )? {
                let mut plan = Plan::default();
                for ((site, _), stack) in towers.iter().zip(assigned.iter()) {
                    plan.towers.push((site.clone(), stack.clone()));
                    for (i, b) in stack.iter().enumerate() {
                        let level = Level::from_index(i as u8 + 1).unwrap();
                        plan.actions.push(PlanAction::Pick { block: b.clone() });
                        plan.actions.push(PlanAction::Place {
                            block: b.clone(),
                            site: site.clone(),
                            level,
                        });
                    }
                }
                return Ok(plan);
            }
        }
        // next k-combination of valid site indices
        let mut i = k;
        loop {
            if i == 0 {
                return if clipped { Err(PlanError::BudgetExhausted) } else { Err(PlanError::NoPlan) };
            }
            i -= 1;
            combo[i] += 1;
            if combo[i] <= valid.len() - (k - i) {
                for j in i + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn assign_towers(
    program: &Program,
    budget: QueryBudget,
    members: &[Vec<Sym>],
    towers: &[(Sym, u8)],
    tower: usize,
    assigned: &mut Vec<Vec<Sym>>,
    used: &mut BTreeSet<Sym>,
    nodes: &mut usize,
    clipped: &mut bool,
) -> Result<bool, PlanError> {
    if tower == towers.len() {
        return Ok(true);
    }
    let height = towers[tower].1 as usize;
    let mut stack: Vec<Sym> = Vec::with_capacity(height);
    assign_stack(program, budget, members, towers, tower, height, &mut stack, assigned, used, nodes, clipped)
}

#[allow(clippy::too_many_arguments)]
fn assign_stack(
    program: &Program,
    budget: QueryBudget,
    members: &[Vec<Sym>],
    towers: &[(Sym, u8)],
    tower: usize,
    height: usize,
    stack: &mut Vec<Sym>,
    assigned: &mut Vec<Vec<Sym>>,
    used: &mut BTreeSet<Sym>,
    nodes: &mut usize,
    clipped: &mut bool,
) -> Result<bool, PlanError> {
    *nodes += 1;
    if *nodes > budget.max_steps {
        return Err(PlanError::BudgetExhausted);
    }
    if stack.len() == height {
        // a completed tower must satisfy the learned tower definition
        let goal = Atom::new(
            "tower_from",
            vec![block_list_term(stack), Term::Const(Level::Z1.sym())],
        );
        if !rule_entails(program, &goal, budget, clipped) {
            return Ok(false);
        }
        assigned.push(stack.clone());
        if assign_towers(program, budget, members, towers, tower + 1, assigned, used, nodes, clipped)? {
            return Ok(true);
        }
        assigned.pop();
        return Ok(false);
    }
    let level_idx = stack.len(); // 0-based level within the tower
    for b in &members[level_idx] {
        if used.contains(b) {
            continue;
        }
        used.insert(b.clone());
        stack.push(b.clone());
        if assign_stack(program, budget, members, towers, tower, height, stack, assigned, used, nodes, clipped)? {
            return Ok(true);
        }
        stack.pop();
        used.remove(b);
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockworld::{ground_truth_program, sample_experiment, ANCHOR};

    fn budget() -> QueryBudget {
        QueryBudget::default()
    }

    #[test]
    fn ground_truth_plans_train_task() {
        let exp = sample_experiment(0);
        let task = &exp.train[0];
        let plan = plan(task, &ground_truth_program(), budget()).unwrap();
        let mut heights: Vec<usize> = plan.towers.iter().map(|(_, t)| t.len()).collect();
        heights.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(heights, vec![3, 3, 2]);

        // replay and verify the goal
        let mut state = task.initial.clone();
        for a in &plan.actions {
            state = apply_transition(&state, a).unwrap();
        }
        let program = task_background(task).union(&ground_truth_program());
        assert!(check_goal(&state, &task.goal, &program, budget()));
    }

    #[test]
    fn ground_truth_plans_test_task_with_height_four() {
        let exp = sample_experiment(0);
        let task = &exp.test;
        let plan = plan(task, &ground_truth_program(), budget()).unwrap();
        let mut heights: Vec<usize> = plan.towers.iter().map(|(_, t)| t.len()).collect();
        heights.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(heights, vec![4, 3, 2]);
        // towers sit on unblocked sites only, one of them the anchor
        for (site, _) in &plan.towers {
            assert!(!task.initial.blocked.contains(site));
        }
        assert!(plan.towers.iter().any(|(s, _)| s.as_str() == ANCHOR));
    }

    #[test]
    fn base_case_only_rules_fail_multi_level_goals() {
        let exp = sample_experiment(0);
        let task = &exp.train[0];
        let mut base_only = Program::new();
        for c in ground_truth_program().clauses() {
            let is_recursive_tower = c.head.pred.as_str() == "tower_from"
                && c.body.iter().any(|b| b.pred.as_str() == "tower_from");
            if !is_recursive_tower {
                base_only.push(c.clone());
            }
        }
        assert!(matches!(plan(task, &base_only, budget()), Err(PlanError::NoPlan)));
    }

    #[test]
    fn transition_preconditions() {
        let exp = sample_experiment(0);
        let task = &exp.train[0];
        let b1 = task.blocks[0].id.clone();
        let b2 = task.blocks[1].id.clone();
        let state = task.initial.clone();

        // placing above an empty level is floating
        let picked =
            apply_transition(&state, &PlanAction::Pick { block: b1.clone() }).unwrap();
        let err = apply_transition(
            &picked,
            &PlanAction::Place { block: b1.clone(), site: Sym::new(ANCHOR), level: Level::Z2 },
        )
        .unwrap_err();
        assert!(matches!(err, TransitionError::NoSupport(..)));

        // blocked sites reject placement
        let blocked_site = task.initial.blocked.iter().next().unwrap().clone();
        let err = apply_transition(
            &picked,
            &PlanAction::Place { block: b1.clone(), site: blocked_site, level: Level::Z1 },
        )
        .unwrap_err();
        assert!(matches!(err, TransitionError::Blocked(_)));

        // picking twice without placing is rejected
        let err = apply_transition(&picked, &PlanAction::Pick { block: b2 }).unwrap_err();
        assert!(matches!(err, TransitionError::HandFull(_)));

        // valid first placement extends occupancy
        let placed = apply_transition(
            &picked,
            &PlanAction::Place { block: b1.clone(), site: Sym::new(ANCHOR), level: Level::Z1 },
        )
        .unwrap();
        assert_eq!(placed.occupancy.get(&(Sym::new(ANCHOR), Level::Z1)), Some(&b1));
    }

    #[test]
    fn empty_goal_yields_empty_plan() {
        let exp = sample_experiment(0);
        let mut task = exp.train[0].clone();
        task.goal = GoalSpec::new(vec![]);
        let plan = plan(&task, &ground_truth_program(), budget()).unwrap();
        assert!(plan.actions.is_empty());
        let program = task_background(&task).union(&ground_truth_program());
        assert!(check_goal(&task.initial, &task.goal, &program, budget()));
    }

    #[test]
    fn swapped_final_state_fails_goal() {
        let exp = sample_experiment(0);
        let task = &exp.train[0];
        let plan = plan(task, &ground_truth_program(), budget()).unwrap();
        let mut state = task.initial.clone();
        for a in &plan.actions {
            state = apply_transition(&state, a).unwrap();
        }
        let program = task_background(task).union(&ground_truth_program());
        // swap two levels of the first tower
        let (site, stack) = &plan.towers[0];
        let a = state.occupancy[&(site.clone(), Level::Z1)].clone();
        let b = state.occupancy[&(site.clone(), Level::Z2)].clone();
        let mut corrupted = state.clone();
        corrupted.occupancy.insert((site.clone(), Level::Z1), b);
        corrupted.occupancy.insert((site.clone(), Level::Z2), a);
        assert!(check_goal(&state, &task.goal, &program, budget()));
        assert!(!check_goal(&corrupted, &task.goal, &program, budget()));
        assert!(stack.len() >= 2);
    }
}
