//! SLD resolution with a depth/step budget, plus the bottom-up fixpoint
//! evaluator used as an independent oracle in tests.
//!
//! `head/2`, `tail/2` and `empty/1` are evaluable structural primitives
//! rather than program clauses: lists are only ever deconstructed through
//! them, never by head-pattern matching. Calling one with an unbound first
//! argument fails (they test structure, they do not generate lists).

use std::collections::{BTreeMap, BTreeSet};

use crate::logic::{rename_apart, Atom, Clause, Program, Subst, Sym, Term, Var};

/// Limits on a single query: maximum resolution-tree depth and total
/// resolution steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct QueryBudget {
    pub max_depth: usize,
    pub max_steps: usize,
}

impl Default for QueryBudget {
    fn default() -> Self {
        QueryBudget { max_depth: 100, max_steps: 100_000 }
    }
}

/// Budget exhaustion is distinct from plain failure: the query may hold but
/// the proof search was cut off, which callers treat as non-entailment plus a
/// diagnostic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("query budget exhausted after {steps} steps (depth clipped: {depth_clipped})")]
    BudgetExhausted { steps: usize, depth_clipped: bool },
}

/// The set of true ground atoms describing one world state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AbstractState {
    pub atoms: BTreeSet<Atom>,
}

impl AbstractState {
    pub fn to_program(&self) -> Program {
        Program::from_clauses(self.atoms.iter().cloned().map(Clause::fact).collect())
    }
}

fn is_primitive(pred: &Sym, arity: usize) -> bool {
    matches!((pred.as_str(), arity), ("head", 2) | ("tail", 2) | ("empty", 1))
}

struct Search<'p> {
    program: &'p Program,
    budget: QueryBudget,
    steps: usize,
    depth_clipped: bool,
    rename_counter: u32,
}

enum Outcome {
    Stop,
    Continue,
}

impl<'p> Search<'p> {
    fn new(program: &'p Program, budget: QueryBudget) -> Self {
        Search { program, budget, steps: 0, depth_clipped: false, rename_counter: 0 }
    }

    fn step(&mut self) -> Result<(), SolveError> {
        self.steps += 1;
        if self.steps > self.budget.max_steps {
            Err(SolveError::BudgetExhausted { steps: self.steps, depth_clipped: self.depth_clipped })
        } else {
            Ok(())
        }
    }

    /// Depth-first proof of `goals` (a stack, last element is the current
    /// goal). Emits each solution substitution; the visitor decides whether
    /// to continue the search.
    fn prove(
        &mut self,
        goals: &mut Vec<Atom>,
        subst: &Subst,
        depth: usize,
        emit: &mut impl FnMut(&Subst) -> Outcome,
    ) -> Result<Outcome, SolveError> {
        let Some(goal) = goals.pop() else {
            return Ok(emit(subst));
        };
        let goal = subst.apply_atom(&goal);
        let result = self.solve_goal(&goal, goals, subst, depth, emit);
        goals.push(goal);
        result
    }

    fn solve_goal(
        &mut self,
        goal: &Atom,
        rest: &mut Vec<Atom>,
        subst: &Subst,
        depth: usize,
        emit: &mut impl FnMut(&Subst) -> Outcome,
    ) -> Result<Outcome, SolveError> {
        if is_primitive(&goal.pred, goal.arity()) {
            self.step()?;
            if let Some(next) = eval_primitive(goal, subst) {
                return self.prove(rest, &next, depth, emit);
            }
            return Ok(Outcome::Continue);
        }

        let positions: Vec<usize> = self.program.matching(&goal.pred, goal.arity()).to_vec();
        for pos in positions {
            self.step()?;
            if depth >= self.budget.max_depth {
                self.depth_clipped = true;
                return Ok(Outcome::Continue);
            }
            self.rename_counter += 1;
            let clause = rename_apart(&self.program.clauses()[pos], self.rename_counter);
            let Some(next) = crate::logic::unify(goal, &clause.head, subst) else {
                continue;
            };
            let mark = rest.len();
            for atom in clause.body.iter().rev() {
                rest.push(atom.clone());
            }
            let outcome = self.prove(rest, &next, depth + 1, emit)?;
            rest.truncate(mark);
            if matches!(outcome, Outcome::Stop) {
                return Ok(Outcome::Stop);
            }
        }
        Ok(Outcome::Continue)
    }
}

/// Evaluate one of the structural list primitives under `subst`.
fn eval_primitive(goal: &Atom, subst: &Subst) -> Option<Subst> {
    match (goal.pred.as_str(), goal.args.as_slice()) {
        ("empty", [arg]) => match subst.walk(arg) {
            Term::List(elems) if elems.is_empty() => Some(subst.clone()),
            _ => None,
        },
        ("head", [list, item]) => match subst.walk(list).clone() {
            Term::List(elems) if !elems.is_empty() => {
                let mut s = subst.clone();
                if s.unify_terms(&elems[0], item) {
                    Some(s)
                } else {
                    None
                }
            }
            _ => None,
        },
        ("tail", [list, rest]) => match subst.walk(list).clone() {
            Term::List(elems) if !elems.is_empty() => {
                let mut s = subst.clone();
                if s.unify_terms(&Term::List(elems[1..].to_vec()), rest) {
                    Some(s)
                } else {
                    None
                }
            }
            _ => None,
        },
        _ => None,
    }
}

/// True iff the ground `goal` is derivable from `program` within the budget.
/// Deterministic for a fixed clause order.
pub fn entails(program: &Program, goal: &Atom, budget: QueryBudget) -> Result<bool, SolveError> {
    debug_assert!(goal.is_ground(), "entails expects a ground goal");
    let mut search = Search::new(program, budget);
    let mut found = false;
    let mut goals = vec![goal.clone()];
    let result = search.prove(&mut goals, &Subst::new(), 0, &mut |_| {
        found = true;
        Outcome::Stop
    });
    match result {
        Ok(_) => {
            if found {
                Ok(true)
            } else if search.depth_clipped {
                // Some branch was cut by the depth limit, so "not derivable"
                // cannot be concluded.
                Err(SolveError::BudgetExhausted { steps: search.steps, depth_clipped: true })
            } else {
                Ok(false)
            }
        }
        Err(e) => {
            if found {
                Ok(true)
            } else {
                Err(e)
            }
        }
    }
}

/// Enumerate up to `limit` answer substitutions for `goal` in depth-first,
/// clause-order sequence. Zero answers is an empty sequence, not an error.
pub fn answers(
    program: &Program,
    goal: &Atom,
    budget: QueryBudget,
    limit: usize,
) -> Result<Vec<Subst>, SolveError> {
    let goal_vars = goal.vars();
    let mut out: Vec<Subst> = Vec::new();
    let mut search = Search::new(program, budget);
    let mut goals = vec![goal.clone()];
    let result = search.prove(&mut goals, &Subst::new(), 0, &mut |s| {
        let mut projected = Subst::new();
        for v in &goal_vars {
            let t = s.resolve(&Term::Var(v.clone()));
            projected.bind(v.clone(), t);
        }
        out.push(projected);
        if out.len() >= limit {
            Outcome::Stop
        } else {
            Outcome::Continue
        }
    });
    match result {
        Ok(_) => Ok(out),
        Err(e) => {
            if out.is_empty() {
                Err(e)
            } else {
                Ok(out)
            }
        }
    }
}

/// Describes the ground instances considered for one argument position when
/// computing a predicate's extension.
#[derive(Debug, Clone)]
pub enum ArgDomain {
    Constants(Vec<Sym>),
    /// Ordered lists of distinct elements, lengths 1..=max_len.
    Lists { elems: Vec<Sym>, max_len: usize },
}

impl ArgDomain {
    fn terms(&self) -> Vec<Term> {
        match self {
            ArgDomain::Constants(cs) => cs.iter().map(|c| Term::Const(c.clone())).collect(),
            ArgDomain::Lists { elems, max_len } => {
                let mut out = Vec::new();
                let mut prefix = Vec::new();
                fn extend(
                    elems: &[Sym],
                    prefix: &mut Vec<Sym>,
                    max_len: usize,
                    out: &mut Vec<Term>,
                ) {
                    if !prefix.is_empty() {
                        out.push(Term::List(
                            prefix.iter().map(|s| Term::Const(s.clone())).collect(),
                        ));
                    }
                    if prefix.len() == max_len {
                        return;
                    }
                    for e in elems {
                        if !prefix.contains(e) {
                            prefix.push(e.clone());
                            extend(elems, prefix, max_len, out);
                            prefix.pop();
                        }
                    }
                }
                extend(elems, &mut prefix, *max_len, &mut out);
                out
            }
        }
    }

    fn count(&self) -> usize {
        match self {
            ArgDomain::Constants(cs) => cs.len(),
            ArgDomain::Lists { elems, max_len } => {
                let n = elems.len();
                let mut total = 0usize;
                let mut perms = 1usize;
                for len in 1..=*max_len.min(&n) {
                    perms = perms.saturating_mul(n + 1 - len);
                    total = total.saturating_add(perms);
                }
                total
            }
        }
    }
}

/// Finite universe over which a predicate's extension is computed.
#[derive(Debug, Clone)]
pub struct UniverseSpec {
    pub per_arg: Vec<ArgDomain>,
    pub max_atoms: usize,
}

impl UniverseSpec {
    pub fn new(per_arg: Vec<ArgDomain>) -> Self {
        UniverseSpec { per_arg, max_atoms: 1_000_000 }
    }

    pub fn candidate_count(&self) -> usize {
        self.per_arg.iter().map(ArgDomain::count).fold(1usize, |a, b| a.saturating_mul(b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClosureError {
    #[error("universe too large: {candidates} candidate atoms exceed the cap of {cap}")]
    UniverseTooLarge { candidates: usize, cap: usize },
}

/// The exact set of ground atoms of `pred` entailed by `program` over the
/// universe, computed by enumerate-and-test. Queries that exhaust the budget
/// count as not derivable; `clipped` reports how many did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    pub atoms: BTreeSet<Atom>,
    pub clipped: usize,
}

pub fn derivable_closure(
    program: &Program,
    pred: &Sym,
    universe: &UniverseSpec,
    budget: QueryBudget,
) -> Result<Closure, ClosureError> {
    let candidates = universe.candidate_count();
    if candidates > universe.max_atoms {
        return Err(ClosureError::UniverseTooLarge { candidates, cap: universe.max_atoms });
    }
    let domains: Vec<Vec<Term>> = universe.per_arg.iter().map(ArgDomain::terms).collect();
    let mut atoms = BTreeSet::new();
    let mut clipped = 0usize;
    let mut pick = vec![0usize; domains.len()];
    if domains.iter().any(Vec::is_empty) {
        return Ok(Closure { atoms, clipped });
    }
    loop {
        let args: Vec<Term> = pick.iter().zip(domains.iter()).map(|(&i, d)| d[i].clone()).collect();
        let atom = Atom { pred: pred.clone(), args };
        match entails(program, &atom, budget) {
            Ok(true) => {
                atoms.insert(atom);
            }
            Ok(false) => {}
            Err(SolveError::BudgetExhausted { .. }) => clipped += 1,
        }
        // advance the mixed-radix counter
        let mut i = domains.len();
        loop {
            if i == 0 {
                return Ok(Closure { atoms, clipped });
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < domains[i].len() {
                break;
            }
            pick[i] = 0;
        }
    }
}

/// Naive bottom-up fixpoint evaluation for list-free programs. Retained as an
/// independent oracle for the SLD engine; not used on the main path.
pub fn bottom_up_closure(program: &Program) -> BTreeSet<Atom> {
    let mut constants: BTreeSet<Sym> = BTreeSet::new();
    for c in program.clauses() {
        for a in std::iter::once(&c.head).chain(c.body.iter()) {
            for t in &a.args {
                collect_constants(t, &mut constants);
            }
        }
    }
    let constants: Vec<Sym> = constants.into_iter().collect();

    let mut derived: BTreeSet<Atom> = BTreeSet::new();
    loop {
        let mut added = false;
        for clause in program.clauses() {
            let vars = clause.vars();
            let mut assignment: BTreeMap<Var, Sym> = BTreeMap::new();
            if instantiate(clause, &vars, 0, &constants, &mut assignment, &mut derived) {
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    derived
}

fn collect_constants(t: &Term, out: &mut BTreeSet<Sym>) {
    match t {
        Term::Const(c) => {
            out.insert(c.clone());
        }
        Term::Var(_) => {}
        Term::List(elems) => {
            for e in elems {
                collect_constants(e, out);
            }
        }
    }
}

fn instantiate(
    clause: &Clause,
    vars: &[Var],
    i: usize,
    constants: &[Sym],
    assignment: &mut BTreeMap<Var, Sym>,
    derived: &mut BTreeSet<Atom>,
) -> bool {
    if i == vars.len() {
        let ground = |a: &Atom| {
            a.map_vars(&mut |v: &Var| Term::Const(assignment[v].clone()))
        };
        if clause.body.iter().all(|b| derived.contains(&ground(b))) {
            return derived.insert(ground(&clause.head));
        }
        return false;
    }
    let mut added = false;
    for c in constants {
        assignment.insert(vars[i].clone(), c.clone());
        if instantiate(clause, vars, i + 1, constants, assignment, derived) {
            added = true;
        }
    }
    assignment.remove(&vars[i]);
    added
}
