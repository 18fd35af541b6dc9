//! The learning-from-failures loop for one target predicate: draw candidates
//! from the ordered stream, test them against the labeled examples under the
//! current background, convert each failure into pruning constraints, and
//! return the first complete and consistent hypothesis.
//!
//! Completeness and consistency are exact: the found hypothesis entails
//! every positive example and no negative example. The setting is noise-free,
//! so there is no coverage slack.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::bias::{BiasError, BiasSpec};
use crate::hypothesis::{enumerate_candidates, Candidate, ConstraintStore};
use crate::logic::parse::{Lexer, ParseError};
use crate::logic::{Atom, Clause, Program};
use crate::solve::{entails, QueryBudget, SolveError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    Pos,
    Neg,
}

/// Where an example came from: the demonstration and the state index inside
/// it. Hand-curated example files use a synthetic id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub demo: String,
    pub state_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub atom: Atom,
    pub label: Label,
    pub provenance: Provenance,
}

impl Example {
    pub fn pos(atom: Atom) -> Self {
        Example { atom, label: Label::Pos, provenance: Provenance::default() }
    }

    pub fn neg(atom: Atom) -> Self {
        Example { atom, label: Label::Neg, provenance: Provenance::default() }
    }
}

/// Result of testing one candidate against the example sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    TooGeneral { witness: Atom },
    TooSpecific { witness: Atom, budget_hit: bool },
    Both { neg_witness: Atom, pos_witness: Atom },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SearchLimits {
    /// Upper bound on candidates tested before giving up. Deterministic, in
    /// contrast to a wall-clock limit.
    pub max_candidates: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_candidates: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LearnStatus {
    Found,
    Exhausted,
    BudgetExceeded,
}

#[derive(Debug, Clone)]
pub struct LearnResult {
    pub hypothesis: Program,
    pub tested: usize,
    pub pruned: usize,
    pub elapsed: Duration,
    pub status: LearnStatus,
    /// Queries that hit the engine budget while testing; nonzero values mean
    /// some candidate looked divergent and was treated as non-entailing.
    pub budget_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LearnError {
    #[error("no positive examples supplied")]
    NoPositives,
    #[error("example {0} appears with both labels")]
    ConflictingExamples(Atom),
    #[error(transparent)]
    Bias(#[from] BiasError),
    #[error("example file: {0}")]
    ExampleFile(#[from] ParseError),
    #[error("example file: expected pos(...) or neg(...), found {0}")]
    BadExampleLabel(String),
}

fn entailed(program: &Program, goal: &Atom, budget: QueryBudget, budget_hits: &mut usize) -> bool {
    match entails(program, goal, budget) {
        Ok(v) => v,
        Err(SolveError::BudgetExhausted { .. }) => {
            *budget_hits += 1;
            false
        }
    }
}

/// Test a candidate against the examples. Negatives are checked before
/// positives; witnesses are the first failing examples in input order.
pub fn test_candidate(
    background: &Program,
    candidate: &Candidate,
    pos: &[Example],
    neg: &[Example],
    budget: QueryBudget,
) -> Outcome {
    let mut budget_hits = 0usize;
    let combined = extend_program(background, candidate.program.clauses());
    let neg_witness = neg
        .iter()
        .find(|e| entailed(&combined, &e.atom, budget, &mut budget_hits))
        .map(|e| e.atom.clone());
    let mut pos_budget_hit = false;
    let pos_witness = pos.iter().find_map(|e| {
        let mut hits = 0usize;
        let ok = entailed(&combined, &e.atom, budget, &mut hits);
        if !ok {
            pos_budget_hit = hits > 0;
            Some(e.atom.clone())
        } else {
            None
        }
    });
    match (neg_witness, pos_witness) {
        (None, None) => Outcome::Complete,
        (Some(witness), None) => Outcome::TooGeneral { witness },
        (None, Some(witness)) => Outcome::TooSpecific { witness, budget_hit: pos_budget_hit },
        (Some(neg_witness), Some(pos_witness)) => Outcome::Both { neg_witness, pos_witness },
    }
}

/// Clone-and-append without the canonical dedup of `Program::union`; testing
/// never adds duplicates of background clauses.
fn extend_program(background: &Program, clauses: &[Clause]) -> Program {
    let mut p = background.clone();
    for c in clauses {
        p.push(c.clone());
    }
    p
}

#[derive(Clone)]
struct Coverage {
    pos: Vec<u64>,
    neg: Vec<u64>,
    recursive: bool,
}

fn bitset_words(n: usize) -> usize {
    (n + 63) / 64
}

fn set_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn get_bit(bits: &[u64], i: usize) -> bool {
    bits[i / 64] & (1 << (i % 64)) != 0
}

/// Per-clause example coverage, exact for clauses that do not call the
/// target predicate. Programs made only of such clauses cover the union of
/// their members' coverage, so they can be tested without running the engine.
/// Recursive clauses derive nothing without a base case, so candidates made
/// only of recursive clauses are exactly uncovered as well, provided the
/// background holds no clauses of the target predicate.
struct CoverageCache<'a> {
    background: &'a Program,
    pos: &'a [Example],
    neg: &'a [Example],
    budget: QueryBudget,
    target: (crate::logic::Sym, usize),
    background_defines_target: bool,
    map: HashMap<Arc<str>, Coverage>,
    budget_hits: usize,
}

impl<'a> CoverageCache<'a> {
    fn new(
        background: &'a Program,
        pos: &'a [Example],
        neg: &'a [Example],
        budget: QueryBudget,
        target: (crate::logic::Sym, usize),
    ) -> Self {
        let background_defines_target = !background.matching(&target.0, target.1).is_empty();
        CoverageCache {
            background,
            pos,
            neg,
            budget,
            target,
            background_defines_target,
            map: HashMap::new(),
            budget_hits: 0,
        }
    }

    fn clause_coverage(&mut self, clause: &Clause) -> Coverage {
        let key: Arc<str> = Arc::from(crate::logic::canonical_clause_text(clause).as_str());
        if let Some(c) = self.map.get(&key) {
            return c.clone();
        }
        let recursive = clause
            .body
            .iter()
            .any(|a| a.pred == self.target.0 && a.arity() == self.target.1);
        let mut cov = Coverage {
            pos: vec![0; bitset_words(self.pos.len())],
            neg: vec![0; bitset_words(self.neg.len())],
            recursive,
        };
        if !recursive {
            let single = extend_program(self.background, std::slice::from_ref(clause));
            for (i, e) in self.pos.iter().enumerate() {
                if entailed(&single, &e.atom, self.budget, &mut self.budget_hits) {
                    set_bit(&mut cov.pos, i);
                }
            }
            for (i, e) in self.neg.iter().enumerate() {
                if entailed(&single, &e.atom, self.budget, &mut self.budget_hits) {
                    set_bit(&mut cov.neg, i);
                }
            }
        }
        self.map.insert(key, cov.clone());
        cov
    }

    /// Fast-path outcome, available when coverage factorizes exactly: either
    /// no member clause is recursive, or every member is (and the target is
    /// not defined by the background), in which case nothing is derivable.
    fn union_outcome(&mut self, candidate: &Candidate) -> Option<Outcome> {
        let mut pos_bits = vec![0u64; bitset_words(self.pos.len())];
        let mut neg_bits = vec![0u64; bitset_words(self.neg.len())];
        let mut any_recursive = false;
        let mut any_base = false;
        for clause in candidate.program.clauses() {
            let cov = self.clause_coverage(clause);
            if cov.recursive {
                any_recursive = true;
                continue;
            }
            any_base = true;
            for (acc, w) in pos_bits.iter_mut().zip(cov.pos.iter()) {
                *acc |= w;
            }
            for (acc, w) in neg_bits.iter_mut().zip(cov.neg.iter()) {
                *acc |= w;
            }
        }
        if any_recursive && (any_base || self.background_defines_target) {
            return None; // coverage does not factorize, run the engine
        }
        let neg_witness =
            (0..self.neg.len()).find(|&i| get_bit(&neg_bits, i)).map(|i| self.neg[i].atom.clone());
        let pos_witness = (0..self.pos.len())
            .find(|&i| !get_bit(&pos_bits, i))
            .map(|i| self.pos[i].atom.clone());
        Some(match (neg_witness, pos_witness) {
            (None, None) => Outcome::Complete,
            (Some(witness), None) => Outcome::TooGeneral { witness },
            (None, Some(witness)) => Outcome::TooSpecific { witness, budget_hit: false },
            (Some(neg_witness), Some(pos_witness)) => Outcome::Both { neg_witness, pos_witness },
        })
    }
}

/// Learn one target: the first candidate in the pruned stream satisfying
/// completeness and consistency, which by the emission order has minimal
/// size. Exhaustion and budget overrun are results, not errors.
pub fn learn_target(
    background: &Program,
    bias: &BiasSpec,
    pos: &[Example],
    neg: &[Example],
    limits: SearchLimits,
    budget: QueryBudget,
) -> Result<LearnResult, LearnError> {
    let start = Instant::now();
    if pos.is_empty() {
        return Err(LearnError::NoPositives);
    }
    for p in pos {
        if neg.iter().any(|n| n.atom == p.atom) {
            return Err(LearnError::ConflictingExamples(p.atom.clone()));
        }
    }

    let mut budget_hits = 0usize;
    let mut tested = 0usize;

    // The degenerate case: the background alone already satisfies both
    // conditions, so the empty program is the minimal hypothesis.
    let empty = Candidate::empty();
    tested += 1;
    if let Outcome::Complete = test_candidate(background, &empty, pos, neg, budget) {
        return Ok(LearnResult {
            hypothesis: Program::new(),
            tested,
            pruned: 0,
            elapsed: start.elapsed(),
            status: LearnStatus::Found,
            budget_hits,
        });
    }

    let mut stream = enumerate_candidates(bias)?;
    let mut store = ConstraintStore::for_pool(stream.pool_arc());
    let mut cache =
        CoverageCache::new(background, pos, neg, budget, (bias.head.name.clone(), bias.head.arity));

    let status = loop {
        let Some(candidate) = stream.next(&mut store) else {
            break LearnStatus::Exhausted;
        };
        if tested >= limits.max_candidates {
            break LearnStatus::BudgetExceeded;
        }
        tested += 1;
        let outcome = match cache.union_outcome(&candidate) {
            Some(o) => o,
            None => test_candidate(background, &candidate, pos, neg, budget),
        };
        match outcome {
            Outcome::Complete => {
                // Post-hoc full re-test, with no shortcuts, before accepting.
                let full = test_candidate(background, &candidate, pos, neg, budget);
                debug_assert_eq!(full, Outcome::Complete);
                if full == Outcome::Complete {
                    budget_hits += cache.budget_hits;
                    return Ok(LearnResult {
                        hypothesis: candidate.program,
                        tested,
                        pruned: stream.pruned(),
                        elapsed: start.elapsed(),
                        status: LearnStatus::Found,
                        budget_hits,
                    });
                }
                store.prune_generalizations(&candidate);
                store.prune_specializations(&candidate);
            }
            Outcome::TooGeneral { .. } => store.prune_generalizations(&candidate),
            Outcome::TooSpecific { budget_hit, .. } => {
                if budget_hit {
                    budget_hits += 1;
                }
                store.prune_specializations(&candidate);
            }
            Outcome::Both { .. } => {
                store.prune_generalizations(&candidate);
                store.prune_specializations(&candidate);
            }
        }
    };

    budget_hits += cache.budget_hits;
    Ok(LearnResult {
        hypothesis: Program::new(),
        tested,
        pruned: stream.pruned(),
        elapsed: start.elapsed(),
        status,
        budget_hits,
    })
}

/// Read an example file: lines of `pos(atom).` / `neg(atom).` in the clause
/// grammar. The same ground atom under both labels is rejected.
pub fn parse_examples(text: &str) -> Result<(Vec<Example>, Vec<Example>), LearnError> {
    let mut lex = Lexer::new(text);
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    while !lex.at_eof() {
        let label = lex.ident()?;
        lex.expect("(")?;
        let atom = lex.atom()?;
        lex.expect(")")?;
        lex.expect(".")?;
        match label.as_str() {
            "pos" => pos.push(Example::pos(atom)),
            "neg" => neg.push(Example::neg(atom)),
            other => return Err(LearnError::BadExampleLabel(other.to_string())),
        }
    }
    for p in &pos {
        if neg.iter().any(|n| n.atom == p.atom) {
            return Err(LearnError::ConflictingExamples(p.atom.clone()));
        }
    }
    Ok((pos, neg))
}

pub fn render_examples(pos: &[Example], neg: &[Example]) -> String {
    let mut out = String::new();
    for e in pos {
        out.push_str(&format!("pos({}).\n", e.atom));
    }
    for e in neg {
        out.push_str(&format!("neg({}).\n", e.atom));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::parse_bias;
    use crate::logic::parse::{parse_atom, parse_program};

    fn atom(s: &str) -> Atom {
        parse_atom(s).unwrap()
    }

    fn stone_world() -> Program {
        parse_program(
            "material(b1,stone). material(b2,glass).\n\
             stone(stone). glass(glass). z1(z1). z2(z2).",
        )
        .unwrap()
    }

    #[test]
    fn clause_one_is_complete_and_consistent() {
        let background = stone_world();
        let candidate = Candidate::from_clauses(vec![crate::logic::parse::parse_clause(
            "target_z(B,Z):- material(B,M), stone(M), z1(Z).",
        )
        .unwrap()]);
        let pos = vec![Example::pos(atom("target_z(b1,z1)"))];
        let neg = vec![Example::neg(atom("target_z(b1,z2)"))];
        let outcome =
            test_candidate(&background, &candidate, &pos, &neg, QueryBudget::default());
        assert_eq!(outcome, Outcome::Complete);
    }

    #[test]
    fn level_only_clause_is_too_general() {
        let background = stone_world();
        let candidate = Candidate::from_clauses(vec![crate::logic::parse::parse_clause(
            "target_z(B,Z):- material(B,M), z1(Z).",
        )
        .unwrap()]);
        let pos = vec![Example::pos(atom("target_z(b1,z1)"))];
        let neg = vec![Example::neg(atom("target_z(b2,z1)"))];
        let outcome =
            test_candidate(&background, &candidate, &pos, &neg, QueryBudget::default());
        assert_eq!(outcome, Outcome::TooGeneral { witness: atom("target_z(b2,z1)") });
    }

    #[test]
    fn empty_candidate_is_too_specific() {
        let background = stone_world();
        let pos = vec![Example::pos(atom("target_z(b1,z1)"))];
        let outcome =
            test_candidate(&background, &Candidate::empty(), &pos, &[], QueryBudget::default());
        assert!(matches!(outcome, Outcome::TooSpecific { .. }));
    }

    #[test]
    fn learns_stone_rule() {
        let background = stone_world();
        let bias = parse_bias(
            "head(target_z/2). type(target_z, (block, level)).\n\
             body(material/2). type(material, (block, material)).\n\
             body(stone/1). type(stone, (material)).\n\
             body(glass/1). type(glass, (material)).\n\
             body(z1/1). type(z1, (level)).\n\
             body(z2/1). type(z2, (level)).\n\
             max_vars(3). max_body(3). max_clauses(2).",
        )
        .unwrap();
        let pos = vec![Example::pos(atom("target_z(b1,z1)"))];
        let neg = vec![
            Example::neg(atom("target_z(b1,z2)")),
            Example::neg(atom("target_z(b2,z1)")),
        ];
        let result = learn_target(
            &background,
            &bias,
            &pos,
            &neg,
            SearchLimits::default(),
            QueryBudget::default(),
        )
        .unwrap();
        assert_eq!(result.status, LearnStatus::Found);
        let expected = crate::logic::parse::parse_program(
            "target_z(B,Z):- material(B,M), stone(M), z1(Z).",
        )
        .unwrap();
        assert!(crate::logic::program_equal_upto_renaming(&result.hypothesis, &expected));
    }

    #[test]
    fn background_satisfying_examples_yields_empty_hypothesis() {
        let mut background = stone_world();
        background.push(crate::logic::parse::parse_clause("target_z(b1,z1).").unwrap());
        let bias = parse_bias(
            "head(target_z/2). type(target_z, (block, level)).\n\
             body(material/2). type(material, (block, material)).\n\
             body(stone/1). type(stone, (material)).\n\
             body(z1/1). type(z1, (level)).\n\
             max_vars(3). max_body(3). max_clauses(1).",
        )
        .unwrap();
        let pos = vec![Example::pos(atom("target_z(b1,z1)"))];
        let result = learn_target(
            &background,
            &bias,
            &pos,
            &[],
            SearchLimits::default(),
            QueryBudget::default(),
        )
        .unwrap();
        assert_eq!(result.status, LearnStatus::Found);
        assert!(result.hypothesis.is_empty());
    }

    #[test]
    fn conflicting_examples_rejected() {
        let pos = vec![Example::pos(atom("p(a)"))];
        let neg = vec![Example::neg(atom("p(a)"))];
        let bias = parse_bias(
            "head(p/1). type(p, (t)). body(q/1). type(q, (t)).\n\
             max_vars(1). max_body(1). max_clauses(1).",
        )
        .unwrap();
        let err = learn_target(
            &Program::new(),
            &bias,
            &pos,
            &neg,
            SearchLimits::default(),
            QueryBudget::default(),
        )
        .unwrap_err();
        assert!(matches!(err, LearnError::ConflictingExamples(_)));
    }

    #[test]
    fn example_file_round_trip() {
        let text = "pos(target_z(b1,z1)).\nneg(target_z(b1,z2)).\npos(tower_from([b1,b2],z1)).\n";
        let (pos, neg) = parse_examples(text).unwrap();
        assert_eq!(pos.len(), 2);
        assert_eq!(neg.len(), 1);
        let rendered = render_examples(&pos, &neg);
        let (pos2, neg2) = parse_examples(&rendered).unwrap();
        assert_eq!(pos, pos2);
        assert_eq!(neg, neg2);
    }

    #[test]
    fn conflicting_example_file_rejected() {
        let text = "pos(p(a)).\nneg(p(a)).\n";
        assert!(matches!(parse_examples(text), Err(LearnError::ConflictingExamples(_))));
    }
}
