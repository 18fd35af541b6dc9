//! Candidate hypothesis enumeration and the learning-from-failures
//! constraint store.
//!
//! Candidates are programs whose clauses all share the target head predicate.
//! They are emitted in non-decreasing total size (literal count, heads
//! included); within one size class the order is lexicographic on canonical
//! program text. A constraint store records failed candidates so that their
//! generalizations (after a candidate entailed a negative example) or
//! specializations (after a candidate missed a positive example) are never
//! emitted again.
//!
//! The clause space is cut by structural rules that all of the target rules
//! of this domain satisfy and that keep the search tractable:
//! head arguments are distinct variables and every head variable occurs in
//! the body; every variable occurs at least twice; no literal repeats a
//! variable across its own arguments; each body predicate is used at most
//! once per clause; every body literal is variable-linked to the head; a
//! recursive literal must differ from the head tuple and the clause must
//! carry a decreasing `tail/2` literal; and each clause must admit an
//! execution order in which list deconstructors and recursive calls only
//! run once their input arguments are bound.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::bias::{ArgMode, BiasError, BiasSpec, PredSig};
use crate::logic::{
    canonical_clause_text, canonical_program_text, theta_subsumes, Atom, Clause, Program, Sym,
    Term, Var,
};

/// A candidate hypothesis in canonical form. The canonical text is the
/// stable identity used for dedup, ordering, and the constraint store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub program: Program,
    pub size: usize,
    pub canonical: Arc<str>,
    /// Pool indices of the member clauses when the candidate came out of an
    /// enumeration stream; empty for hand-built candidates.
    pub members: Vec<u32>,
}

impl Candidate {
    pub fn empty() -> Self {
        Candidate { program: Program::new(), size: 0, canonical: Arc::from(""), members: Vec::new() }
    }

    pub fn from_clauses(clauses: Vec<Clause>) -> Self {
        let program = Program::from_clauses(clauses);
        let size = program.total_size();
        let canonical = Arc::from(canonical_program_text(&program).as_str());
        Candidate { program, size, canonical, members: Vec::new() }
    }

    fn from_pool(pool: &[PoolClause], ids: &[usize]) -> Self {
        let mut c =
            Candidate::from_clauses(ids.iter().map(|&i| pool[i].clause.clone()).collect());
        c.members = ids.iter().map(|&i| i as u32).collect();
        c
    }
}

/// One clause of the hypothesis space, stored in executable body order.
#[derive(Debug, Clone)]
pub struct PoolClause {
    pub clause: Clause,
    pub canonical: String,
    pub size: usize,
    pub recursive: bool,
}

fn canonical_var(i: usize) -> Var {
    let letter = (b'A' + (i % 26) as u8) as char;
    if i < 26 {
        Var::new(letter.to_string())
    } else {
        Var::new(format!("{}{}", letter, i / 26))
    }
}

struct ClauseGen<'b> {
    bias: &'b BiasSpec,
    head: Atom,
    head_pred: PredSig,
    var_types: Vec<Sym>,
    body: Vec<Atom>,
    out: Vec<PoolClause>,
    seen: HashSet<String>,
}

/// Descriptor of a literal instance: bias body-pred index plus the variable
/// slots it uses. Bodies are generated with strictly increasing descriptors,
/// which fixes one generation order per variable-numbered body.
type Descriptor = (usize, Vec<usize>);

impl<'b> ClauseGen<'b> {
    fn run(bias: &'b BiasSpec) -> Vec<PoolClause> {
        let head_args: Vec<Term> = (0..bias.head.arity).map(|i| Term::Var(canonical_var(i))).collect();
        let head = Atom { pred: bias.head.name.clone(), args: head_args };
        let mut gen = ClauseGen {
            bias,
            head,
            head_pred: bias.head.clone(),
            var_types: bias.head_types.clone(),
            body: Vec::new(),
            out: Vec::new(),
            seen: HashSet::new(),
        };
        gen.extend(None);
        gen.out.sort_by(|a, b| (a.size, &a.canonical).cmp(&(b.size, &b.canonical)));
        gen.out
    }

    fn extend(&mut self, last: Option<&Descriptor>) {
        if !self.body.is_empty() {
            self.emit();
        }
        if self.body.len() == self.bias.max_body_literals {
            return;
        }
        for pred_idx in 0..self.bias.body.len() {
            let arity = self.bias.body[pred_idx].sig.arity;
            let mut slots = vec![0usize; arity];
            self.fill_slots(pred_idx, 0, &mut slots, last);
        }
    }

    fn fill_slots(
        &mut self,
        pred_idx: usize,
        pos: usize,
        slots: &mut Vec<usize>,
        last: Option<&Descriptor>,
    ) {
        let bias = self.bias;
        let spec = &bias.body[pred_idx];
        if pos == spec.sig.arity {
            let desc: Descriptor = (pred_idx, slots.clone());
            if let Some(prev) = last {
                // strictly increasing predicate index: fixes one generation
                // order per body and enforces one use per body predicate
                if desc.0 <= prev.0 {
                    return;
                }
            }
            let args: Vec<Term> = slots.iter().map(|&s| Term::Var(canonical_var(s))).collect();
            let atom = Atom { pred: spec.sig.name.clone(), args };
            let mut added = 0usize;
            for (&slot, ty) in slots.iter().zip(spec.arg_types.iter()) {
                if slot >= self.var_types.len() {
                    self.var_types.push(ty.clone());
                    added += 1;
                }
            }
            self.body.push(atom);
            self.extend(Some(&desc));
            self.body.pop();
            for _ in 0..added {
                self.var_types.pop();
            }
            return;
        }
        let wanted = &spec.arg_types[pos];
        let existing = self.var_types.len();
        // existing variables of the right type, not already used in this literal
        for slot in 0..existing {
            if self.var_types[slot] == *wanted && !slots[..pos].contains(&slot) {
                slots[pos] = slot;
                self.fill_slots(pred_idx, pos + 1, slots, last);
            }
        }
        // or introduce a fresh variable, if the budget allows; fresh slots are
        // numbered in position order and typed at literal commit
        let pending_new = slots[..pos].iter().filter(|&&s| s >= existing).count();
        let next = existing + pending_new;
        if next < bias.max_vars {
            slots[pos] = next;
            self.fill_slots(pred_idx, pos + 1, slots, last);
        }
    }

    fn emit(&mut self) {
        let clause = Clause { head: self.head.clone(), body: self.body.clone() };
        if !self.passes_filters(&clause) {
            return;
        }
        let Some(ordered) = schedule_body(&clause, self.bias) else {
            return;
        };
        let canonical = canonical_clause_text(&clause);
        if !self.seen.insert(canonical.clone()) {
            return;
        }
        let recursive = clause
            .body
            .iter()
            .any(|a| a.pred == self.head_pred.name && a.arity() == self.head_pred.arity);
        let size = clause.size();
        self.out.push(PoolClause { clause: ordered, canonical, size, recursive });
    }

    fn passes_filters(&self, clause: &Clause) -> bool {
        // no literal repeats a variable across its arguments
        for atom in &clause.body {
            let mut seen = Vec::new();
            for t in &atom.args {
                if let Term::Var(v) = t {
                    if seen.contains(&v) {
                        return false;
                    }
                    seen.push(v);
                }
            }
        }
        // every head variable occurs in the body
        let head_vars = clause.head.vars();
        for hv in &head_vars {
            if !clause.body.iter().any(|a| a.vars().contains(hv)) {
                return false;
            }
        }
        // every variable occurs at least twice in the clause
        let mut counts: HashMap<Var, usize> = HashMap::new();
        for a in std::iter::once(&clause.head).chain(clause.body.iter()) {
            for t in &a.args {
                if let Term::Var(v) = t {
                    *counts.entry(v.clone()).or_default() += 1;
                }
            }
        }
        if counts.values().any(|&n| n < 2) {
            return false;
        }
        // every body literal is variable-linked to the head
        let mut linked: BTreeSet<Var> = head_vars.iter().cloned().collect();
        let mut pending: Vec<&Atom> = clause.body.iter().collect();
        loop {
            let before = pending.len();
            pending.retain(|a| {
                let vars = a.vars();
                if vars.iter().any(|v| linked.contains(v)) {
                    linked.extend(vars);
                    false
                } else {
                    true
                }
            });
            if pending.is_empty() {
                break;
            }
            if pending.len() == before {
                return false;
            }
        }
        // recursion guard
        let recursive_lits: Vec<&Atom> = clause
            .body
            .iter()
            .filter(|a| a.pred == self.head_pred.name && a.arity() == self.head_pred.arity)
            .collect();
        if !recursive_lits.is_empty() {
            let has_tail = clause.body.iter().any(|a| a.pred.as_str() == "tail" && a.arity() == 2);
            if !has_tail {
                return false;
            }
            for lit in recursive_lits {
                if lit.args == clause.head.args {
                    return false;
                }
            }
        }
        true
    }
}

/// Reorder a clause body so that every literal runs with its `In` arguments
/// bound, assuming a bound head. Returns `None` when no such order exists.
pub fn schedule_body(clause: &Clause, bias: &BiasSpec) -> Option<Clause> {
    let mut bound: BTreeSet<Var> = clause.head.vars().into_iter().collect();
    let mut remaining: Vec<Atom> = clause.body.clone();
    let mut ordered = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let pick = remaining.iter().position(|a| {
            let sig = PredSig { name: a.pred.clone(), arity: a.arity() };
            let modes = bias
                .body_pred(&sig)
                .map(|b| b.modes.clone())
                .unwrap_or_else(|| vec![ArgMode::Any; a.arity()]);
            a.args.iter().zip(modes.iter()).all(|(t, m)| match m {
                ArgMode::Any => true,
                ArgMode::In => t.vars().iter().all(|v| bound.contains(v)),
            })
        })?;
        let atom = remaining.remove(pick);
        bound.extend(atom.vars());
        ordered.push(atom);
    }
    Some(Clause { head: clause.head.clone(), body: ordered })
}

trait TermVars {
    fn vars(&self) -> Vec<Var>;
}

impl TermVars for Term {
    fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }
}

/// All bias-respecting single clauses, sorted by (size, canonical text).
pub fn clause_pool(bias: &BiasSpec) -> Result<Vec<PoolClause>, BiasError> {
    bias.validate()?;
    let pool = ClauseGen::run(bias);
    if pool.is_empty() {
        return Err(BiasError::EmptySpace("no clause satisfies the bias".into()));
    }
    Ok(pool)
}

fn bit(bits: &[u64], i: u32) -> bool {
    bits[i as usize / 64] & (1 << (i % 64)) != 0
}

fn set(bits: &mut [u64], i: u32) {
    bits[i as usize / 64] |= 1 << (i % 64);
}

/// Records failed candidates and answers whether a new candidate falls in
/// their pruned cones. Generality between programs is approximated by
/// clause-wise theta-subsumption, which is sound for definite programs.
///
/// When bound to a clause pool the store answers in near-constant time:
/// a too-general single-clause failure marks every pool clause subsuming it
/// as dead (any candidate containing one is a generalization of the
/// failure), and multi-clause failures are checked through cached
/// subsumption bitmaps over pool indices. Candidates without pool
/// provenance fall back to direct subsumption tests.
#[derive(Debug, Default)]
pub struct ConstraintStore {
    banned_exact: HashSet<Arc<str>>,
    pool: Option<Arc<Vec<PoolClause>>>,
    words: usize,
    /// Candidates containing any of these pool clauses generalize a recorded
    /// too-general failure.
    dead_members: Vec<u64>,
    /// Pair cores of too-general failures, for generation-time skipping.
    exact_pairs: HashSet<(u32, u32)>,
    /// Too-general failures with two or more clauses, as pool ids.
    gen_multi: Vec<Vec<u32>>,
    /// Single-clause too-specific failures, as a pool-id bitset.
    spec_single_bits: Vec<u64>,
    /// Too-specific failures with two or more clauses, as pool ids.
    spec_multi: Vec<Vec<u32>>,
    /// rows[m] = bitset of pool clauses that clause m theta-subsumes.
    rows: HashMap<u32, Vec<u64>>,
    /// cols[m] = bitset of pool clauses that theta-subsume clause m.
    cols: HashMap<u32, Vec<u64>>,
    /// Failures recorded from candidates without pool provenance.
    loose: Vec<(bool, Vec<Clause>)>, // (too_general, clauses)
}

impl ConstraintStore {
    pub fn new() -> Self {
        ConstraintStore::default()
    }

    /// A store indexed against the clause pool of the stream it will prune.
    pub fn for_pool(pool: Arc<Vec<PoolClause>>) -> Self {
        let words = (pool.len() + 63) / 64;
        ConstraintStore {
            pool: Some(pool),
            words,
            dead_members: vec![0; words],
            spec_single_bits: vec![0; words],
            ..ConstraintStore::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.banned_exact.is_empty() && self.loose.is_empty()
    }

    fn row(&mut self, m: u32) -> &Vec<u64> {
        let pool = self.pool.as_ref().expect("pool-bound store").clone();
        let words = self.words;
        self.rows.entry(m).or_insert_with(|| {
            let mut bits = vec![0u64; words];
            let general = &pool[m as usize].clause;
            for (i, p) in pool.iter().enumerate() {
                if m as usize == i || theta_subsumes(general, &p.clause) {
                    set(&mut bits, i as u32);
                }
            }
            bits
        })
    }

    fn col(&mut self, m: u32) -> &Vec<u64> {
        let pool = self.pool.as_ref().expect("pool-bound store").clone();
        let words = self.words;
        self.cols.entry(m).or_insert_with(|| {
            let mut bits = vec![0u64; words];
            let specific = &pool[m as usize].clause;
            for (i, p) in pool.iter().enumerate() {
                if m as usize == i || theta_subsumes(&p.clause, specific) {
                    set(&mut bits, i as u32);
                }
            }
            bits
        })
    }

    /// True when the candidate may not contain this pool clause because some
    /// recorded failure has a subsumed clause in it.
    pub fn member_dead(&self, m: u32) -> bool {
        self.pool.is_some() && bit(&self.dead_members, m)
    }

    pub fn pair_core_banned(&self, a: u32, b: u32) -> bool {
        self.exact_pairs.contains(&(a.min(b), a.max(b)))
    }

    /// `failed` entailed a negative example: exclude it and everything at
    /// least as general (every clause of `failed` has a subsuming
    /// counterpart in the candidate).
    pub fn prune_generalizations(&mut self, failed: &Candidate) {
        self.banned_exact.insert(failed.canonical.clone());
        if self.pool.is_some() && !failed.members.is_empty() {
            match failed.members.as_slice() {
                [single] => {
                    let cone = self.col(*single).clone();
                    for (d, c) in self.dead_members.iter_mut().zip(cone.iter()) {
                        *d |= c;
                    }
                }
                members => {
                    if let [a, b] = members {
                        self.exact_pairs.insert((*a.min(b), *a.max(b)));
                    }
                    self.gen_multi.push(members.to_vec());
                }
            }
        } else {
            self.loose.push((true, failed.program.clauses().to_vec()));
        }
    }

    /// `failed` missed a positive example: exclude it and everything at most
    /// as general (every clause of the candidate is subsumed by a clause of
    /// `failed`).
    pub fn prune_specializations(&mut self, failed: &Candidate) {
        self.banned_exact.insert(failed.canonical.clone());
        if self.pool.is_some() && !failed.members.is_empty() {
            match failed.members.as_slice() {
                [single] => set(&mut self.spec_single_bits, *single),
                members => self.spec_multi.push(members.to_vec()),
            }
        } else {
            self.loose.push((false, failed.program.clauses().to_vec()));
        }
    }

    pub fn is_banned(&mut self, candidate: &Candidate) -> bool {
        if self.banned_exact.contains(&candidate.canonical) {
            return true;
        }
        if self.pool.is_some() && !candidate.members.is_empty() {
            let members = candidate.members.clone();
            if members.iter().any(|&m| bit(&self.dead_members, m)) {
                return true;
            }
            // generalizations of multi-clause too-general failures: every
            // failure clause must be subsumed by some member
            if !self.gen_multi.is_empty() {
                let mut union = vec![0u64; self.words];
                for &m in &members {
                    let row = self.row(m).clone();
                    for (u, r) in union.iter_mut().zip(row.iter()) {
                        *u |= r;
                    }
                }
                for fi in 0..self.gen_multi.len() {
                    if self.gen_multi[fi].iter().all(|&fc| bit(&union, fc)) {
                        return true;
                    }
                }
            }
            // specializations: every member must be subsumed by some clause
            // of one recorded too-specific failure
            let mut inter: Option<Vec<u64>> = None;
            for &m in &members {
                let col = self.col(m).clone();
                inter = Some(match inter {
                    None => col,
                    Some(mut acc) => {
                        for (a, c) in acc.iter_mut().zip(col.iter()) {
                            *a &= c;
                        }
                        acc
                    }
                });
            }
            if let Some(acc) = &inter {
                if acc.iter().zip(self.spec_single_bits.iter()).any(|(a, s)| a & s != 0) {
                    return true;
                }
            }
            for fi in 0..self.spec_multi.len() {
                let f = self.spec_multi[fi].clone();
                let all_covered = members.iter().all(|&m| {
                    let col = self.col(m);
                    f.iter().any(|&fc| bit(col, fc))
                });
                if all_covered {
                    return true;
                }
            }
        }
        // failures recorded without pool provenance
        for li in 0..self.loose.len() {
            let (too_general, clauses) = self.loose[li].clone();
            let banned = if too_general {
                clauses.iter().all(|fc| {
                    candidate.program.clauses().iter().any(|cc| theta_subsumes(cc, fc))
                })
            } else {
                candidate.program.clauses().iter().all(|cc| {
                    clauses.iter().any(|fc| theta_subsumes(fc, cc))
                })
            };
            if banned {
                return true;
            }
        }
        false
    }
}

/// Lazy, ordered stream of candidate programs over a clause pool.
///
/// The constraint store is consulted both at emission and during
/// generation: combinations containing a pool clause in the store's dead
/// cone, or a recorded too-general pair, are skipped without ever being
/// materialized.
pub struct CandidateStream {
    pool: Arc<Vec<PoolClause>>,
    max_clauses: usize,
    size: usize,
    max_size: usize,
    buffer: Vec<Candidate>,
    buffer_pos: usize,
    pruned: usize,
    emitted: usize,
    redundant: HashMap<(usize, usize), bool>,
}

impl CandidateStream {
    pub fn new(pool: Vec<PoolClause>, bias: &BiasSpec) -> Self {
        let max_clause_size = pool.iter().map(|p| p.size).max().unwrap_or(0);
        CandidateStream {
            pool: Arc::new(pool),
            max_clauses: bias.max_clauses,
            size: 0,
            max_size: max_clause_size * bias.max_clauses,
            buffer: Vec::new(),
            buffer_pos: 0,
            pruned: 0,
            emitted: 0,
            redundant: HashMap::new(),
        }
    }

    pub fn pool(&self) -> &[PoolClause] {
        &self.pool
    }

    pub fn pool_arc(&self) -> Arc<Vec<PoolClause>> {
        self.pool.clone()
    }

    pub fn pruned(&self) -> usize {
        self.pruned
    }

    pub fn emitted(&self) -> usize {
        self.emitted
    }

    /// One clause subsuming a sibling makes the program equivalent to a
    /// smaller one that is enumerated earlier, so such sets are skipped.
    fn pair_redundant(&mut self, i: usize, j: usize) -> bool {
        let key = (i.min(j), i.max(j));
        if let Some(&v) = self.redundant.get(&key) {
            return v;
        }
        let a = &self.pool[key.0].clause;
        let b = &self.pool[key.1].clause;
        let v = theta_subsumes(a, b) || theta_subsumes(b, a);
        self.redundant.insert(key, v);
        v
    }

    fn fill_size_class(&mut self, store: &ConstraintStore) {
        self.buffer.clear();
        self.buffer_pos = 0;
        let target = self.size;
        let pool = self.pool.clone();
        let mut members: Vec<usize> = Vec::new();
        let mut combos: Vec<Vec<usize>> = Vec::new();
        self.combine(store, &pool, 0, target, self.max_clauses, &mut members, &mut combos);
        let mut class: Vec<Candidate> =
            combos.into_iter().map(|ids| Candidate::from_pool(&pool, &ids)).collect();
        class.sort_by(|a, b| a.canonical.cmp(&b.canonical));
        class.dedup_by(|a, b| a.canonical == b.canonical);
        self.buffer = class;
    }

    #[allow(clippy::too_many_arguments)]
    fn combine(
        &mut self,
        store: &ConstraintStore,
        pool: &[PoolClause],
        start: usize,
        remaining: usize,
        slots: usize,
        members: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if remaining == 0 {
            if !members.is_empty() {
                out.push(members.clone());
            }
            return;
        }
        if slots == 0 {
            return;
        }
        for i in start..pool.len() {
            let s = pool[i].size;
            if s > remaining {
                break; // pool sorted by size
            }
            if store.member_dead(i as u32)
                || members.iter().any(|&m| store.pair_core_banned(m as u32, i as u32))
            {
                self.pruned += 1;
                continue;
            }
            if members.iter().any(|&m| self.pair_redundant(m, i)) {
                continue;
            }
            members.push(i);
            self.combine(store, pool, i + 1, remaining - s, slots - 1, members, out);
            members.pop();
        }
    }

    pub fn next(&mut self, store: &mut ConstraintStore) -> Option<Candidate> {
        loop {
            if self.buffer_pos < self.buffer.len() {
                let cand = self.buffer[self.buffer_pos].clone();
                self.buffer_pos += 1;
                if store.is_banned(&cand) {
                    self.pruned += 1;
                    continue;
                }
                self.emitted += 1;
                return Some(cand);
            }
            if self.size >= self.max_size {
                return None;
            }
            self.size += 1;
            self.fill_size_class(store);
        }
    }
}

/// Spec operation: the ordered candidate stream for a bias. The store is
/// consulted on every `next` call, so constraints added between calls take
/// effect immediately.
pub fn enumerate_candidates(bias: &BiasSpec) -> Result<CandidateStream, BiasError> {
    let pool = clause_pool(bias)?;
    Ok(CandidateStream::new(pool, bias))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::parse_bias;
    use crate::logic::parse::parse_clause;

    fn tiny_bias() -> BiasSpec {
        parse_bias(
            "head(p/1). type(p, (t)).\n\
             body(q/1). type(q, (t)).\n\
             max_vars(1). max_body(1). max_clauses(1).",
        )
        .unwrap()
    }

    #[test]
    fn smallest_clause_first() {
        let bias = tiny_bias();
        let mut stream = enumerate_candidates(&bias).unwrap();
        let mut store = ConstraintStore::new();
        let first = stream.next(&mut store).unwrap();
        assert_eq!(first.canonical.as_ref(), "p(A):- q(A).");
        assert_eq!(first.size, 2);
    }

    #[test]
    fn two_body_preds_count_matches_oracle() {
        // head p/1, bodies {q/1, r/1}, max_vars 2, max_body 2: the exhaustive
        // oracle over raw atom multisets yields exactly {q(A)}, {r(A)},
        // {q(A),r(A)} after the structural filters.
        let bias = parse_bias(
            "head(p/1). type(p, (t)).\n\
             body(q/1). type(q, (t)). body(r/1). type(r, (t)).\n\
             max_vars(2). max_body(2). max_clauses(1).",
        )
        .unwrap();
        let pool = clause_pool(&bias).unwrap();
        let got: BTreeSet<String> = pool.iter().map(|p| p.canonical.clone()).collect();
        let oracle = brute_force_single_clauses(&bias);
        assert_eq!(got, oracle);
        assert_eq!(pool.len(), 3);
    }

    /// Independent generator: all bodies as multisets over every raw atom,
    /// filtered by the documented textual rules, deduped canonically.
    fn brute_force_single_clauses(bias: &BiasSpec) -> BTreeSet<String> {
        let vars: Vec<Var> = (0..bias.max_vars).map(canonical_var).collect();
        let mut atoms = Vec::new();
        for b in &bias.body {
            let mut slots = vec![0usize; b.sig.arity];
            loop {
                let distinct =
                    (0..slots.len()).all(|i| !slots[..i].contains(&slots[i]));
                if distinct {
                    atoms.push(Atom {
                        pred: b.sig.name.clone(),
                        args: slots.iter().map(|&i| Term::Var(vars[i].clone())).collect(),
                    });
                }
                let mut i = slots.len();
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    slots[i] += 1;
                    if slots[i] < bias.max_vars {
                        break;
                    }
                    slots[i] = 0;
                }
                if slots.iter().all(|&s| s == 0) {
                    break;
                }
            }
        }
        let head = Atom {
            pred: bias.head.name.clone(),
            args: (0..bias.head.arity).map(|i| Term::Var(vars[i].clone())).collect(),
        };
        let mut out = BTreeSet::new();
        let mut chosen: Vec<usize> = Vec::new();
        fn rec(
            atoms: &[Atom],
            head: &Atom,
            bias: &BiasSpec,
            start: usize,
            chosen: &mut Vec<usize>,
            out: &mut BTreeSet<String>,
        ) {
            if !chosen.is_empty() {
                let clause = Clause {
                    head: head.clone(),
                    body: chosen.iter().map(|&i| atoms[i].clone()).collect(),
                };
                if oracle_filters(&clause, bias) {
                    out.insert(canonical_clause_text(&clause));
                }
            }
            if chosen.len() == bias.max_body_literals {
                return;
            }
            for i in start..atoms.len() {
                chosen.push(i);
                rec(atoms, head, bias, i + 1, chosen, out);
                chosen.pop();
            }
        }
        rec(&atoms, &head, bias, 0, &mut chosen, &mut out);
        out
    }

    fn oracle_filters(clause: &Clause, bias: &BiasSpec) -> bool {
        // one use per body predicate
        let mut preds: Vec<&Sym> = clause.body.iter().map(|a| &a.pred).collect();
        preds.sort();
        preds.dedup();
        if preds.len() != clause.body.len() {
            return false;
        }
        let head_vars = clause.head.vars();
        if head_vars.iter().any(|hv| !clause.body.iter().any(|a| a.vars().contains(hv))) {
            return false;
        }
        let mut counts: HashMap<Var, usize> = HashMap::new();
        for a in std::iter::once(&clause.head).chain(clause.body.iter()) {
            for v in a.vars() {
                *counts.entry(v).or_default() += 1;
            }
        }
        if counts.values().any(|&c| c < 2) {
            return false;
        }
        let mut linked: BTreeSet<Var> = head_vars.into_iter().collect();
        let mut pending: Vec<&Atom> = clause.body.iter().collect();
        loop {
            let before = pending.len();
            pending.retain(|a| {
                if a.vars().iter().any(|v| linked.contains(v)) {
                    linked.extend(a.vars());
                    false
                } else {
                    true
                }
            });
            if pending.is_empty() {
                break;
            }
            if pending.len() == before {
                return false;
            }
        }
        schedule_body(clause, bias).is_some()
    }

    #[test]
    fn clause_one_is_reachable_at_size_four() {
        let bias = parse_bias(
            "head(target_z/2). type(target_z, (block, level)).\n\
             body(material/2). type(material, (block, material)).\n\
             body(color/2). type(color, (block, color)).\n\
             body(shape/2). type(shape, (block, shape)).\n\
             body(stone/1). type(stone, (material)).\n\
             body(brick/1). type(brick, (material)).\n\
             body(glass/1). type(glass, (material)).\n\
             body(wood/1). type(wood, (material)).\n\
             body(z1/1). type(z1, (level)).\n\
             body(z2/1). type(z2, (level)).\n\
             body(z3/1). type(z3, (level)).\n\
             body(z4/1). type(z4, (level)).\n\
             max_vars(3). max_body(3). max_clauses(3).",
        )
        .unwrap();
        let pool = clause_pool(&bias).unwrap();
        let clause1 = parse_clause("target_z(B,Z):- material(B,M), stone(M), z1(Z).").unwrap();
        let want = canonical_clause_text(&clause1);
        let found = pool.iter().find(|p| p.canonical == want).expect("clause 1 in pool");
        assert_eq!(found.size, 4);
        // nothing smaller than size 3 exists and sizes never decrease
        assert!(pool.windows(2).all(|w| w[0].size <= w[1].size));
    }

    #[test]
    fn store_prunes_generalizations() {
        let failed = Candidate::from_clauses(vec![parse_clause("p(A):- q(A).").unwrap()]);
        let mut store = ConstraintStore::new();
        store.prune_generalizations(&failed);
        // the bodyless clause is more general and must be banned
        let fact = Candidate::from_clauses(vec![parse_clause("p(A).").unwrap()]);
        assert!(store.is_banned(&fact));
        // the failed candidate itself is banned exactly
        assert!(store.is_banned(&failed));
        // a specialization is not a generalization
        let longer = Candidate::from_clauses(vec![parse_clause("p(A):- q(A), r(A).").unwrap()]);
        assert!(!store.is_banned(&longer));
    }

    #[test]
    fn store_prunes_specializations() {
        let failed = Candidate::from_clauses(vec![parse_clause("p(A):- q(A), r(A).").unwrap()]);
        let mut store = ConstraintStore::new();
        store.prune_specializations(&failed);
        let longer =
            Candidate::from_clauses(vec![parse_clause("p(A):- q(A), r(A), s(A).").unwrap()]);
        assert!(store.is_banned(&longer));
        // adding a new clause makes the program more general, not less
        let two_clauses = Candidate::from_clauses(vec![
            parse_clause("p(A):- q(A), r(A).").unwrap(),
            parse_clause("p(A):- s(A).").unwrap(),
        ]);
        assert!(!store.is_banned(&two_clauses));
    }

    #[test]
    fn stream_sizes_never_decrease_and_are_deduped() {
        let bias = parse_bias(
            "head(p/1). type(p, (t)).\n\
             body(q/1). type(q, (t)). body(r/1). type(r, (t)). body(s/1). type(s, (t)).\n\
             max_vars(2). max_body(2). max_clauses(2).",
        )
        .unwrap();
        let mut stream = enumerate_candidates(&bias).unwrap();
        let mut store = ConstraintStore::new();
        let mut sizes = Vec::new();
        let mut canons = BTreeSet::new();
        while let Some(c) = stream.next(&mut store) {
            sizes.push(c.size);
            assert!(canons.insert(c.canonical.clone()), "duplicate candidate {}", c.canonical);
        }
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
        assert!(!sizes.is_empty());
    }

    #[test]
    fn scheduling_orders_list_deconstruction() {
        let bias = parse_bias(
            "head(tower_from/2). type(tower_from, (blocklist, level)).\n\
             body(head/2). type(head, (blocklist, block)).\n\
             body(tail/2). type(tail, (blocklist, blocklist)).\n\
             body(empty/1). type(empty, (blocklist)).\n\
             body(succ_z/2). type(succ_z, (level, level)).\n\
             body(target_z/2). type(target_z, (block, level)).\n\
             body(tower_from/2).\n\
             max_vars(5). max_body(5). max_clauses(2). enable_recursion.",
        )
        .unwrap();
        // a body written with the recursive call first still schedules
        let clause = parse_clause(
            "tower_from(L,Z):- tower_from(R,N), succ_z(Z,N), tail(L,R), head(L,H), target_z(H,Z).",
        )
        .unwrap();
        let ordered = schedule_body(&clause, &bias).unwrap();
        let rec_pos = ordered
            .body
            .iter()
            .position(|a| a.pred.as_str() == "tower_from")
            .unwrap();
        let tail_pos = ordered.body.iter().position(|a| a.pred.as_str() == "tail").unwrap();
        assert!(tail_pos < rec_pos, "tail must bind the list before the recursive call");
    }
}
