//! The clause language: constants, variables, proper lists, atoms, definite
//! clauses, and programs, together with unification and the canonical clause
//! form used for dedup and alpha-equality checks.
//!
//! Terms are immutable after construction; every operation builds new values,
//! so all of these types are safe to share read-only across threads.

pub mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Cheap-to-clone symbol, ordered and compared by its text.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(s: impl AsRef<str>) -> Self {
        Sym(Arc::from(s.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Self {
        Sym::new(s)
    }
}

impl std::ops::Deref for Sym {
    type Target = str;
    fn deref(&self) -> &str {
        &self.0
    }
}

/// A logic variable. The index exists so renaming-apart can mint fresh
/// variables without inventing new names; two variables are equal iff both
/// name and index match.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var {
    pub name: Sym,
    pub index: u32,
}

impl Var {
    pub fn new(name: impl AsRef<str>) -> Self {
        Var { name: Sym::new(name), index: 0 }
    }

    pub fn with_index(name: impl AsRef<str>, index: u32) -> Self {
        Var { name: Sym::new(name), index }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index == 0 {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}_{}", self.name, self.index)
        }
    }
}

/// Terms are constants, variables, or proper lists. There are no function
/// symbols: the domain vocabulary only needs object/property constants and
/// block or site lists.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Const(Sym),
    Var(Var),
    List(Vec<Term>),
}

impl Term {
    pub fn constant(name: impl AsRef<str>) -> Self {
        Term::Const(Sym::new(name))
    }

    pub fn var(name: impl AsRef<str>) -> Self {
        Term::Var(Var::new(name))
    }

    pub fn list(elems: Vec<Term>) -> Self {
        Term::List(elems)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Const(_) => true,
            Term::Var(_) => false,
            Term::List(elems) => elems.iter().all(Term::is_ground),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::List(elems) => {
                for t in elems {
                    t.collect_vars(out);
                }
            }
        }
    }

    /// True if `v` occurs anywhere in this term.
    pub fn contains_var(&self, v: &Var) -> bool {
        match self {
            Term::Const(_) => false,
            Term::Var(w) => w == v,
            Term::List(elems) => elems.iter().any(|t| t.contains_var(v)),
        }
    }

    fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Const(_) => self.clone(),
            Term::Var(v) => f(v),
            Term::List(elems) => Term::List(elems.iter().map(|t| t.map_vars(f)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(s) => write!(f, "{s}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::List(elems) => {
                write!(f, "[")?;
                for (i, t) in elems.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// A predicate applied to one or more terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    pub pred: Sym,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl AsRef<str>, args: Vec<Term>) -> Self {
        debug_assert!(!args.is_empty(), "atoms have arity >= 1");
        Atom { pred: Sym::new(pred), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn key(&self) -> (Sym, usize) {
        (self.pred.clone(), self.arity())
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        for t in &self.args {
            t.collect_vars(out);
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|t| t.map_vars(f)).collect() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

/// A definite clause: one head atom and a conjunctive body. An empty body
/// makes the clause a fact.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn fact(head: Atom) -> Self {
        Clause { head, body: Vec::new() }
    }

    pub fn rule(head: Atom, body: Vec<Atom>) -> Self {
        Clause { head, body }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    /// Literal count, head included.
    pub fn size(&self) -> usize {
        1 + self.body.len()
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.head.collect_vars(&mut out);
        for a in &self.body {
            a.collect_vars(&mut out);
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.head.is_ground() && self.body.iter().all(Atom::is_ground)
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Clause {
        Clause {
            head: self.head.map_vars(f),
            body: self.body.iter().map(|a| a.map_vars(f)).collect(),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            write!(f, ":- ")?;
            for (i, a) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{a}")?;
            }
        }
        write!(f, ".")
    }
}

/// Gives every variable in the clause the index `counter`, leaving names
/// untouched. Successive counters therefore never share variables.
pub fn rename_apart(clause: &Clause, counter: u32) -> Clause {
    clause.map_vars(&mut |v| Term::Var(Var { name: v.name.clone(), index: counter }))
}

/// An ordered set of clauses with a (predicate, arity) index.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Program {
    clauses: Vec<Clause>,
    index: BTreeMap<(Sym, usize), Vec<usize>>,
}

impl Program {
    pub fn new() -> Self {
        Program::default()
    }

    pub fn from_clauses(clauses: Vec<Clause>) -> Self {
        let mut p = Program::new();
        for c in clauses {
            p.push(c);
        }
        p
    }

    pub fn push(&mut self, clause: Clause) {
        let key = clause.head.key();
        self.index.entry(key).or_default().push(self.clauses.len());
        self.clauses.push(clause);
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Clause positions whose head matches the given predicate and arity.
    pub fn matching(&self, pred: &Sym, arity: usize) -> &[usize] {
        self.index
            .get(&(pred.clone(), arity))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn predicates(&self) -> BTreeSet<(Sym, usize)> {
        self.index.keys().cloned().collect()
    }

    /// Union preserving the order of `self` first, deduplicating clauses that
    /// are equal up to variable renaming and body reordering.
    pub fn union(&self, other: &Program) -> Program {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut out = Program::new();
        for c in self.clauses.iter().chain(other.clauses.iter()) {
            let canon = canonical_clause_text(c);
            if seen.insert(canon) {
                out.push(c.clone());
            }
        }
        out
    }

    pub fn total_size(&self) -> usize {
        self.clauses.iter().map(Clause::size).sum()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A map from variables to terms. Bindings are kept fully resolved on
/// application, so applying a substitution twice equals applying it once.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Subst {
    map: BTreeMap<Var, Term>,
}

impl Subst {
    pub fn new() -> Self {
        Subst::default()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    /// Follow variable-to-variable chains until a non-variable or an unbound
    /// variable is reached.
    pub fn walk<'a>(&'a self, t: &'a Term) -> &'a Term {
        let mut cur = t;
        while let Term::Var(v) = cur {
            match self.map.get(v) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur
    }

    /// Fully resolve a term under the substitution.
    pub fn resolve(&self, t: &Term) -> Term {
        let walked = self.walk(t);
        match walked {
            Term::Const(_) => walked.clone(),
            Term::Var(_) => walked.clone(),
            Term::List(elems) => Term::List(elems.iter().map(|e| self.resolve(e)).collect()),
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| self.resolve(t)).collect() }
    }

    /// Add a binding, rejecting any that would fail the occurs check.
    pub fn bind(&mut self, v: Var, t: Term) -> bool {
        let resolved = self.resolve(&t);
        if let Term::Var(w) = &resolved {
            if *w == v {
                return true; // binding a variable to itself is a no-op
            }
        }
        if resolved.contains_var(&v) {
            return false;
        }
        self.map.insert(v, resolved);
        true
    }

    /// Unify two terms in place, extending this substitution.
    pub fn unify_terms(&mut self, a: &Term, b: &Term) -> bool {
        let ta = self.walk(a).clone();
        let tb = self.walk(b).clone();
        match (ta, tb) {
            (Term::Var(v), t) | (t, Term::Var(v)) => self.bind(v, t),
            (Term::Const(x), Term::Const(y)) => x == y,
            (Term::List(xs), Term::List(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| self.unify_terms(x, y))
            }
            _ => false,
        }
    }
}

/// Most general unifier of two atoms, extending `s`. Returns `None` when the
/// predicates or arities differ, a constant clash occurs, or the occurs check
/// fails.
pub fn unify(a: &Atom, b: &Atom, s: &Subst) -> Option<Subst> {
    if a.pred != b.pred || a.arity() != b.arity() {
        return None;
    }
    let mut out = s.clone();
    for (x, y) in a.args.iter().zip(b.args.iter()) {
        if !out.unify_terms(x, y) {
            return None;
        }
    }
    Some(out)
}

/// One-way matching: find sigma with sigma(pattern) == target, binding only
/// pattern variables. Used by theta-subsumption and the MGU property test.
pub fn match_atom(pattern: &Atom, target: &Atom, s: &Subst) -> Option<Subst> {
    if pattern.pred != target.pred || pattern.arity() != target.arity() {
        return None;
    }
    let mut out = s.clone();
    for (p, t) in pattern.args.iter().zip(target.args.iter()) {
        if !match_term(p, t, &mut out) {
            return None;
        }
    }
    Some(out)
}

fn match_term(pattern: &Term, target: &Term, s: &mut Subst) -> bool {
    match pattern {
        Term::Var(v) => match s.get(v) {
            Some(bound) => bound.clone() == *target,
            None => {
                s.map.insert(v.clone(), target.clone());
                true
            }
        },
        Term::Const(c) => matches!(target, Term::Const(d) if c == d),
        Term::List(ps) => match target {
            Term::List(ts) if ps.len() == ts.len() => {
                ps.iter().zip(ts.iter()).all(|(p, t)| match_term(p, t, s))
            }
            _ => false,
        },
    }
}

// Canonical variable names used by the canonical clause form.
fn canonical_var_name(i: usize) -> String {
    let letter = (b'A' + (i % 26) as u8) as char;
    if i < 26 {
        letter.to_string()
    } else {
        format!("{}{}", letter, i / 26)
    }
}

fn render_with_numbering(head: &Atom, body: &[Atom]) -> String {
    let mut order: Vec<Var> = Vec::new();
    head.collect_vars(&mut order);
    for a in body {
        a.collect_vars(&mut order);
    }
    let rename = |a: &Atom| {
        a.map_vars(&mut |v| {
            let i = order.iter().position(|w| w == v).unwrap();
            Term::Var(Var::new(canonical_var_name(i)))
        })
    };
    let c = Clause { head: rename(head), body: body.iter().map(rename).collect() };
    c.to_string()
}

/// Canonical text of a clause: variables renumbered by first occurrence and
/// the body permutation chosen to minimize the rendered string. Conjunction
/// is commutative, so two clauses are equal up to renaming iff their
/// canonical texts match.
pub fn canonical_clause_text(c: &Clause) -> String {
    if c.body.len() <= 1 {
        return render_with_numbering(&c.head, &c.body);
    }
    // Bodies are small (biases cap them well below 8 literals), so taking the
    // minimum over all permutations is affordable and exact.
    let mut best: Option<String> = None;
    let mut idx: Vec<usize> = (0..c.body.len()).collect();
    permute(&mut idx, 0, &mut |perm| {
        let body: Vec<Atom> = perm.iter().map(|&i| c.body[i].clone()).collect();
        let s = render_with_numbering(&c.head, &body);
        if best.as_ref().map_or(true, |b| s < *b) {
            best = Some(s);
        }
    });
    best.unwrap()
}

fn permute(idx: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == idx.len() {
        visit(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, visit);
        idx.swap(k, i);
    }
}

/// Canonical text of a program: member clauses canonicalized, sorted, and
/// joined. Identifies programs up to clause order and variable renaming.
pub fn canonical_program_text(p: &Program) -> String {
    let mut lines: Vec<String> = p.clauses().iter().map(canonical_clause_text).collect();
    lines.sort();
    lines.dedup();
    lines.join("\n")
}

/// True iff the two clauses are syntactically identical after canonical
/// variable renumbering and body reordering.
pub fn clause_equal_upto_renaming(a: &Clause, b: &Clause) -> bool {
    if a.size() != b.size() || a.head.key() != b.head.key() {
        return false;
    }
    canonical_clause_text(a) == canonical_clause_text(b)
}

/// Clause-set equality up to renaming and ordering.
pub fn program_equal_upto_renaming(a: &Program, b: &Program) -> bool {
    canonical_program_text(a) == canonical_program_text(b)
}

/// Theta-subsumption: `general` subsumes `specific` when some substitution
/// maps the head of `general` onto the head of `specific` and every body
/// literal of `general` into the body of `specific`.
pub fn theta_subsumes(general: &Clause, specific: &Clause) -> bool {
    let Some(s0) = match_atom(&general.head, &specific.head, &Subst::new()) else {
        return false;
    };
    subsume_body(&general.body, &specific.body, s0)
}

fn subsume_body(rest: &[Atom], target: &[Atom], s: Subst) -> bool {
    let Some((first, tail)) = rest.split_first() else {
        return true;
    };
    for t in target {
        if let Some(s2) = match_atom(first, t, &s) {
            if subsume_body(tail, target, s2) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::{parse_clause, parse_program};

    fn clause(s: &str) -> Clause {
        parse_clause(s).unwrap()
    }

    #[test]
    fn unify_single_binding() {
        let a = Atom::new("p", vec![Term::var("X")]);
        let b = Atom::new("p", vec![Term::constant("a")]);
        let s = unify(&a, &b, &Subst::new()).unwrap();
        assert_eq!(s.resolve(&Term::var("X")), Term::constant("a"));
    }

    #[test]
    fn unify_clash_fails() {
        let a = Atom::new("p", vec![Term::var("X"), Term::var("X")]);
        let b = Atom::new("p", vec![Term::constant("a"), Term::constant("b")]);
        assert!(unify(&a, &b, &Subst::new()).is_none());
    }

    #[test]
    fn unify_aliases_variables() {
        let list = Term::list(vec![Term::constant("b1"), Term::constant("b2")]);
        let a = Atom::new("head", vec![list.clone(), Term::var("H")]);
        let b = Atom::new("head", vec![list, Term::var("G")]);
        let s = unify(&a, &b, &Subst::new()).unwrap();
        assert_eq!(s.resolve(&Term::var("H")), s.resolve(&Term::var("G")));
    }

    #[test]
    fn unify_occurs_check() {
        let a = Atom::new("p", vec![Term::var("X")]);
        let b = Atom::new("p", vec![Term::list(vec![Term::var("X")])]);
        assert!(unify(&a, &b, &Subst::new()).is_none());
    }

    #[test]
    fn rename_apart_gives_fresh_indices() {
        let c = clause("p(X):- q(X).");
        let r7 = rename_apart(&c, 7);
        let r3 = rename_apart(&c, 3);
        assert!(clause_equal_upto_renaming(&c, &r7));
        let vars7 = r7.vars();
        let vars3 = r3.vars();
        assert!(vars7.iter().all(|v| v.index == 7));
        assert!(vars7.iter().all(|v| !vars3.contains(v)));
    }

    #[test]
    fn rename_apart_ground_clause_unchanged() {
        let c = clause("p(a).");
        assert_eq!(rename_apart(&c, 3), c);
    }

    #[test]
    fn clause_equality_mod_renaming() {
        let a = clause("target_z(B,Z):- material(B,M), stone(M), z1(Z).");
        let b = clause("target_z(X,Y):- material(X,W), stone(W), z1(Y).");
        assert!(clause_equal_upto_renaming(&a, &b));
    }

    #[test]
    fn clause_equality_mod_body_order() {
        let a = clause("p(X):- q(X), r(X).");
        let b = clause("p(X):- r(X), q(X).");
        assert!(clause_equal_upto_renaming(&a, &b));
    }

    #[test]
    fn base_and_recursive_clauses_differ() {
        let base = clause(
            "tower_from(List,Z):- head(List,LHead), target_z(LHead,Z), tail(List,LRest), empty(LRest).",
        );
        let rec = clause(
            "tower_from(List,Z):- head(List,LHead), target_z(LHead,Z), tail(List,LRest), succ_z(Z,ZNext), tower_from(LRest,ZNext).",
        );
        assert!(!clause_equal_upto_renaming(&base, &rec));
    }

    #[test]
    fn canonical_form_confluent_on_shared_variable_bodies() {
        // Same multiset of body literals written in different orders, with
        // variables that only occur in the body.
        let a = clause("p(X):- q(Y), q(Z), r(Y), s(X).");
        let b = clause("p(X):- q(Z), q(Y), r(Y), s(X).");
        assert!(clause_equal_upto_renaming(&a, &b));
    }

    #[test]
    fn program_union_dedups_alpha_variants() {
        let p = parse_program("p(X):- q(X).\n").unwrap();
        let q = parse_program("p(A):- q(A).\nr(a).\n").unwrap();
        let u = p.union(&q);
        assert_eq!(u.len(), 2);
    }

    #[test]
    fn subsumption_directions() {
        let general = clause("p(X):- q(X).");
        let specific = clause("p(X):- q(X), r(X).");
        assert!(theta_subsumes(&general, &specific));
        assert!(!theta_subsumes(&specific, &general));
        // A bodyless clause subsumes everything with a matching head.
        let fact = clause("p(X).");
        assert!(theta_subsumes(&fact, &general));
    }

    #[test]
    fn substitution_idempotent() {
        let mut s = Subst::new();
        assert!(s.bind(Var::new("X"), Term::var("Y")));
        assert!(s.bind(Var::new("Y"), Term::constant("a")));
        let t = Term::list(vec![Term::var("X"), Term::var("Y")]);
        let once = s.resolve(&t);
        let twice = s.resolve(&once);
        assert_eq!(once, twice);
        assert!(once.is_ground());
    }
}
