//! Recursive-descent parser for the clause grammar:
//!
//! ```text
//! program := (clause | comment)*
//! clause  := atom (":-" atom ("," atom)*)? "."
//! atom    := IDENT "(" term ("," term)* ")"
//! term    := IDENT | VAR | "[" (term ("," term)*)? "]"
//! ```
//!
//! `IDENT = [a-z][a-zA-Z0-9_]*`, `VAR = [A-Z_][a-zA-Z0-9_]*`, whitespace is
//! insignificant and `%` starts a comment running to end of line.

use std::collections::BTreeMap;
use std::fmt;

use super::{Atom, Clause, Program, Sym, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at {line}:{col}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
    pub found: String,
}

/// Non-fatal observations made while parsing. A predicate used at two
/// arities is legal (the arities are distinct predicates) but usually a typo,
/// so it is reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    ArityConflict { pred: Sym, arities: Vec<usize> },
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseWarning::ArityConflict { pred, arities } => {
                write!(f, "predicate {pred} used at multiple arities: {arities:?}")
            }
        }
    }
}

pub struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    pub fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'%') => {
                    while let Some(c) = self.bump() {
                        if c == b'\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    pub fn at_eof(&mut self) -> bool {
        self.skip_trivia();
        self.peek().is_none()
    }

    fn error(&self, expected: &str) -> ParseError {
        let found = match self.peek() {
            None => "end of input".to_string(),
            Some(_) => {
                let rest = &self.src[self.pos..];
                let len = rest
                    .iter()
                    .take_while(|c| c.is_ascii_alphanumeric() || **c == b'_')
                    .count()
                    .max(1);
                String::from_utf8_lossy(&rest[..len.min(rest.len())]).into_owned()
            }
        };
        ParseError { line: self.line, col: self.col, expected: expected.to_string(), found }
    }

    pub fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        self.skip_trivia();
        let bytes = token.as_bytes();
        if self.src[self.pos..].starts_with(bytes) {
            for _ in 0..bytes.len() {
                self.bump();
            }
            Ok(())
        } else {
            Err(self.error(&format!("`{token}`")))
        }
    }

    pub fn try_consume(&mut self, token: &str) -> bool {
        self.skip_trivia();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            for _ in 0..token.len() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    fn word(&mut self, kind: &str, first_ok: impl Fn(u8) -> bool) -> Result<String, ParseError> {
        self.skip_trivia();
        match self.peek() {
            Some(c) if first_ok(c) => {}
            _ => return Err(self.error(kind)),
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.bump();
            } else {
                break;
            }
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    /// Lowercase identifier (constant or predicate name).
    pub fn ident(&mut self) -> Result<String, ParseError> {
        self.word("identifier", |c| c.is_ascii_lowercase() || c.is_ascii_digit())
    }

    pub fn number(&mut self) -> Result<usize, ParseError> {
        self.skip_trivia();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if start == self.pos {
            return Err(self.error("number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.error("number"))
    }

    fn peek_is_var(&mut self) -> bool {
        self.skip_trivia();
        matches!(self.peek(), Some(c) if c.is_ascii_uppercase() || c == b'_')
    }

    fn peek_is_list(&mut self) -> bool {
        self.skip_trivia();
        self.peek() == Some(b'[')
    }

    pub fn term(&mut self) -> Result<Term, ParseError> {
        if self.peek_is_list() {
            self.expect("[")?;
            let mut elems = Vec::new();
            if !self.try_consume("]") {
                loop {
                    elems.push(self.term()?);
                    if self.try_consume("]") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
            Ok(Term::List(elems))
        } else if self.peek_is_var() {
            let name = self.word("variable", |c| c.is_ascii_uppercase() || c == b'_')?;
            Ok(Term::Var(Var::new(name)))
        } else {
            Ok(Term::Const(Sym::new(self.ident()?)))
        }
    }

    pub fn atom(&mut self) -> Result<Atom, ParseError> {
        let pred = self.ident()?;
        self.expect("(")?;
        let mut args = vec![self.term()?];
        while self.try_consume(",") {
            args.push(self.term()?);
        }
        self.expect(")")?;
        Ok(Atom { pred: Sym::new(pred), args })
    }

    pub fn clause(&mut self) -> Result<Clause, ParseError> {
        let head = self.atom()?;
        let mut body = Vec::new();
        if self.try_consume(":-") {
            body.push(self.atom()?);
            while self.try_consume(",") {
                body.push(self.atom()?);
            }
        }
        self.expect(".")?;
        Ok(Clause { head, body })
    }
}

/// Parse a full program, collecting non-fatal warnings on the side.
pub fn parse_program_with_warnings(text: &str) -> Result<(Program, Vec<ParseWarning>), ParseError> {
    let mut lex = Lexer::new(text);
    let mut program = Program::new();
    let mut arities: BTreeMap<Sym, Vec<usize>> = BTreeMap::new();
    while !lex.at_eof() {
        let clause = lex.clause()?;
        for atom in std::iter::once(&clause.head).chain(clause.body.iter()) {
            let seen = arities.entry(atom.pred.clone()).or_default();
            if !seen.contains(&atom.arity()) {
                seen.push(atom.arity());
            }
        }
        program.push(clause);
    }
    let warnings = arities
        .into_iter()
        .filter(|(_, a)| a.len() > 1)
        .map(|(pred, mut arities)| {
            arities.sort_unstable();
            ParseWarning::ArityConflict { pred, arities }
        })
        .collect();
    Ok((program, warnings))
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_program_with_warnings(text).map(|(p, _)| p)
}

pub fn parse_clause(text: &str) -> Result<Clause, ParseError> {
    let mut lex = Lexer::new(text);
    let c = lex.clause()?;
    if !lex.at_eof() {
        return Err(lex.error("end of input"));
    }
    Ok(c)
}

pub fn parse_atom(text: &str) -> Result<Atom, ParseError> {
    let mut lex = Lexer::new(text);
    let a = lex.atom()?;
    if !lex.at_eof() {
        return Err(lex.error("end of input"));
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::canonical_program_text;

    #[test]
    fn single_fact() {
        let p = parse_program("z1(z1).").unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.clauses()[0].to_string(), "z1(z1).");
    }

    #[test]
    fn material_rule() {
        let p = parse_program("target_z(B,Z):- material(B,M), stone(M), z1(Z).").unwrap();
        let c = &p.clauses()[0];
        assert_eq!(c.head.pred.as_str(), "target_z");
        assert_eq!(c.body.len(), 3);
        assert_eq!(c.to_string(), "target_z(B,Z):- material(B,M), stone(M), z1(Z).");
    }

    #[test]
    fn recursive_clause_with_five_body_atoms() {
        let text = "tower_from(List,Z):- head(List,LHead), target_z(LHead,Z), tail(List,LRest), succ_z(Z,ZNext), tower_from(LRest,ZNext).";
        let p = parse_program(text).unwrap();
        assert_eq!(p.clauses()[0].body.len(), 5);
    }

    #[test]
    fn lists_and_comments() {
        let text = "% a tower\ntower_from([b1,b2],z1). % trailing\nempty_list_fact([]).";
        let p = parse_program(text).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.clauses()[0].to_string(), "tower_from([b1,b2],z1).");
        assert_eq!(p.clauses()[1].to_string(), "empty_list_fact([]).");
    }

    #[test]
    fn error_carries_position() {
        let err = parse_program("p(a)\nq(b).").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.found, "q");
        assert!(err.expected.contains('.'));
    }

    #[test]
    fn error_on_bad_token() {
        let err = parse_program("p(A):- 3x.").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn arity_conflict_reported_not_fatal() {
        let (p, warnings) = parse_program_with_warnings("p(a). p(a,b).").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn underscore_variables() {
        let p = parse_program("p(_X, Y_2).").unwrap();
        assert!(!p.clauses()[0].head.is_ground());
    }

    #[test]
    fn round_trip_ground_truth_style_program() {
        let text = "\
target_z(B,Z):- material(B,M), stone(M), z1(Z).
tower_from(List,Z):- head(List,LHead), target_z(LHead,Z), tail(List,LRest), empty(LRest).
succ_z(z1,z2).
tower_from([b1],z1).
";
        let p = parse_program(text).unwrap();
        let reparsed = parse_program(&p.to_string()).unwrap();
        assert_eq!(canonical_program_text(&p), canonical_program_text(&reparsed));
    }
}
