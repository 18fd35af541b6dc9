//! Per-target language bias: the head predicate, the allowed body predicates
//! with argument types and call modes, syntactic size limits, and whether the
//! target may call itself.

use std::collections::BTreeMap;
use std::fmt;

use crate::logic::parse::{Lexer, ParseError};
use crate::logic::Sym;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredSig {
    pub name: Sym,
    pub arity: usize,
}

impl PredSig {
    pub fn new(name: impl AsRef<str>, arity: usize) -> Self {
        PredSig { name: Sym::new(name), arity }
    }
}

impl fmt::Display for PredSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// Call mode for one argument position. `In` arguments must be bound before
/// the literal can run; `Any` positions are unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgMode {
    In,
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BodyPred {
    pub sig: PredSig,
    pub arg_types: Vec<Sym>,
    pub modes: Vec<ArgMode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiasSpec {
    pub head: PredSig,
    pub head_types: Vec<Sym>,
    pub body: Vec<BodyPred>,
    pub max_vars: usize,
    pub max_body_literals: usize,
    pub max_clauses: usize,
    pub recursion_enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BiasError {
    #[error("bias admits no candidate: {0}")]
    EmptySpace(String),
    #[error("head predicate {0} appears in the body but recursion is not enabled")]
    RecursionDisabled(PredSig),
    #[error("missing type declaration for {0}")]
    MissingTypes(PredSig),
    #[error("bias file error: {0}")]
    File(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl BiasSpec {
    pub fn validate(&self) -> Result<(), BiasError> {
        if self.max_vars < self.head.arity {
            return Err(BiasError::EmptySpace(format!(
                "max_vars {} is below the head arity {}",
                self.max_vars, self.head.arity
            )));
        }
        if self.max_body_literals < 1 || self.max_clauses < 1 {
            return Err(BiasError::EmptySpace(
                "max_body and max_clauses must be at least 1".into(),
            ));
        }
        if self.head_types.len() != self.head.arity {
            return Err(BiasError::MissingTypes(self.head.clone()));
        }
        for b in &self.body {
            if b.arg_types.len() != b.sig.arity {
                return Err(BiasError::MissingTypes(b.sig.clone()));
            }
            if b.sig == self.head && !self.recursion_enabled {
                return Err(BiasError::RecursionDisabled(self.head.clone()));
            }
        }
        if self.body.is_empty() {
            return Err(BiasError::EmptySpace("no body predicates declared".into()));
        }
        Ok(())
    }

    pub fn body_pred(&self, sig: &PredSig) -> Option<&BodyPred> {
        self.body.iter().find(|b| &b.sig == sig)
    }

    /// Render in the bias file format.
    pub fn to_file_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("head({}/{}).\n", self.head.name, self.head.arity));
        out.push_str(&format!(
            "type({}, ({})).\n",
            self.head.name,
            self.head_types.iter().map(Sym::as_str).collect::<Vec<_>>().join(",")
        ));
        for b in &self.body {
            out.push_str(&format!("body({}/{}).\n", b.sig.name, b.sig.arity));
            if b.sig != self.head {
                out.push_str(&format!(
                    "type({}, ({})).\n",
                    b.sig.name,
                    b.arg_types.iter().map(Sym::as_str).collect::<Vec<_>>().join(",")
                ));
            }
        }
        out.push_str(&format!("max_vars({}).\n", self.max_vars));
        out.push_str(&format!("max_body({}).\n", self.max_body_literals));
        out.push_str(&format!("max_clauses({}).\n", self.max_clauses));
        if self.recursion_enabled {
            out.push_str("enable_recursion.\n");
        }
        out
    }
}

/// Default call modes: the list deconstructors require their list argument to
/// be bound, and a recursive call must be fully bound to guarantee that the
/// candidate terminates under SLD.
fn default_modes(sig: &PredSig, head: &PredSig) -> Vec<ArgMode> {
    match (sig.name.as_str(), sig.arity) {
        ("head", 2) | ("tail", 2) => vec![ArgMode::In, ArgMode::Any],
        ("empty", 1) => vec![ArgMode::In],
        _ if sig == head => vec![ArgMode::In; sig.arity],
        _ => vec![ArgMode::Any; sig.arity],
    }
}

/// Parse the declarative bias file format:
///
/// ```text
/// head(pred/arity).  body(pred/arity).  type(pred, (t1,...,tn)).
/// max_vars(n).  max_body(n).  max_clauses(n).  enable_recursion.
/// ```
pub fn parse_bias(text: &str) -> Result<BiasSpec, BiasError> {
    let mut lex = Lexer::new(text);
    let mut head: Option<PredSig> = None;
    let mut body_sigs: Vec<PredSig> = Vec::new();
    let mut types: BTreeMap<Sym, Vec<Sym>> = BTreeMap::new();
    let mut max_vars = None;
    let mut max_body = None;
    let mut max_clauses = None;
    let mut recursion = false;

    while !lex.at_eof() {
        let word = lex.ident()?;
        match word.as_str() {
            "head" | "body" => {
                lex.expect("(")?;
                let name = lex.ident()?;
                lex.expect("/")?;
                let arity = lex.number()?;
                lex.expect(")")?;
                let sig = PredSig::new(name, arity);
                if word == "head" {
                    if head.is_some() {
                        return Err(BiasError::File("duplicate head declaration".into()));
                    }
                    head = Some(sig);
                } else {
                    body_sigs.push(sig);
                }
            }
            "type" => {
                lex.expect("(")?;
                let name = Sym::new(lex.ident()?);
                lex.expect(",")?;
                lex.expect("(")?;
                let mut tys = vec![Sym::new(lex.ident()?)];
                while lex.try_consume(",") {
                    tys.push(Sym::new(lex.ident()?));
                }
                lex.expect(")")?;
                lex.expect(")")?;
                types.insert(name, tys);
            }
            "max_vars" | "max_body" | "max_clauses" => {
                lex.expect("(")?;
                let n = lex.number()?;
                lex.expect(")")?;
                match word.as_str() {
                    "max_vars" => max_vars = Some(n),
                    "max_body" => max_body = Some(n),
                    _ => max_clauses = Some(n),
                }
            }
            "enable_recursion" => recursion = true,
            other => {
                return Err(BiasError::File(format!("unknown bias declaration `{other}`")));
            }
        }
        lex.expect(".")?;
    }

    let head = head.ok_or_else(|| BiasError::File("missing head declaration".into()))?;
    let head_types = types
        .get(&head.name)
        .cloned()
        .ok_or_else(|| BiasError::MissingTypes(head.clone()))?;
    let mut body = Vec::new();
    for sig in body_sigs {
        let arg_types = if sig == head {
            head_types.clone()
        } else {
            types.get(&sig.name).cloned().ok_or_else(|| BiasError::MissingTypes(sig.clone()))?
        };
        let modes = default_modes(&sig, &head);
        body.push(BodyPred { sig, arg_types, modes });
    }
    body.sort_by(|a, b| a.sig.cmp(&b.sig));
    let spec = BiasSpec {
        head,
        head_types,
        body,
        max_vars: max_vars.ok_or_else(|| BiasError::File("missing max_vars".into()))?,
        max_body_literals: max_body.ok_or_else(|| BiasError::File("missing max_body".into()))?,
        max_clauses: max_clauses.ok_or_else(|| BiasError::File("missing max_clauses".into()))?,
        recursion_enabled: recursion,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOWER_FROM_BIAS: &str = "\
head(tower_from/2).
type(tower_from, (blocklist, level)).
body(head/2). type(head, (blocklist, block)).
body(tail/2). type(tail, (blocklist, blocklist)).
body(empty/1). type(empty, (blocklist)).
body(succ_z/2). type(succ_z, (level, level)).
body(target_z/2). type(target_z, (block, level)).
body(tower_from/2).
max_vars(5). max_body(5). max_clauses(2).
enable_recursion.
";

    #[test]
    fn parses_recursive_bias() {
        let bias = parse_bias(TOWER_FROM_BIAS).unwrap();
        assert_eq!(bias.head, PredSig::new("tower_from", 2));
        assert_eq!(bias.body.len(), 6);
        assert!(bias.recursion_enabled);
        assert_eq!(bias.max_vars, 5);
        let rec = bias.body_pred(&PredSig::new("tower_from", 2)).unwrap();
        assert_eq!(rec.modes, vec![ArgMode::In, ArgMode::In]);
        let hd = bias.body_pred(&PredSig::new("head", 2)).unwrap();
        assert_eq!(hd.modes, vec![ArgMode::In, ArgMode::Any]);
    }

    #[test]
    fn round_trips_through_file_text() {
        let bias = parse_bias(TOWER_FROM_BIAS).unwrap();
        let again = parse_bias(&bias.to_file_text()).unwrap();
        assert_eq!(bias, again);
    }

    #[test]
    fn recursion_requires_flag() {
        let text = "\
head(p/1). type(p, (t)).
body(p/1). body(q/1). type(q, (t)).
max_vars(2). max_body(2). max_clauses(1).
";
        assert!(matches!(parse_bias(text), Err(BiasError::RecursionDisabled(_))));
    }

    #[test]
    fn empty_space_on_too_few_vars() {
        let text = "\
head(p/2). type(p, (t, t)).
body(q/1). type(q, (t)).
max_vars(1). max_body(1). max_clauses(1).
";
        assert!(matches!(parse_bias(text), Err(BiasError::EmptySpace(_))));
    }
}
