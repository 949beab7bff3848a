use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::name::{name, Name};
use super::PddlError;

/// Argument of an atom: an object constant or a schema variable (`?x`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    Const(Name),
    Var(Name),
}

impl Term {
    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn name(&self) -> &Name {
        match self {
            Term::Const(n) | Term::Var(n) => n,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(n) => write!(f, "{n}"),
            Term::Var(n) => write!(f, "?{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: Name,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: Name, args: Vec<Term>) -> Self {
        Atom { predicate, args }
    }

    /// Ground atom from constant names, e.g. `Atom::ground("at", &["carrot", "bowl"])`.
    /// Panics on invalid identifiers; meant for literals in code and tests.
    pub fn ground(predicate: &str, args: &[&str]) -> Self {
        Atom {
            predicate: name(predicate),
            args: args.iter().map(|a| Term::Const(name(a))).collect(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            negated: false,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            negated: true,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "(not {})", self.atom)
        } else {
            write!(f, "{}", self.atom)
        }
    }
}

/// Conjunction of literals. Duplicates are dropped on insertion so the
/// first occurrence fixes the order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    literals: Vec<Literal>,
}

impl Condition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, literal: Literal) -> bool {
        if self.literals.contains(&literal) {
            false
        } else {
            self.literals.push(literal);
            true
        }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.literals.iter().map(|l| &l.atom)
    }
}

impl FromIterator<Literal> for Condition {
    fn from_iter<T: IntoIterator<Item = Literal>>(iter: T) -> Self {
        let mut c = Condition::new();
        for l in iter {
            c.push(l);
        }
        c
    }
}

impl FromIterator<Atom> for Condition {
    fn from_iter<T: IntoIterator<Item = Atom>>(iter: T) -> Self {
        iter.into_iter().map(Literal::pos).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypedParam {
    pub var: Name,
    #[serde(rename = "type")]
    pub ty: Name,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateDecl {
    pub name: Name,
    pub params: Vec<TypedParam>,
}

impl PredicateDecl {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub name: Name,
    pub params: Vec<TypedParam>,
    pub precondition: Condition,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub name: Name,
    pub requirements: Vec<String>,
    /// type → direct supertype; `object` is implicit and never a key.
    pub types: IndexMap<Name, Name>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
}

pub const ROOT_TYPE: &str = "object";

impl Domain {
    pub fn has_type(&self, ty: &Name) -> bool {
        ty == ROOT_TYPE || self.types.contains_key(ty)
    }

    /// True iff `sub` equals `sup` or transitively descends from it.
    pub fn is_subtype(&self, sub: &Name, sup: &Name) -> Result<bool, PddlError> {
        for t in [sub, sup] {
            if !self.has_type(t) {
                return Err(PddlError::UnknownType(t.clone()));
            }
        }
        let mut cur = sub;
        // Parse guarantees the graph is acyclic; the bound is a backstop.
        for _ in 0..=self.types.len() {
            if cur == sup {
                return Ok(true);
            }
            match self.types.get(cur) {
                Some(parent) => cur = parent,
                None => return Ok(false),
            }
        }
        Ok(false)
    }

    pub fn predicate(&self, name: &Name) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| &p.name == name)
    }

    pub fn action(&self, name: &Name) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| &a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypedObject {
    pub name: Name,
    #[serde(rename = "type")]
    pub ty: Name,
}

impl TypedObject {
    pub fn new(name: Name, ty: Name) -> Self {
        TypedObject { name, ty }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub name: Name,
    pub domain_name: Name,
    pub objects: Vec<TypedObject>,
    pub init: BTreeSet<Atom>,
    pub goal: Condition,
}

impl Problem {
    pub fn object(&self, name: &Name) -> Option<&TypedObject> {
        self.objects.iter().find(|o| &o.name == name)
    }
}

/// Goal literals as a set. Nested conjunctions are already flattened by
/// the parser, so this is the goal condition viewed without order.
pub fn flatten_goal(p: &Problem) -> BTreeSet<Literal> {
    p.goal.literals().iter().cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroundAction {
    pub schema: Name,
    pub args: Vec<Name>,
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.schema)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// Sequence of ground actions. Empty when the goal already holds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<GroundAction>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Plan file format: one `(<action> <arg> ...)` per line, lowercase.
impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}
