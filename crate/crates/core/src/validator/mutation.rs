//! Seeded-error operators: each turns a valid problem into one the
//! validator must flag with a specific issue kind.

use crate::pddl::{name, Atom, Domain, Name, Problem, Term, TypedObject};

use super::IssueKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Rename an object's declaration so references to it dangle.
    RenameObject,
    /// Remove an object declaration that init refers to.
    DropObject,
    /// Drop the last argument of an init atom.
    ChangeArity,
    /// Replace an init argument with a declared object of the wrong type.
    WrongTypeArgument,
    /// Declare an object twice.
    DuplicateObject,
    /// Put a variable into an init atom.
    VariableInInit,
    /// Use a predicate the domain does not declare in the goal.
    UndefinedPredicate,
    /// Give an object a type the domain does not define.
    UndefinedType,
}

impl Mutation {
    pub const ALL: [Mutation; 8] = [
        Mutation::RenameObject,
        Mutation::DropObject,
        Mutation::ChangeArity,
        Mutation::WrongTypeArgument,
        Mutation::DuplicateObject,
        Mutation::VariableInInit,
        Mutation::UndefinedPredicate,
        Mutation::UndefinedType,
    ];

    pub fn expected_kind(self) -> IssueKind {
        match self {
            Mutation::RenameObject | Mutation::DropObject => IssueKind::UndefinedObject,
            Mutation::ChangeArity => IssueKind::ArityMismatch,
            Mutation::WrongTypeArgument => IssueKind::TypeMismatch,
            Mutation::DuplicateObject => IssueKind::DuplicateObject,
            Mutation::VariableInInit => IssueKind::UngroundAtom,
            Mutation::UndefinedPredicate => IssueKind::UndefinedPredicate,
            Mutation::UndefinedType => IssueKind::UndefinedType,
        }
    }

    /// Applies the operator, or `None` if the problem offers no site for it.
    pub fn apply(self, domain: &Domain, problem: &Problem) -> Option<Problem> {
        let mut p = problem.clone();
        match self {
            Mutation::RenameObject | Mutation::DropObject => {
                let used = first_init_constant(problem)?;
                let idx = p.objects.iter().position(|o| o.name == used)?;
                if self == Mutation::DropObject {
                    p.objects.remove(idx);
                } else {
                    p.objects[idx].name = fresh(problem, &format!("{used}_renamed"));
                }
            }
            Mutation::ChangeArity => {
                let atom = problem.init.iter().find(|a| !a.args.is_empty())?.clone();
                let mut changed = atom.clone();
                changed.args.pop();
                replace_init(&mut p, &atom, changed);
            }
            Mutation::WrongTypeArgument => {
                let (atom, changed) = wrong_typed(domain, problem)?;
                replace_init(&mut p, &atom, changed);
            }
            Mutation::DuplicateObject => {
                let first = p.objects.first()?.clone();
                p.objects.push(first);
            }
            Mutation::VariableInInit => {
                let atom = problem.init.iter().find(|a| !a.args.is_empty())?.clone();
                let mut changed = atom.clone();
                changed.args[0] = Term::Var(name("x"));
                replace_init(&mut p, &atom, changed);
            }
            Mutation::UndefinedPredicate => {
                let mut goal: Vec<_> = p.goal.literals().to_vec();
                let first = goal.first_mut()?;
                first.atom.predicate = Name::new(&format!("{}-undefined", first.atom.predicate))
                    .expect("derived name is valid");
                p.goal = goal.into_iter().collect();
            }
            Mutation::UndefinedType => {
                let first = p.objects.first_mut()?;
                first.ty = name("undefined-type");
            }
        }
        Some(p)
    }
}

fn first_init_constant(p: &Problem) -> Option<Name> {
    p.init
        .iter()
        .flat_map(|a| &a.args)
        .find_map(|t| match t {
            Term::Const(n) => Some(n.clone()),
            Term::Var(_) => None,
        })
}

fn fresh(p: &Problem, base: &str) -> Name {
    let mut candidate = name(base);
    let mut i = 2;
    while p.object(&candidate).is_some() {
        candidate = name(&format!("{base}{i}"));
        i += 1;
    }
    candidate
}

fn replace_init(p: &mut Problem, old: &Atom, new: Atom) {
    p.init.remove(old);
    p.init.insert(new);
}

fn wrong_typed(domain: &Domain, p: &Problem) -> Option<(Atom, Atom)> {
    for atom in &p.init {
        let decl = domain.predicate(&atom.predicate)?;
        for (i, param) in decl.params.iter().enumerate().take(atom.args.len()) {
            let bad = p.objects.iter().find(|o: &&TypedObject| {
                matches!(domain.is_subtype(&o.ty, &param.ty), Ok(false))
            });
            if let Some(bad) = bad {
                let mut changed = atom.clone();
                changed.args[i] = Term::Const(bad.name.clone());
                if !p.init.contains(&changed) {
                    return Some((atom.clone(), changed));
                }
            }
        }
    }
    None
}
