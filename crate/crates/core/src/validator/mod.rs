//! Static checking of a problem against its domain.
//!
//! The validator never stops at the first problem: every issue found is
//! reported, in section order (header, objects, init, goal). The rendered
//! report is the error text handed back to the model during repair.

pub mod mutation;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pddl::{Atom, Domain, Name, Problem, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IssueKind {
    UndefinedType,
    UndefinedPredicate,
    ArityMismatch,
    TypeMismatch,
    UndefinedObject,
    DuplicateObject,
    UngroundAtom,
    UnknownDomainReference,
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Objects,
    Init,
    Goal,
    Header,
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Part::Objects => "objects",
            Part::Init => "init",
            Part::Goal => "goal",
            Part::Header => "header",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subject {
    Name(Name),
    Atom(Atom),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Name(n) => write!(f, "{n}"),
            Subject::Atom(a) => write!(f, "{a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub kind: IssueKind,
    pub part: Part,
    pub message: String,
    pub subject: Subject,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in :{}: {}", self.kind, self.part, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "ReportRepr", into = "ReportRepr")]
pub struct ValidationReport {
    issues: Vec<ValidationIssue>,
}

#[derive(Serialize, Deserialize)]
struct ReportRepr {
    ok: bool,
    issues: Vec<ValidationIssue>,
}

impl From<ReportRepr> for ValidationReport {
    fn from(r: ReportRepr) -> Self {
        ValidationReport { issues: r.issues }
    }
}

impl From<ValidationReport> for ReportRepr {
    fn from(r: ValidationReport) -> Self {
        ReportRepr {
            ok: r.ok(),
            issues: r.issues,
        }
    }
}

impl ValidationReport {
    pub fn from_issues(issues: Vec<ValidationIssue>) -> Self {
        ValidationReport { issues }
    }

    pub fn ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn issues(&self) -> &[ValidationIssue] {
        &self.issues
    }

    pub fn has_kind(&self, kind: IssueKind) -> bool {
        self.issues.iter().any(|i| i.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("report has no issues to render")]
    EmptyReport,
}

/// One line per issue, `<kind> in :<part>: <message>`, in issue order.
pub fn render_error(report: &ValidationReport) -> Result<String, RenderError> {
    if report.ok() {
        return Err(RenderError::EmptyReport);
    }
    Ok(report
        .issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n"))
}

struct Checker<'a> {
    domain: &'a Domain,
    objects: HashMap<&'a Name, &'a Name>,
    issues: Vec<ValidationIssue>,
}

impl<'a> Checker<'a> {
    fn issue(&mut self, kind: IssueKind, part: Part, subject: Subject, message: String) {
        self.issues.push(ValidationIssue {
            kind,
            part,
            message,
            subject,
        });
    }

    fn check_atom(&mut self, atom: &Atom, part: Part) {
        let decl = self.domain.predicate(&atom.predicate);
        match decl {
            None => self.issue(
                IssueKind::UndefinedPredicate,
                part,
                Subject::Atom(atom.clone()),
                format!(
                    "predicate {} used in {atom} is not declared in the domain",
                    atom.predicate
                ),
            ),
            Some(d) if d.arity() != atom.arity() => self.issue(
                IssueKind::ArityMismatch,
                part,
                Subject::Atom(atom.clone()),
                format!(
                    "{atom} has {} argument(s) but {} takes {}",
                    atom.arity(),
                    atom.predicate,
                    d.arity()
                ),
            ),
            Some(_) => {}
        }

        if let Some(Term::Var(v)) = atom.args.iter().find(|t| t.is_var()) {
            self.issue(
                IssueKind::UngroundAtom,
                part,
                Subject::Atom(atom.clone()),
                format!("{atom} contains the variable ?{v}; only objects may appear here"),
            );
        }

        for (i, arg) in atom.args.iter().enumerate() {
            let Term::Const(obj) = arg else { continue };
            let Some(&obj_ty) = self.objects.get(obj) else {
                self.issue(
                    IssueKind::UndefinedObject,
                    part,
                    Subject::Name(obj.clone()),
                    format!("{obj} used in {atom} is not declared in :objects"),
                );
                continue;
            };
            let Some(param) = decl.and_then(|d| d.params.get(i)) else {
                continue;
            };
            // An undefined object type is reported once in :objects.
            if let Ok(false) = self.domain.is_subtype(obj_ty, &param.ty) {
                self.issue(
                    IssueKind::TypeMismatch,
                    part,
                    Subject::Name(obj.clone()),
                    format!(
                        "{obj} in {atom} has type {obj_ty} but argument {} of {} expects {}",
                        i + 1,
                        atom.predicate,
                        param.ty
                    ),
                );
            }
        }
    }
}

/// Checks `problem` against `domain` and reports every issue found.
pub fn validate(domain: &Domain, problem: &Problem) -> ValidationReport {
    let mut checker = Checker {
        domain,
        objects: HashMap::new(),
        issues: Vec::new(),
    };

    if problem.domain_name != domain.name {
        checker.issue(
            IssueKind::UnknownDomainReference,
            Part::Header,
            Subject::Name(problem.domain_name.clone()),
            format!(
                "problem refers to domain {} but the domain is {}",
                problem.domain_name, domain.name
            ),
        );
    }

    for o in &problem.objects {
        if !domain.has_type(&o.ty) {
            checker.issue(
                IssueKind::UndefinedType,
                Part::Objects,
                Subject::Name(o.ty.clone()),
                format!("object {} has type {} which the domain does not define", o.name, o.ty),
            );
        }
        if checker.objects.insert(&o.name, &o.ty).is_some() {
            checker.issue(
                IssueKind::DuplicateObject,
                Part::Objects,
                Subject::Name(o.name.clone()),
                format!("object {} is declared more than once", o.name),
            );
        }
    }

    for atom in &problem.init {
        checker.check_atom(atom, Part::Init);
    }
    for atom in problem.goal.atoms() {
        checker.check_atom(atom, Part::Goal);
    }

    ValidationReport::from_issues(checker.issues)
}
