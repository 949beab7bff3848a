//! Plan checking by simulation on the lifted domain, independent of the
//! grounder and search code.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::pddl::{flatten_goal, Atom, Domain, Literal, Name, Plan, Problem, Term};

use super::PlannerError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum PlanFailure {
    UnmetPrecondition { literal: Literal },
    WrongArity { expected: usize, found: usize },
    UnknownObject { object: Name },
    TypeMismatch { object: Name, expected: Name },
    GoalNotReached { unmet: Vec<Literal> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PlanValidation {
    Valid,
    /// `step` is the failing step index, or the plan length when only the
    /// goal check fails.
    Invalid { step: usize, failure: PlanFailure },
}

impl std::fmt::Display for PlanFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlanFailure::UnmetPrecondition { literal } => write!(f, "precondition {literal} does not hold"),
            PlanFailure::WrongArity { expected, found } => {
                write!(f, "action takes {expected} argument(s), got {found}")
            }
            PlanFailure::UnknownObject { object } => write!(f, "unknown object {object}"),
            PlanFailure::TypeMismatch { object, expected } => write!(f, "{object} is not of type {expected}"),
            PlanFailure::GoalNotReached { unmet } => {
                f.write_str("goal not reached; unmet:")?;
                for l in unmet {
                    write!(f, " {l}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::fmt::Display for PlanValidation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlanValidation::Valid => f.write_str("plan valid"),
            PlanValidation::Invalid { step, failure } => write!(f, "plan invalid at step {step}: {failure}"),
        }
    }
}

impl PlanValidation {
    pub fn is_valid(&self) -> bool {
        matches!(self, PlanValidation::Valid)
    }
}

fn substitute(atom: &Atom, params: &[Name], args: &[Name]) -> Atom {
    let args = atom
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => {
                let i = params.iter().position(|p| p == v).expect("parse checks variables");
                Term::Const(args[i].clone())
            }
            c => c.clone(),
        })
        .collect();
    Atom::new(atom.predicate.clone(), args)
}

/// Simulates `plan` from the problem's initial state.
pub fn validate_plan(
    domain: &Domain,
    problem: &Problem,
    plan: &Plan,
) -> Result<PlanValidation, PlannerError> {
    let mut state: HashSet<Atom> = problem.init.iter().cloned().collect();

    for (step, action) in plan.steps.iter().enumerate() {
        let schema = domain
            .action(&action.schema)
            .ok_or_else(|| PlannerError::UnknownAction(action.schema.clone()))?;
        let invalid = |failure| Ok(PlanValidation::Invalid { step, failure });

        if schema.params.len() != action.args.len() {
            return invalid(PlanFailure::WrongArity {
                expected: schema.params.len(),
                found: action.args.len(),
            });
        }
        for (param, arg) in schema.params.iter().zip(&action.args) {
            let Some(obj) = problem.object(arg) else {
                return invalid(PlanFailure::UnknownObject { object: arg.clone() });
            };
            if !domain.is_subtype(&obj.ty, &param.ty).unwrap_or(false) {
                return invalid(PlanFailure::TypeMismatch {
                    object: arg.clone(),
                    expected: param.ty.clone(),
                });
            }
        }

        let params: Vec<Name> = schema.params.iter().map(|p| p.var.clone()).collect();
        for l in schema.precondition.literals() {
            let atom = substitute(&l.atom, &params, &action.args);
            if state.contains(&atom) == l.negated {
                return invalid(PlanFailure::UnmetPrecondition {
                    literal: Literal {
                        atom,
                        negated: l.negated,
                    },
                });
            }
        }
        for a in &schema.del {
            state.remove(&substitute(a, &params, &action.args));
        }
        for a in &schema.add {
            state.insert(substitute(a, &params, &action.args));
        }
    }

    let unmet: Vec<Literal> = problem
        .goal
        .literals()
        .iter()
        .filter(|l| state.contains(&l.atom) == l.negated)
        .cloned()
        .collect();
    debug_assert!(unmet.iter().all(|l| flatten_goal(problem).contains(l)));
    if unmet.is_empty() {
        Ok(PlanValidation::Valid)
    } else {
        Ok(PlanValidation::Invalid {
            step: plan.len(),
            failure: PlanFailure::GoalNotReached { unmet },
        })
    }
}
