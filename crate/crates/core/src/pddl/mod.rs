//! Abstract syntax, parser and canonical printer for the STRIPS + typing
//! subset of PDDL (negative preconditions allowed in action schemas,
//! positive conjunctive goals).
//!
//! The parser is domain-agnostic: a problem that mentions undeclared
//! objects or predicates still parses, and the [`crate::validator`]
//! reports what is wrong with it.

mod ast;
mod name;
mod parse;
mod print;
pub mod sexpr;

pub use ast::*;
pub use name::{name, InvalidName, Name};
pub use parse::{parse_domain, parse_goal_section, parse_init_section, parse_plan, parse_problem};
pub use print::{print_domain, print_goal, print_init, print_objects, print_problem};

use sexpr::ReadError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PddlError {
    #[error(transparent)]
    Parse(#[from] ReadError),
    #[error("unsupported PDDL feature at {line}:{column}: {feature}")]
    UnsupportedFeature {
        feature: String,
        line: usize,
        column: usize,
    },
    #[error("unknown type `{0}`")]
    UnknownType(Name),
    #[error("type hierarchy has a cycle through `{0}`")]
    TypeCycle(Name),
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: Name },
    #[error("invalid action schema `{action}`: {message}")]
    InvalidSchema { action: Name, message: String },
}

#[cfg(test)]
mod tests {
    use super::*;

    const BLOCKS: &str = include_str!("../../data/blocksworld/domain.pddl");
    const HANOI: &str = include_str!("../../data/hanoi/domain.pddl");
    const COOKING: &str = include_str!("../../data/cooking/domain.pddl");

    const COOKING_PROBLEM: &str = "
        (define (problem slice-carrot) (:domain cooking)
          (:objects carrot - vegetable knife - tool
                    cutting_board counter bowl - location a_bot b_bot - robot)
          (:init (at carrot counter) (is-whole carrot))
          (:goal (and (at carrot bowl) (is-sliced carrot))))";

    #[test]
    fn blocksworld_domain_shape() {
        let d = parse_domain(BLOCKS).unwrap();
        let preds: Vec<&str> = d.predicates.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(
            preds,
            ["on", "ontable", "clear", "handempty", "handfull", "holding"]
        );
        let actions: Vec<&str> = d.actions.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(actions, ["pick-up", "put-down", "stack", "unstack"]);
    }

    #[test]
    fn minimal_domain() {
        let d = parse_domain("(define (domain d) (:requirements :strips))").unwrap();
        assert_eq!(d.name, "d");
        assert!(d.predicates.is_empty());
        assert!(d.actions.is_empty());
        assert_eq!(d.requirements, [":strips"]);
    }

    #[test]
    fn unknown_requirements_are_tolerated() {
        let d = parse_domain("(define (domain d) (:requirements :strips :adl :fancy))").unwrap();
        assert_eq!(d.requirements.len(), 3);
    }

    #[test]
    fn unbalanced_parenthesis_is_a_parse_error() {
        let text = "(define (domain d)\n  (:requirements :strips)\n  (:predicates (p ?x)";
        match parse_domain(text) {
            Err(PddlError::Parse(e)) => assert_eq!((e.line, e.column), (3, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn functions_are_unsupported() {
        let err = parse_domain("(define (domain d) (:functions (total-cost)))").unwrap_err();
        assert!(matches!(err, PddlError::UnsupportedFeature { .. }), "{err:?}");
    }

    #[test]
    fn problem_sections() {
        let p = parse_problem(COOKING_PROBLEM).unwrap();
        assert!(p.init.contains(&Atom::ground("at", &["carrot", "counter"])));
        assert_eq!(p.goal.len(), 2);
        assert!(p.goal.literals().iter().all(|l| !l.negated));
        assert_eq!(p.objects.len(), 7);
        assert_eq!(p.objects[3].ty, "location");
    }

    #[test]
    fn empty_objects_section() {
        let p = parse_problem("(define (problem p) (:domain d) (:objects) (:init) (:goal (and)))")
            .unwrap();
        assert!(p.objects.is_empty());
        assert!(p.init.is_empty());
        assert!(p.goal.is_empty());
    }

    #[test]
    fn untyped_objects_default_to_object() {
        let p = parse_problem("(define (problem p) (:domain d) (:objects a b) (:goal (on a b)))")
            .unwrap();
        assert!(p.objects.iter().all(|o| o.ty == "object"));
    }

    #[test]
    fn disjunctive_and_quantified_goals_are_unsupported() {
        for goal in [
            "(or (p a) (q a))",
            "(forall (?x) (p ?x))",
            "(exists (?x) (p ?x))",
            "(not (p a))",
        ] {
            let text = format!("(define (problem p) (:domain d) (:goal {goal}))");
            let err = parse_problem(&text).unwrap_err();
            assert!(matches!(err, PddlError::UnsupportedFeature { .. }), "{goal}: {err:?}");
        }
    }

    #[test]
    fn goal_flattening() {
        let g = parse_goal_section("(and (p a) (q b))").unwrap();
        assert_eq!(g.len(), 2);
        let g = parse_goal_section("(is-sliced carrot)").unwrap();
        assert_eq!(g.literals()[0].atom, Atom::ground("is-sliced", &["carrot"]));
        let g = parse_goal_section("(:goal (and (and (p a)) (q b)))").unwrap();
        let atoms: Vec<_> = g.atoms().cloned().collect();
        assert_eq!(atoms, [Atom::ground("p", &["a"]), Atom::ground("q", &["b"])]);

        let p = parse_problem(
            "(define (problem p) (:domain d) (:goal (and (and (p a)) (q b) (p a))))",
        )
        .unwrap();
        let flat = flatten_goal(&p);
        assert_eq!(flat.len(), 2);
        assert!(flat.contains(&Literal::pos(Atom::ground("q", &["b"]))));
    }

    #[test]
    fn case_folding_yields_equal_structures() {
        let upper = COOKING_PROBLEM.to_uppercase().replace("DEFINE", "define");
        assert_eq!(parse_problem(&upper).unwrap(), parse_problem(COOKING_PROBLEM).unwrap());
        let d_upper = parse_domain(&BLOCKS.to_uppercase()).unwrap();
        assert_eq!(d_upper, parse_domain(BLOCKS).unwrap());
    }

    #[test]
    fn subtyping() {
        let d = parse_domain(COOKING).unwrap();
        let t = |s: &str| name(s);
        assert!(d.is_subtype(&t("vegetable"), &t("object")).unwrap());
        assert!(d.is_subtype(&t("vegetable"), &t("vegetable")).unwrap());
        assert!(!d.is_subtype(&t("tool"), &t("vegetable")).unwrap());
        assert!(matches!(
            d.is_subtype(&t("fruit"), &t("object")),
            Err(PddlError::UnknownType(_))
        ));
    }

    #[test]
    fn deep_type_hierarchy() {
        let d = parse_domain("(define (domain d) (:types a - b b - c c))").unwrap();
        assert!(d.is_subtype(&name("a"), &name("c")).unwrap());
        assert!(!d.is_subtype(&name("c"), &name("a")).unwrap());
    }

    #[test]
    fn type_cycles_rejected() {
        let err = parse_domain("(define (domain d) (:types a - b b - a))").unwrap_err();
        assert!(matches!(err, PddlError::TypeCycle(_)));
    }

    #[test]
    fn schema_variables_must_be_parameters() {
        let text = "(define (domain d) (:predicates (p ?x))
            (:action a :parameters (?x) :precondition (p ?y) :effect (p ?x)))";
        assert!(matches!(parse_domain(text), Err(PddlError::InvalidSchema { .. })));
    }

    #[test]
    fn add_and_delete_must_be_disjoint() {
        let text = "(define (domain d) (:predicates (p ?x))
            (:action a :parameters (?x) :precondition (p ?x) :effect (and (p ?x) (not (p ?x)))))";
        assert!(matches!(parse_domain(text), Err(PddlError::InvalidSchema { .. })));
    }

    #[test]
    fn variables_in_init_still_parse() {
        let p = parse_problem("(define (problem p) (:domain d) (:init (on ?x b)) (:goal (on a b)))")
            .unwrap();
        assert!(!p.init.iter().next().unwrap().is_ground());
    }

    #[test]
    fn printed_problem_round_trips() {
        let p = parse_problem(COOKING_PROBLEM).unwrap();
        let text = print_problem(&p);
        assert_eq!(parse_problem(&text).unwrap(), p);
        assert_eq!(print_problem(&parse_problem(&text).unwrap()), text);
    }

    #[test]
    fn printed_domains_round_trip() {
        for src in [BLOCKS, HANOI, COOKING] {
            let d = parse_domain(src).unwrap();
            assert_eq!(parse_domain(&print_domain(&d)).unwrap(), d);
        }
    }

    #[test]
    fn init_order_does_not_change_output() {
        let a = "(define (problem p) (:domain d) (:init (on b a) (ontable a)) (:goal (and)))";
        let b = "(define (problem p) (:domain d) (:init (ontable a) (on b a)) (:goal (and)))";
        let pa = print_problem(&parse_problem(a).unwrap());
        assert_eq!(pa, print_problem(&parse_problem(b).unwrap()));
        assert!(pa.find("(on b a)").unwrap() < pa.find("(ontable a)").unwrap());
    }

    #[test]
    fn plan_text_round_trips() {
        let plan = parse_plan("(unstack c a robot)\n; cost = 1\n(put-down c robot)\n").unwrap();
        assert_eq!(plan.len(), 2);
        assert_eq!(plan.to_string(), "(unstack c a robot)\n(put-down c robot)\n");
    }
}
