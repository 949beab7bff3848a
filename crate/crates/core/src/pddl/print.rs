//! Canonical PDDL printer.
//!
//! Layout is fixed: two-space indentation, one entry per line inside each
//! section, objects and goal literals in insertion order, init atoms sorted
//! by their printed text. Empty sections print as `(:objects)`/`(:init)`.

use std::fmt::Write;

use super::ast::*;

fn params(ps: &[TypedParam]) -> String {
    ps.iter()
        .map(|p| format!("?{} - {}", p.var, p.ty))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn print_domain(d: &Domain) -> String {
    let mut out = String::new();
    writeln!(out, "(define (domain {})", d.name).unwrap();
    if !d.requirements.is_empty() {
        writeln!(out, "  (:requirements {})", d.requirements.join(" ")).unwrap();
    }
    if !d.types.is_empty() {
        out.push_str("  (:types\n");
        for (child, parent) in &d.types {
            writeln!(out, "    {child} - {parent}").unwrap();
        }
        out.push_str("  )\n");
    }
    if !d.predicates.is_empty() {
        out.push_str("  (:predicates\n");
        for p in &d.predicates {
            if p.params.is_empty() {
                writeln!(out, "    ({})", p.name).unwrap();
            } else {
                writeln!(out, "    ({} {})", p.name, params(&p.params)).unwrap();
            }
        }
        out.push_str("  )\n");
    }
    for a in &d.actions {
        writeln!(out, "  (:action {}", a.name).unwrap();
        writeln!(out, "    :parameters ({})", params(&a.params)).unwrap();
        out.push_str("    :precondition (and\n");
        for l in a.precondition.literals() {
            writeln!(out, "      {l}").unwrap();
        }
        out.push_str("    )\n    :effect (and\n");
        for atom in &a.add {
            writeln!(out, "      {atom}").unwrap();
        }
        for atom in &a.del {
            writeln!(out, "      (not {atom})").unwrap();
        }
        out.push_str("    )\n  )\n");
    }
    out.push_str(")\n");
    out
}

/// `(:objects ...)` block at the given indentation, without trailing newline.
pub fn print_objects(objects: &[TypedObject], indent: &str) -> String {
    if objects.is_empty() {
        return format!("{indent}(:objects)");
    }
    let mut out = format!("{indent}(:objects\n");
    for o in objects {
        writeln!(out, "{indent}  {} - {}", o.name, o.ty).unwrap();
    }
    write!(out, "{indent})").unwrap();
    out
}

/// `(:init ...)` block, atoms sorted by printed text.
pub fn print_init<'a>(init: impl IntoIterator<Item = &'a Atom>, indent: &str) -> String {
    let mut lines: Vec<String> = init.into_iter().map(ToString::to_string).collect();
    lines.sort();
    lines.dedup();
    if lines.is_empty() {
        return format!("{indent}(:init)");
    }
    let mut out = format!("{indent}(:init\n");
    for l in lines {
        writeln!(out, "{indent}  {l}").unwrap();
    }
    write!(out, "{indent})").unwrap();
    out
}

/// `(:goal (and ...))` block, literals in insertion order.
pub fn print_goal(goal: &Condition, indent: &str) -> String {
    let mut out = format!("{indent}(:goal\n{indent}  (and\n");
    for l in goal.literals() {
        writeln!(out, "{indent}    {l}").unwrap();
    }
    write!(out, "{indent}  )\n{indent})").unwrap();
    out
}

pub fn print_problem(p: &Problem) -> String {
    let mut out = String::new();
    writeln!(out, "(define (problem {})", p.name).unwrap();
    writeln!(out, "  (:domain {})", p.domain_name).unwrap();
    writeln!(out, "{}", print_objects(&p.objects, "  ")).unwrap();
    writeln!(out, "{}", print_init(&p.init, "  ")).unwrap();
    writeln!(out, "{}", print_goal(&p.goal, "  ")).unwrap();
    out.push_str(")\n");
    out
}
