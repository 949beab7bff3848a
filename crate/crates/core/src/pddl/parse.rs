use std::collections::{BTreeSet, HashSet};

use indexmap::IndexMap;

use super::ast::*;
use super::name::Name;
use super::sexpr::{read_one, Pos, ReadError, SExpr};
use super::PddlError;

const UNSUPPORTED_CONDITIONS: &[&str] = &["or", "forall", "exists", "imply", "when", "="];
const UNSUPPORTED_EFFECTS: &[&str] = &[
    "when", "forall", "increase", "decrease", "assign", "scale-up", "scale-down",
];
const UNSUPPORTED_DOMAIN_SECTIONS: &[&str] = &[
    ":functions",
    ":constants",
    ":durative-action",
    ":derived",
    ":axiom",
    ":process",
    ":event",
];

fn expected(pos: Pos, what: impl Into<String>) -> PddlError {
    PddlError::Parse(ReadError::at(pos, what))
}

fn unsupported(pos: Pos, feature: impl Into<String>) -> PddlError {
    PddlError::UnsupportedFeature {
        feature: feature.into(),
        line: pos.line,
        column: pos.column,
    }
}

fn symbol<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, PddlError> {
    e.as_symbol().ok_or_else(|| expected(e.pos(), what))
}

fn list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr], PddlError> {
    e.as_list().ok_or_else(|| expected(e.pos(), what))
}

fn ident(e: &SExpr) -> Result<Name, PddlError> {
    let s = symbol(e, "an identifier")?;
    Name::new(s).map_err(|_| expected(e.pos(), format!("an identifier, found `{s}`")))
}

fn variable(e: &SExpr) -> Result<Name, PddlError> {
    let s = symbol(e, "a variable")?;
    s.strip_prefix('?')
        .and_then(|v| Name::new(v).ok())
        .ok_or_else(|| expected(e.pos(), format!("a variable, found `{s}`")))
}

fn term(e: &SExpr) -> Result<Term, PddlError> {
    let s = symbol(e, "a term")?;
    if s.starts_with('?') {
        variable(e).map(Term::Var)
    } else {
        ident(e).map(Term::Const)
    }
}

/// `(kw NAME)` header such as `(domain blocksworld)`.
fn header(e: &SExpr, keyword: &str) -> Result<Name, PddlError> {
    let what = format!("({keyword} <name>)");
    let items = list(e, &what)?;
    match items {
        [kw, n] if kw.as_symbol().map(str::to_ascii_lowercase).as_deref() == Some(keyword) => {
            ident(n)
        }
        _ => Err(expected(e.pos(), what)),
    }
}

/// Splits `(define HEADER section...)`.
fn define_form<'a>(root: &'a SExpr, keyword: &str) -> Result<(Name, &'a [SExpr]), PddlError> {
    let items = list(root, "(define ...)")?;
    if root.head().as_deref() != Some("define") {
        return Err(expected(root.pos(), "(define ...)"));
    }
    let head = items
        .get(1)
        .ok_or_else(|| expected(root.pos(), format!("({keyword} <name>)")))?;
    Ok((header(head, keyword)?, &items[2..]))
}

/// Typed list `a b - t c` → [(a, t), (b, t), (c, object)].
fn typed_list<T>(
    items: &[SExpr],
    mut entry: impl FnMut(&SExpr) -> Result<T, PddlError>,
) -> Result<Vec<(T, Name)>, PddlError> {
    let mut out = Vec::new();
    let mut pending = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let e = &items[i];
        if e.as_symbol() == Some("-") {
            let ty_expr = items
                .get(i + 1)
                .ok_or_else(|| expected(e.pos(), "a type after `-`"))?;
            if ty_expr.head().as_deref() == Some("either") {
                return Err(unsupported(ty_expr.pos(), "either types"));
            }
            let ty = ident(ty_expr)?;
            if pending.is_empty() {
                return Err(expected(e.pos(), "names before `-`"));
            }
            out.extend(pending.drain(..).map(|x| (x, ty.clone())));
            i += 2;
        } else {
            pending.push(entry(e)?);
            i += 1;
        }
    }
    let object = Name::new(ROOT_TYPE).expect("root type");
    out.extend(pending.into_iter().map(|x| (x, object.clone())));
    Ok(out)
}

fn atom(e: &SExpr) -> Result<Atom, PddlError> {
    let items = list(e, "an atom")?;
    let (head, args) = items
        .split_first()
        .ok_or_else(|| expected(e.pos(), "a predicate name"))?;
    let predicate = ident(head)?;
    let args = args.iter().map(term).collect::<Result<_, _>>()?;
    Ok(Atom { predicate, args })
}

fn condition(e: &SExpr, allow_negation: bool, out: &mut Condition) -> Result<(), PddlError> {
    let items = list(e, "a condition")?;
    if items.is_empty() {
        return Ok(());
    }
    match e.head().as_deref() {
        Some("and") => {
            for c in &items[1..] {
                condition(c, allow_negation, out)?;
            }
        }
        Some("not") => {
            if !allow_negation {
                return Err(unsupported(e.pos(), "negative goal literals"));
            }
            let [_, inner] = items else {
                return Err(expected(e.pos(), "(not <atom>)"));
            };
            if let Some(h) = inner.head() {
                if h == "=" || UNSUPPORTED_CONDITIONS.contains(&h.as_str()) || h == "and" {
                    return Err(unsupported(inner.pos(), format!("`{h}` under negation")));
                }
            }
            out.push(Literal::neg(atom(inner)?));
        }
        Some(h) if UNSUPPORTED_CONDITIONS.contains(&h) => {
            return Err(unsupported(e.pos(), format!("`{h}` conditions")));
        }
        _ => {
            out.push(Literal::pos(atom(e)?));
        }
    }
    Ok(())
}

fn effect(e: &SExpr, add: &mut Vec<Atom>, del: &mut Vec<Atom>) -> Result<(), PddlError> {
    let items = list(e, "an effect")?;
    if items.is_empty() {
        return Ok(());
    }
    match e.head().as_deref() {
        Some("and") => {
            for c in &items[1..] {
                effect(c, add, del)?;
            }
        }
        Some("not") => {
            let [_, inner] = items else {
                return Err(expected(e.pos(), "(not <atom>)"));
            };
            let a = atom(inner)?;
            if !del.contains(&a) {
                del.push(a);
            }
        }
        Some(h) if UNSUPPORTED_EFFECTS.contains(&h) => {
            return Err(unsupported(e.pos(), format!("`{h}` effects")));
        }
        _ => {
            let a = atom(e)?;
            if !add.contains(&a) {
                add.push(a);
            }
        }
    }
    Ok(())
}

fn check_type(types: &IndexMap<Name, Name>, ty: &Name) -> Result<(), PddlError> {
    if ty == ROOT_TYPE || types.contains_key(ty) {
        Ok(())
    } else {
        Err(PddlError::UnknownType(ty.clone()))
    }
}

fn parse_types(items: &[SExpr]) -> Result<IndexMap<Name, Name>, PddlError> {
    let mut types = IndexMap::new();
    for (child, parent) in typed_list(items, ident)? {
        if child == ROOT_TYPE {
            continue;
        }
        if types.insert(child.clone(), parent).is_some() {
            return Err(PddlError::Duplicate {
                kind: "type",
                name: child,
            });
        }
    }
    // Parents that are never declared themselves hang off `object`.
    let object = Name::new(ROOT_TYPE).expect("root type");
    let implicit: Vec<Name> = types
        .values()
        .filter(|p| *p != ROOT_TYPE && !types.contains_key(*p))
        .cloned()
        .collect();
    for p in implicit {
        types.entry(p).or_insert_with(|| object.clone());
    }
    for start in types.keys() {
        let mut cur = start;
        for _ in 0..=types.len() {
            match types.get(cur) {
                Some(parent) if parent == start => {
                    return Err(PddlError::TypeCycle(start.clone()));
                }
                Some(parent) => cur = parent,
                None => break,
            }
        }
    }
    Ok(types)
}

fn parse_params(e: &SExpr) -> Result<Vec<TypedParam>, PddlError> {
    let items = list(e, "a parameter list")?;
    let params: Vec<TypedParam> = typed_list(items, variable)?
        .into_iter()
        .map(|(var, ty)| TypedParam { var, ty })
        .collect();
    let mut seen = HashSet::new();
    for p in &params {
        if !seen.insert(&p.var) {
            return Err(expected(e.pos(), format!("unique variable names, `?{}` repeats", p.var)));
        }
    }
    Ok(params)
}

fn parse_action(e: &SExpr, types: &IndexMap<Name, Name>) -> Result<ActionSchema, PddlError> {
    let items = list(e, "(:action ...)")?;
    let name = ident(items.get(1).ok_or_else(|| expected(e.pos(), "an action name"))?)?;
    let mut params = Vec::new();
    let mut precondition = Condition::new();
    let mut add = Vec::new();
    let mut del = Vec::new();
    let mut i = 2;
    while i < items.len() {
        let key = symbol(&items[i], "an action keyword")?.to_ascii_lowercase();
        let value = items
            .get(i + 1)
            .ok_or_else(|| expected(items[i].pos(), format!("a value for {key}")))?;
        match key.as_str() {
            ":parameters" => params = parse_params(value)?,
            ":precondition" => condition(value, true, &mut precondition)?,
            ":effect" => effect(value, &mut add, &mut del)?,
            other => return Err(unsupported(items[i].pos(), format!("action keyword {other}"))),
        }
        i += 2;
    }
    for p in &params {
        check_type(types, &p.ty)?;
    }
    let declared: HashSet<&Name> = params.iter().map(|p| &p.var).collect();
    let used = precondition.atoms().chain(&add).chain(&del);
    for a in used {
        for t in &a.args {
            if let Term::Var(v) = t {
                if !declared.contains(v) {
                    return Err(PddlError::InvalidSchema {
                        action: name,
                        message: format!("variable ?{v} is not a parameter"),
                    });
                }
            }
        }
    }
    if let Some(both) = add.iter().find(|a| del.contains(a)) {
        return Err(PddlError::InvalidSchema {
            action: name,
            message: format!("{both} is both added and deleted"),
        });
    }
    Ok(ActionSchema {
        name,
        params,
        precondition,
        add,
        del,
    })
}

pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let root = read_one(text)?;
    let (name, sections) = define_form(&root, "domain")?;
    let mut requirements = Vec::new();
    let mut types = IndexMap::new();
    let mut predicate_exprs: Vec<&SExpr> = Vec::new();
    let mut action_exprs: Vec<&SExpr> = Vec::new();

    for s in sections {
        let items = list(s, "a domain section")?;
        let head = s.head().ok_or_else(|| expected(s.pos(), "a section keyword"))?;
        match head.as_str() {
            ":requirements" => {
                for r in &items[1..] {
                    let tag = symbol(r, "a requirement tag")?.to_ascii_lowercase();
                    if !requirements.contains(&tag) {
                        requirements.push(tag);
                    }
                }
            }
            ":types" => types = parse_types(&items[1..])?,
            ":predicates" => predicate_exprs.extend(&items[1..]),
            ":action" => action_exprs.push(s),
            h if UNSUPPORTED_DOMAIN_SECTIONS.contains(&h) => {
                return Err(unsupported(s.pos(), format!("{h} section")));
            }
            other => return Err(expected(s.pos(), format!("a known domain section, found {other}"))),
        }
    }

    let mut predicates: Vec<PredicateDecl> = Vec::new();
    for p in predicate_exprs {
        let items = list(p, "a predicate declaration")?;
        let (head, rest) = items
            .split_first()
            .ok_or_else(|| expected(p.pos(), "a predicate name"))?;
        let pname = ident(head)?;
        let params: Vec<TypedParam> = typed_list(rest, variable)?
            .into_iter()
            .map(|(var, ty)| TypedParam { var, ty })
            .collect();
        let mut seen = HashSet::new();
        for param in &params {
            check_type(&types, &param.ty)?;
            if !seen.insert(&param.var) {
                return Err(expected(p.pos(), format!("unique variable names, `?{}` repeats", param.var)));
            }
        }
        if predicates.iter().any(|q| q.name == pname) {
            return Err(PddlError::Duplicate {
                kind: "predicate",
                name: pname,
            });
        }
        predicates.push(PredicateDecl {
            name: pname,
            params,
        });
    }

    let mut actions: Vec<ActionSchema> = Vec::new();
    for a in action_exprs {
        let action = parse_action(a, &types)?;
        if actions.iter().any(|b| b.name == action.name) {
            return Err(PddlError::Duplicate {
                kind: "action",
                name: action.name,
            });
        }
        actions.push(action);
    }

    Ok(Domain {
        name,
        requirements,
        types,
        predicates,
        actions,
    })
}

fn init_atoms(items: &[SExpr]) -> Result<BTreeSet<Atom>, PddlError> {
    let mut init = BTreeSet::new();
    for a in items {
        match a.head().as_deref() {
            Some("not") => return Err(unsupported(a.pos(), "negative initial facts")),
            Some("=") => return Err(unsupported(a.pos(), "numeric fluents")),
            _ => {
                init.insert(atom(a)?);
            }
        }
    }
    Ok(init)
}

fn goal_condition(items: &[SExpr], pos: Pos) -> Result<Condition, PddlError> {
    let mut goal = Condition::new();
    match items {
        [] => {}
        [g] => condition(g, false, &mut goal)?,
        _ => return Err(expected(pos, "a single goal condition")),
    }
    Ok(goal)
}

pub fn parse_problem(text: &str) -> Result<Problem, PddlError> {
    let root = read_one(text)?;
    let (name, sections) = define_form(&root, "problem")?;
    let mut domain_name = None;
    let mut objects = Vec::new();
    let mut init = BTreeSet::new();
    let mut goal = None;

    for s in sections {
        let items = list(s, "a problem section")?;
        let head = s.head().ok_or_else(|| expected(s.pos(), "a section keyword"))?;
        match head.as_str() {
            ":domain" => match items {
                [_, n] => domain_name = Some(ident(n)?),
                _ => return Err(expected(s.pos(), "(:domain <name>)")),
            },
            ":requirements" => {}
            ":objects" => {
                objects = typed_list(&items[1..], ident)?
                    .into_iter()
                    .map(|(name, ty)| TypedObject { name, ty })
                    .collect();
            }
            ":init" => init = init_atoms(&items[1..])?,
            ":goal" => goal = Some(goal_condition(&items[1..], s.pos())?),
            ":metric" | ":constraints" => {
                return Err(unsupported(s.pos(), format!("{head} section")));
            }
            other => {
                return Err(expected(s.pos(), format!("a known problem section, found {other}")))
            }
        }
    }

    Ok(Problem {
        name,
        domain_name: domain_name.ok_or_else(|| expected(root.pos(), "a (:domain <name>) section"))?,
        objects,
        init,
        goal: goal.ok_or_else(|| expected(root.pos(), "a (:goal ...) section"))?,
    })
}

/// Reads a standalone `(:init ...)` section.
pub fn parse_init_section(text: &str) -> Result<BTreeSet<Atom>, PddlError> {
    let e = read_one(text)?;
    let items = list(&e, "(:init ...)")?;
    if e.head().as_deref() != Some(":init") {
        return Err(expected(e.pos(), "(:init ...)"));
    }
    init_atoms(&items[1..])
}

/// Reads a `(:goal ...)` section or a bare goal condition.
pub fn parse_goal_section(text: &str) -> Result<Condition, PddlError> {
    let e = read_one(text)?;
    if e.head().as_deref() == Some(":goal") {
        let items = list(&e, "(:goal ...)")?;
        goal_condition(&items[1..], e.pos())
    } else {
        let mut goal = Condition::new();
        condition(&e, false, &mut goal)?;
        Ok(goal)
    }
}

/// Reads a plan file: one `(action arg ...)` per line; `;` comments ignored.
pub fn parse_plan(text: &str) -> Result<Plan, PddlError> {
    let exprs = super::sexpr::read_all(text)?;
    let mut steps = Vec::new();
    for e in &exprs {
        let items = list(e, "a plan step")?;
        let (head, args) = items
            .split_first()
            .ok_or_else(|| expected(e.pos(), "an action name"))?;
        steps.push(GroundAction {
            schema: ident(head)?,
            args: args.iter().map(ident).collect::<Result<_, _>>()?,
        });
    }
    Ok(Plan { steps })
}
