use std::collections::{HashMap, HashSet};

use crate::pddl::{ActionSchema, Atom, Domain, GroundAction, Name, Problem, Term};
use crate::validator::validate;

use super::state::FactSet;
use super::PlannerError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundedAction {
    pub pre: Vec<usize>,
    /// Facts that must be false. Facts never in the universe are omitted.
    pub pre_neg: Vec<usize>,
    pub add: Vec<usize>,
    pub del: Vec<usize>,
    pub source: GroundAction,
}

/// Propositional task: fact universe, initial state, goal facts and the
/// ground actions. Immutable once built.
#[derive(Debug, Clone)]
pub struct GroundTask {
    facts: Vec<Atom>,
    index: HashMap<Atom, usize>,
    pub init: FactSet,
    pub goal: Vec<usize>,
    pub actions: Vec<GroundedAction>,
}

impl GroundTask {
    pub fn facts(&self) -> &[Atom] {
        &self.facts
    }

    pub fn fact(&self, i: usize) -> &Atom {
        &self.facts[i]
    }

    pub fn fact_index(&self, atom: &Atom) -> Option<usize> {
        self.index.get(atom).copied()
    }

    pub fn is_goal(&self, state: &FactSet) -> bool {
        state.contains_all(&self.goal)
    }

    pub fn applicable(&self, action: &GroundedAction, state: &FactSet) -> bool {
        state.contains_all(&action.pre) && state.contains_none(&action.pre_neg)
    }

    pub fn apply(&self, action: &GroundedAction, state: &FactSet) -> FactSet {
        let mut next = state.clone();
        for &f in &action.del {
            next.remove(f);
        }
        for &f in &action.add {
            next.insert(f);
        }
        next
    }

    pub fn goal_atoms(&self) -> Vec<Atom> {
        self.goal.iter().map(|&g| self.facts[g].clone()).collect()
    }

    fn intern(&mut self, atom: Atom) -> usize {
        if let Some(&i) = self.index.get(&atom) {
            return i;
        }
        let i = self.facts.len();
        self.index.insert(atom.clone(), i);
        self.facts.push(atom);
        i
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundingOptions {
    /// Drop actions whose preconditions are unreachable when deletes are ignored.
    pub prune_unreachable: bool,
    /// Bind distinct objects to distinct parameters of one action.
    pub distinct_params: bool,
}

impl Default for GroundingOptions {
    fn default() -> Self {
        GroundingOptions {
            prune_unreachable: true,
            distinct_params: true,
        }
    }
}

pub fn ground(domain: &Domain, problem: &Problem) -> Result<GroundTask, PlannerError> {
    ground_with(domain, problem, GroundingOptions::default())
}

struct Candidate {
    pre: Vec<Atom>,
    pre_neg: Vec<Atom>,
    add: Vec<Atom>,
    del: Vec<Atom>,
    source: GroundAction,
}

fn bind(atom: &Atom, params: &[Name], binding: &[&Name]) -> Atom {
    let args = atom
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => {
                let i = params.iter().position(|p| p == v).expect("parse checks variables");
                Term::Const(binding[i].clone())
            }
            Term::Const(c) => Term::Const(c.clone()),
        })
        .collect();
    Atom::new(atom.predicate.clone(), args)
}

/// Largest parameter index an atom mentions, if any.
fn last_param(atom: &Atom, params: &[Name]) -> Option<usize> {
    atom.args
        .iter()
        .filter_map(|t| match t {
            Term::Var(v) => params.iter().position(|p| p == v),
            Term::Const(_) => None,
        })
        .max()
}

struct SchemaGrounder<'a> {
    schema: &'a ActionSchema,
    params: Vec<Name>,
    domains: Vec<Vec<&'a Name>>,
    /// Static literals to test once parameter `i` is bound, indexed by `i + 1`
    /// (slot 0 holds literals without variables).
    checks: Vec<Vec<(&'a Atom, bool)>>,
    init: &'a HashSet<Atom>,
    distinct: bool,
}

impl<'a> SchemaGrounder<'a> {
    fn holds(&self, binding: &[&Name], slot: usize) -> bool {
        self.checks[slot].iter().all(|(atom, negated)| {
            self.init.contains(&bind(atom, &self.params, binding)) != *negated
        })
    }

    fn enumerate(&self, binding: &mut Vec<&'a Name>, out: &mut Vec<Vec<&'a Name>>) {
        let k = binding.len();
        if k == self.params.len() {
            out.push(binding.clone());
            return;
        }
        for &obj in &self.domains[k] {
            if self.distinct && binding.contains(&obj) {
                continue;
            }
            binding.push(obj);
            if self.holds(binding, k + 1) {
                self.enumerate(binding, out);
            }
            binding.pop();
        }
    }
}

/// Grounds `problem` over `domain`. Requires a clean validation report.
pub fn ground_with(
    domain: &Domain,
    problem: &Problem,
    opts: GroundingOptions,
) -> Result<GroundTask, PlannerError> {
    let report = validate(domain, problem);
    if !report.ok() {
        return Err(PlannerError::ValidationRequired(report));
    }

    let fluent: HashSet<&Name> = domain
        .actions
        .iter()
        .flat_map(|a| a.add.iter().chain(&a.del))
        .map(|a| &a.predicate)
        .collect();
    let init: HashSet<Atom> = problem.init.iter().cloned().collect();

    let mut candidates = Vec::new();
    for schema in &domain.actions {
        let params: Vec<Name> = schema.params.iter().map(|p| p.var.clone()).collect();
        let domains: Vec<Vec<&Name>> = schema
            .params
            .iter()
            .map(|p| {
                problem
                    .objects
                    .iter()
                    .filter(|o| domain.is_subtype(&o.ty, &p.ty).unwrap_or(false))
                    .map(|o| &o.name)
                    .collect()
            })
            .collect();
        let mut checks = vec![Vec::new(); params.len() + 1];
        for l in schema.precondition.literals() {
            if !fluent.contains(&l.atom.predicate) {
                let slot = last_param(&l.atom, &params).map_or(0, |i| i + 1);
                checks[slot].push((&l.atom, l.negated));
            }
        }
        let grounder = SchemaGrounder {
            schema,
            params,
            domains,
            checks,
            init: &init,
            distinct: opts.distinct_params,
        };
        if !grounder.holds(&[], 0) {
            continue;
        }
        let mut bindings = Vec::new();
        grounder.enumerate(&mut Vec::new(), &mut bindings);

        for binding in bindings {
            let b = |a: &Atom| bind(a, &grounder.params, &binding);
            let mut c = Candidate {
                pre: Vec::new(),
                pre_neg: Vec::new(),
                add: grounder.schema.add.iter().map(b).collect(),
                del: Vec::new(),
                source: GroundAction {
                    schema: grounder.schema.name.clone(),
                    args: binding.iter().map(|n| (*n).clone()).collect(),
                },
            };
            for l in grounder.schema.precondition.literals() {
                if !fluent.contains(&l.atom.predicate) {
                    continue;
                }
                let atom = b(&l.atom);
                if l.negated {
                    c.pre_neg.push(atom);
                } else {
                    c.pre.push(atom);
                }
            }
            // Delete-then-add: an atom both deleted and added stays true.
            c.del = grounder
                .schema
                .del
                .iter()
                .map(b)
                .filter(|a| !c.add.contains(a))
                .collect();
            candidates.push(c);
        }
    }

    if opts.prune_unreachable {
        candidates = prune(candidates, &init);
    }

    let mut task = GroundTask {
        facts: Vec::new(),
        index: HashMap::new(),
        init: FactSet::default(),
        goal: Vec::new(),
        actions: Vec::new(),
    };
    let init_idx: Vec<usize> = problem.init.iter().map(|a| task.intern(a.clone())).collect();
    let mut negs = Vec::with_capacity(candidates.len());
    for c in candidates {
        let pre = c.pre.into_iter().map(|a| task.intern(a)).collect();
        let add = c.add.into_iter().map(|a| task.intern(a)).collect();
        let del = c.del.into_iter().map(|a| task.intern(a)).collect();
        negs.push(c.pre_neg);
        task.actions.push(GroundedAction {
            pre,
            pre_neg: Vec::new(),
            add,
            del,
            source: c.source,
        });
    }
    task.goal = problem
        .goal
        .atoms()
        .map(|a| task.intern(a.clone()))
        .collect();
    // Facts outside the finished universe are never true.
    for (action, neg) in task.actions.iter_mut().zip(negs) {
        action.pre_neg = neg.iter().filter_map(|a| task.index.get(a).copied()).collect();
    }
    let mut init_set = FactSet::with_capacity(task.facts.len());
    for i in init_idx {
        init_set.insert(i);
    }
    task.init = init_set;
    Ok(task)
}

/// Keeps candidates whose positive preconditions are reachable from `init`
/// under the delete relaxation.
fn prune(candidates: Vec<Candidate>, init: &HashSet<Atom>) -> Vec<Candidate> {
    let mut reached: HashSet<&Atom> = init.iter().collect();
    let mut fired = vec![false; candidates.len()];
    loop {
        let mut changed = false;
        for (i, c) in candidates.iter().enumerate() {
            if !fired[i] && c.pre.iter().all(|a| reached.contains(a)) {
                fired[i] = true;
                changed = true;
                reached.extend(c.add.iter());
            }
        }
        if !changed {
            break;
        }
    }
    candidates
        .into_iter()
        .zip(fired)
        .filter_map(|(c, f)| f.then_some(c))
        .collect()
}
