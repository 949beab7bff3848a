//! Delete-relaxation heuristics (h^max, h^add) and goal counting.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::ground::GroundTask;
use super::state::FactSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    Hmax,
    Hadd,
    GoalCount,
}

const INF: u32 = u32::MAX;

/// Precomputed precondition → action adjacency for relaxed exploration.
pub(crate) struct RelaxedGraph {
    pre_of: Vec<Vec<usize>>,
    pre_len: Vec<u32>,
    no_pre: Vec<usize>,
}

impl RelaxedGraph {
    pub(crate) fn new(task: &GroundTask) -> Self {
        let mut pre_of = vec![Vec::new(); task.facts().len()];
        let mut no_pre = Vec::new();
        let mut pre_len = Vec::with_capacity(task.actions.len());
        for (i, a) in task.actions.iter().enumerate() {
            for &f in &a.pre {
                pre_of[f].push(i);
            }
            if a.pre.is_empty() {
                no_pre.push(i);
            }
            pre_len.push(a.pre.len() as u32);
        }
        RelaxedGraph {
            pre_of,
            pre_len,
            no_pre,
        }
    }
}

/// Heuristic estimate for `state`; `None` marks a relaxed dead end.
pub(crate) fn evaluate(
    task: &GroundTask,
    graph: &RelaxedGraph,
    state: &FactSet,
    kind: Heuristic,
) -> Option<u32> {
    match kind {
        Heuristic::GoalCount => {
            Some(task.goal.iter().filter(|&&g| !state.contains(g)).count() as u32)
        }
        Heuristic::Hmax | Heuristic::Hadd => relaxed(task, graph, state, kind == Heuristic::Hadd),
    }
}

/// Generalized Dijkstra over the relaxed task with unit action costs.
fn relaxed(task: &GroundTask, graph: &RelaxedGraph, state: &FactSet, additive: bool) -> Option<u32> {
    let n = task.facts().len();
    let mut cost = vec![INF; n];
    let mut done = vec![false; n];
    let mut remaining = graph.pre_len.clone();
    let mut acc = vec![0u32; task.actions.len()];
    let mut heap = BinaryHeap::new();

    for f in state.iter().filter(|&f| f < n) {
        cost[f] = 0;
        heap.push(Reverse((0u32, f)));
    }
    let fire = |a: usize, base: u32, cost: &mut Vec<u32>, heap: &mut BinaryHeap<Reverse<(u32, usize)>>| {
        let c = base.saturating_add(1);
        for &f in &task.actions[a].add {
            if c < cost[f] {
                cost[f] = c;
                heap.push(Reverse((c, f)));
            }
        }
    };
    for &a in &graph.no_pre {
        fire(a, 0, &mut cost, &mut heap);
    }

    let mut is_goal = vec![false; n];
    for &g in &task.goal {
        is_goal[g] = true;
    }
    let mut goals_left = is_goal.iter().filter(|&&g| g).count();
    while let Some(Reverse((c, f))) = heap.pop() {
        if done[f] || c > cost[f] {
            continue;
        }
        done[f] = true;
        if is_goal[f] {
            goals_left -= 1;
            if goals_left == 0 {
                // Every goal cost is final once popped.
                break;
            }
        }
        for &a in &graph.pre_of[f] {
            acc[a] = if additive {
                acc[a].saturating_add(c)
            } else {
                acc[a].max(c)
            };
            remaining[a] -= 1;
            if remaining[a] == 0 {
                fire(a, acc[a], &mut cost, &mut heap);
            }
        }
    }

    let mut total = 0u32;
    for &g in &task.goal {
        let c = cost[g];
        if c == INF {
            return None;
        }
        total = if additive { total.saturating_add(c) } else { total.max(c) };
    }
    Some(total)
}
