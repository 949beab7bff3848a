use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::time::{Duration, Instant};

use crate::pddl::Plan;

use super::ground::GroundTask;
use super::heuristic::{evaluate, RelaxedGraph};
use super::state::FactSet;
use super::{Algorithm, Outcome, PlannerError, PlannerResult, SearchConfig, SearchStats};

struct Node {
    state: FactSet,
    parent: Option<(usize, usize)>,
    g: u32,
}

struct Search<'a> {
    task: &'a GroundTask,
    config: &'a SearchConfig,
    start: Instant,
    nodes: Vec<Node>,
    seen: HashMap<FactSet, usize>,
    stats: SearchStats,
}

enum Stop {
    Timeout,
    Limit,
}

impl<'a> Search<'a> {
    fn new(task: &'a GroundTask, config: &'a SearchConfig, start: Instant) -> Self {
        Search {
            task,
            config,
            start,
            nodes: Vec::new(),
            seen: HashMap::new(),
            stats: SearchStats::default(),
        }
    }

    fn add_node(&mut self, state: FactSet, parent: Option<(usize, usize)>, g: u32) -> usize {
        let id = self.nodes.len();
        self.seen.insert(state.clone(), id);
        self.nodes.push(Node { state, parent, g });
        id
    }

    fn tick(&mut self) -> Result<(), Stop> {
        self.stats.expansions += 1;
        if self.stats.expansions > self.config.max_expansions {
            return Err(Stop::Limit);
        }
        if self.start.elapsed() >= self.config.timeout {
            return Err(Stop::Timeout);
        }
        Ok(())
    }

    fn plan_to(&self, mut id: usize) -> Plan {
        let mut steps = Vec::new();
        while let Some((parent, action)) = self.nodes[id].parent {
            steps.push(self.task.actions[action].source.clone());
            id = parent;
        }
        steps.reverse();
        Plan { steps }
    }

    /// Successors of a node in ground-action index order.
    fn successors(&self, id: usize) -> Vec<(usize, FactSet)> {
        let state = &self.nodes[id].state;
        self.task
            .actions
            .iter()
            .enumerate()
            .filter(|(_, a)| self.task.applicable(a, state))
            .map(|(i, a)| (i, self.task.apply(a, state)))
            .collect()
    }

    fn finish(mut self, outcome: Result<Option<usize>, Stop>) -> PlannerResult {
        self.stats.elapsed = self.start.elapsed();
        self.stats.generated = self.nodes.len() as u64;
        let outcome = match outcome {
            Ok(Some(id)) => Outcome::Solved(self.plan_to(id)),
            Ok(None) => Outcome::Unsolvable {
                goal: self.task.goal_atoms(),
            },
            Err(Stop::Timeout) => Outcome::Timeout {
                after: self.config.timeout,
            },
            Err(Stop::Limit) => Outcome::ExpansionLimit {
                expansions: self.config.max_expansions,
            },
        };
        PlannerResult {
            outcome,
            stats: self.stats,
        }
    }

    fn bfs(&mut self) -> Result<Option<usize>, Stop> {
        let root = self.add_node(self.task.init.clone(), None, 0);
        if self.task.is_goal(&self.nodes[root].state) {
            return Ok(Some(root));
        }
        let mut queue = VecDeque::from([root]);
        while let Some(id) = queue.pop_front() {
            self.tick()?;
            let g = self.nodes[id].g + 1;
            for (action, state) in self.successors(id) {
                if self.seen.contains_key(&state) {
                    continue;
                }
                let goal = self.task.is_goal(&state);
                let child = self.add_node(state, Some((id, action)), g);
                if goal {
                    return Ok(Some(child));
                }
                queue.push_back(child);
            }
        }
        Ok(None)
    }

    fn best_first(&mut self, greedy: bool) -> Result<Option<usize>, Stop> {
        let (task, heuristic) = (self.task, self.config.heuristic);
        let graph = RelaxedGraph::new(task);
        let h = |state: &FactSet| evaluate(task, &graph, state, heuristic);
        let mut open: BinaryHeap<Reverse<(u32, u64, usize)>> = BinaryHeap::new();
        let mut seq = 0u64;

        let init = self.task.init.clone();
        let Some(h0) = h(&init) else {
            return Ok(None);
        };
        let root = self.add_node(init, None, 0);
        if greedy && self.task.is_goal(&self.nodes[root].state) {
            return Ok(Some(root));
        }
        open.push(Reverse((h0, seq, root)));
        let mut hs: Vec<u32> = vec![h0];

        while let Some(Reverse((priority, _, id))) = open.pop() {
            let g = self.nodes[id].g;
            if !greedy {
                // Skip entries superseded by a cheaper path.
                if priority != g + hs[id] {
                    continue;
                }
                if self.task.is_goal(&self.nodes[id].state) {
                    return Ok(Some(id));
                }
            }
            self.tick()?;
            for (action, state) in self.successors(id) {
                let child_g = g + 1;
                let child = match self.seen.entry(state) {
                    Entry::Occupied(e) => {
                        let cid = *e.get();
                        if greedy || child_g >= self.nodes[cid].g {
                            continue;
                        }
                        self.nodes[cid].g = child_g;
                        self.nodes[cid].parent = Some((id, action));
                        cid
                    }
                    Entry::Vacant(e) => {
                        let state = e.key().clone();
                        let Some(hv) = h(&state) else {
                            // Relaxed dead end; remember it so it is not re-evaluated.
                            let cid = self.nodes.len();
                            e.insert(cid);
                            self.nodes.push(Node {
                                state,
                                parent: None,
                                g: u32::MAX,
                            });
                            hs.push(u32::MAX);
                            continue;
                        };
                        let cid = self.nodes.len();
                        e.insert(cid);
                        self.nodes.push(Node {
                            state,
                            parent: Some((id, action)),
                            g: child_g,
                        });
                        hs.push(hv);
                        cid
                    }
                };
                if hs[child] == u32::MAX {
                    continue;
                }
                if greedy && self.task.is_goal(&self.nodes[child].state) {
                    return Ok(Some(child));
                }
                seq += 1;
                let priority = if greedy { hs[child] } else { child_g + hs[child] };
                open.push(Reverse((priority, seq, child)));
            }
        }
        Ok(None)
    }
}

/// Searches the task for a plan from its initial state.
pub fn solve(task: &GroundTask, config: &SearchConfig) -> Result<PlannerResult, PlannerError> {
    solve_since(task, config, Instant::now())
}

/// Like [`solve`], with the time budget counted from `start`.
pub(crate) fn solve_since(task: &GroundTask, config: &SearchConfig, start: Instant) -> Result<PlannerResult, PlannerError> {
    config.check()?;
    let mut search = Search::new(task, config, start);
    let outcome = match config.algorithm {
        Algorithm::Bfs => search.bfs(),
        Algorithm::Astar => search.best_first(false),
        Algorithm::Gbfs => search.best_first(true),
    };
    Ok(search.finish(outcome))
}

pub(crate) fn format_duration(d: Duration) -> String {
    if d.subsec_nanos() == 0 {
        format!("{}s", d.as_secs())
    } else if d.as_nanos().is_multiple_of(1_000_000) {
        format!("{}ms", d.as_millis())
    } else {
        format!("{}us", d.as_micros())
    }
}
