//! Grounding, heuristic forward search and plan simulation.
//!
//! A search runs single-threaded; distinct tasks can be solved from as many
//! threads as needed since a [`GroundTask`] is never mutated after grounding.

mod ground;
mod heuristic;
mod search;
mod simulate;
mod state;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::pddl::{Atom, Domain, Name, Plan, Problem};
use crate::validator::ValidationReport;

pub use ground::{ground, ground_with, GroundTask, GroundedAction, GroundingOptions};
pub use heuristic::Heuristic;
pub use search::solve;
pub use simulate::{validate_plan, PlanFailure, PlanValidation};
pub use state::FactSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlannerError {
    #[error("problem must validate before grounding ({} issue(s))", .0.issues().len())]
    ValidationRequired(ValidationReport),
    #[error("plan step uses unknown action `{0}`")]
    UnknownAction(Name),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("result is solved; there is no planner error to render")]
    NotAnError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bfs,
    Astar,
    Gbfs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub algorithm: Algorithm,
    pub heuristic: Heuristic,
    #[serde(with = "duration_ms", rename = "timeout_ms")]
    pub timeout: Duration,
    pub max_expansions: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            algorithm: Algorithm::Gbfs,
            heuristic: Heuristic::Hadd,
            timeout: Duration::from_secs(30),
            max_expansions: 5_000_000,
        }
    }
}

impl SearchConfig {
    pub fn bfs() -> Self {
        SearchConfig {
            algorithm: Algorithm::Bfs,
            ..Self::default()
        }
    }

    pub fn astar_hmax() -> Self {
        SearchConfig {
            algorithm: Algorithm::Astar,
            heuristic: Heuristic::Hmax,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<(), PlannerError> {
        if self.timeout.is_zero() {
            return Err(PlannerError::InvalidConfig("timeout must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Solved(Plan),
    Unsolvable {
        goal: Vec<Atom>,
    },
    Timeout {
        #[serde(with = "duration_ms", rename = "after_ms")]
        after: Duration,
    },
    /// The expansion budget ran out before the search finished.
    ExpansionLimit { expansions: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expansions: u64,
    pub generated: u64,
    /// Wall-clock time; left out of serialized records so they stay reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerResult {
    pub outcome: Outcome,
    pub stats: SearchStats,
}

impl PlannerResult {
    pub fn plan(&self) -> Option<&Plan> {
        match &self.outcome {
            Outcome::Solved(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_solved(&self) -> bool {
        self.plan().is_some()
    }
}

/// Grounds and solves in one step. Grounding counts against the timeout.
pub fn plan(
    domain: &Domain,
    problem: &Problem,
    config: &SearchConfig,
) -> Result<PlannerResult, PlannerError> {
    let start = std::time::Instant::now();
    config.check()?;
    let task = ground(domain, problem)?;
    search::solve_since(&task, config, start)
}

/// Error text for a failed search, as fed back to the model.
pub fn render_planner_error(result: &PlannerResult) -> Result<String, PlannerError> {
    match &result.outcome {
        Outcome::Solved(_) => Err(PlannerError::NotAnError),
        Outcome::Unsolvable { goal } => {
            let literals: Vec<String> = goal.iter().map(ToString::to_string).collect();
            Ok(format!(
                "unsolvable: goal {} unreachable from initial state",
                literals.join(" ")
            ))
        }
        Outcome::Timeout { after } => Ok(format!("timeout after {}", search::format_duration(*after))),
        Outcome::ExpansionLimit { expansions } => Ok(format!("search limit reached after {expansions} expansions")),
    }
}

pub(crate) mod duration_ms {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_millis)
    }
}
