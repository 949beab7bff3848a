//! Batch scores for generated problems: R_syntax, R_plan, per-part
//! recall R_part (objects, init, goal) and R_all.

mod table;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::par::{self, Strategy};
use crate::pddl::{flatten_goal, parse_problem, Domain, Name, Problem};
use crate::pipeline::GenerationRecord;
use crate::planner::{plan, render_planner_error, validate_plan, Outcome, SearchConfig};
use crate::validator::validate;

pub use table::render_table;

/// Bumped when the structured report layout changes.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("cannot score an empty batch")]
    EmptyBatch,
    #[error("ground truth has an empty {0} part")]
    EmptyGroundTruthPart(Part),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Part {
    O,
    I,
    G,
}

impl Part {
    pub const ALL: [Part; 3] = [Part::O, Part::I, Part::G];
}

impl std::fmt::Display for Part {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Part::O => "objects",
            Part::I => "init",
            Part::G => "goal",
        })
    }
}

/// One generated problem paired with its ground truth.
#[derive(Debug, Clone)]
pub struct EvalItem {
    pub case_id: String,
    /// Final problem text of the run; `None` when the run produced none.
    pub generated: Option<String>,
    pub ground_truth: Problem,
    pub domain: Domain,
}

impl EvalItem {
    pub fn from_record(record: &GenerationRecord, ground_truth: Problem, domain: Domain) -> Self {
        EvalItem {
            case_id: record.input.case_id.clone(),
            generated: record.final_text().map(str::to_string),
            ground_truth,
            domain,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PartRatios {
    #[serde(rename = "O")]
    pub o: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "G")]
    pub g: f64,
}

impl PartRatios {
    pub fn get(&self, part: Part) -> f64 {
        match part {
            Part::O => self.o,
            Part::I => self.i,
            Part::G => self.g,
        }
    }

    fn set(&mut self, part: Part, v: f64) {
        match part {
            Part::O => self.o = v,
            Part::I => self.i = v,
            Part::G => self.g = v,
        }
    }
}

/// Per-item breakdown row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemScore {
    pub case_id: String,
    pub parsed: bool,
    pub syntax_valid: bool,
    pub plan_valid: bool,
    /// Why planning did not produce a checked plan, when syntax was fine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_failure: Option<String>,
    pub recall: PartRatios,
    pub contains_all: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub items: usize,
    pub r_syntax: f64,
    pub r_plan: f64,
    pub r_part: PartRatios,
    pub r_all: f64,
    pub per_item: Vec<ItemScore>,
}

fn object_names(p: &Problem) -> BTreeSet<&Name> {
    p.objects.iter().map(|o| &o.name).collect()
}

fn fraction_covered<T: Ord>(generated: &BTreeSet<T>, gt: &BTreeSet<T>) -> f64 {
    gt.intersection(generated).count() as f64 / gt.len() as f64
}

/// Fraction of the ground truth's `part` found in `generated`. Objects
/// match by name only; init atoms and goal literals match exactly.
pub fn recall_part(generated: &Problem, gt: &Problem, part: Part) -> Result<f64, MetricsError> {
    let r = match part {
        Part::O => {
            let want = object_names(gt);
            if want.is_empty() {
                return Err(MetricsError::EmptyGroundTruthPart(part));
            }
            fraction_covered(&object_names(generated), &want)
        }
        Part::I => {
            if gt.init.is_empty() {
                return Err(MetricsError::EmptyGroundTruthPart(part));
            }
            fraction_covered(&generated.init, &gt.init)
        }
        Part::G => {
            let want = flatten_goal(gt);
            if want.is_empty() {
                return Err(MetricsError::EmptyGroundTruthPart(part));
            }
            fraction_covered(&flatten_goal(generated), &want)
        }
    };
    Ok(r)
}

fn contains_all(generated: &Problem, gt: &Problem) -> bool {
    object_names(generated).is_superset(&object_names(gt))
        && generated.init.is_superset(&gt.init)
        && flatten_goal(generated).is_superset(&flatten_goal(gt))
}

pub fn score_item(item: &EvalItem, search: &SearchConfig) -> ItemScore {
    let mut score = ItemScore {
        case_id: item.case_id.clone(),
        parsed: false,
        syntax_valid: false,
        plan_valid: false,
        plan_failure: None,
        recall: PartRatios::default(),
        contains_all: false,
        warnings: Vec::new(),
    };
    let Some(problem) = item.generated.as_deref().and_then(|t| parse_problem(t).ok()) else {
        return score;
    };
    score.parsed = true;
    for part in Part::ALL {
        let r = match recall_part(&problem, &item.ground_truth, part) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("{}: {e}; recall taken as 1", item.case_id);
                score.warnings.push(e.to_string());
                1.0
            }
        };
        score.recall.set(part, r);
    }
    score.contains_all = contains_all(&problem, &item.ground_truth);
    score.syntax_valid = validate(&item.domain, &problem).ok();
    if !score.syntax_valid {
        return score;
    }
    match plan(&item.domain, &problem, search) {
        Ok(result) => match &result.outcome {
            Outcome::Solved(p) => match validate_plan(&item.domain, &problem, p) {
                Ok(v) if v.is_valid() => score.plan_valid = true,
                Ok(v) => score.plan_failure = Some(v.to_string()),
                Err(e) => score.plan_failure = Some(e.to_string()),
            },
            Outcome::Timeout { .. } => {
                let msg = render_planner_error(&result).expect("not solved");
                log::warn!("{}: {msg}", item.case_id);
                score.plan_failure = Some(msg);
            }
            _ => score.plan_failure = render_planner_error(&result).ok(),
        },
        Err(e) => score.plan_failure = Some(e.to_string()),
    }
    score
}

fn mean(scores: &[ItemScore], f: impl Fn(&ItemScore) -> f64) -> Result<f64, MetricsError> {
    if scores.is_empty() {
        return Err(MetricsError::EmptyBatch);
    }
    Ok(scores.iter().map(f).sum::<f64>() / scores.len() as f64)
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn r_syntax(scores: &[ItemScore]) -> Result<f64, MetricsError> {
    mean(scores, |s| indicator(s.syntax_valid))
}

pub fn r_plan(scores: &[ItemScore]) -> Result<f64, MetricsError> {
    mean(scores, |s| indicator(s.syntax_valid && s.plan_valid))
}

/// Macro-average of per-item recall; unparsable items count as 0.
pub fn r_part(scores: &[ItemScore], part: Part) -> Result<f64, MetricsError> {
    mean(scores, |s| if s.parsed { s.recall.get(part) } else { 0.0 })
}

pub fn r_all(scores: &[ItemScore]) -> Result<f64, MetricsError> {
    mean(scores, |s| indicator(s.parsed && s.contains_all))
}

impl MetricsReport {
    pub fn from_scores(per_item: Vec<ItemScore>) -> Result<Self, MetricsError> {
        let mut r_part_all = PartRatios::default();
        for part in Part::ALL {
            r_part_all.set(part, r_part(&per_item, part)?);
        }
        Ok(MetricsReport {
            schema_version: REPORT_SCHEMA_VERSION,
            items: per_item.len(),
            r_syntax: r_syntax(&per_item)?,
            r_plan: r_plan(&per_item)?,
            r_part: r_part_all,
            r_all: r_all(&per_item)?,
            per_item,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

pub fn evaluate_batch_with(
    strategy: Strategy,
    items: &[EvalItem],
    search: &SearchConfig,
) -> Result<MetricsReport, MetricsError> {
    if items.is_empty() {
        return Err(MetricsError::EmptyBatch);
    }
    MetricsReport::from_scores(par::map_with(strategy, items, |it| score_item(it, search)))
}

pub fn evaluate_batch(items: &[EvalItem], search: &SearchConfig) -> Result<MetricsReport, MetricsError> {
    evaluate_batch_with(Strategy::default(), items, search)
}

#[cfg(test)]
mod tests;
