//! Bundles of ground-truth cases per domain, their verification, and
//! seeded generators for Blocksworld and Tower of Hanoi cases.
//!
//! Layout of a bundle directory:
//!
//! ```text
//! <bundle>/domain.pddl
//! <bundle>/knowledge.json
//! <bundle>/examples/<id>/{instruction.txt, scene.json, problem.pddl}   (optional)
//! <bundle>/problems/<id>/{instruction.txt, scene.json, problem.pddl}
//! ```

mod generate;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::pddl::{parse_domain, parse_problem, print_domain, print_problem, Domain, PddlError, Problem};
use crate::planner::{plan, render_planner_error, validate_plan, Outcome, PlannerError, SearchConfig};
use crate::scene::{detections_to_objects, DomainKnowledge, SceneAnnotation, SceneError};
use crate::validator::{render_error, validate};

pub use generate::{
    blocksworld_knowledge, generate_blocksworld_case, generate_hanoi_case, hanoi_canonical_case,
    hanoi_knowledge, optimal_length, GeneratorError, BLOCK_COLORS, DISK_COLORS, HANOI_INSTRUCTION,
};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("bundle layout: missing {0}")]
    Layout(PathBuf),
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: PddlError },
    #[error("{path}: {source}")]
    Scene { path: PathBuf, source: SceneError },
    #[error("{path}: {message}")]
    Json { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("case id `{0}` is not in the bundle")]
    UnknownCase(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemCase {
    pub id: String,
    pub instruction: String,
    pub scene: SceneAnnotation,
    pub ground_truth: Problem,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainBundle {
    pub domain: Domain,
    pub knowledge: DomainKnowledge,
    pub cases: Vec<ProblemCase>,
    /// Cases from `examples/`, usable only as few-shot examples.
    pub examples: Vec<ProblemCase>,
}

impl DomainBundle {
    pub fn case(&self, id: &str) -> Option<&ProblemCase> {
        self.cases.iter().find(|c| c.id == id)
    }

    /// The few-shot pool named by the knowledge file, in that order.
    pub fn example_pool(&self) -> Result<Vec<ProblemCase>, DatasetError> {
        self.knowledge
            .example_pool
            .iter()
            .map(|id| {
                self.examples
                    .iter()
                    .chain(&self.cases)
                    .find(|c| &c.id == id)
                    .cloned()
                    .ok_or_else(|| DatasetError::UnknownCase(id.clone()))
            })
            .collect()
    }
}

fn read(path: &Path) -> Result<String, DatasetError> {
    if !path.exists() {
        return Err(DatasetError::Layout(path.to_path_buf()));
    }
    std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_case(dir: &Path) -> Result<ProblemCase, DatasetError> {
    let id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let instruction = read(&dir.join("instruction.txt"))?.trim().to_string();
    let scene_path = dir.join("scene.json");
    let scene = SceneAnnotation::from_json(&read(&scene_path)?).map_err(|source| DatasetError::Scene {
        path: scene_path,
        source,
    })?;
    let problem_path = dir.join("problem.pddl");
    let ground_truth = parse_problem(&read(&problem_path)?).map_err(|source| DatasetError::Parse {
        path: problem_path,
        source,
    })?;
    Ok(ProblemCase {
        id,
        instruction,
        scene,
        ground_truth,
    })
}

fn load_cases(dir: &Path) -> Result<Vec<ProblemCase>, DatasetError> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|source| DatasetError::Io {
            path: dir.to_path_buf(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    dirs.iter().map(|d| load_case(d)).collect()
}

pub fn load_bundle(dir: &Path) -> Result<DomainBundle, DatasetError> {
    let domain_path = dir.join("domain.pddl");
    let domain = parse_domain(&read(&domain_path)?).map_err(|source| DatasetError::Parse {
        path: domain_path,
        source,
    })?;
    let knowledge_path = dir.join("knowledge.json");
    let knowledge: DomainKnowledge =
        serde_json::from_str(&read(&knowledge_path)?).map_err(|e| DatasetError::Json {
            path: knowledge_path.clone(),
            message: e.to_string(),
        })?;
    knowledge.check().map_err(|source| DatasetError::Scene {
        path: knowledge_path,
        source,
    })?;
    let problems = dir.join("problems");
    if !problems.is_dir() {
        return Err(DatasetError::Layout(problems));
    }
    let cases = load_cases(&problems)?;
    let examples_dir = dir.join("examples");
    let examples = if examples_dir.is_dir() {
        load_cases(&examples_dir)?
    } else {
        Vec::new()
    };
    Ok(DomainBundle {
        domain,
        knowledge,
        cases,
        examples,
    })
}

fn write(path: &Path, text: &str) -> Result<(), DatasetError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| DatasetError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_case(dir: &Path, case: &ProblemCase) -> Result<(), DatasetError> {
    write(&dir.join("instruction.txt"), &format!("{}\n", case.instruction))?;
    let scene = serde_json::to_string_pretty(&case.scene).expect("scenes serialize");
    write(&dir.join("scene.json"), &format!("{scene}\n"))?;
    write(&dir.join("problem.pddl"), &print_problem(&case.ground_truth))
}

/// Writes a bundle in the layout [`load_bundle`] reads.
pub fn write_bundle(dir: &Path, bundle: &DomainBundle) -> Result<(), DatasetError> {
    write(&dir.join("domain.pddl"), &print_domain(&bundle.domain))?;
    let knowledge = serde_json::to_string_pretty(&bundle.knowledge).expect("knowledge serializes");
    write(&dir.join("knowledge.json"), &format!("{knowledge}\n"))?;
    for c in &bundle.cases {
        write_case(&dir.join("problems").join(&c.id), c)?;
    }
    for c in &bundle.examples {
        write_case(&dir.join("examples").join(&c.id), c)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseFailure {
    pub case_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checked: usize,
    pub failures: Vec<CaseFailure>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Why a case fails verification, if it does.
pub fn verify_case(
    domain: &Domain,
    knowledge: &DomainKnowledge,
    case: &ProblemCase,
    search: &SearchConfig,
) -> Option<String> {
    let report = validate(domain, &case.ground_truth);
    if !report.ok() {
        return Some(render_error(&report).expect("report has issues"));
    }
    let result = match plan(domain, &case.ground_truth, search) {
        Ok(r) => r,
        Err(PlannerError::ValidationRequired(_)) => unreachable!("validated above"),
        Err(e) => return Some(e.to_string()),
    };
    let Outcome::Solved(p) = &result.outcome else {
        return Some(render_planner_error(&result).expect("not solved"));
    };
    match validate_plan(domain, &case.ground_truth, p) {
        Ok(v) if v.is_valid() => {}
        Ok(v) => return Some(v.to_string()),
        Err(e) => return Some(e.to_string()),
    }
    match detections_to_objects(&case.scene, knowledge) {
        Ok(objects) => {
            let mut got: Vec<_> = objects.iter().map(|o| (&o.name, &o.ty)).collect();
            let mut want: Vec<_> = case.ground_truth.objects.iter().map(|o| (&o.name, &o.ty)).collect();
            got.sort();
            want.sort();
            if got != want {
                return Some("scene annotation does not reproduce the problem's objects".into());
            }
        }
        Err(e) => return Some(format!("scene annotation: {e}")),
    }
    None
}

/// Validates, solves and plan-checks every case, and checks that each
/// scene annotation names exactly the problem's objects.
pub fn verify_bundle(bundle: &DomainBundle, search: &SearchConfig) -> VerifyReport {
    let all: Vec<&ProblemCase> = bundle.cases.iter().chain(&bundle.examples).collect();
    let mut report = VerifyReport {
        checked: all.len(),
        ..VerifyReport::default()
    };
    if all.is_empty() {
        report.warnings.push("bundle has no cases".into());
        return report;
    }
    let reasons = crate::par::map(&all, |c| verify_case(&bundle.domain, &bundle.knowledge, c, search));
    for (case, reason) in all.iter().zip(reasons) {
        if let Some(reason) = reason {
            report.failures.push(CaseFailure {
                case_id: case.id.clone(),
                reason,
            });
        }
    }
    report
}

/// Directory of a bundle shipped with this crate.
pub fn shipped_bundle_dir(domain: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(domain)
}

pub const SHIPPED_DOMAINS: [&str; 3] = ["cooking", "blocksworld", "hanoi"];
