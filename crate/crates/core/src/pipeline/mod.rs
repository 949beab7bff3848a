//! Problem generation: object, initial-state and goal estimation through
//! the model backends, assembly, and the corrective re-prompting loop.

mod examples;
mod extract;
mod templates;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::backends::{Backend, BackendError, CaptionRequest, ChatRequest, DetectionRequest, Message};
use crate::dataset::ProblemCase;
use crate::pddl::{
    parse_goal_section, parse_init_section, parse_problem, print_domain, print_goal, print_init,
    print_objects, print_problem, Atom, Condition, Domain, Name, Problem, TypedObject,
};
use crate::planner::{
    plan, render_planner_error, validate_plan, PlanValidation, PlannerError, PlannerResult, SearchConfig,
};
use crate::scene::{
    assign_names, build_query, filter_detections, DomainKnowledge, NamedDetection, SceneAnnotation,
    SceneError, DEFAULT_THRESHOLD,
};
use crate::validator::{render_error, validate, ValidationReport};

pub use examples::{combination_count, select_examples};
pub use extract::{extract_pddl_block, extract_with_heads, ANY_HEAD};
pub use templates::{render, Templates};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("no detection survived filtering")]
    EmptyScene,
    #[error("extraction failure: {0}")]
    ExtractionFailure(String),
    /// Model output that could not be turned into the expected section.
    #[error("{message}")]
    Unparsable { raw: String, message: String },
    #[error("example pool has {available} usable cases, {k} requested")]
    PoolTooSmall { available: usize, k: usize },
    #[error("template: {0}")]
    Template(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenerationMode {
    #[default]
    Modular,
    Whole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub k_examples: usize,
    pub max_corrections: usize,
    pub use_cot: bool,
    pub mode: GenerationMode,
    /// Seeds the choice of example combination when no index is given.
    pub example_selector_seed: u64,
    pub combination_index: Option<u64>,
    pub detection_threshold: f64,
    pub temperature: f64,
    pub max_tokens: u32,
    pub search: SearchConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k_examples: 3,
            max_corrections: 2,
            use_cot: true,
            mode: GenerationMode::Modular,
            example_selector_seed: 0,
            combination_index: None,
            detection_threshold: DEFAULT_THRESHOLD,
            temperature: crate::backends::DEFAULT_TEMPERATURE,
            max_tokens: crate::backends::DEFAULT_MAX_TOKENS,
            search: SearchConfig::default(),
        }
    }
}

/// Where the scene comes from: an image to run the detector on, or an
/// annotation whose detections (and captions, where present) are used as is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum SceneInput {
    Image { image: String, width: f64, height: f64 },
    Annotation(SceneAnnotation),
}

impl SceneInput {
    pub fn image_of(scene: &SceneAnnotation) -> Self {
        SceneInput::Image {
            image: scene.image.clone(),
            width: scene.width,
            height: scene.height,
        }
    }

    fn image(&self) -> &str {
        match self {
            SceneInput::Image { image, .. } => image,
            SceneInput::Annotation(a) => &a.image,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationInput {
    pub case_id: String,
    pub instruction: String,
    pub scene: SceneInput,
}

/// Objects found in the scene plus the evidence shown to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEstimate {
    pub objects: Vec<TypedObject>,
    pub annotation: SceneAnnotation,
    pub named: Vec<NamedDetection>,
    /// Caption per entry of `named`.
    pub captions: Vec<String>,
}

impl SceneEstimate {
    /// `name: [x, y, w, h]` followed by `caption: text`, per object.
    pub fn boxes_text(&self) -> String {
        boxes_text(&self.named, &self.captions)
    }
}

fn boxes_text(named: &[NamedDetection], captions: &[String]) -> String {
    let mut out = String::new();
    for (n, c) in named.iter().zip(captions) {
        out.push_str(&format!("{}: {}\ncaption: {}\n", n.object.name, n.bbox, c.trim()));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub problem_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extraction_error: Option<String>,
    pub parsed: Option<Problem>,
    pub validation: Option<ValidationReport>,
    pub planning: Option<PlannerResult>,
    pub error_message: Option<String>,
    /// Explanation of `error_message` requested before the next refinement.
    pub cot_explanation: Option<String>,
}

impl Attempt {
    pub fn succeeded(&self) -> bool {
        self.error_message.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordInput {
    pub case_id: String,
    pub instruction: String,
    pub image: String,
    pub domain: Name,
    pub config: PipelineConfig,
}

/// Transcript of one generation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub input: RecordInput,
    pub examples: Vec<String>,
    pub objects: Vec<TypedObject>,
    pub attempts: Vec<Attempt>,
    /// Index of the last attempt.
    #[serde(rename = "final")]
    pub final_attempt: Option<usize>,
    pub success: bool,
    /// Set when a backend or setup failure ended the run early.
    pub error: Option<String>,
    /// Whether `error` came from the backend rather than from setup.
    #[serde(default)]
    pub backend_failure: bool,
}

impl GenerationRecord {
    pub fn final_text(&self) -> Option<&str> {
        self.final_attempt.map(|i| self.attempts[i].problem_text.as_str())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize") + "\n"
    }
}

/// Canonical problem text from its parts.
pub fn assemble_problem(name: &Name, domain_name: &Name, objects: &[TypedObject], init: &BTreeSet<Atom>, goal: &Condition) -> String {
    print_problem(&Problem {
        name: name.clone(),
        domain_name: domain_name.clone(),
        objects: objects.to_vec(),
        init: init.clone(),
        goal: goal.clone(),
    })
}

/// Parses, validates and plans `text`, filling in the verdict fields.
pub fn evaluate_text(domain: &Domain, text: &str, search: &SearchConfig) -> Attempt {
    let mut a = Attempt {
        problem_text: text.to_string(),
        raw_response: None,
        extraction_error: None,
        parsed: None,
        validation: None,
        planning: None,
        error_message: None,
        cot_explanation: None,
    };
    let problem = match parse_problem(text) {
        Ok(p) => p,
        Err(e) => {
            a.error_message = Some(format!("ParseError: {e}"));
            return a;
        }
    };
    let report = validate(domain, &problem);
    a.parsed = Some(problem);
    if !report.ok() {
        a.error_message = Some(render_error(&report).expect("has issues"));
        a.validation = Some(report);
        return a;
    }
    a.validation = Some(report);
    let p = a.parsed.as_ref().expect("set above");
    match plan(domain, p, search) {
        Ok(result) => {
            if let Some(found) = result.plan() {
                match validate_plan(domain, p, found) {
                    Ok(PlanValidation::Valid) => {}
                    Ok(PlanValidation::Invalid { step, failure }) => {
                        a.error_message = Some(format!("plan check failed at step {step}: {failure}"));
                    }
                    Err(e) => a.error_message = Some(e.to_string()),
                }
            } else {
                a.error_message = Some(render_planner_error(&result).expect("not solved"));
            }
            a.planning = Some(result);
        }
        Err(e @ PlannerError::InvalidConfig(_)) => a.error_message = Some(e.to_string()),
        Err(e) => a.error_message = Some(e.to_string()),
    }
    a
}

/// One domain's generation context.
pub struct Pipeline<'a> {
    pub backend: &'a dyn Backend,
    pub templates: &'a Templates,
    pub config: &'a PipelineConfig,
    pub domain: &'a Domain,
    pub knowledge: &'a DomainKnowledge,
}

impl Pipeline<'_> {
    fn chat(&self, prompt: String) -> Result<String, PipelineError> {
        let mut req = ChatRequest::new(vec![Message::system(self.templates.system.trim_end()), Message::user(prompt)]);
        req.temperature = self.config.temperature;
        req.max_tokens = self.config.max_tokens;
        Ok(self.backend.chat(&req)?.text)
    }

    fn domain_text(&self) -> String {
        print_domain(self.domain).trim_end().to_string()
    }

    /// Detect, filter and name the scene's objects, then caption each one.
    pub fn estimate_objects(&self, scene: &SceneInput) -> Result<SceneEstimate, PipelineError> {
        let annotation = match scene {
            SceneInput::Annotation(a) => a.clone(),
            SceneInput::Image { image, width, height } => {
                let query = build_query(self.knowledge)?;
                let detections = self.backend.detect(&DetectionRequest { image: image.clone(), query })?;
                SceneAnnotation {
                    image: image.clone(),
                    width: *width,
                    height: *height,
                    detections,
                    captions: Default::default(),
                }
            }
        };
        let kept = filter_detections(&annotation.detections, self.config.detection_threshold);
        if kept.is_empty() {
            return Err(PipelineError::EmptyScene);
        }
        // Keep captions attached to the detections that survived.
        let mut captions_in = std::collections::BTreeMap::new();
        let mut filtered = Vec::new();
        for (i, d) in annotation.detections.iter().enumerate() {
            if kept.contains(d) && !filtered.contains(d) {
                if let Some(c) = annotation.captions.get(&i) {
                    captions_in.insert(filtered.len(), c.clone());
                }
                filtered.push(d.clone());
            }
        }
        let annotation = SceneAnnotation {
            detections: filtered,
            captions: captions_in,
            ..annotation
        };
        let named = assign_names(&annotation, self.knowledge)?;
        let mut captions = Vec::with_capacity(named.len());
        for n in &named {
            let text = match annotation.captions.get(&n.detection) {
                Some(c) => c.clone(),
                None => {
                    let class = self
                        .knowledge
                        .resolve_label(&annotation.detections[n.detection].label)
                        .expect("assigned names resolve");
                    let object = class.as_str().replace('_', " ");
                    let prompt = render(&self.templates.caption, &[("object", &object)])?;
                    self.backend.caption(&CaptionRequest {
                        image: annotation.image.clone(),
                        bbox: n.bbox,
                        prompt,
                    })?
                }
            };
            captions.push(text);
        }
        let mut objects: Vec<TypedObject> = named.iter().map(|n| n.object.clone()).collect();
        objects.extend(self.knowledge.fixed_objects.iter().cloned());
        Ok(SceneEstimate {
            objects,
            annotation,
            named,
            captions,
        })
    }

    fn example_boxes(&self, ex: &ProblemCase) -> String {
        match assign_names(&ex.scene, self.knowledge) {
            Ok(named) => {
                let captions: Vec<String> = named
                    .iter()
                    .map(|n| ex.scene.captions.get(&n.detection).cloned().unwrap_or_default())
                    .collect();
                boxes_text(&named, &captions)
            }
            Err(_) => String::new(),
        }
    }

    fn objects_text(objects: &[TypedObject]) -> String {
        print_objects(objects, "")
    }

    pub fn estimate_init(&self, scene: &SceneEstimate, examples: &[ProblemCase]) -> Result<BTreeSet<Atom>, PipelineError> {
        let mut shots = String::new();
        for ex in examples {
            shots.push_str(&format!(
                "Objects:\n{}\nBoxes:\n{}Init:\n{}\n\n",
                Self::objects_text(&ex.ground_truth.objects),
                self.example_boxes(ex),
                print_init(&ex.ground_truth.init, "")
            ));
        }
        let prompt = render(
            &self.templates.init,
            &[
                ("domain", &self.domain_text()),
                ("examples", &shots),
                ("objects", &Self::objects_text(&scene.objects)),
                ("boxes", &scene.boxes_text()),
            ],
        )?;
        let raw = self.chat(prompt)?;
        let unparsable = |message: String| PipelineError::Unparsable { raw: raw.clone(), message };
        let block = extract_with_heads(&raw, &[":init"]).map_err(|e| unparsable(e.to_string()))?;
        parse_init_section(&block).map_err(|e| unparsable(format!("ParseError: {e}")))
    }

    pub fn estimate_goal(
        &self,
        instruction: &str,
        objects: &[TypedObject],
        init: &BTreeSet<Atom>,
        examples: &[ProblemCase],
    ) -> Result<Condition, PipelineError> {
        let mut shots = String::new();
        for ex in examples {
            shots.push_str(&format!(
                "Instruction: {}\nObjects:\n{}\nInit:\n{}\nGoal:\n{}\n\n",
                ex.instruction,
                Self::objects_text(&ex.ground_truth.objects),
                print_init(&ex.ground_truth.init, ""),
                print_goal(&ex.ground_truth.goal, "")
            ));
        }
        let prompt = render(
            &self.templates.goal,
            &[
                ("domain", &self.domain_text()),
                ("examples", &shots),
                ("instruction", instruction),
                ("objects", &Self::objects_text(objects)),
                ("init", &print_init(init, "")),
            ],
        )?;
        let raw = self.chat(prompt)?;
        let unparsable = |message: String| PipelineError::Unparsable { raw: raw.clone(), message };
        let block = extract_with_heads(&raw, &[":goal", "and"]).map_err(|e| unparsable(e.to_string()))?;
        parse_goal_section(&block).map_err(|e| unparsable(format!("ParseError: {e}")))
    }

    fn whole_shots(&self, examples: &[ProblemCase]) -> String {
        let mut shots = String::new();
        for ex in examples {
            shots.push_str(&format!(
                "Instruction: {}\nBoxes:\n{}Problem:\n{}\n",
                ex.instruction,
                self.example_boxes(ex),
                print_problem(&ex.ground_truth)
            ));
        }
        shots
    }

    /// Full problem from one chat call.
    pub fn generate_whole(&self, instruction: &str, scene: &SceneEstimate, examples: &[ProblemCase]) -> Result<String, PipelineError> {
        let prompt = render(
            &self.templates.whole,
            &[
                ("domain", &self.domain_text()),
                ("examples", &self.whole_shots(examples)),
                ("instruction", instruction),
                ("boxes", &scene.boxes_text()),
            ],
        )?;
        let raw = self.chat(prompt)?;
        extract_with_heads(&raw, &["define"]).map_err(|e| PipelineError::Unparsable {
            raw: raw.clone(),
            message: e.to_string(),
        })
    }

    pub fn cot_explain(&self, problem_text: &str, error_message: &str) -> Result<String, PipelineError> {
        let prompt = render(
            &self.templates.cot,
            &[
                ("domain", &self.domain_text()),
                ("problem", problem_text.trim_end()),
                ("error", error_message),
            ],
        )?;
        self.chat(prompt)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn refine(
        &self,
        examples: &[ProblemCase],
        instruction: &str,
        scene: &SceneEstimate,
        problem_text: &str,
        error_message: &str,
        explanation: Option<&str>,
    ) -> Result<String, PipelineError> {
        let explanation = explanation
            .map(|e| format!("\nExplanation of the error:\n{}\n", e.trim()))
            .unwrap_or_default();
        let prompt = render(
            &self.templates.refine,
            &[
                ("domain", &self.domain_text()),
                ("examples", &self.whole_shots(examples)),
                ("instruction", instruction),
                ("boxes", &scene.boxes_text()),
                ("problem", problem_text.trim_end()),
                ("error", error_message),
                ("explanation", &explanation),
            ],
        )?;
        let raw = self.chat(prompt)?;
        extract_with_heads(&raw, &["define"]).map_err(|e| PipelineError::Unparsable {
            raw: raw.clone(),
            message: e.to_string(),
        })
    }

    fn first_attempt(
        &self,
        input: &GenerationInput,
        scene: &SceneEstimate,
        examples: &[ProblemCase],
    ) -> Result<Attempt, PipelineError> {
        let text = match self.config.mode {
            GenerationMode::Modular => self
                .estimate_init(scene, examples)
                .and_then(|init| {
                    let goal = self.estimate_goal(&input.instruction, &scene.objects, &init, examples)?;
                    Ok(assemble_problem(
                        &problem_name(&input.case_id),
                        &self.domain.name,
                        &scene.objects,
                        &init,
                        &goal,
                    ))
                }),
            GenerationMode::Whole => self.generate_whole(&input.instruction, scene, examples),
        };
        match text {
            Ok(t) => Ok(evaluate_text(self.domain, &t, &self.config.search)),
            Err(PipelineError::Unparsable { raw, message }) => Ok(unparsable_attempt(raw, message)),
            Err(e) => Err(e),
        }
    }

    /// Runs generation and the correction loop; failures end up in the record.
    pub fn generate(&self, input: &GenerationInput, pool: &[ProblemCase]) -> GenerationRecord {
        let mut record = GenerationRecord {
            input: RecordInput {
                case_id: input.case_id.clone(),
                instruction: input.instruction.clone(),
                image: input.scene.image().to_string(),
                domain: self.domain.name.clone(),
                config: self.config.clone(),
            },
            examples: Vec::new(),
            objects: Vec::new(),
            attempts: Vec::new(),
            final_attempt: None,
            success: false,
            error: None,
            backend_failure: false,
        };
        if let Err(e) = self.run(input, pool, &mut record) {
            record.backend_failure = matches!(e, PipelineError::Backend(_));
            record.error = Some(e.to_string());
        }
        record.final_attempt = record.attempts.len().checked_sub(1);
        record.success = record.error.is_none() && record.attempts.last().is_some_and(Attempt::succeeded);
        record
    }

    fn run(&self, input: &GenerationInput, pool: &[ProblemCase], record: &mut GenerationRecord) -> Result<(), PipelineError> {
        let index = self.config.combination_index.unwrap_or_else(|| {
            examples::seeded_index(self.config.example_selector_seed)
        });
        let examples: Vec<ProblemCase> =
            select_examples(pool, self.config.k_examples, index, Some(&input.case_id))?
                .into_iter()
                .cloned()
                .collect();
        record.examples = examples.iter().map(|e| e.id.clone()).collect();

        let scene = self.estimate_objects(&input.scene)?;
        record.objects = scene.objects.clone();

        record.attempts.push(self.first_attempt(input, &scene, &examples)?);
        for _ in 0..self.config.max_corrections {
            let last = record.attempts.last_mut().expect("one attempt exists");
            let Some(error) = last.error_message.clone() else {
                break;
            };
            let explanation = if self.config.use_cot {
                let e = self.cot_explain(&last.problem_text, &error)?;
                last.cot_explanation = Some(e.clone());
                Some(e)
            } else {
                None
            };
            let previous = last.problem_text.clone();
            let next = match self.refine(&examples, &input.instruction, &scene, &previous, &error, explanation.as_deref()) {
                Ok(text) => evaluate_text(self.domain, &text, &self.config.search),
                Err(PipelineError::Unparsable { raw, message }) => {
                    let mut a = evaluate_text(self.domain, &previous, &self.config.search);
                    a.raw_response = Some(raw);
                    a.extraction_error = Some(message);
                    a
                }
                Err(e) => return Err(e),
            };
            record.attempts.push(next);
        }
        Ok(())
    }
}

fn unparsable_attempt(raw: String, message: String) -> Attempt {
    Attempt {
        problem_text: raw.clone(),
        raw_response: Some(raw),
        extraction_error: Some(message.clone()),
        parsed: None,
        validation: None,
        planning: None,
        error_message: Some(message),
        cot_explanation: None,
    }
}

fn problem_name(case_id: &str) -> Name {
    let cleaned: String = case_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .collect();
    Name::new(&cleaned)
        .or_else(|_| Name::new(&format!("p-{cleaned}")))
        .unwrap_or_else(|_| crate::pddl::name("problem"))
}
