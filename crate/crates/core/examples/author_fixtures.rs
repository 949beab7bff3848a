//! Records replay fixtures for every shipped case by running the pipeline
//! against a backend that answers from the ground truth.
//!
//! `cargo run -p pdgen-core --example author_fixtures`

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use pdgen_core::backends::{
    Backend, BackendError, CaptionRequest, ChatRequest, ChatResponse, DetectionRequest, RecordBackend, RequestKind,
};
use pdgen_core::dataset::{load_bundle, shipped_bundle_dir, ProblemCase, SHIPPED_DOMAINS};
use pdgen_core::pddl::{print_goal, print_init};
use pdgen_core::pipeline::{GenerationInput, Pipeline, PipelineConfig, SceneInput, Templates};
use pdgen_core::scene::Detection;

struct Oracle {
    case: ProblemCase,
    chats: AtomicUsize,
}

impl Backend for Oracle {
    fn chat(&self, _req: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let gt = &self.case.ground_truth;
        let text = match self.chats.fetch_add(1, Ordering::SeqCst) {
            0 => print_init(&gt.init, ""),
            1 => print_goal(&gt.goal, ""),
            _ => return Err(BackendError::QueueExhausted(RequestKind::Chat)),
        };
        Ok(ChatResponse {
            text: format!("```pddl\n{text}```\n"),
        })
    }

    fn detect(&self, _req: &DetectionRequest) -> Result<Vec<Detection>, BackendError> {
        Ok(self.case.scene.detections.clone())
    }

    fn caption(&self, req: &CaptionRequest) -> Result<String, BackendError> {
        let scene = &self.case.scene;
        let i = scene
            .detections
            .iter()
            .position(|d| d.bbox == req.bbox)
            .expect("caption box comes from the scene");
        Ok(scene.captions.get(&i).cloned().unwrap_or_default())
    }
}

fn main() {
    let config = PipelineConfig::default();
    let templates = Templates::default();
    for domain in SHIPPED_DOMAINS {
        let dir = shipped_bundle_dir(domain);
        let bundle = load_bundle(&dir).expect("load bundle");
        let pool = bundle.example_pool().expect("pool");
        let fixtures = dir.join("fixtures");
        if fixtures.exists() {
            std::fs::remove_dir_all(&fixtures).expect("clear fixtures");
        }
        for case in &bundle.cases {
            let oracle = Arc::new(Oracle {
                case: case.clone(),
                chats: AtomicUsize::new(0),
            });
            let backend = RecordBackend::new(oracle, &fixtures);
            let pipeline = Pipeline {
                backend: &backend,
                templates: &templates,
                config: &config,
                domain: &bundle.domain,
                knowledge: &bundle.knowledge,
            };
            let input = GenerationInput {
                case_id: case.id.clone(),
                instruction: case.instruction.clone(),
                scene: SceneInput::image_of(&case.scene),
            };
            let record = pipeline.generate(&input, &pool);
            assert!(record.success, "{}: {:?}", case.id, record.attempts.last().and_then(|a| a.error_message.clone()));
        }
        let n = std::fs::read_dir(&fixtures).map(|d| d.count()).unwrap_or(0);
        println!("{domain}: {n} fixtures");
    }
}
