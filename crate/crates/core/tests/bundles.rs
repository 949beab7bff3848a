use std::path::PathBuf;
use std::time::{Duration, Instant};

use pdgen_core::backends::ReplayBackend;
use pdgen_core::dataset::{load_bundle, shipped_bundle_dir, verify_bundle, DomainBundle, SHIPPED_DOMAINS};
use pdgen_core::pddl::{parse_domain, parse_problem, print_domain, print_problem};
use pdgen_core::pipeline::{GenerationInput, Pipeline, PipelineConfig, SceneInput, Templates};
use pdgen_core::planner::{plan, validate_plan, SearchConfig};

fn bundles() -> Vec<DomainBundle> {
    SHIPPED_DOMAINS
        .iter()
        .map(|d| load_bundle(&shipped_bundle_dir(d)).unwrap())
        .collect()
}

fn tests_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests")
}

#[test]
fn shipped_bundles_verify() {
    let mut problems = 0;
    for b in bundles() {
        let report = verify_bundle(&b, &SearchConfig::default());
        assert!(report.ok(), "{}: {:?}", b.domain.name, report.failures);
        assert!(report.warnings.is_empty());
        problems += b.cases.len();
        assert_eq!(b.example_pool().unwrap().len(), b.knowledge.example_pool.len());
    }
    assert!(problems >= 12);
}

#[test]
fn everything_round_trips() {
    for b in bundles() {
        let d = print_domain(&b.domain);
        assert_eq!(parse_domain(&d).unwrap(), b.domain);
        for c in &b.cases {
            let text = print_problem(&c.ground_truth);
            let again = parse_problem(&text).unwrap();
            assert_eq!(again, c.ground_truth);
            assert_eq!(print_problem(&again), text);
        }
    }
    for f in ["sussman.pddl", "contradictory.pddl"] {
        let p = parse_problem(&std::fs::read_to_string(tests_dir().join("fixtures").join(f)).unwrap()).unwrap();
        assert_eq!(parse_problem(&print_problem(&p)).unwrap(), p);
    }
}

#[test]
fn cooking_prints_match_golden_files() {
    let b = load_bundle(&shipped_bundle_dir("cooking")).unwrap();
    let golden = |name: &str| std::fs::read_to_string(tests_dir().join("golden").join(name)).unwrap();
    assert_eq!(print_problem(&b.case("cooking-01").unwrap().ground_truth), golden("cooking-01.pddl"));
    assert_eq!(print_domain(&b.domain), golden("cooking-domain.pddl"));
}

#[test]
fn largest_cases_solve_quickly() {
    for (domain, id) in [("blocksworld", "bw-n7-s5"), ("hanoi", "hanoi-n10-s5")] {
        let b = load_bundle(&shipped_bundle_dir(domain)).unwrap();
        let p = &b.case(id).unwrap().ground_truth;
        let t = Instant::now();
        let r = plan(&b.domain, p, &SearchConfig::default()).unwrap();
        let elapsed = t.elapsed();
        let found = r.plan().unwrap_or_else(|| panic!("{id}: {:?}", r.outcome));
        assert!(validate_plan(&b.domain, p, found).unwrap().is_valid());
        assert!(elapsed < Duration::from_secs(5), "{id} took {elapsed:?}");
    }
}

#[test]
fn replay_fixtures_reproduce_ground_truth() {
    let config = PipelineConfig::default();
    let templates = Templates::default();
    for b in bundles() {
        let dir = shipped_bundle_dir(b.domain.name.as_str());
        let backend = ReplayBackend::new(dir.join("fixtures"));
        let pipeline = Pipeline {
            backend: &backend,
            templates: &templates,
            config: &config,
            domain: &b.domain,
            knowledge: &b.knowledge,
        };
        let pool = b.example_pool().unwrap();
        for c in &b.cases {
            let input = GenerationInput {
                case_id: c.id.clone(),
                instruction: c.instruction.clone(),
                scene: SceneInput::image_of(&c.scene),
            };
            let record = pipeline.generate(&input, &pool);
            assert!(record.success, "{}: {:?}", c.id, record.error);
            assert_eq!(record.attempts.len(), 1);
            let got = record.attempts[0].parsed.as_ref().unwrap();
            assert_eq!(got.init, c.ground_truth.init, "{}", c.id);
            assert_eq!(got.goal, c.ground_truth.goal, "{}", c.id);
        }
    }
}
