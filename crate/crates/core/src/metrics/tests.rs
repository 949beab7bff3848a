use proptest::prelude::{any, prop, prop_assert, proptest};
use proptest::strategy::Strategy as Gen;

use super::*;
use crate::dataset::{load_bundle, shipped_bundle_dir, SHIPPED_DOMAINS};
use crate::pddl::print_problem;

const BW_DOMAIN: &str = include_str!("../../data/blocksworld/domain.pddl");

fn bw_problem(init: &str, goal: &str) -> String {
    format!(
        "(define (problem t) (:domain blocksworld)
           (:objects red_block green_block blue_block - block robot - robot)
           (:init {init}) (:goal (and {goal})))"
    )
}

const TOWER: &str = "(ontable blue_block) (on red_block blue_block) (on green_block red_block) (clear green_block) (handempty robot)";

fn item(generated: Option<String>, gt: &str) -> EvalItem {
    EvalItem {
        case_id: "t".into(),
        generated,
        ground_truth: parse_problem(gt).unwrap(),
        domain: crate::pddl::parse_domain(BW_DOMAIN).unwrap(),
    }
}

fn score(generated: Option<String>, gt: &str) -> ItemScore {
    score_item(&item(generated, gt), &SearchConfig::default())
}

fn row(syntax: bool, plan: bool, o: f64, i: f64, g: f64, all: bool) -> ItemScore {
    ItemScore {
        case_id: "x".into(),
        parsed: true,
        syntax_valid: syntax,
        plan_valid: plan,
        plan_failure: None,
        recall: PartRatios { o, i, g },
        contains_all: all,
        warnings: vec![],
    }
}

#[test]
fn init_recall_two_thirds() {
    let gt = parse_problem(&bw_problem("(clear red_block) (clear blue_block) (clear green_block)", "(clear red_block)")).unwrap();
    let gen = parse_problem(&bw_problem("(clear red_block) (clear blue_block) (handempty robot)", "(clear red_block)")).unwrap();
    assert_eq!(recall_part(&gen, &gt, Part::I).unwrap(), 2.0 / 3.0);
    assert_eq!(recall_part(&gt, &gt, Part::I).unwrap(), 1.0);
}

#[test]
fn reversed_stacking_scores_zero_goal_recall() {
    let gt = parse_problem(&bw_problem(TOWER, "(on blue_block red_block) (on red_block green_block)")).unwrap();
    let gen = parse_problem(&bw_problem(TOWER, "(on green_block red_block) (on red_block blue_block)")).unwrap();
    assert_eq!(recall_part(&gen, &gt, Part::G).unwrap(), 0.0);
    assert_eq!(recall_part(&gen, &gt, Part::O).unwrap(), 1.0);
}

#[test]
fn object_recall_ignores_types_and_case() {
    let gt = parse_problem(&bw_problem(TOWER, "(clear red_block)")).unwrap();
    let gen = parse_problem(
        "(define (problem t) (:domain blocksworld) (:objects RED_BLOCK - robot green_block - block) (:init) (:goal (and)))",
    )
    .unwrap();
    assert_eq!(recall_part(&gen, &gt, Part::O).unwrap(), 0.5);
}

#[test]
fn empty_ground_truth_part() {
    let gt = parse_problem(&bw_problem("", "(clear red_block)")).unwrap();
    assert_eq!(recall_part(&gt, &gt, Part::I), Err(MetricsError::EmptyGroundTruthPart(Part::I)));
    let s = score(Some(bw_problem("", "(clear red_block)")), &bw_problem("", "(clear red_block)"));
    assert_eq!(s.recall.i, 1.0);
    assert_eq!(s.warnings, ["ground truth has an empty init part"]);
}

#[test]
fn macro_average() {
    let rows = [row(true, true, 1.0, 1.0, 1.0, true), row(true, true, 1.0, 0.5, 1.0, false)];
    assert_eq!(r_part(&rows, Part::I).unwrap(), 0.75);
    assert_eq!(r_all(&rows).unwrap(), 0.5);
}

#[test]
fn empty_batch() {
    assert_eq!(r_syntax(&[]), Err(MetricsError::EmptyBatch));
    assert_eq!(r_plan(&[]), Err(MetricsError::EmptyBatch));
    assert_eq!(r_part(&[], Part::G), Err(MetricsError::EmptyBatch));
    assert_eq!(r_all(&[]), Err(MetricsError::EmptyBatch));
    assert_eq!(evaluate_batch(&[], &SearchConfig::default()).unwrap_err(), MetricsError::EmptyBatch);
}

#[test]
fn unparsable_and_missing_count_as_failures() {
    let gt = bw_problem(TOWER, "(on blue_block red_block)");
    for generated in [None, Some("(define (problem".to_string())] {
        let s = score(generated, &gt);
        assert!(!s.parsed && !s.syntax_valid && !s.plan_valid && !s.contains_all);
        assert_eq!(r_part(&[s], Part::O).unwrap(), 0.0);
    }
}

#[test]
fn contradictory_init_fails_plan_only() {
    let gt = bw_problem(TOWER, "(on blue_block red_block)");
    let contradictory = bw_problem(
        "(on red_block blue_block) (on blue_block red_block) (handempty robot)",
        "(on green_block blue_block)",
    );
    let s = score(Some(contradictory), &gt);
    assert!(s.syntax_valid);
    assert!(!s.plan_valid);
    assert!(s.plan_failure.unwrap().starts_with("unsolvable"));
}

#[test]
fn timeout_is_a_plan_failure() {
    let gt = bw_problem(TOWER, "(on blue_block red_block)");
    let search = SearchConfig {
        max_expansions: 1,
        ..SearchConfig::default()
    };
    let s = score_item(&item(Some(gt.clone()), &gt), &search);
    assert!(s.syntax_valid && !s.plan_valid);
    assert!(s.plan_failure.unwrap().starts_with("search limit"));
}

#[test]
fn extras_do_not_hurt_r_all() {
    let gt = bw_problem(TOWER, "(on blue_block red_block)");
    let extra = bw_problem(&format!("{TOWER} (clear blue_block)"), "(on blue_block red_block) (clear blue_block)");
    assert!(score(Some(extra), &gt).contains_all);
    let missing = bw_problem("(ontable blue_block) (on red_block blue_block) (on green_block red_block) (clear green_block)", "(on blue_block red_block)");
    let s = score(Some(missing), &gt);
    assert!(!s.contains_all);
    assert_eq!(s.recall.i, 0.8);
}

#[test]
fn ground_truths_score_perfectly() {
    let mut items = Vec::new();
    for d in SHIPPED_DOMAINS {
        let b = load_bundle(&shipped_bundle_dir(d)).unwrap();
        for c in &b.cases {
            items.push(EvalItem {
                case_id: c.id.clone(),
                generated: Some(print_problem(&c.ground_truth)),
                ground_truth: c.ground_truth.clone(),
                domain: b.domain.clone(),
            });
        }
    }
    let r = evaluate_batch(&items, &SearchConfig::default()).unwrap();
    assert_eq!(r.items, 15);
    assert_eq!((r.r_syntax, r.r_plan, r.r_all), (1.0, 1.0, 1.0));
    assert_eq!(r.r_part, PartRatios { o: 1.0, i: 1.0, g: 1.0 });
    let seq = evaluate_batch_with(Strategy::Sequential, &items, &SearchConfig::default()).unwrap();
    assert_eq!(seq, r);
}

#[test]
fn table_layout() {
    let r = MetricsReport::from_scores(vec![row(true, true, 1.0, 0.5, 1.0, false)]).unwrap();
    let t = render_table(&[("cooking", &r)]);
    let lines: Vec<&str> = t.lines().collect();
    assert_eq!(lines[0], "        | R_syntax | R_plan | R_part(O) | R_part(I) | R_part(G) | R_all");
    assert_eq!(lines[2], "cooking |     1.00 |   1.00 |      1.00 |      0.50 |      1.00 |  0.00");
    assert!(r.to_json().contains("\"schema_version\": 1"));
}

fn arb_row() -> impl Gen<Value = ItemScore> {
    (any::<bool>(), any::<bool>(), 0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64, any::<bool>(), any::<bool>()).prop_map(
        |(syntax, plan, o, i, g, all, parsed)| ItemScore {
            parsed,
            ..row(syntax, syntax && plan, o, i, g, all)
        },
    )
}

proptest! {
    #[test]
    fn order_never_matters(rows in prop::collection::vec(arb_row(), 1..20).prop_shuffle(), seed in any::<u64>()) {
        let a = MetricsReport::from_scores(rows.clone()).unwrap();
        let mut shuffled = rows;
        let n = shuffled.len();
        shuffled.rotate_left((seed as usize) % n);
        shuffled.reverse();
        let b = MetricsReport::from_scores(shuffled).unwrap();
        for (x, y) in [(a.r_syntax, b.r_syntax), (a.r_plan, b.r_plan), (a.r_all, b.r_all), (a.r_part.o, b.r_part.o), (a.r_part.i, b.r_part.i), (a.r_part.g, b.r_part.g)] {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!(a.r_plan <= a.r_syntax);
        for v in [a.r_syntax, a.r_plan, a.r_all, a.r_part.o, a.r_part.i, a.r_part.g] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn adding_a_correct_atom_never_lowers_recall(mask in prop::collection::vec(any::<bool>(), 5), pick in 0usize..5) {
        let gt = parse_problem(&bw_problem(TOWER, "(clear red_block)")).unwrap();
        let atoms: Vec<_> = gt.init.iter().cloned().collect();
        let mut gen = gt.clone();
        gen.init = atoms.iter().zip(&mask).filter(|(_, m)| **m).map(|(a, _)| a.clone()).collect();
        let before = recall_part(&gen, &gt, Part::I).unwrap();
        gen.init.insert(atoms[pick].clone());
        let after = recall_part(&gen, &gt, Part::I).unwrap();
        prop_assert!(after >= before);
    }
}
