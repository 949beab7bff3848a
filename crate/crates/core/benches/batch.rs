use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pdgen_core::dataset::{
    blocksworld_knowledge, generate_blocksworld_case, load_bundle, shipped_bundle_dir, verify_case, DomainBundle,
};
use pdgen_core::metrics::{evaluate_batch_with, EvalItem};
use pdgen_core::par::{map_with, Strategy};
use pdgen_core::pddl::print_problem;
use pdgen_core::planner::SearchConfig;

fn blocks_batch(n_cases: u64) -> (DomainBundle, Vec<EvalItem>) {
    let shipped = load_bundle(&shipped_bundle_dir("blocksworld")).expect("shipped bundle");
    let cases: Vec<_> = (0..n_cases)
        .map(|seed| generate_blocksworld_case(5 + (seed % 2) as usize, seed).expect("generate"))
        .collect();
    let items = cases
        .iter()
        .map(|c| EvalItem {
            case_id: c.id.clone(),
            generated: Some(print_problem(&c.ground_truth)),
            ground_truth: c.ground_truth.clone(),
            domain: shipped.domain.clone(),
        })
        .collect();
    let bundle = DomainBundle {
        domain: shipped.domain,
        knowledge: blocksworld_knowledge(),
        cases,
        examples: Vec::new(),
    };
    (bundle, items)
}

fn strategies() -> [(&'static str, Strategy); 2] {
    [("sequential", Strategy::Sequential), ("parallel", Strategy::Parallel)]
}

fn evaluate(c: &mut Criterion) {
    let search = SearchConfig::default();
    let mut group = c.benchmark_group("evaluate_batch");
    group.sample_size(10);
    for n in [16u64, 64] {
        let (_, items) = blocks_batch(n);
        for (label, strategy) in strategies() {
            group.bench_with_input(BenchmarkId::new(label, n), &items, |b, items| {
                b.iter(|| evaluate_batch_with(strategy, black_box(items), &search).expect("non-empty"))
            });
        }
    }
    group.finish();
}

fn verify(c: &mut Criterion) {
    let search = SearchConfig::default();
    let (bundle, _) = blocks_batch(64);
    let mut group = c.benchmark_group("verify_cases");
    group.sample_size(10);
    for (label, strategy) in strategies() {
        group.bench_function(label, |b| {
            b.iter(|| {
                map_with(strategy, &bundle.cases, |case| {
                    verify_case(&bundle.domain, &bundle.knowledge, case, &search)
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, evaluate, verify);
criterion_main!(benches);
