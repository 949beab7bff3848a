//! Regenerates the shipped Blocksworld and Hanoi cases and knowledge files.
//!
//! `cargo run -p pdgen-core --example build_bundles`

use pdgen_core::dataset::{
    blocksworld_knowledge, generate_blocksworld_case, generate_hanoi_case, hanoi_canonical_case,
    hanoi_knowledge, shipped_bundle_dir, write_case, ProblemCase,
};
use pdgen_core::scene::DomainKnowledge;

fn ship(domain: &str, mut knowledge: DomainKnowledge, cases: Vec<ProblemCase>) {
    let dir = shipped_bundle_dir(domain);
    let problems = dir.join("problems");
    if problems.exists() {
        std::fs::remove_dir_all(&problems).expect("clear problems");
    }
    knowledge.example_pool = cases.iter().map(|c| c.id.clone()).collect();
    let text = serde_json::to_string_pretty(&knowledge).expect("serialize") + "\n";
    std::fs::write(dir.join("knowledge.json"), text).expect("write knowledge");
    for c in &cases {
        write_case(&problems.join(&c.id), c).expect("write case");
    }
    println!("{domain}: {} cases", cases.len());
}

fn main() {
    let bw = [(3, 1), (4, 2), (5, 3), (6, 4), (7, 5)]
        .into_iter()
        .map(|(n, seed)| generate_blocksworld_case(n, seed).expect("generate"))
        .collect();
    ship("blocksworld", blocksworld_knowledge(), bw);

    let mut hanoi = vec![hanoi_canonical_case(3, 1).expect("generate")];
    for (n, seed) in [(4, 2), (5, 3), (7, 4), (10, 5)] {
        hanoi.push(generate_hanoi_case(n, 3, seed).expect("generate"));
    }
    ship("hanoi", hanoi_knowledge(), hanoi);
}
