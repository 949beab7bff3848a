//! Seeded case generators. Every returned case has been solved by the
//! planner and its scene annotation names exactly its objects.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use rand::seq::{index, IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pddl::{name, parse_domain, Atom, Condition, Domain, Name, Problem, TypedObject};
use crate::planner::{plan, SearchConfig};
use crate::scene::{BoundingBox, Detection, DomainKnowledge, NamingRule, SceneAnnotation};

use super::{verify_case, ProblemCase};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeneratorError {
    #[error("{what} must be in {min}..={max}, got {got}")]
    BadCount {
        what: &'static str,
        got: usize,
        min: usize,
        max: usize,
    },
    #[error("generated case failed verification: {0}")]
    Unverified(String),
}

pub const BLOCK_COLORS: [&str; 7] = ["red", "blue", "green", "yellow", "purple", "orange", "white"];
pub const DISK_COLORS: [&str; 6] = ["red", "orange", "yellow", "green", "blue", "purple"];

pub const HANOI_INSTRUCTION: &str = "Move every disk onto the rightmost peg, one disk at a time, \
    so that no disk ever rests on a smaller disk.";

const IMAGE_W: f64 = 640.0;
const IMAGE_H: f64 = 480.0;
const SCORE: f64 = 0.9;

fn check_count(what: &'static str, got: usize, min: usize, max: usize) -> Result<(), GeneratorError> {
    if (min..=max).contains(&got) {
        Ok(())
    } else {
        Err(GeneratorError::BadCount { what, got, min, max })
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn factorial(n: u64) -> u128 {
    (1..=n as u128).product()
}

/// Lah number: arrangements of `n` labelled blocks into `k` unordered towers.
fn lah(n: u64, k: u64) -> u128 {
    if k == 0 || k > n {
        return 0;
    }
    binomial(n - 1, k - 1) * factorial(n) / factorial(k)
}

/// Towers listed bottom to top, drawn uniformly over all stackings.
fn random_stacking(blocks: &[usize], rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let n = blocks.len() as u64;
    let total: u128 = (1..=n).map(|k| lah(n, k)).sum();
    let mut r = rng.random_range(0..total);
    let mut k = 1;
    while r >= lah(n, k) {
        r -= lah(n, k);
        k += 1;
    }
    let mut order = blocks.to_vec();
    order.shuffle(rng);
    let mut cuts: Vec<usize> = index::sample(rng, blocks.len() - 1, (k - 1) as usize)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut towers = Vec::new();
    let mut start = 0;
    for cut in cuts.into_iter().chain(std::iter::once(blocks.len())) {
        towers.push(order[start..cut].to_vec());
        start = cut;
    }
    towers
}

fn on_facts(towers: &[Vec<usize>], names: &[Name]) -> Vec<Atom> {
    towers
        .iter()
        .flat_map(|t| t.windows(2).map(|w| Atom::ground("on", &[names[w[1]].as_str(), names[w[0]].as_str()])))
        .collect()
}

fn block_name(color: &str) -> Name {
    name(&format!("{color}_block"))
}

fn domain(text: &str) -> Domain {
    parse_domain(text).expect("shipped domain parses")
}

pub(crate) fn blocksworld_domain() -> Domain {
    domain(include_str!("../../data/blocksworld/domain.pddl"))
}

pub(crate) fn hanoi_domain() -> Domain {
    domain(include_str!("../../data/hanoi/domain.pddl"))
}

pub fn blocksworld_knowledge() -> DomainKnowledge {
    DomainKnowledge {
        query_elaborations: BLOCK_COLORS
            .iter()
            .map(|c| (block_name(c), format!("{c} toy block")))
            .collect(),
        type_map: BLOCK_COLORS.iter().map(|c| (block_name(c), name("block"))).collect(),
        fixed_objects: vec![TypedObject::new(name("robot"), name("robot"))],
        naming_rules: IndexMap::new(),
        example_pool: Vec::new(),
    }
}

fn describe_goal(towers: &[Vec<usize>], colors: &[&str]) -> String {
    let mut clauses: Vec<String> = Vec::new();
    for t in towers.iter().filter(|t| t.len() > 1) {
        let top_down: Vec<String> = t.iter().rev().map(|&b| format!("the {} block", colors[b])).collect();
        clauses.push(if top_down.len() == 2 {
            format!("put {} on {}", top_down[0], top_down[1])
        } else {
            format!("build a tower of {} from top to bottom", join_and(&top_down))
        });
    }
    let mut s = join_and(&clauses);
    if let Some(first) = s.get(0..1) {
        s.replace_range(0..1, &first.to_uppercase());
    }
    s + "."
}

fn join_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
    }
}

/// Blocksworld case with `n_blocks` distinctly coloured blocks.
pub fn generate_blocksworld_case(n_blocks: usize, seed: u64) -> Result<ProblemCase, GeneratorError> {
    check_count("n_blocks", n_blocks, 2, BLOCK_COLORS.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = index::sample(&mut rng, BLOCK_COLORS.len(), n_blocks).into_vec();
    picked.sort_unstable();
    let colors: Vec<&str> = picked.iter().map(|&i| BLOCK_COLORS[i]).collect();
    let names: Vec<Name> = colors.iter().map(|c| block_name(c)).collect();
    let blocks: Vec<usize> = (0..n_blocks).collect();

    let start = random_stacking(&blocks, &mut rng);
    let init_on = on_facts(&start, &names);
    let goal_towers = loop {
        let g = random_stacking(&blocks, &mut rng);
        let on = on_facts(&g, &names);
        if !on.is_empty() && !on.iter().all(|a| init_on.contains(a)) {
            break g;
        }
    };

    let robot = "robot";
    let mut init: Vec<Atom> = vec![Atom::ground("handempty", &[robot])];
    init.extend(init_on);
    for t in &start {
        init.push(Atom::ground("ontable", &[names[t[0]].as_str()]));
        init.push(Atom::ground("clear", &[names[*t.last().expect("towers are non-empty")].as_str()]));
    }
    let mut objects: Vec<TypedObject> = names.iter().map(|n| TypedObject::new(n.clone(), name("block"))).collect();
    objects.push(TypedObject::new(name(robot), name("robot")));
    let goal: Condition = on_facts(&goal_towers, &names).into_iter().collect();

    // Towers left to right, blocks 40 px square, stacked upwards from y = 400.
    let mut detections = Vec::new();
    let mut captions = BTreeMap::new();
    for (ti, t) in start.iter().enumerate() {
        let x = 20.0 + 85.0 * ti as f64;
        for (level, &b) in t.iter().enumerate() {
            let y = 400.0 - 40.0 * (level + 1) as f64;
            let support = if level == 0 {
                "on the table".to_string()
            } else {
                format!("on top of the {} block", colors[t[level - 1]])
            };
            captions.insert(detections.len(), format!("a {} block {support}", colors[b]));
            detections.push(Detection::new(
                &format!("{} toy block", colors[b]),
                BoundingBox::new(x, y, 40.0, 40.0),
                SCORE,
            ));
        }
    }

    let id = format!("bw-n{n_blocks}-s{seed}");
    let case = ProblemCase {
        id: id.clone(),
        instruction: describe_goal(&goal_towers, &colors),
        scene: SceneAnnotation {
            image: format!("{id}.png"),
            width: IMAGE_W,
            height: IMAGE_H,
            detections,
            captions,
        },
        ground_truth: Problem {
            name: name(&id),
            domain_name: name("blocksworld"),
            objects: ordered_like_knowledge(objects, &blocksworld_knowledge()),
            init: init.into_iter().collect(),
            goal,
        },
    };
    verified(case, &blocksworld_domain(), &blocksworld_knowledge())
}

fn ordered_like_knowledge(mut objects: Vec<TypedObject>, k: &DomainKnowledge) -> Vec<TypedObject> {
    let rank = |o: &TypedObject| {
        k.query_elaborations
            .keys()
            .position(|c| o.name.as_str().starts_with(c.as_str()))
            .unwrap_or(usize::MAX)
    };
    objects.sort_by_key(|o| rank(o));
    objects
}

fn verified(case: ProblemCase, domain: &Domain, k: &DomainKnowledge) -> Result<ProblemCase, GeneratorError> {
    match verify_case(domain, k, &case, &SearchConfig::default()) {
        None => Ok(case),
        Some(reason) => Err(GeneratorError::Unverified(format!("{}: {reason}", case.id))),
    }
}

fn disk_class(color: &str) -> Name {
    name(&format!("{color}_disk"))
}

pub fn hanoi_knowledge() -> DomainKnowledge {
    let mut query: IndexMap<Name, String> =
        DISK_COLORS.iter().map(|c| (disk_class(c), format!("{c} disk"))).collect();
    query.insert(name("peg"), "wooden peg".into());
    let mut types: IndexMap<Name, Name> = DISK_COLORS.iter().map(|c| (disk_class(c), name("disk"))).collect();
    types.insert(name("peg"), name("peg"));
    let mut rules: IndexMap<Name, NamingRule> = DISK_COLORS
        .iter()
        .map(|c| (disk_class(c), NamingRule::NumberByIncreasingWidth))
        .collect();
    rules.insert(name("peg"), NamingRule::NumberLeftToRight);
    DomainKnowledge {
        query_elaborations: query,
        type_map: types,
        fixed_objects: Vec::new(),
        naming_rules: rules,
        example_pool: Vec::new(),
    }
}

const PEG_X: [f64; 3] = [120.0, 320.0, 520.0];
const DISK_H: f64 = 15.0;
const BASE_Y: f64 = 380.0;

fn disk_width(size: usize) -> f64 {
    30.0 + 12.0 * size as f64
}

/// Hanoi case with disks spread randomly over three pegs.
pub fn generate_hanoi_case(n_disks: usize, n_pegs: usize, seed: u64) -> Result<ProblemCase, GeneratorError> {
    check_count("n_pegs", n_pegs, 3, 3)?;
    check_count("n_disks", n_disks, 1, 10)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let colors = disk_colors(n_disks, &mut rng);
    let placement = loop {
        let p: Vec<usize> = (0..n_disks).map(|_| rng.random_range(0..3)).collect();
        if p.iter().any(|&peg| peg != 2) {
            break p;
        }
    };
    hanoi_case(format!("hanoi-n{n_disks}-s{seed}"), &colors, &placement)
}

/// Hanoi case with every disk on the leftmost peg.
pub fn hanoi_canonical_case(n_disks: usize, seed: u64) -> Result<ProblemCase, GeneratorError> {
    check_count("n_disks", n_disks, 1, 10)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let colors = disk_colors(n_disks, &mut rng);
    hanoi_case(format!("hanoi-n{n_disks}-canonical-s{seed}"), &colors, &vec![0; n_disks])
}

/// Colour per disk size, smallest first.
fn disk_colors(n: usize, rng: &mut ChaCha8Rng) -> Vec<&'static str> {
    (0..n).map(|_| *DISK_COLORS.choose(rng).expect("non-empty")).collect()
}

fn hanoi_case(id: String, colors: &[&str], placement: &[usize]) -> Result<ProblemCase, GeneratorError> {
    let n = colors.len();
    // Disk names: colour plus rank by width among disks of that colour.
    let mut per_color: BTreeMap<&str, usize> = BTreeMap::new();
    let disks: Vec<Name> = colors
        .iter()
        .map(|c| {
            let k = per_color.entry(c).or_default();
            *k += 1;
            name(&format!("{c}_disk{k}"))
        })
        .collect();
    let pegs: Vec<Name> = (1..=3).map(|i| name(&format!("peg{i}"))).collect();

    let mut init: Vec<Atom> = Vec::new();
    for d in &disks {
        for p in &pegs {
            init.push(Atom::ground("smaller", &[d.as_str(), p.as_str()]));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            init.push(Atom::ground("smaller", &[disks[i].as_str(), disks[j].as_str()]));
        }
    }

    let mut detections = Vec::new();
    let mut captions = BTreeMap::new();
    for (p, peg) in pegs.iter().enumerate() {
        // Largest disk at the bottom.
        let stack: Vec<usize> = (0..n).rev().filter(|&d| placement[d] == p).collect();
        let mut below = peg;
        for (level, &d) in stack.iter().enumerate() {
            init.push(Atom::ground("on", &[disks[d].as_str(), below.as_str()]));
            below = &disks[d];
            let w = disk_width(d);
            let y = BASE_Y - DISK_H * (level + 1) as f64;
            captions.insert(detections.len(), format!("a {} ring-shaped disk", colors[d]));
            detections.push(Detection::new(
                &format!("{} disk", colors[d]),
                BoundingBox::new(PEG_X[p] - w / 2.0, y, w, DISK_H),
                SCORE,
            ));
        }
        init.push(Atom::ground("clear", &[below.as_str()]));
        captions.insert(detections.len(), "a vertical wooden peg".to_string());
        detections.push(Detection::new(
            "wooden peg",
            BoundingBox::new(PEG_X[p] - 5.0, BASE_Y - 200.0, 10.0, 200.0),
            SCORE,
        ));
    }

    let mut goal = Condition::new();
    goal.push(crate::pddl::Literal::pos(Atom::ground("on", &[disks[n - 1].as_str(), "peg3"])));
    for d in (0..n - 1).rev() {
        goal.push(crate::pddl::Literal::pos(Atom::ground(
            "on",
            &[disks[d].as_str(), disks[d + 1].as_str()],
        )));
    }

    let k = hanoi_knowledge();
    let mut objects: Vec<TypedObject> = disks.iter().map(|d| TypedObject::new(d.clone(), name("disk"))).collect();
    objects.extend(pegs.iter().map(|p| TypedObject::new(p.clone(), name("peg"))));
    // Class order from the knowledge, width order within a colour.
    objects.sort_by_key(|o| {
        let class = k
            .query_elaborations
            .keys()
            .position(|c| o.name.as_str().starts_with(c.as_str()))
            .unwrap_or(usize::MAX);
        (class, o.name.as_str().len(), o.name.clone())
    });

    let case = ProblemCase {
        id: id.clone(),
        instruction: HANOI_INSTRUCTION.to_string(),
        scene: SceneAnnotation {
            image: format!("{id}.png"),
            width: IMAGE_W,
            height: IMAGE_H,
            detections,
            captions,
        },
        ground_truth: Problem {
            name: name(&id),
            domain_name: name("hanoi"),
            objects,
            init: init.into_iter().collect(),
            goal,
        },
    };
    verified(case, &hanoi_domain(), &k)
}

/// Plan length for a case under BFS, for tests and scaffolding checks.
pub fn optimal_length(case: &ProblemCase, domain: &Domain) -> Option<usize> {
    plan(domain, &case.ground_truth, &SearchConfig::bfs())
        .ok()?
        .plan()
        .map(|p| p.len())
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::pddl::print_problem;
    use crate::scene::detections_to_objects;

    #[test]
    fn lah_numbers() {
        // Row n = 4 of the unsigned Lah triangle.
        let row: Vec<u128> = (1..=4).map(|k| lah(4, k)).collect();
        assert_eq!(row, [24, 36, 12, 1]);
        // Total stackings of 3 blocks by direct enumeration: 6 + 6 + 1.
        assert_eq!((1..=3).map(|k| lah(3, k)).sum::<u128>(), 13);
    }

    #[test]
    fn stackings_are_uniform() {
        // 3 blocks have 13 stackings; check all are hit with similar frequency.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts: BTreeMap<Vec<Vec<usize>>, usize> = BTreeMap::new();
        let draws = 13_000;
        for _ in 0..draws {
            let mut t = random_stacking(&[0, 1, 2], &mut rng);
            t.sort();
            *counts.entry(t).or_default() += 1;
        }
        assert_eq!(counts.len(), 13);
        for (k, &c) in &counts {
            assert!((800..1200).contains(&c), "{k:?} drawn {c} times");
        }
    }

    #[test]
    fn blocksworld_is_deterministic() {
        let a = generate_blocksworld_case(3, 11).unwrap();
        let b = generate_blocksworld_case(3, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(print_problem(&a.ground_truth), print_problem(&b.ground_truth));
    }

    #[test]
    fn blocksworld_seven_blocks() {
        let c = generate_blocksworld_case(7, 3).unwrap();
        assert_eq!(c.ground_truth.objects.len(), 8);
        assert!(c.ground_truth.init.contains(&Atom::ground("handempty", &["robot"])));
        assert!(c.ground_truth.goal.atoms().all(|a| a.predicate == "on"));
        let names: HashSet<_> = c.ground_truth.objects.iter().map(|o| o.name.clone()).collect();
        assert_eq!(names.len(), 8);
    }

    #[test]
    fn blocksworld_rejects_bad_counts() {
        assert!(matches!(generate_blocksworld_case(1, 0), Err(GeneratorError::BadCount { .. })));
        assert!(matches!(generate_blocksworld_case(8, 0), Err(GeneratorError::BadCount { .. })));
    }

    #[test]
    fn stacked_blocks_share_x() {
        let c = generate_blocksworld_case(5, 2).unwrap();
        let named = crate::scene::assign_names(&c.scene, &blocksworld_knowledge()).unwrap();
        let bbox = |n: &str| named.iter().find(|d| d.object.name == n).unwrap().bbox;
        for a in c.ground_truth.init.iter().filter(|a| a.predicate == "on") {
            let (upper, lower) = (bbox(a.args[0].name().as_str()), bbox(a.args[1].name().as_str()));
            assert_eq!(upper.x, lower.x);
            assert!(upper.y < lower.y);
        }
    }

    #[test]
    fn hanoi_canonical_three_needs_seven_moves() {
        let c = hanoi_canonical_case(3, 0).unwrap();
        assert_eq!(optimal_length(&c, &hanoi_domain()), Some(7));
    }

    #[test]
    fn hanoi_init_is_legal() {
        for seed in 0..20 {
            let c = generate_hanoi_case(6, 3, seed).unwrap();
            let p = &c.ground_truth;
            for a in p.init.iter().filter(|a| a.predicate == "on") {
                let (upper, lower) = (&a.args[0], &a.args[1]);
                let smaller = Atom::new(name("smaller"), vec![upper.clone(), lower.clone()]);
                assert!(p.init.contains(&smaller), "{a} places a larger disk on a smaller one");
            }
        }
    }

    #[test]
    fn hanoi_names_follow_width_and_position() {
        for seed in 0..20 {
            let c = generate_hanoi_case(10, 3, seed).unwrap();
            let objects = detections_to_objects(&c.scene, &hanoi_knowledge()).unwrap();
            assert_eq!(objects, c.ground_truth.objects);
        }
    }

    #[test]
    fn hanoi_rejects_bad_counts() {
        assert!(generate_hanoi_case(0, 3, 0).is_err());
        assert!(generate_hanoi_case(11, 3, 0).is_err());
        assert!(generate_hanoi_case(3, 4, 0).is_err());
    }
}
