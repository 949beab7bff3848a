use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::ProblemCase;

use super::PipelineError;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn combination_count(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    acc
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
fn unrank(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut x = 0;
    for i in 0..k {
        loop {
            let c = combination_count(n - x - 1, k - i - 1);
            if rank < c {
                out.push(x);
                x += 1;
                break;
            }
            rank -= c;
            x += 1;
        }
    }
    out
}

pub(super) fn seeded_index(seed: u64) -> u64 {
    ChaCha8Rng::seed_from_u64(seed).random()
}

/// Combination number `index mod C(m, k)` of the pool without `exclude`,
/// counting combinations in lexicographic order of pool positions.
pub fn select_examples<'p>(
    pool: &'p [ProblemCase],
    k: usize,
    index: u64,
    exclude: Option<&str>,
) -> Result<Vec<&'p ProblemCase>, PipelineError> {
    let usable: Vec<&ProblemCase> = pool.iter().filter(|c| Some(c.id.as_str()) != exclude).collect();
    if usable.len() < k {
        return Err(PipelineError::PoolTooSmall {
            available: usable.len(),
            k,
        });
    }
    let total = combination_count(usable.len(), k);
    let rank = index as u128 % total;
    Ok(unrank(usable.len(), k, rank).into_iter().map(|i| usable[i]).collect())
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, HashSet};

    use super::*;
    use crate::pddl::{name, Condition, Problem};
    use crate::scene::SceneAnnotation;

    fn case(id: &str) -> ProblemCase {
        ProblemCase {
            id: id.into(),
            instruction: String::new(),
            scene: SceneAnnotation {
                image: String::new(),
                width: 1.0,
                height: 1.0,
                detections: vec![],
                captions: BTreeMap::new(),
            },
            ground_truth: Problem {
                name: name("p"),
                domain_name: name("d"),
                objects: vec![],
                init: Default::default(),
                goal: Condition::new(),
            },
        }
    }

    fn pool(n: usize) -> Vec<ProblemCase> {
        (0..n).map(|i| case(&format!("c{i}"))).collect()
    }

    /// Lexicographic k-subsets by nested enumeration, as an oracle.
    fn all_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                go(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(0, n, k, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn nine_choose_three_is_a_bijection() {
        let p = pool(10);
        let oracle = all_subsets(9, 3);
        assert_eq!(oracle.len(), 84);
        assert_eq!(combination_count(9, 3), 84);
        let mut seen = HashSet::new();
        for idx in 0..84u64 {
            let sel: Vec<String> = select_examples(&p, 3, idx, Some("c4"))
                .unwrap()
                .iter()
                .map(|c| c.id.clone())
                .collect();
            // Positions in the pool with c4 removed.
            let usable: Vec<&str> = ["c0", "c1", "c2", "c3", "c5", "c6", "c7", "c8", "c9"].to_vec();
            let expect: Vec<String> = oracle[idx as usize].iter().map(|&i| usable[i].to_string()).collect();
            assert_eq!(sel, expect);
            assert!(seen.insert(sel));
        }
        let wrapped: Vec<String> = select_examples(&p, 3, 84, Some("c4")).unwrap().iter().map(|c| c.id.clone()).collect();
        assert_eq!(wrapped, ["c0", "c1", "c2"]);
    }

    #[test]
    fn zero_examples() {
        assert!(select_examples(&pool(3), 0, 17, None).unwrap().is_empty());
    }

    #[test]
    fn deterministic() {
        let p = pool(6);
        assert_eq!(
            select_examples(&p, 2, 5, None).unwrap(),
            select_examples(&p, 2, 5, None).unwrap()
        );
    }

    #[test]
    fn pool_too_small() {
        assert_eq!(
            select_examples(&pool(3), 3, 0, Some("c1")),
            Err(PipelineError::PoolTooSmall { available: 2, k: 3 })
        );
    }
}
