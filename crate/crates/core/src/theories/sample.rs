//! Seeded generators of finite substructures and the axiom validator.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Point, Rel, RelationId, SampleParams, TheoryId, TheorySample};
use crate::error::{DpError, Result};

/// Generates a sample of `size` points, deterministic in `seed`.
///
/// DLO ranks are `0..size`. DDLO pairs the identity order with a seeded
/// permutation. EQTREE uses layered refinement: the cells at level `n` are the
/// common refinement of every partition above it, and each relation at level
/// `n` splits every cell into `min(b, |cell|)` classes. EQTREE_REV runs the
/// same procedure from the lowest level upward.
pub fn sample(
    theory: TheoryId,
    size: usize,
    seed: u64,
    level: Option<u32>,
    branching: Option<u32>,
) -> Result<TheorySample> {
    if size == 0 {
        return Err(DpError::domain("sample size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = SampleParams {
        size,
        seed,
        level: None,
        branching: None,
    };
    match theory {
        TheoryId::Dlo => Ok(TheorySample::new(
            theory,
            params,
            (0..size as i64).map(|rank| Point::Dlo { rank }).collect(),
        )),
        TheoryId::Ddlo => {
            let mut perm: Vec<i64> = (0..size as i64).collect();
            perm.shuffle(&mut rng);
            Ok(TheorySample::new(
                theory,
                params,
                perm.into_iter()
                    .enumerate()
                    .map(|(i, rank2)| Point::Ddlo {
                        rank1: i as i64,
                        rank2,
                    })
                    .collect(),
            ))
        }
        TheoryId::Eqtree | TheoryId::EqtreeRev => {
            let levels = level.ok_or_else(|| DpError::domain("equivalence theories need a level L"))?;
            let b = branching.ok_or_else(|| DpError::domain("equivalence theories need a branching b"))?;
            if levels < 2 || b < 2 {
                return Err(DpError::domain(format!("need L >= 2 and b >= 2, got L = {levels}, b = {b}")));
            }
            let classes = layered_classes(size, levels, b as usize, theory == TheoryId::EqtreeRev, &mut rng);
            let points = (0..size)
                .map(|i| Point::Eqtree {
                    id: i as u32,
                    classes: classes.iter().map(|rel| rel[i]).collect(),
                })
                .collect();
            Ok(TheorySample::new(
                theory,
                SampleParams {
                    level: Some(levels),
                    branching: Some(b),
                    ..params
                },
                points,
            ))
        }
    }
}

/// `result[r][i]` = class of point `i` at relation index `r`.
fn layered_classes(
    size: usize,
    levels: u32,
    b: usize,
    reversed: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<u32>> {
    let rel_count = RelationId::count_below(levels);
    let mut classes = vec![vec![0u32; size]; rel_count];
    // cell[i] identifies the cell of point i at the current level
    let mut cell = vec![0u32; size];
    let order: Vec<u32> = if reversed {
        (1..levels).collect()
    } else {
        (1..levels).rev().collect()
    };
    for n in order {
        let mut cells: Vec<Vec<usize>> = group_by_key(&cell);
        for m in 0..n {
            let r = RelationId { m, n }.index();
            let mut next_id = 0u32;
            for members in cells.iter_mut() {
                members.shuffle(rng);
                let k = b.min(members.len());
                for (pos, &p) in members.iter().enumerate() {
                    classes[r][p] = next_id + (pos % k) as u32;
                }
                next_id += k as u32;
            }
            canonicalize(&mut classes[r]);
        }
        // refine cells by every relation at this level
        let keys: Vec<Vec<u32>> = (0..size)
            .map(|p| {
                let mut key = vec![cell[p]];
                key.extend((0..n).map(|m| classes[RelationId { m, n }.index()][p]));
                key
            })
            .collect();
        cell = canonical_ids(&keys);
    }
    classes
}

fn group_by_key(key: &[u32]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut seen = std::collections::HashMap::new();
    for (i, k) in key.iter().enumerate() {
        let g = *seen.entry(*k).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    groups
}

/// Renumbers ids by first appearance in point order.
fn canonicalize(ids: &mut [u32]) {
    let fresh = canonical_ids(ids);
    ids.copy_from_slice(&fresh);
}

fn canonical_ids<K: Eq + std::hash::Hash + Clone>(keys: &[K]) -> Vec<u32> {
    let mut map = std::collections::HashMap::new();
    keys.iter()
        .map(|k| {
            let next = map.len() as u32;
            *map.entry(k.clone()).or_insert(next)
        })
        .collect()
}

/// `n` pairwise incomparable relations, all of level `n`: `(0,n) … (n−1,n)`.
pub fn incomparable_relations(levels: u32, n: u32) -> Result<Vec<RelationId>> {
    if n == 0 || n >= levels {
        return Err(DpError::domain(format!(
            "level {n} is not available below truncation L = {levels}"
        )));
    }
    Ok((0..n).map(|m| RelationId { m, n }).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub ok: bool,
    pub violation: Option<String>,
}

impl Validation {
    fn pass() -> Self {
        Validation {
            ok: true,
            violation: None,
        }
    }

    fn fail(msg: String) -> Self {
        Validation {
            ok: false,
            violation: Some(msg),
        }
    }
}

/// Checks every sample invariant; reports the first violation found.
pub fn validate(sample: &TheorySample) -> Validation {
    if let Some(i) = sample.points.iter().position(|p| !p.theory_matches(sample.theory)) {
        return Validation::fail(format!("point {i} does not match theory {}", sample.theory));
    }
    let pts = &sample.points;
    match sample.theory {
        TheoryId::Dlo => {
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    if pts[i] == pts[j] {
                        return Validation::fail(format!("points {i} and {j} share a rank"));
                    }
                }
            }
            Validation::pass()
        }
        TheoryId::Ddlo => {
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    for rel in [Rel::Lt1, Rel::Lt2] {
                        if pts[i].rank(rel) == pts[j].rank(rel) {
                            return Validation::fail(format!(
                                "points {i} and {j} share a rank in {rel}"
                            ));
                        }
                    }
                }
            }
            Validation::pass()
        }
        TheoryId::Eqtree | TheoryId::EqtreeRev => validate_nesting(sample),
    }
}

fn validate_nesting(sample: &TheorySample) -> Validation {
    let Some(levels) = sample.params.level else {
        return Validation::fail("equivalence sample without level L".into());
    };
    let rel_count = RelationId::count_below(levels);
    let mut ids = std::collections::HashSet::new();
    for (i, p) in sample.points.iter().enumerate() {
        if let Point::Eqtree { id, classes } = p {
            if classes.len() != rel_count {
                return Validation::fail(format!(
                    "point {i} carries {} classes, expected {rel_count}",
                    classes.len()
                ));
            }
            if !ids.insert(*id) {
                return Validation::fail(format!("point {i} repeats id {id}"));
            }
        }
    }
    let reversed = sample.theory == TheoryId::EqtreeRev;
    let rels: Vec<RelationId> = (0..rel_count).map(RelationId::from_index).collect();
    let class = |p: &Point, r: RelationId| match p {
        Point::Eqtree { classes, .. } => classes[r.index()],
        _ => unreachable!(),
    };
    for (i, p) in sample.points.iter().enumerate() {
        for (j, q) in sample.points.iter().enumerate().skip(i + 1) {
            for &s in &rels {
                for &t in &rels {
                    if s.level() >= t.level() {
                        continue;
                    }
                    // forward: E_s ⊆ E_t; reversed: E_t ⊆ E_s
                    let (fine, coarse) = if reversed { (t, s) } else { (s, t) };
                    if class(p, fine) == class(q, fine) && class(p, coarse) != class(q, coarse) {
                        return Validation::fail(format!(
                            "points {i},{j}: equivalent at E{fine} but not at E{coarse}"
                        ));
                    }
                }
            }
        }
    }
    Validation::pass()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dlo_sample_is_fixed() {
        let s = sample(TheoryId::Dlo, 3, 7, None, None).unwrap();
        assert_eq!(
            s.points,
            vec![Point::Dlo { rank: 0 }, Point::Dlo { rank: 1 }, Point::Dlo { rank: 2 }]
        );
    }

    #[test]
    fn ddlo_second_order_is_a_permutation() {
        for seed in 0..20 {
            let s = sample(TheoryId::Ddlo, 4, seed, None, None).unwrap();
            let mut r2: Vec<i64> = s.points.iter().map(|p| p.rank(Rel::Lt2).unwrap()).collect();
            r2.sort();
            assert_eq!(r2, vec![0, 1, 2, 3]);
            assert!(validate(&s).ok);
        }
    }

    #[test]
    fn eqtree_samples_validate() {
        let s = sample(TheoryId::Eqtree, 16, 3, Some(3), Some(2)).unwrap();
        assert!(validate(&s).ok, "{:?}", validate(&s));
        for theory in [TheoryId::Eqtree, TheoryId::EqtreeRev] {
            for (size, l, b) in [(1, 2, 2), (7, 4, 3), (30, 5, 2), (12, 3, 5)] {
                for seed in 0..4 {
                    let s = sample(theory, size, seed, Some(l), Some(b)).unwrap();
                    assert!(validate(&s).ok, "{theory} {size} {l} {b} {seed}: {:?}", validate(&s));
                }
            }
        }
    }

    #[test]
    fn finest_class_implies_every_higher_relation() {
        let s = sample(TheoryId::Eqtree, 24, 9, Some(4), Some(2)).unwrap();
        let finest = RelationId { m: 0, n: 1 };
        for i in 0..s.len() {
            for j in 0..s.len() {
                if s.holds(Rel::Equiv(finest), i, j).unwrap() {
                    for r in 0..RelationId::count_below(4) {
                        let t = RelationId::from_index(r);
                        if t.level() > 1 {
                            assert!(s.holds(Rel::Equiv(t), i, j).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn samples_are_seed_deterministic() {
        let a = sample(TheoryId::Eqtree, 20, 11, Some(4), Some(3)).unwrap();
        let b = sample(TheoryId::Eqtree, 20, 11, Some(4), Some(3)).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let back = TheorySample::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn invalid_parameters() {
        assert!(sample(TheoryId::Dlo, 0, 0, None, None).is_err());
        assert!(sample(TheoryId::Eqtree, 5, 0, Some(1), Some(2)).is_err());
        assert!(sample(TheoryId::Eqtree, 5, 0, Some(3), Some(1)).is_err());
        assert!(sample(TheoryId::Eqtree, 5, 0, None, Some(2)).is_err());
    }

    #[test]
    fn incomparable_relation_examples() {
        let rels = incomparable_relations(4, 3).unwrap();
        assert_eq!(
            rels,
            vec![RelationId { m: 0, n: 3 }, RelationId { m: 1, n: 3 }, RelationId { m: 2, n: 3 }]
        );
        assert_eq!(incomparable_relations(3, 1).unwrap(), vec![RelationId { m: 0, n: 1 }]);
        assert!(rels.iter().all(|r| r.level() == 3));
        for a in &rels {
            for b in &rels {
                assert!(a == b || !a.comparable(*b));
            }
        }
        assert!(incomparable_relations(3, 3).is_err());
        assert!(incomparable_relations(3, 0).is_err());
    }

    #[test]
    fn planted_violations_are_reported() {
        let mut s = sample(TheoryId::Eqtree, 2, 0, Some(3), Some(2)).unwrap();
        // (0,1) equal, (0,2) different: violates E_(0,1) ⊆ E_(0,2)
        let classes_a = vec![0, 0, 0];
        let classes_b = vec![0, 1, 1];
        s.points = vec![
            Point::Eqtree { id: 0, classes: classes_a },
            Point::Eqtree { id: 1, classes: classes_b },
        ];
        let v = validate(&s);
        assert!(!v.ok);
        assert!(v.violation.unwrap().contains("points 0,1"));

        let mut d = sample(TheoryId::Ddlo, 3, 0, None, None).unwrap();
        d.points[1] = Point::Ddlo { rank1: 0, rank2: 9 };
        assert!(!validate(&d).ok);
    }
}
