//! Δ-indiscernibility of finite sequences up to a bounded arity, mutual
//! indiscernibility of several sequences, and counting the sequences a new
//! element breaks.
//!
//! A Δ-formula `δ(x; y)` is read with its `y` slots filled by the
//! concatenation of `t` sequence entries (`t = ⌈|y| / width⌉`) and its `x`
//! slots filled by points of the base. The sequence is indiscernible when
//! every increasing `t`-tuple agrees with the first one, for every base
//! assignment and every `t ≤ m`.

use serde::{Deserialize, Serialize};

use crate::error::{DpError, Result};
use crate::setfam::for_each_combination;
use crate::theories::formula::eval;
use crate::theories::{Formula, Rel, RelationId, Slot, TheoryId, TheorySample};

/// Indexed tuples of sample points, all of one width.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sequence {
    pub tuples: Vec<Vec<usize>>,
}

impl Sequence {
    pub fn new(tuples: Vec<Vec<usize>>) -> Result<Self> {
        if let Some(first) = tuples.first() {
            let w = first.len();
            if w == 0 {
                return Err(DpError::domain("sequence entries must be non-empty tuples"));
            }
            if let Some(i) = tuples.iter().position(|t| t.len() != w) {
                return Err(DpError::domain(format!(
                    "entry {i} has width {}, expected {w}",
                    tuples[i].len()
                )));
            }
        }
        Ok(Sequence { tuples })
    }

    /// A sequence of single points.
    pub fn singletons(points: &[usize]) -> Self {
        Sequence {
            tuples: points.iter().map(|&p| vec![p]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn width(&self) -> usize {
        self.tuples.first().map_or(0, Vec::len)
    }

    pub fn points(&self) -> impl Iterator<Item = usize> + '_ {
        self.tuples.iter().flatten().copied()
    }

    /// The subsequence at the given positions.
    pub fn select(&self, positions: &[usize]) -> Result<Sequence> {
        let tuples = positions
            .iter()
            .map(|&i| {
                self.tuples
                    .get(i)
                    .cloned()
                    .ok_or_else(|| DpError::domain(format!("position {i} outside sequence of {}", self.len())))
            })
            .collect::<Result<_>>()?;
        Ok(Sequence { tuples })
    }

    fn check_points(&self, sample: &TheorySample) -> Result<()> {
        for p in self.points() {
            sample.point(p)?;
        }
        Ok(())
    }
}

/// The formulas indiscernibility is tested against.
#[derive(Clone, Debug, PartialEq)]
pub enum Delta {
    /// Every atom of the theory between entry coordinates, and between entry
    /// coordinates and one base point.
    Atomic,
    /// The given formulas together with their atoms.
    Formulas(Vec<Formula>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub formula: String,
    /// Base points bound to the `x` slots.
    pub base_args: Vec<usize>,
    /// Two increasing position tuples with different truth values.
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndiscernibilityReport {
    pub ok: bool,
    pub witness: Option<Witness>,
    pub arity_checked: usize,
}

/// One formula to test, with the number of entries its `y` slots consume.
struct Item {
    formula: Formula,
    entries: usize,
}

/// The relation symbols of a theory as seen by a sample.
pub fn relations(sample: &TheorySample) -> Vec<Rel> {
    match sample.theory {
        TheoryId::Dlo => vec![Rel::Lt1, Rel::Eq],
        TheoryId::Ddlo => vec![Rel::Lt1, Rel::Lt2, Rel::Eq],
        TheoryId::Eqtree | TheoryId::EqtreeRev => {
            let mut v = vec![Rel::Eq];
            v.extend((0..sample.relation_count()).map(|i| Rel::Equiv(RelationId::from_index(i))));
            v
        }
    }
}

fn items(sample: &TheorySample, delta: &Delta, width: usize, m: usize) -> Result<Vec<Item>> {
    let mut out = Vec::new();
    match delta {
        Delta::Atomic => {
            let rels = relations(sample);
            for t in 1..=m {
                let slots = t * width;
                // atoms touching the newest entry; smaller t covers the rest
                for i in 0..slots {
                    for j in 0..slots {
                        if i == j || (i.max(j) < (t - 1) * width) {
                            continue;
                        }
                        for &r in &rels {
                            if r == Rel::Eq && i > j {
                                continue;
                            }
                            out.push(Item {
                                formula: Formula::atom(r, Slot::Y(i), Slot::Y(j)),
                                entries: t,
                            });
                        }
                    }
                }
                if t == 1 {
                    for i in 0..width {
                        for &r in &rels {
                            out.push(Item {
                                formula: Formula::atom(r, Slot::Y(i), Slot::X(0)),
                                entries: 1,
                            });
                            if r != Rel::Eq {
                                out.push(Item {
                                    formula: Formula::atom(r, Slot::X(0), Slot::Y(i)),
                                    entries: 1,
                                });
                            }
                        }
                    }
                }
            }
        }
        Delta::Formulas(fs) => {
            let mut seen = Vec::new();
            for f in fs {
                f.check_language(sample.theory)?;
                let mut candidates = vec![f.clone()];
                candidates.extend(f.atoms().into_iter().map(|a| Formula::atom(a.rel, a.left, a.right)));
                for g in candidates {
                    if seen.contains(&g) {
                        continue;
                    }
                    let ya = g.y_arity();
                    if ya == 0 {
                        continue;
                    }
                    let entries = ya.div_ceil(width);
                    if entries <= m {
                        out.push(Item {
                            formula: g.clone(),
                            entries,
                        });
                    }
                    seen.push(g);
                }
            }
        }
    }
    Ok(out)
}

/// All tuples of length `k` drawn from `base` (with repetition), in
/// lexicographic order of positions.
fn base_tuples(base: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                base.iter().map(move |&b| {
                    let mut p = prefix.clone();
                    p.push(b);
                    p
                })
            })
            .collect();
    }
    out
}

/// Checks `seq` for Δ-indiscernibility over `base` up to arity `m`.
pub fn check(
    sample: &TheorySample,
    seq: &Sequence,
    base: &[usize],
    delta: &Delta,
    m: usize,
) -> Result<IndiscernibilityReport> {
    if m == 0 {
        return Err(DpError::domain("arity must be at least 1"));
    }
    seq.check_points(sample)?;
    for &b in base {
        sample.point(b)?;
    }
    let arity = m.min(seq.len());
    let mut report = IndiscernibilityReport {
        ok: true,
        witness: None,
        arity_checked: arity,
    };
    if arity == 0 {
        return Ok(report);
    }
    let width = seq.width();
    let mut best: Option<(Vec<usize>, Witness)> = None;
    for item in items(sample, delta, width, arity)? {
        let t = item.entries;
        let xa = item.formula.x_arity();
        if xa > 0 && base.is_empty() {
            continue;
        }
        let first: Vec<usize> = (0..t).collect();
        for xs in base_tuples(base, xa) {
            let value_at = |positions: &[usize]| -> Result<bool> {
                let ys: Vec<usize> = positions
                    .iter()
                    .flat_map(|&i| seq.tuples[i].iter().copied())
                    .collect();
                eval(&item.formula, sample, &xs, &ys)
            };
            let reference = value_at(&first)?;
            let mut failure: Option<Result<Vec<usize>>> = None;
            for_each_combination(seq.len(), t, |positions| match value_at(positions) {
                Ok(v) if v == reference => true,
                Ok(_) => {
                    failure = Some(Ok(positions.to_vec()));
                    false
                }
                Err(e) => {
                    failure = Some(Err(e));
                    false
                }
            });
            if let Some(found) = failure {
                let second = found?;
                // lexicographically first disagreement over all formulas
                let key: Vec<usize> = second.clone();
                if best.as_ref().map_or(true, |(k, _)| key < *k) {
                    best = Some((
                        key,
                        Witness {
                            formula: item.formula.to_string(),
                            base_args: xs.clone(),
                            first: first.clone(),
                            second,
                        },
                    ));
                }
            }
        }
    }
    if let Some((_, w)) = best {
        report.ok = false;
        report.witness = Some(w);
    }
    Ok(report)
}

/// Checks each sequence over the base together with all points of the others.
pub fn mutual_check(
    sample: &TheorySample,
    seqs: &[Sequence],
    base: &[usize],
    delta: &Delta,
    m: usize,
) -> Result<Vec<IndiscernibilityReport>> {
    (0..seqs.len())
        .map(|j| check(sample, &seqs[j], &others_base(seqs, j, base, &[]), delta, m))
        .collect()
}

fn others_base(seqs: &[Sequence], j: usize, base: &[usize], extra: &[usize]) -> Vec<usize> {
    let mut b: Vec<usize> = base.to_vec();
    b.extend_from_slice(extra);
    for (k, s) in seqs.iter().enumerate() {
        if k != j {
            b.extend(s.points());
        }
    }
    b.sort_unstable();
    b.dedup();
    b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrokenCount {
    pub count: usize,
    pub reports: Vec<IndiscernibilityReport>,
}

/// Number of mutually indiscernible sequences that stop being indiscernible
/// once `c` joins the base.
pub fn broken_count(
    sample: &TheorySample,
    seqs: &[Sequence],
    base: &[usize],
    c: &[usize],
    delta: &Delta,
    m: usize,
) -> Result<BrokenCount> {
    for (j, r) in mutual_check(sample, seqs, base, delta, m)?.iter().enumerate() {
        if !r.ok {
            return Err(DpError::contract(format!(
                "row {j} is not indiscernible over the base and the other rows: {:?}",
                r.witness
            )));
        }
    }
    let reports = (0..seqs.len())
        .map(|j| check(sample, &seqs[j], &others_base(seqs, j, base, c), delta, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(BrokenCount {
        count: reports.iter().filter(|r| !r.ok).count(),
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theories::{sample, Point, SampleParams};

    fn dlo(n: usize) -> TheorySample {
        sample(TheoryId::Dlo, n, 0, None, None).unwrap()
    }

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    #[test]
    fn increasing_dlo_is_order_indiscernible() {
        let s = dlo(10);
        let seq = Sequence::singletons(&[0, 2, 4, 6, 8]);
        let r = check(&s, &seq, &[], &Delta::Formulas(vec![f("y0 < y1")]), 2).unwrap();
        assert!(r.ok);
        assert!(check(&s, &seq, &[], &Delta::Atomic, 3).unwrap().ok);
    }

    #[test]
    fn inner_base_point_splits_the_sequence() {
        let s = dlo(10);
        let seq = Sequence::singletons(&[0, 2, 4, 6, 8]);
        let r = check(&s, &seq, &[5], &Delta::Formulas(vec![f("y0 < x")]), 1).unwrap();
        assert!(!r.ok);
        let w = r.witness.unwrap();
        assert_eq!(w.first, vec![0]);
        assert_eq!(w.second, vec![3]);
        assert_eq!(w.base_args, vec![5]);
        let g = f(&w.formula);
        let a = eval(&g, &s, &w.base_args, &[seq.tuples[0][0]]).unwrap();
        let b = eval(&g, &s, &w.base_args, &[seq.tuples[3][0]]).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn random_second_order_breaks_ddlo_sequence() {
        let mut failures = 0;
        for seed in 0..20 {
            let s = sample(TheoryId::Ddlo, 8, seed, None, None).unwrap();
            let r = check(&s, &Sequence::singletons(&(0..8).collect::<Vec<_>>()), &[], &Delta::Formulas(vec![f("y0 <2 y1")]), 2)
                .unwrap();
            failures += usize::from(!r.ok);
        }
        assert_eq!(failures, 20);
    }

    #[test]
    fn interleaved_halves_are_not_mutually_indiscernible() {
        let s = dlo(8);
        let seqs = [
            Sequence::singletons(&[0, 2, 4, 6]),
            Sequence::singletons(&[1, 3, 5, 7]),
        ];
        let r = mutual_check(&s, &seqs, &[], &Delta::Atomic, 2).unwrap();
        assert!(r.iter().all(|r| !r.ok));
        let one = mutual_check(&s, &seqs[..1], &[], &Delta::Atomic, 2).unwrap();
        assert_eq!(one[0], check(&s, &seqs[0], &[], &Delta::Atomic, 2).unwrap());
    }

    #[test]
    fn separated_runs_and_broken_count() {
        let s = dlo(12);
        let seqs = [
            Sequence::singletons(&[0, 1, 2, 3, 4]),
            Sequence::singletons(&[6, 7, 8, 9, 10]),
        ];
        assert!(mutual_check(&s, &seqs, &[], &Delta::Atomic, 3).unwrap().iter().all(|r| r.ok));
        // an element of one run breaks only that run
        let b = broken_count(&s, &seqs, &[], &[2], &Delta::Atomic, 3).unwrap();
        assert_eq!(b.count, 1);
        let b = broken_count(&s, &seqs, &[5], &[5], &Delta::Atomic, 3).unwrap();
        assert_eq!(b.count, 0);
        let bad = [seqs[0].clone(), Sequence::singletons(&[1, 5, 9])];
        assert!(matches!(
            broken_count(&s, &bad, &[], &[2], &Delta::Atomic, 3),
            Err(DpError::Contract(_))
        ));
    }

    #[test]
    fn arity_is_clamped_and_reported() {
        let s = dlo(4);
        let r = check(&s, &Sequence::singletons(&[0, 1]), &[], &Delta::Atomic, 3).unwrap();
        assert_eq!(r.arity_checked, 2);
        assert!(check(&s, &Sequence::singletons(&[0]), &[], &Delta::Atomic, 0).is_err());
        let d = TheorySample::new(
            TheoryId::Ddlo,
            SampleParams::default(),
            vec![Point::Ddlo { rank1: 0, rank2: 0 }],
        );
        assert!(check(&d, &Sequence::singletons(&[0]), &[], &Delta::Formulas(vec![f("y0 E(0,1) y1")]), 2).is_err());
    }
}
