//! Randomness patterns: rows of mutually indiscernible sequences with one
//! formula per row such that, for every choice `η` of one index per row,
//! "`φ_α` holds at the chosen entry of row `α` and fails at the others" is
//! consistent with the partial type. A verified pattern of depth `κ` is a
//! lower bound `κ` on the dp-rank of the type.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{DpError, Result};
use crate::indisc::{mutual_check, Delta, Sequence};
use crate::theories::oracle::{budget_from_env, ConstraintSet, Oracle};
use crate::theories::{
    incomparable_relations, Formula, Point, Prop, Rel, RelationId, SampleParams, Slot, TheoryId, TheorySample,
};

#[derive(Clone, Debug, PartialEq)]
pub struct PatternSpec {
    pub rows: Vec<Sequence>,
    pub formulas: Vec<Formula>,
    pub base: Vec<usize>,
    pub partial_type: ConstraintSet,
}

impl PatternSpec {
    pub fn new(rows: Vec<Sequence>, formulas: Vec<Formula>) -> Result<Self> {
        if rows.len() != formulas.len() {
            return Err(DpError::domain(format!(
                "{} rows but {} formulas",
                rows.len(),
                formulas.len()
            )));
        }
        Ok(PatternSpec {
            rows,
            formulas,
            base: Vec::new(),
            partial_type: ConstraintSet::default(),
        })
    }

    pub fn depth(&self) -> usize {
        self.rows.len()
    }

    /// Shared `x` arity of the row formulas.
    pub fn x_arity(&self) -> usize {
        self.formulas.iter().map(Formula::x_arity).max().unwrap_or(1).max(1)
    }

    /// Number of index assignments `η`.
    pub fn assignment_count(&self) -> u128 {
        self.rows.iter().map(|r| r.len() as u128).product()
    }

    /// The pattern without row `alpha`.
    pub fn without_row(&self, alpha: usize) -> PatternSpec {
        let mut s = self.clone();
        s.rows.remove(alpha);
        s.formulas.remove(alpha);
        s
    }

    /// Restricts every row to the given positions.
    pub fn restrict_rows(&self, positions: &[usize]) -> Result<PatternSpec> {
        let mut s = self.clone();
        s.rows = self
            .rows
            .iter()
            .map(|r| r.select(positions))
            .collect::<Result<_>>()?;
        Ok(s)
    }

    fn check_shape(&self, sample: &TheorySample) -> Result<()> {
        if self.rows.len() != self.formulas.len() {
            return Err(DpError::domain("rows and formulas differ in number"));
        }
        for (alpha, (row, f)) in self.rows.iter().zip(&self.formulas).enumerate() {
            f.check_language(sample.theory)?;
            if row.is_empty() {
                return Err(DpError::domain(format!("row {alpha} is empty")));
            }
            if f.y_arity() > row.width() {
                return Err(DpError::domain(format!(
                    "formula of row {alpha} needs {} parameters, entries have width {}",
                    f.y_arity(),
                    row.width()
                )));
            }
        }
        Ok(())
    }

    pub fn to_file(&self, sample_name: &str) -> SpecFile {
        SpecFile {
            sample: sample_name.to_string(),
            rows: self.rows.iter().map(|r| r.tuples.clone()).collect(),
            formulas: self.formulas.iter().map(|f| f.to_string()).collect(),
            base: self.base.clone(),
            partial_type: self.partial_type.clone(),
        }
    }

    pub fn from_file(file: &SpecFile) -> Result<Self> {
        let rows = file
            .rows
            .iter()
            .map(|r| Sequence::new(r.clone()))
            .collect::<Result<_>>()?;
        let formulas = file
            .formulas
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?;
        let mut spec = PatternSpec::new(rows, formulas)?;
        spec.base = file.base.clone();
        spec.partial_type = file.partial_type.clone();
        Ok(spec)
    }
}

/// On-disk form of a pattern: rows index into the named sample file and
/// formulas use the text syntax.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    pub sample: String,
    pub rows: Vec<Vec<Vec<usize>>>,
    pub formulas: Vec<String>,
    #[serde(default)]
    pub base: Vec<usize>,
    #[serde(default)]
    pub partial_type: ConstraintSet,
}

/// The conjuncts of `Γ_η` together with the partial type.
pub fn gamma(spec: &PatternSpec, eta: &[usize]) -> Result<Vec<Prop>> {
    if eta.len() != spec.depth() {
        return Err(DpError::domain(format!(
            "assignment has {} entries for depth {}",
            eta.len(),
            spec.depth()
        )));
    }
    let mut out = spec.partial_type.to_props();
    for (alpha, (&e, row)) in eta.iter().zip(&spec.rows).enumerate() {
        if e >= row.len() {
            return Err(DpError::domain(format!(
                "index {e} outside row {alpha} of length {}",
                row.len()
            )));
        }
        let f = &spec.formulas[alpha];
        for (i, params) in row.tuples.iter().enumerate() {
            let p = instance(f, params, spec.x_arity())?;
            out.push(if i == e { p } else { p.not() });
        }
    }
    Ok(out)
}

fn instance(f: &Formula, params: &[usize], x_arity: usize) -> Result<Prop> {
    let xs: Vec<_> = (0..x_arity.max(f.x_arity())).map(crate::theories::Term::Var).collect();
    f.instantiate(&xs, params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternVerdict {
    pub verified: bool,
    pub depth: usize,
    pub mutual_ok: bool,
    /// Failing assignments in row-major lexicographic order.
    pub failures: Vec<Vec<usize>>,
    pub assignments_checked: u64,
    pub arity: usize,
}

/// Runs every `η` in row-major lexicographic order, stopping at the first
/// failure when `first_failure` is set.
fn check_assignments(
    sample: &TheorySample,
    spec: &PatternSpec,
    budget: u64,
    first_failure: bool,
) -> Result<(Vec<Vec<usize>>, u64)> {
    let total = spec.assignment_count();
    if total > budget as u128 {
        return Err(DpError::resource(format!(
            "{total} index assignments exceed the budget of {budget}"
        )));
    }
    let oracle = Oracle::new(sample).with_budget(budget.saturating_mul(64));
    let mut failures = Vec::new();
    let mut checked = 0;
    if spec.depth() == 0 {
        let ok = oracle.dnf_consistent(&spec.partial_type.to_props())?;
        return Ok((if ok { vec![] } else { vec![vec![]] }, 1));
    }
    let lens: Vec<usize> = spec.rows.iter().map(Sequence::len).collect();
    let mut eta = vec![0; spec.depth()];
    loop {
        checked += 1;
        if !oracle.dnf_consistent(&gamma(spec, &eta)?)? {
            failures.push(eta.clone());
            if first_failure {
                break;
            }
        }
        let mut k = eta.len();
        loop {
            if k == 0 {
                return Ok((failures, checked));
            }
            k -= 1;
            eta[k] += 1;
            if eta[k] < lens[k] {
                break;
            }
            eta[k] = 0;
        }
    }
    Ok((failures, checked))
}

/// Checks mutual indiscernibility of the rows (atomic formulas up to arity
/// `m`) and consistency of every `Γ_η`.
pub fn verify(sample: &TheorySample, spec: &PatternSpec, m: usize) -> Result<PatternVerdict> {
    verify_with_budget(sample, spec, m, budget_from_env())
}

pub fn verify_with_budget(sample: &TheorySample, spec: &PatternSpec, m: usize, budget: u64) -> Result<PatternVerdict> {
    run_verify(sample, spec, m, budget, false)
}

fn run_verify(
    sample: &TheorySample,
    spec: &PatternSpec,
    m: usize,
    budget: u64,
    first_failure: bool,
) -> Result<PatternVerdict> {
    spec.check_shape(sample)?;
    let mutual_ok = mutual_check(sample, &spec.rows, &spec.base, &Delta::Atomic, m)?
        .iter()
        .all(|r| r.ok);
    let (failures, checked) = if mutual_ok || !first_failure {
        check_assignments(sample, spec, budget, first_failure)?
    } else {
        (Vec::new(), 0)
    };
    Ok(PatternVerdict {
        verified: mutual_ok && failures.is_empty(),
        depth: spec.depth(),
        mutual_ok,
        failures,
        assignments_checked: checked,
        arity: m,
    })
}

/// Rows available to a depth search, all over one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct RowPool {
    pub sample: TheorySample,
    pub rows: Vec<Sequence>,
}

fn ddlo_point(rank1: i64, rank2: i64) -> Point {
    Point::Ddlo { rank1, rank2 }
}

/// DDLO pool: `blocks` rows of `row_len` pairs each. Block `b` occupies the
/// `b`-th region of the first order and the reversed position in the second,
/// and is increasing in both, so each pair spans a non-empty interval in
/// both orders and distinct blocks are mutually indiscernible.
pub fn ddlo_pool(blocks: usize, row_len: usize) -> Result<RowPool> {
    if blocks == 0 || row_len == 0 {
        return Err(DpError::domain("pool needs at least one block of one entry"));
    }
    let per = 2 * row_len;
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for b in 0..blocks {
        let region1 = (b * per) as i64;
        let region2 = ((blocks - 1 - b) * per) as i64;
        let mut tuples = Vec::new();
        for i in 0..row_len {
            let mut pair = Vec::new();
            for j in 0..2 {
                let k = (2 * i + j) as i64;
                pair.push(points.len());
                points.push(ddlo_point(region1 + k, region2 + k));
            }
            tuples.push(pair);
        }
        rows.push(Sequence::new(tuples)?);
    }
    let sample = TheorySample::new(
        TheoryId::Ddlo,
        SampleParams {
            size: points.len(),
            ..Default::default()
        },
        points,
    );
    Ok(RowPool { sample, rows })
}

/// DLO pool: `blocks` increasing runs of `row_len` singletons in disjoint
/// regions.
pub fn dlo_pool(blocks: usize, row_len: usize) -> Result<RowPool> {
    if blocks == 0 || row_len == 0 {
        return Err(DpError::domain("pool needs at least one block of one entry"));
    }
    let n = blocks * row_len;
    let sample = TheorySample::new(
        TheoryId::Dlo,
        SampleParams {
            size: n,
            ..Default::default()
        },
        (0..n as i64).map(|rank| Point::Dlo { rank }).collect(),
    );
    let rows = (0..blocks)
        .map(|b| Sequence::singletons(&(b * row_len..(b + 1) * row_len).collect::<Vec<_>>()))
        .collect();
    Ok(RowPool { sample, rows })
}

/// The depth-`n` witness for the nested equivalence relations, truncated at
/// level `n + 1`, with a point `c` that breaks every row.
#[derive(Clone, Debug, PartialEq)]
pub struct EqtreeWitness {
    pub pool: RowPool,
    pub relations: Vec<RelationId>,
    pub formulas: Vec<Formula>,
    /// Index of the breaking point in the sample.
    pub c: usize,
}

impl EqtreeWitness {
    pub fn spec(&self) -> Result<PatternSpec> {
        PatternSpec::new(self.pool.rows.clone(), self.formulas.clone())
    }
}

/// Builds `n` rows `I_0 … I_{n-1}` of `row_len` singletons over the `n`
/// pairwise incomparable relations `s_i = (i, n)`. Elements of `I_i` lie in
/// distinct classes of `E_{s_i}`; at `s_j` (`j ≠ i`) every point outside
/// `I_j` shares one class. All relations below level `n` are the identity on
/// the sample. `c` joins `E_{s_i}`-class of the first element of each row.
pub fn eqtree_witness(theory: TheoryId, n: u32, row_len: usize) -> Result<EqtreeWitness> {
    if theory.is_order() {
        return Err(DpError::domain("the witness lives in an equivalence theory"));
    }
    if n == 0 || row_len == 0 {
        return Err(DpError::domain("need n >= 1 and row_len >= 1"));
    }
    let levels = n + 1;
    let relations = incomparable_relations(levels, n)?;
    let count = RelationId::count_below(levels);
    let rows_n = n as usize;
    let total = rows_n * row_len;
    // class id 0 is the shared class at each s_j; fresh ids are point ids + 1
    let mut points = Vec::new();
    for i in 0..rows_n {
        for k in 0..row_len {
            let id = (i * row_len + k) as u32;
            let mut classes: Vec<u32> = (0..count).map(|_| id + 1).collect();
            for (j, s) in relations.iter().enumerate() {
                classes[s.index()] = if j == i { id + 1 } else { 0 };
            }
            points.push(Point::Eqtree { id, classes });
        }
    }
    let c_id = total as u32;
    let mut c_classes: Vec<u32> = (0..count).map(|_| c_id + 1).collect();
    for (i, s) in relations.iter().enumerate() {
        c_classes[s.index()] = (i * row_len) as u32 + 1;
    }
    points.push(Point::Eqtree {
        id: c_id,
        classes: c_classes,
    });
    let sample = TheorySample::new(
        theory,
        SampleParams {
            size: points.len(),
            seed: 0,
            level: Some(levels),
            branching: None,
        },
        points,
    );
    let rows = (0..rows_n)
        .map(|i| Sequence::singletons(&(i * row_len..(i + 1) * row_len).collect::<Vec<_>>()))
        .collect();
    let formulas = relations
        .iter()
        .map(|&s| Formula::atom(Rel::Equiv(s), Slot::X(0), Slot::Y(0)))
        .collect();
    Ok(EqtreeWitness {
        pool: RowPool { sample, rows },
        relations,
        formulas,
        c: total,
    })
}

fn interval(rel: Rel, x: usize) -> Formula {
    Formula::and(vec![
        Formula::atom(rel, Slot::Y(0), Slot::X(x)),
        Formula::atom(rel, Slot::X(x), Slot::Y(1)),
    ])
}

/// The shipped formula library for a theory and realization arity (1 or 2).
///
/// DLO: cut atoms against one parameter. DDLO: the open interval between
/// the two coordinates of a pair, in either order, and cut atoms. EQTREE:
/// `x E_s y` for every relation below the truncation, highest level first.
pub fn library(sample: &TheorySample, x_arity: usize) -> Result<Vec<Formula>> {
    if !(1..=2).contains(&x_arity) {
        return Err(DpError::domain(format!("library covers |x| = 1 or 2, not {x_arity}")));
    }
    let mut out = Vec::new();
    for x in 0..x_arity {
        match sample.theory {
            TheoryId::Dlo => {
                out.push(Formula::atom(Rel::Eq, Slot::X(x), Slot::Y(0)));
                out.push(Formula::atom(Rel::Lt1, Slot::X(x), Slot::Y(0)));
                out.push(Formula::atom(Rel::Lt1, Slot::Y(0), Slot::X(x)));
            }
            TheoryId::Ddlo => {
                out.push(interval(Rel::Lt1, x));
                out.push(interval(Rel::Lt2, x));
                out.push(Formula::atom(Rel::Eq, Slot::X(x), Slot::Y(0)));
                for rel in [Rel::Lt1, Rel::Lt2] {
                    out.push(Formula::atom(rel, Slot::X(x), Slot::Y(0)));
                    out.push(Formula::atom(rel, Slot::Y(0), Slot::X(x)));
                }
            }
            TheoryId::Eqtree | TheoryId::EqtreeRev => {
                let mut rels: Vec<RelationId> = (0..sample.relation_count()).map(RelationId::from_index).collect();
                rels.sort_by_key(|r| (std::cmp::Reverse(r.n), r.m));
                for r in rels {
                    out.push(Formula::atom(Rel::Equiv(r), Slot::X(x), Slot::Y(0)));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub best: Option<PatternSpec>,
    pub verdict: Option<PatternVerdict>,
    /// Verify calls made at each depth (index 0 is depth 1).
    pub attempts: Vec<u64>,
    /// Whether the exhaustive phase covered every candidate up to `max_depth`.
    pub exhaustive: bool,
    pub note: String,
}

impl SearchResult {
    pub fn depth(&self) -> usize {
        self.best.as_ref().map_or(0, PatternSpec::depth)
    }
}

/// Searches for the deepest verified pattern built from pool rows (in
/// increasing order, each used once) paired with library formulas.
///
/// A greedy pass extends one row at a time with the first formula that keeps
/// the pattern verified; an exhaustive depth-first pass then covers every
/// combination, pruning extensions of unverified prefixes (deleting a row of
/// a verified pattern leaves a verified pattern). `max_checks` bounds the
/// number of verify calls in the exhaustive pass.
pub fn depth_search(
    pool: &RowPool,
    partial_type: &ConstraintSet,
    library: &[Formula],
    max_depth: usize,
    m: usize,
    max_checks: u64,
) -> Result<SearchResult> {
    if max_depth == 0 {
        return Err(DpError::domain("max_depth must be at least 1"));
    }
    let mut search = Search {
        pool,
        partial_type,
        library,
        max_depth: max_depth.min(pool.rows.len()),
        m,
        attempts: vec![0; max_depth],
        mutual: HashMap::new(),
        best: None,
        checks_left: max_checks,
    };
    // greedy
    let mut rows = Vec::new();
    let mut formulas = Vec::new();
    for r in 0..pool.rows.len() {
        if rows.len() == search.max_depth {
            break;
        }
        for f in 0..library.len() {
            rows.push(r);
            formulas.push(f);
            if search.try_spec(&rows, &formulas)? {
                break;
            }
            rows.pop();
            formulas.pop();
        }
    }
    let exhaustive = if search.depth() >= search.max_depth {
        false
    } else {
        search.dfs(&mut Vec::new(), &mut Vec::new())?
    };
    let depth = search.depth();
    let note = format!(
        "depth {depth} is a lower bound only; {} no verified pattern of depth {} among {} rows x {} formulas",
        if exhaustive { "exhaustive search found" } else { "search stopped early, so it does not show" },
        depth + 1,
        pool.rows.len(),
        library.len()
    );
    let (best, verdict) = match search.best {
        Some((s, v)) => (Some(s), Some(v)),
        None => (None, None),
    };
    Ok(SearchResult {
        best,
        verdict,
        attempts: search.attempts,
        exhaustive,
        note,
    })
}

struct Search<'a> {
    pool: &'a RowPool,
    partial_type: &'a ConstraintSet,
    library: &'a [Formula],
    max_depth: usize,
    m: usize,
    attempts: Vec<u64>,
    mutual: HashMap<Vec<usize>, bool>,
    best: Option<(PatternSpec, PatternVerdict)>,
    checks_left: u64,
}

impl Search<'_> {
    fn depth(&self) -> usize {
        self.best.as_ref().map_or(0, |(s, _)| s.depth())
    }

    fn try_spec(&mut self, rows: &[usize], formulas: &[usize]) -> Result<bool> {
        let f: Vec<Formula> = formulas.iter().map(|&i| self.library[i].clone()).collect();
        if rows.iter().zip(&f).any(|(&r, f)| f.y_arity() > self.pool.rows[r].width()) {
            return Ok(false);
        }
        self.attempts[rows.len() - 1] += 1;
        let mutual_ok = match self.mutual.get(rows) {
            Some(&ok) => ok,
            None => {
                let seqs: Vec<Sequence> = rows.iter().map(|&r| self.pool.rows[r].clone()).collect();
                let ok = mutual_check(&self.pool.sample, &seqs, &[], &Delta::Atomic, self.m)?
                    .iter()
                    .all(|r| r.ok);
                self.mutual.insert(rows.to_vec(), ok);
                ok
            }
        };
        if !mutual_ok {
            return Ok(false);
        }
        let mut spec = PatternSpec::new(rows.iter().map(|&r| self.pool.rows[r].clone()).collect(), f)?;
        spec.partial_type = self.partial_type.clone();
        let budget = budget_from_env();
        let (failures, checked) = check_assignments(&self.pool.sample, &spec, budget, true)?;
        if !failures.is_empty() {
            return Ok(false);
        }
        if spec.depth() > self.depth() {
            let verdict = PatternVerdict {
                verified: true,
                depth: spec.depth(),
                mutual_ok: true,
                failures: Vec::new(),
                assignments_checked: checked,
                arity: self.m,
            };
            self.best = Some((spec, verdict));
        }
        Ok(true)
    }

    /// Returns false if the check allowance ran out.
    fn dfs(&mut self, rows: &mut Vec<usize>, formulas: &mut Vec<usize>) -> Result<bool> {
        if rows.len() == self.max_depth {
            return Ok(true);
        }
        let start = rows.last().map_or(0, |r| r + 1);
        for r in start..self.pool.rows.len() {
            for f in 0..self.library.len() {
                if self.checks_left == 0 {
                    return Ok(false);
                }
                self.checks_left -= 1;
                rows.push(r);
                formulas.push(f);
                let ok = self.try_spec(rows, formulas)?;
                let complete = !ok || self.dfs(rows, formulas)?;
                rows.pop();
                formulas.pop();
                if !complete {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_shapes() {
        let pool = ddlo_pool(2, 2).unwrap();
        let phi = interval(Rel::Lt1, 0);
        let one = PatternSpec::new(vec![pool.rows[0].select(&[0]).unwrap()], vec![phi.clone()]).unwrap();
        assert_eq!(gamma(&one, &[0]).unwrap().len(), 1);
        let two = PatternSpec::new(pool.rows.clone(), vec![phi.clone(), interval(Rel::Lt2, 0)]).unwrap();
        let g = gamma(&two, &[0, 1]).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.iter().filter(|p| matches!(p, Prop::Not(_))).count(), 2);
        assert!(gamma(&two, &[0, 2]).is_err());
    }

    #[test]
    fn ddlo_depth_two_pattern_verifies() {
        let pool = ddlo_pool(2, 4).unwrap();
        let spec = PatternSpec::new(pool.rows.clone(), vec![interval(Rel::Lt1, 0), interval(Rel::Lt2, 0)]).unwrap();
        let v = verify(&pool.sample, &spec, 3).unwrap();
        assert!(v.verified, "{v:?}");
        assert_eq!(v.assignments_checked, 16);
    }

    #[test]
    fn same_row_twice_fails() {
        let pool = ddlo_pool(1, 3).unwrap();
        let phi = interval(Rel::Lt1, 0);
        let spec = PatternSpec::new(vec![pool.rows[0].clone(), pool.rows[0].clone()], vec![phi.clone(), phi]).unwrap();
        let v = verify(&pool.sample, &spec, 2).unwrap();
        assert!(!v.verified);
        assert!(!v.failures.is_empty());
    }

    #[test]
    fn eqtree_witness_verifies() {
        for n in 1..=4 {
            let w = eqtree_witness(TheoryId::Eqtree, n, 4).unwrap();
            assert!(crate::theories::validate(&w.pool.sample).ok);
            let v = verify(&w.pool.sample, &w.spec().unwrap(), 3).unwrap();
            assert!(v.verified, "n = {n}: {v:?}");
        }
    }

    #[test]
    fn sub_patterns_stay_verified() {
        let w = eqtree_witness(TheoryId::Eqtree, 3, 4).unwrap();
        let spec = w.spec().unwrap();
        for alpha in 0..3 {
            assert!(verify(&w.pool.sample, &spec.without_row(alpha), 3).unwrap().verified);
        }
        assert!(verify(&w.pool.sample, &spec.restrict_rows(&[1, 3]).unwrap(), 3).unwrap().verified);
        let mut rev = spec.clone();
        rev.rows.reverse();
        rev.formulas.reverse();
        assert!(verify(&w.pool.sample, &rev, 3).unwrap().verified);
    }

    #[test]
    fn budget_is_enforced() {
        let pool = ddlo_pool(2, 4).unwrap();
        let spec = PatternSpec::new(pool.rows.clone(), vec![interval(Rel::Lt1, 0), interval(Rel::Lt2, 0)]).unwrap();
        assert!(matches!(
            verify_with_budget(&pool.sample, &spec, 3, 10),
            Err(DpError::Resource(_))
        ));
    }

    #[test]
    fn searches_find_expected_depths() {
        let pool = dlo_pool(3, 4).unwrap();
        let lib = library(&pool.sample, 1).unwrap();
        let r = depth_search(&pool, &ConstraintSet::default(), &lib, 2, 2, 100_000).unwrap();
        assert_eq!(r.depth(), 1);
        assert!(r.exhaustive);

        let w = eqtree_witness(TheoryId::Eqtree, 3, 4).unwrap();
        let lib = library(&w.pool.sample, 1).unwrap();
        let r = depth_search(&w.pool, &ConstraintSet::default(), &lib, 3, 2, 100_000).unwrap();
        assert_eq!(r.depth(), 3);
    }

    #[test]
    fn spec_file_round_trip() {
        let pool = ddlo_pool(2, 3).unwrap();
        let spec = PatternSpec::new(pool.rows.clone(), vec![interval(Rel::Lt1, 0), interval(Rel::Lt2, 0)]).unwrap();
        let text = serde_json::to_string(&spec.to_file("pool.json")).unwrap();
        let back = PatternSpec::from_file(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
