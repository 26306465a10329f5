//! Constructions converting between the dp-rank witnesses: patterns to
//! definable subsets of an interleaved sequence, alternating traces to
//! patterns, and switch points to alternations of `φ(x, y0) ↔ φ(x, y1)`.

use serde::{Deserialize, Serialize};

use crate::error::{DpError, Result};
use crate::indisc::Sequence;
use crate::patterns::{verify, PatternSpec, PatternVerdict};
use crate::setfam::for_each_combination;
use crate::theories::formula::eval;
use crate::theories::oracle::{budget_from_env, ConstraintSet, Oracle, OracleState};
use crate::theories::{Formula, Prop, Term, TheorySample};

/// Longest sequence the oracle-mode alternation search accepts.
pub const MAX_ORACLE_SEQUENCE: usize = 14;

/// Number of adjacent positions with different truth values.
pub fn alternation_count(bits: &[bool]) -> usize {
    bits.windows(2).filter(|w| w[0] != w[1]).count()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchReport {
    /// Every `i` with `bits[i] != bits[i + 1]`.
    pub switch_indices: Vec<usize>,
    /// Switch points: flips that can be given pairwise disjoint straddling
    /// pairs `(i, i + 1)`. A one-position spike contributes two flips but one
    /// switch point.
    pub count: usize,
}

pub fn switch_report(bits: &[bool]) -> SwitchReport {
    let switch_indices: Vec<usize> = (0..bits.len().saturating_sub(1))
        .filter(|&i| bits[i] != bits[i + 1])
        .collect();
    let mut count = 0;
    let mut free_from = 0;
    for &i in &switch_indices {
        if i >= free_from {
            count += 1;
            free_from = i + 2;
        }
    }
    SwitchReport { switch_indices, count }
}

/// Truth values of `formula(x_args, entry)` along a sequence.
pub fn trace(sample: &TheorySample, formula: &Formula, seq: &Sequence, x_args: &[usize]) -> Result<Vec<bool>> {
    seq.tuples
        .iter()
        .map(|entry| eval(formula, sample, x_args, entry))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternationResult {
    pub max: usize,
    /// Maximizing trace (oracle mode) or the trace of the best candidate.
    pub witness: Vec<bool>,
    /// Index of the best candidate in pool mode.
    pub candidate: Option<usize>,
    pub explored: u64,
}

/// Largest alternation count of `formula(c, ·)` along `seq` over the given
/// candidate tuples `c`; ties go to the lowest candidate index.
pub fn alternation_search_pool(
    sample: &TheorySample,
    formula: &Formula,
    seq: &Sequence,
    candidates: &[Vec<usize>],
) -> Result<AlternationResult> {
    let mut best = AlternationResult {
        max: 0,
        witness: Vec::new(),
        candidate: None,
        explored: 0,
    };
    for (i, c) in candidates.iter().enumerate() {
        let t = trace(sample, formula, seq, c)?;
        let a = alternation_count(&t);
        best.explored += 1;
        if best.candidate.is_none() || a > best.max {
            best.max = a;
            best.witness = t;
            best.candidate = Some(i);
        }
    }
    Ok(best)
}

/// Largest alternation count realized in the model completion: searches sign
/// vectors along `seq`, keeping only prefixes the oracle accepts together
/// with the partial type.
pub fn alternation_search_oracle(
    sample: &TheorySample,
    formula: &Formula,
    seq: &Sequence,
    partial_type: &ConstraintSet,
) -> Result<AlternationResult> {
    if seq.len() > MAX_ORACLE_SEQUENCE {
        return Err(DpError::resource(format!(
            "oracle-mode search is limited to sequences of {MAX_ORACLE_SEQUENCE}, got {}",
            seq.len()
        )));
    }
    formula.check_language(sample.theory)?;
    let oracle = Oracle::new(sample);
    let props = seq
        .tuples
        .iter()
        .map(|e| formula.at(e))
        .collect::<Result<Vec<Prop>>>()?;
    let start = oracle.start(&partial_type.to_props())?;
    let mut search = AltSearch {
        oracle: &oracle,
        props: &props,
        best: None,
        bits: Vec::new(),
        explored: 0,
    };
    if start.is_consistent() {
        search.dfs(&start, 0)?;
    }
    let (max, witness) = search.best.unwrap_or((0, Vec::new()));
    Ok(AlternationResult {
        max,
        witness,
        candidate: None,
        explored: search.explored,
    })
}

struct AltSearch<'a, 'b> {
    oracle: &'a Oracle<'b>,
    props: &'a [Prop],
    best: Option<(usize, Vec<bool>)>,
    bits: Vec<bool>,
    explored: u64,
}

impl AltSearch<'_, '_> {
    fn dfs(&mut self, state: &OracleState, i: usize) -> Result<()> {
        let current = alternation_count(&self.bits);
        if i == self.props.len() {
            if self.best.as_ref().map_or(true, |(b, _)| current > *b) {
                self.best = Some((current, self.bits.clone()));
            }
            return Ok(());
        }
        let remaining = if i == 0 { self.props.len() - 1 } else { self.props.len() - i };
        if let Some((b, _)) = &self.best {
            if current + remaining <= *b {
                return Ok(());
            }
        }
        // trying the flipping sign first finds long alternations early
        let first = self.bits.last().map_or(true, |&b| !b);
        for sign in [first, !first] {
            self.explored += 1;
            let p = if sign { self.props[i].clone() } else { self.props[i].clone().not() };
            let next = self.oracle.extend(state, &p)?;
            if next.is_consistent() {
                self.bits.push(sign);
                self.dfs(&next, i + 1)?;
                self.bits.pop();
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Interleaved {
    /// `⋁_α φ_α(x, y_α)` with the rows' parameter blocks side by side.
    pub psi: Formula,
    /// Entry `j` concatenates entry `j` of every row.
    pub sequence: Sequence,
    /// Each `k`-subset of positions with whether `ψ` can hold exactly there.
    pub subsets: Vec<(Vec<usize>, bool)>,
}

impl Interleaved {
    pub fn all_definable(&self) -> bool {
        self.subsets.iter().all(|(_, ok)| *ok)
    }
}

/// Disjunction of the row formulas on consecutive parameter blocks of the
/// given widths.
pub fn block_disjunction(formulas: &[Formula], widths: &[usize]) -> Formula {
    let mut offset = 0;
    let mut parts = Vec::new();
    for (f, &w) in formulas.iter().zip(widths) {
        parts.push(f.shift_y(offset));
        offset += w;
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Formula::or(parts)
    }
}

/// From a pattern of depth `k` builds `ψ` and the column-interleaved
/// sequence, and checks for every `k`-subset `I′` of positions that some
/// realization of the partial type satisfies `ψ` exactly on `I′`.
pub fn pattern_to_interleaved(sample: &TheorySample, spec: &PatternSpec) -> Result<Interleaved> {
    let k = spec.depth();
    if k == 0 {
        return Err(DpError::domain("pattern has no rows"));
    }
    let n = spec.rows[0].len();
    if spec.rows.iter().any(|r| r.len() != n) {
        return Err(DpError::domain("rows of different lengths cannot be interleaved"));
    }
    if n < k {
        return Err(DpError::domain(format!("rows of length {n} are shorter than the depth {k}")));
    }
    let widths: Vec<usize> = spec.rows.iter().map(Sequence::width).collect();
    let psi = block_disjunction(&spec.formulas, &widths);
    let sequence = Sequence::new(
        (0..n)
            .map(|j| spec.rows.iter().flat_map(|r| r.tuples[j].iter().copied()).collect())
            .collect(),
    )?;
    let xs: Vec<Term> = (0..spec.x_arity()).map(Term::Var).collect();
    let instances = sequence
        .tuples
        .iter()
        .map(|e| psi.instantiate(&xs, e))
        .collect::<Result<Vec<Prop>>>()?;
    let oracle = Oracle::new(sample);
    let mut subsets = Vec::new();
    let mut failure = None;
    for_each_combination(n, k, |chosen| {
        let mut conj = spec.partial_type.to_props();
        for (j, p) in instances.iter().enumerate() {
            conj.push(if chosen.contains(&j) { p.clone() } else { p.clone().not() });
        }
        match oracle.dnf_consistent(&conj) {
            Ok(ok) => {
                subsets.push((chosen.to_vec(), ok));
                true
            }
            Err(e) => {
                failure = Some(e);
                false
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Interleaved { psi, sequence, subsets })
}

/// Turns a trace with at least `2k` alternations into a depth-`k` pattern
/// whose rows are consecutive segments of `seq`: each row runs from its
/// start to the first position after its second flip (the last row takes
/// the remainder), and its formula is `φ` when the segment starts false and
/// `¬φ` otherwise. The pattern is then verified at arity `m`.
pub fn alternation_to_pattern(
    sample: &TheorySample,
    formula: &Formula,
    seq: &Sequence,
    trace: &[bool],
    k: usize,
    m: usize,
) -> Result<(PatternSpec, PatternVerdict)> {
    if trace.len() != seq.len() {
        return Err(DpError::domain(format!(
            "trace of length {} for a sequence of {}",
            trace.len(),
            seq.len()
        )));
    }
    let alternations = alternation_count(trace);
    if alternations < 2 * k {
        return Err(DpError::domain(format!(
            "{alternations} alternations cannot give a pattern of depth {k}"
        )));
    }
    let mut rows = Vec::new();
    let mut formulas = Vec::new();
    let mut start = 0;
    for alpha in 0..k {
        let flips: Vec<usize> = (start..seq.len() - 1).filter(|&i| trace[i] != trace[i + 1]).collect();
        if flips.len() < 2 {
            return Err(DpError::domain(format!("segment {alpha} starting at {start} has fewer than two flips")));
        }
        let end = if alpha + 1 == k { seq.len() } else { flips[1] + 2 };
        rows.push(seq.select(&(start..end).collect::<Vec<_>>())?);
        formulas.push(if trace[start] { formula.clone().not() } else { formula.clone() });
        start = end;
    }
    let spec = PatternSpec::new(rows, formulas)?;
    let verdict = verify(sample, &spec, m)?;
    if !verdict.verified {
        return Err(DpError::contract(format!(
            "segment pattern of depth {k} does not verify (mutual {}, {} failing assignments)",
            verdict.mutual_ok,
            verdict.failures.len()
        )));
    }
    Ok((spec, verdict))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSelection {
    /// Index pairs in order: a constant pair, then (straddling, constant)
    /// pairs, all disjoint and increasing.
    pub pairs: Vec<(usize, usize)>,
    /// Straddling pairs used.
    pub switches_used: usize,
}

/// Picks disjoint increasing index pairs alternating between same-value
/// pairs and pairs straddling a flip, starting and ending with a same-value
/// pair, using each earliest possible end.
pub fn select_pairs(bits: &[bool], max_switches: usize) -> PairSelection {
    let n = bits.len();
    let constant_from = |from: usize| -> Option<(usize, usize)> {
        (from + 1..n).find_map(|j| (from..j).find(|&i| bits[i] == bits[j]).map(|i| (i, j)))
    };
    let straddle_from = |from: usize| -> Option<(usize, usize)> {
        (from..n.saturating_sub(1)).find(|&i| bits[i] != bits[i + 1]).map(|i| (i, i + 1))
    };
    let mut pairs = Vec::new();
    let Some(first) = constant_from(0) else {
        return PairSelection { pairs, switches_used: 0 };
    };
    pairs.push(first);
    let mut next = first.1 + 1;
    let mut used = 0;
    while used < max_switches {
        let Some(s) = straddle_from(next) else { break };
        let Some(c) = constant_from(s.1 + 1) else { break };
        pairs.push(s);
        pairs.push(c);
        next = c.1 + 1;
        used += 1;
    }
    PairSelection { pairs, switches_used: used }
}

/// `ψ(x; y0…, y1…) = φ(x, y0…) ↔ φ(x, y1…)` for entries of width `width`.
pub fn iff_pair_formula(formula: &Formula, width: usize) -> Formula {
    Formula::iff(formula.clone(), formula.shift_y(width))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwitchConstruction {
    pub psi2: Formula,
    pub pairs: Sequence,
    pub selection: PairSelection,
    pub switches: usize,
    /// Alternations of `ψ2(c, ·)` along the pairs, by direct evaluation when
    /// a candidate is known, else from the trace.
    pub alternations: usize,
    pub candidate: Option<usize>,
}

/// From a raw trace: the pairs that make `φ(c, y0) ↔ φ(c, y1)` alternate
/// twice per switch used. Returns `None` when the trace has no switch.
pub fn switchpoints_from_trace(formula: &Formula, seq: &Sequence, bits: &[bool]) -> Result<Option<SwitchConstruction>> {
    if bits.len() != seq.len() {
        return Err(DpError::domain("trace and sequence lengths differ"));
    }
    let switches = switch_report(bits).count;
    if switches == 0 {
        return Ok(None);
    }
    let selection = select_pairs(bits, switches);
    let pairs = pair_sequence(seq, &selection)?;
    let values: Vec<bool> = selection.pairs.iter().map(|&(a, b)| bits[a] == bits[b]).collect();
    Ok(Some(SwitchConstruction {
        psi2: iff_pair_formula(formula, seq.width()),
        pairs,
        alternations: alternation_count(&values),
        selection,
        switches,
        candidate: None,
    }))
}

fn pair_sequence(seq: &Sequence, selection: &PairSelection) -> Result<Sequence> {
    Sequence::new(
        selection
            .pairs
            .iter()
            .map(|&(a, b)| seq.tuples[a].iter().chain(&seq.tuples[b]).copied().collect())
            .collect(),
    )
}

/// Chooses the candidate whose trace has the most switch points (lowest
/// index on ties), builds `ψ2` and the pairs, and evaluates `ψ2(c, ·)`
/// along them. Returns `None` when no candidate has a switch point.
pub fn switchpoints_to_alternation(
    sample: &TheorySample,
    formula: &Formula,
    seq: &Sequence,
    candidates: &[Vec<usize>],
) -> Result<Option<SwitchConstruction>> {
    let mut best: Option<(usize, usize, Vec<bool>)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let t = trace(sample, formula, seq, c)?;
        let s = switch_report(&t).count;
        if s > 0 && best.as_ref().map_or(true, |(bs, _, _)| s > *bs) {
            best = Some((s, i, t));
        }
    }
    let Some((_, idx, bits)) = best else {
        return Ok(None);
    };
    let Some(mut out) = switchpoints_from_trace(formula, seq, &bits)? else {
        return Ok(None);
    };
    let values = trace(sample, &out.psi2, &out.pairs, &candidates[idx])?;
    out.alternations = alternation_count(&values);
    out.candidate = Some(idx);
    Ok(Some(out))
}

/// Position subsets used by the round trip: `k` positions spaced three
/// apart, so the trace of `ψ` reads `F T F F T F …` with `2k` alternations.
pub fn spaced_subset(k: usize) -> Vec<usize> {
    (0..k).map(|i| 3 * i + 1).collect()
}

/// Realized trace check: whether `ψ` can hold exactly on `chosen` among the
/// sequence positions, together with the partial type.
pub fn trace_realizable(
    sample: &TheorySample,
    psi: &Formula,
    seq: &Sequence,
    chosen: &[usize],
    partial_type: &ConstraintSet,
) -> Result<bool> {
    let oracle = Oracle::new(sample).with_budget(budget_from_env());
    let mut conj = partial_type.to_props();
    for (j, e) in seq.tuples.iter().enumerate() {
        let p = psi.at(e)?;
        conj.push(if chosen.contains(&j) { p } else { p.not() });
    }
    oracle.dnf_consistent(&conj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{ddlo_pool, eqtree_witness, library};
    use crate::theories::{sample, Point, Rel, SampleParams, Slot, TheoryId};

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    const T: bool = true;
    const F: bool = false;

    #[test]
    fn counts_alternations() {
        assert_eq!(alternation_count(&[T, T, F, F]), 1);
        assert_eq!(alternation_count(&[T, T, T]), 0);
        assert_eq!(alternation_count(&[F, T, F]), 2);
        assert_eq!(alternation_count(&[]), 0);
    }

    #[test]
    fn spikes_are_one_switch_point() {
        let r = switch_report(&[T, T, F, T, T]);
        assert_eq!(r.switch_indices, vec![1, 2]);
        assert_eq!(r.count, 1);
        assert_eq!(switch_report(&[T, T, F, F, T, T]).count, 2);
        assert_eq!(switch_report(&[T, T, T]).count, 0);
    }

    #[test]
    fn dlo_cut_alternates_once() {
        let s = sample(TheoryId::Dlo, 6, 0, None, None).unwrap();
        let seq = Sequence::singletons(&[0, 1, 2, 3, 4, 5]);
        let r = alternation_search_oracle(&s, &f("x < y0"), &seq, &ConstraintSet::default()).unwrap();
        assert_eq!(r.max, 1);
        assert_eq!(r.witness.iter().filter(|&&b| b).count() + r.witness.iter().position(|&b| b).unwrap(), 6);
    }

    #[test]
    fn ddlo_interval_union_alternates_four_times() {
        let pool = ddlo_pool(1, 5).unwrap();
        let r = alternation_search_oracle(
            &pool.sample,
            &f("(y0 <1 x & x <1 y1) | (y0 <2 x & x <2 y1)"),
            &pool.rows[0],
            &ConstraintSet::default(),
        )
        .unwrap();
        assert_eq!(r.max, 4);
    }

    #[test]
    fn interleaving_defines_every_k_subset() {
        let pool = ddlo_pool(2, 4).unwrap();
        let lib = library(&pool.sample, 1).unwrap();
        let spec = PatternSpec::new(pool.rows.clone(), vec![lib[0].clone(), lib[1].clone()]).unwrap();
        let il = pattern_to_interleaved(&pool.sample, &spec).unwrap();
        assert_eq!(il.subsets.len(), 6);
        assert!(il.all_definable());

        let w = eqtree_witness(TheoryId::Eqtree, 3, 4).unwrap();
        let il = pattern_to_interleaved(&w.pool.sample, &w.spec().unwrap()).unwrap();
        assert_eq!(il.subsets.len(), 4);
        assert!(il.all_definable());
    }

    #[test]
    fn alternations_give_segment_patterns() {
        let pool = ddlo_pool(1, 3).unwrap();
        let phi = f("y0 <1 x & x <1 y1");
        let (spec, v) = alternation_to_pattern(&pool.sample, &phi, &pool.rows[0], &[F, T, F], 1, 3).unwrap();
        assert_eq!(spec.depth(), 1);
        assert!(v.verified);
        let (empty, _) = alternation_to_pattern(&pool.sample, &phi, &pool.rows[0], &[T, T, T], 0, 3).unwrap();
        assert_eq!(empty.depth(), 0);
        assert!(matches!(
            alternation_to_pattern(&pool.sample, &phi, &pool.rows[0], &[T, T, F], 1, 3),
            Err(DpError::InputDomain(_))
        ));
    }

    #[test]
    fn planted_switches_double_into_alternations() {
        for k in 1..=4 {
            let bits: Vec<bool> = (0..4 * (k + 1)).map(|i| (i / 4) % 2 == 1).collect();
            let seq = Sequence::singletons(&(0..bits.len()).collect::<Vec<_>>());
            let out = switchpoints_from_trace(&f("x < y0"), &seq, &bits).unwrap().unwrap();
            assert_eq!(out.switches, k);
            assert_eq!(out.selection.switches_used, k);
            assert_eq!(out.alternations, 2 * k);
        }
        let seq = Sequence::singletons(&[0, 1, 2]);
        assert!(switchpoints_from_trace(&f("x < y0"), &seq, &[T, T, T]).unwrap().is_none());
    }

    #[test]
    fn short_runs_limit_the_pairs_used() {
        let bits = [T, T, F, F, T, T];
        let seq = Sequence::singletons(&[0, 1, 2, 3, 4, 5]);
        let out = switchpoints_from_trace(&f("x < y0"), &seq, &bits).unwrap().unwrap();
        assert_eq!(out.switches, 2);
        assert!(out.selection.switches_used < 2);
        assert_eq!(out.alternations, 2 * out.selection.switches_used);
    }

    #[test]
    fn pool_candidate_with_planted_switches() {
        // sequence increasing in <1; its <2 ranks sit below or above c in
        // runs of four, giving c three switch points for x <2 y0
        let bits: Vec<bool> = (0..16).map(|i| (i / 4) % 2 == 1).collect();
        let mut points: Vec<Point> = bits
            .iter()
            .enumerate()
            .map(|(i, &above)| Point::Ddlo {
                rank1: i as i64,
                rank2: if above { 100 + i as i64 } else { i as i64 },
            })
            .collect();
        points.push(Point::Ddlo { rank1: 50, rank2: 50 });
        points.push(Point::Ddlo { rank1: 51, rank2: 500 });
        let s = crate::theories::TheorySample::new(TheoryId::Ddlo, SampleParams::default(), points);
        let seq = Sequence::singletons(&(0..16).collect::<Vec<_>>());
        let phi = Formula::atom(Rel::Lt2, Slot::X(0), Slot::Y(0));
        let out = switchpoints_to_alternation(&s, &phi, &seq, &[vec![17], vec![16]]).unwrap().unwrap();
        assert_eq!(out.candidate, Some(1));
        assert_eq!(out.switches, 3);
        assert_eq!(out.alternations, 6);
    }
}
