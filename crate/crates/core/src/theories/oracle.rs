//! Consistency oracles for the model completions of the example theories.
//!
//! A conjunction of signed atoms over fresh variables and sample points is
//! consistent iff some extension of the sample realizes it. For the order
//! theories that is decided by equality classes plus cycle detection in each
//! order; for the equivalence theories by computing the least model of the
//! positive constraints (closed upward or downward along `≤_S`) and checking
//! that it violates no negative constraint or sample fact.

use std::collections::BTreeSet;

use super::formula::{Literal, Prop, Term};
use super::{Rel, RelationId, TheoryId, TheorySample};
use crate::error::{DpError, Result};

/// Atoms allowed in any single formula instance handed to the DNF expander.
pub const DEFAULT_MAX_ATOMS: usize = 12;
/// Default number of consistency checks / η-assignments an operation may
/// spend before giving up.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Reads `DPKIT_BUDGET`, falling back to [`DEFAULT_BUDGET`].
pub fn budget_from_env() -> u64 {
    std::env::var("DPKIT_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

/// A partial type: signed atoms over fresh variables and sample points.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ConstraintSet {
    pub literals: Vec<Literal>,
}

impl ConstraintSet {
    pub fn new(literals: Vec<Literal>) -> Self {
        ConstraintSet { literals }
    }

    pub fn push(&mut self, lit: Literal) {
        self.literals.push(lit);
    }

    pub fn to_props(&self) -> Vec<Prop> {
        self.literals.iter().map(|l| l.to_prop()).collect()
    }
}

/// `consistent()` for a bare constraint set.
pub fn consistent(theory: TheoryId, constraints: &ConstraintSet, sample: &TheorySample) -> Result<bool> {
    if theory != sample.theory {
        return Err(DpError::domain(format!(
            "constraints for {theory} against a {} sample",
            sample.theory
        )));
    }
    Oracle::new(sample).consistent(&constraints.literals)
}

/// `dnf_consistent()` with default limits.
pub fn dnf_consistent(theory: TheoryId, conjuncts: &[Prop], sample: &TheorySample) -> Result<bool> {
    if theory != sample.theory {
        return Err(DpError::domain(format!(
            "constraints for {theory} against a {} sample",
            sample.theory
        )));
    }
    Oracle::new(sample).dnf_consistent(conjuncts)
}

/// Consistency oracle bound to a sample, with DNF limits and a check counter.
#[derive(Clone, Debug)]
pub struct Oracle<'a> {
    sample: &'a TheorySample,
    pub max_atoms: usize,
    pub budget: u64,
    checks: std::cell::Cell<u64>,
}

impl<'a> Oracle<'a> {
    pub fn new(sample: &'a TheorySample) -> Self {
        Oracle {
            sample,
            max_atoms: DEFAULT_MAX_ATOMS,
            budget: budget_from_env(),
            checks: std::cell::Cell::new(0),
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_max_atoms(mut self, max_atoms: usize) -> Self {
        self.max_atoms = max_atoms;
        self
    }

    pub fn sample(&self) -> &'a TheorySample {
        self.sample
    }

    pub fn theory(&self) -> TheoryId {
        self.sample.theory
    }

    /// Consistency checks performed so far.
    pub fn checks(&self) -> u64 {
        self.checks.get()
    }

    pub fn reset_checks(&self) {
        self.checks.set(0);
    }

    fn charge(&self) -> Result<()> {
        let n = self.checks.get() + 1;
        self.checks.set(n);
        if n > self.budget {
            return Err(DpError::resource(format!(
                "more than {} consistency checks (raise DPKIT_BUDGET)",
                self.budget
            )));
        }
        Ok(())
    }

    fn check_literals(&self, lits: &[Literal]) -> Result<()> {
        for l in lits {
            if !self.theory().allows(l.atom.rel) {
                return Err(DpError::domain(format!(
                    "relation {} is not in the language of {}",
                    l.atom.rel,
                    self.theory()
                )));
            }
            for t in [l.atom.left, l.atom.right] {
                if let Term::Param(p) = t {
                    self.sample.point(p)?;
                }
            }
            if let Rel::Equiv(r) = l.atom.rel {
                if r.index() >= self.sample.relation_count() {
                    return Err(DpError::domain(format!(
                        "relation E{r} lies above the truncation level"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether the conjunction of `lits` is realized in the model completion
    /// over the sample.
    pub fn consistent(&self, lits: &[Literal]) -> Result<bool> {
        self.check_literals(lits)?;
        Ok(self.consistent_unchecked(lits))
    }

    fn consistent_unchecked(&self, lits: &[Literal]) -> bool {
        if self.theory().is_order() {
            if let Some(answer) = cut_consistent(self.sample, lits) {
                return answer;
            }
        }
        let terms = TermTable::new(lits);
        match self.theory() {
            TheoryId::Dlo => order_consistent(self.sample, &terms, lits, &[Rel::Lt1]),
            TheoryId::Ddlo => order_consistent(self.sample, &terms, lits, &[Rel::Lt1, Rel::Lt2]),
            TheoryId::Eqtree => equiv_consistent(self.sample, &terms, lits, false),
            TheoryId::EqtreeRev => equiv_consistent(self.sample, &terms, lits, true),
        }
    }

    fn expand(&self, prop: &Prop) -> Result<Vec<Vec<Literal>>> {
        let atoms = prop.atom_count();
        if atoms > self.max_atoms {
            return Err(DpError::resource(format!(
                "formula instance with {atoms} atoms exceeds the DNF limit of {}",
                self.max_atoms
            )));
        }
        let d = prop.dnf();
        for conj in &d {
            self.check_literals(conj)?;
        }
        Ok(d)
    }

    /// Whether the conjunction of `conjuncts` is consistent, expanding each to
    /// DNF and searching the product with pruning.
    pub fn dnf_consistent(&self, conjuncts: &[Prop]) -> Result<bool> {
        let mut parts = conjuncts
            .iter()
            .map(|p| self.expand(p))
            .collect::<Result<Vec<_>>>()?;
        if parts.iter().any(|p| p.is_empty()) {
            return Ok(false);
        }
        // single-disjunct parts first: they only ever prune
        parts.sort_by_key(|p| p.len());
        let mut stack = Vec::new();
        self.search(&parts, 0, &mut stack)
    }

    fn search(&self, parts: &[Vec<Vec<Literal>>], depth: usize, stack: &mut Vec<Literal>) -> Result<bool> {
        if depth == parts.len() {
            self.charge()?;
            return Ok(self.consistent_unchecked(stack));
        }
        // forced conjuncts are only checked once the next choice point or the
        // end is reached
        let forced = parts[depth].len() == 1;
        let mark = stack.len();
        for disjunct in &parts[depth] {
            stack.extend_from_slice(disjunct);
            let viable = forced || {
                self.charge()?;
                self.consistent_unchecked(stack)
            };
            if viable && self.search(parts, depth + 1, stack)? {
                stack.truncate(mark);
                return Ok(true);
            }
            stack.truncate(mark);
        }
        Ok(false)
    }

    /// Oracle state holding every consistent way to satisfy the conjuncts
    /// added so far; see [`OracleState`].
    pub fn start(&self, base: &[Prop]) -> Result<OracleState> {
        let mut state = OracleState {
            branches: vec![Vec::new()],
        };
        for p in base {
            state = self.extend(&state, p)?;
        }
        Ok(state)
    }

    /// Adds one more conjunct to every branch, keeping the consistent ones.
    pub fn extend(&self, state: &OracleState, prop: &Prop) -> Result<OracleState> {
        let disjuncts = self.expand(prop)?;
        let mut seen = BTreeSet::new();
        let mut branches = Vec::new();
        for branch in &state.branches {
            for d in &disjuncts {
                let mut next = branch.clone();
                next.extend_from_slice(d);
                next.sort();
                next.dedup();
                if seen.contains(&next) {
                    continue;
                }
                self.charge()?;
                if self.consistent_unchecked(&next) {
                    seen.insert(next.clone());
                    if self.theory().is_order() {
                        let canon = canonical_order_branch(self.sample, &next);
                        if canon != next && !seen.insert(canon.clone()) {
                            continue;
                        }
                        next = canon;
                    }
                    branches.push(next);
                }
            }
        }
        Ok(OracleState { branches })
    }
}

/// A disjunction of consistent literal conjunctions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleState {
    pub branches: Vec<Vec<Literal>>,
}

impl OracleState {
    pub fn is_consistent(&self) -> bool {
        !self.branches.is_empty()
    }
}

/// Fast path for order theories when every literal relates one variable to
/// one sample point. Variables are then independent, and each is consistent
/// iff in every order its lower cut lies below its upper cut, or the two
/// meet at a point that the variable can equal. Returns `None` when the
/// literal shape is not covered.
fn cut_consistent(sample: &TheorySample, lits: &[Literal]) -> Option<bool> {
    let mut vars = Vec::new();
    for l in lits {
        match (l.atom.left, l.atom.right) {
            (Term::Var(v), Term::Param(_)) | (Term::Param(_), Term::Var(v)) => vars.push(v),
            _ => return None,
        }
    }
    vars.sort_unstable();
    vars.dedup();
    Some(vars.into_iter().all(|v| var_consistent(sample, lits, v)))
}

fn var_literals(lits: &[Literal], v: usize) -> impl Iterator<Item = (Rel, bool, usize, bool)> + '_ {
    // (rel, var on the left, param, sign)
    lits.iter().filter_map(move |l| match (l.atom.left, l.atom.right) {
        (Term::Var(w), Term::Param(p)) if w == v => Some((l.atom.rel, true, p, l.positive)),
        (Term::Param(p), Term::Var(w)) if w == v => Some((l.atom.rel, false, p, l.positive)),
        _ => None,
    })
}

/// Whether `v = point p` satisfies every literal on `v`.
fn pinned_ok(sample: &TheorySample, lits: &[Literal], v: usize, p: usize) -> bool {
    let at = &sample.points[p];
    var_literals(lits, v).all(|(rel, var_left, q, sign)| {
        let other = &sample.points[q];
        let truth = if var_left { at.holds(rel, other) } else { other.holds(rel, at) };
        truth == Some(sign)
    })
}

fn var_consistent(sample: &TheorySample, lits: &[Literal], v: usize) -> bool {
    if let Some((_, _, p, _)) = var_literals(lits, v).find(|&(rel, _, _, sign)| rel == Rel::Eq && sign) {
        return pinned_ok(sample, lits, v, p);
    }
    let orders: &[Rel] = if sample.theory == TheoryId::Ddlo { &[Rel::Lt1, Rel::Lt2] } else { &[Rel::Lt1] };
    for &order in orders {
        // (rank, strict, param)
        let mut lo: Option<(i64, bool, usize)> = None;
        let mut hi: Option<(i64, bool, usize)> = None;
        for (rel, var_left, p, sign) in var_literals(lits, v) {
            if rel != order {
                continue;
            }
            let r = match sample.points[p].rank(order) {
                Some(r) => r,
                None => return false,
            };
            // x < p, ¬(x < p) = p ≤ x, p < x, ¬(p < x) = x ≤ p
            let (is_upper, strict) = match (var_left, sign) {
                (true, true) => (true, true),
                (true, false) => (false, false),
                (false, true) => (false, true),
                (false, false) => (true, false),
            };
            if is_upper {
                if hi.map_or(true, |(h, hs, _)| r < h || (r == h && strict && !hs)) {
                    hi = Some((r, strict, p));
                }
            } else if lo.map_or(true, |(l, ls, _)| r > l || (r == l && strict && !ls)) {
                lo = Some((r, strict, p));
            }
        }
        if let (Some((l, ls, p)), Some((h, hs, _))) = (lo, hi) {
            if l > h || (l == h && (ls || hs)) {
                return false;
            }
            if l == h {
                // the cuts meet: v is the point itself
                return pinned_ok(sample, lits, v, p);
            }
        }
    }
    // open cuts in a dense order leave infinitely many choices, so
    // disequalities can always be met
    true
}

/// Rewrites a consistent order-theory branch so that branches with the same
/// realizations coincide: each variable keeps its tightest bound per order
/// (or a pin to the point it must equal) and only the disequalities that
/// can still bind. Literals between variables are kept; literals between
/// points are true and dropped.
fn canonical_order_branch(sample: &TheorySample, lits: &[Literal]) -> Vec<Literal> {
    let mut out: Vec<Literal> = lits
        .iter()
        .filter(|l| matches!((l.atom.left, l.atom.right), (Term::Var(_), Term::Var(_))))
        .copied()
        .collect();
    let mut vars: Vec<usize> = lits
        .iter()
        .filter_map(|l| match (l.atom.left, l.atom.right) {
            (Term::Var(v), Term::Param(_)) | (Term::Param(_), Term::Var(v)) => Some(v),
            _ => None,
        })
        .collect();
    vars.sort_unstable();
    vars.dedup();
    let orders: &[Rel] = if sample.theory == TheoryId::Ddlo { &[Rel::Lt1, Rel::Lt2] } else { &[Rel::Lt1] };
    let pin = |v: usize, p: usize| Literal::new(Rel::Eq, Term::Var(v), Term::Param(p), true);
    'vars: for v in vars {
        if let Some((_, _, p, _)) = var_literals(lits, v).find(|&(rel, _, _, sign)| rel == Rel::Eq && sign) {
            out.push(pin(v, p));
            continue;
        }
        let mut excluded: Vec<usize> = var_literals(lits, v)
            .filter(|&(rel, _, _, sign)| rel == Rel::Eq && !sign)
            .map(|(_, _, p, _)| p)
            .collect();
        excluded.sort_unstable();
        excluded.dedup();
        // per order: (rank, strict, param) for the lower and upper bound
        let mut bounds = Vec::new();
        for &order in orders {
            let mut lo: Option<(i64, bool, usize)> = None;
            let mut hi: Option<(i64, bool, usize)> = None;
            for (rel, var_left, p, sign) in var_literals(lits, v) {
                if rel != order {
                    continue;
                }
                let Some(r) = sample.points[p].rank(order) else { continue };
                let (is_upper, strict) = match (var_left, sign) {
                    (true, true) => (true, true),
                    (true, false) => (false, false),
                    (false, true) => (false, true),
                    (false, false) => (true, false),
                };
                let strict = strict || excluded.contains(&p);
                if is_upper {
                    if hi.map_or(true, |(h, hs, _)| r < h || (r == h && strict && !hs)) {
                        hi = Some((r, strict, p));
                    }
                } else if lo.map_or(true, |(l, ls, _)| r > l || (r == l && strict && !ls)) {
                    lo = Some((r, strict, p));
                }
            }
            if let (Some((l, _, p)), Some((h, _, _))) = (lo, hi) {
                if l == h {
                    out.push(pin(v, p));
                    continue 'vars;
                }
            }
            bounds.push((order, lo, hi));
        }
        let inside = |p: usize| {
            bounds.iter().all(|&(order, lo, hi)| {
                let Some(r) = sample.points[p].rank(order) else { return false };
                lo.map_or(true, |(l, ls, _)| r > l || (r == l && !ls)) && hi.map_or(true, |(h, hs, _)| r < h || (r == h && !hs))
            })
        };
        for &p in &excluded {
            if inside(p) {
                out.push(Literal::new(Rel::Eq, Term::Var(v), Term::Param(p), false));
            }
        }
        for (order, lo, hi) in bounds {
            if let Some((_, strict, p)) = lo {
                out.push(if strict {
                    Literal::new(order, Term::Param(p), Term::Var(v), true)
                } else {
                    Literal::new(order, Term::Var(v), Term::Param(p), false)
                });
            }
            if let Some((_, strict, p)) = hi {
                out.push(if strict {
                    Literal::new(order, Term::Var(v), Term::Param(p), true)
                } else {
                    Literal::new(order, Term::Param(p), Term::Var(v), false)
                });
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Dense numbering of the terms mentioned by a literal set.
struct TermTable {
    terms: Vec<Term>,
}

impl TermTable {
    fn new(lits: &[Literal]) -> Self {
        let set: BTreeSet<Term> = lits
            .iter()
            .flat_map(|l| [l.atom.left, l.atom.right])
            .collect();
        TermTable {
            terms: set.into_iter().collect(),
        }
    }

    fn id(&self, t: Term) -> usize {
        self.terms.binary_search(&t).expect("term registered")
    }

    fn len(&self) -> usize {
        self.terms.len()
    }

    fn params(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.terms.iter().enumerate().filter_map(|(i, t)| match t {
            Term::Param(p) => Some((i, *p)),
            Term::Var(_) => None,
        })
    }
}

#[derive(Clone)]
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Two distinct sample points are distinct elements.
fn params_separated(sample: &TheorySample, terms: &TermTable, uf: &mut UnionFind) -> bool {
    let params: Vec<(usize, usize)> = terms.params().collect();
    for (k, &(ti, pi)) in params.iter().enumerate() {
        for &(tj, pj) in &params[k + 1..] {
            if uf.find(ti) == uf.find(tj)
                && !sample.points[pi]
                    .holds(Rel::Eq, &sample.points[pj])
                    .unwrap_or(false)
            {
                return false;
            }
        }
    }
    true
}

fn order_consistent(sample: &TheorySample, terms: &TermTable, lits: &[Literal], orders: &[Rel]) -> bool {
    let n = terms.len();
    let mut uf = UnionFind::new(n);
    for l in lits {
        if l.atom.rel == Rel::Eq && l.positive {
            uf.union(terms.id(l.atom.left), terms.id(l.atom.right));
        }
    }
    // identical sample points are one element
    let params: Vec<(usize, usize)> = terms.params().collect();
    for (k, &(ti, pi)) in params.iter().enumerate() {
        for &(tj, pj) in &params[k + 1..] {
            if sample.points[pi] == sample.points[pj] {
                uf.union(ti, tj);
            }
        }
    }
    loop {
        if !params_separated(sample, terms, &mut uf) {
            return false;
        }
        let mut merged = false;
        for &order in orders {
            // edges (from, to, strict) on class representatives: from ≤/< to
            let mut edges: Vec<(usize, usize, bool)> = Vec::new();
            for l in lits {
                if l.atom.rel != order {
                    continue;
                }
                let (a, b) = (uf.find(terms.id(l.atom.left)), uf.find(terms.id(l.atom.right)));
                if l.positive {
                    edges.push((a, b, true));
                } else {
                    edges.push((b, a, false));
                }
            }
            let mut ranked: Vec<(i64, usize)> = params
                .iter()
                .map(|&(t, p)| (sample.points[p].rank(order).unwrap_or(0), uf.find(t)))
                .collect();
            ranked.sort();
            ranked.dedup();
            for w in ranked.windows(2) {
                if w[0].0 < w[1].0 {
                    edges.push((w[0].1, w[1].1, true));
                }
            }
            let reach = reachability(n, &edges);
            for &(a, b, strict) in &edges {
                if strict && reach.get(b, a) {
                    return false;
                }
            }
            for a in 0..n {
                for b in a + 1..n {
                    if reach.get(a, b) && reach.get(b, a) && uf.union(a, b) {
                        merged = true;
                    }
                }
            }
        }
        if !merged {
            break;
        }
    }
    for l in lits {
        if l.atom.rel == Rel::Eq
            && !l.positive
            && uf.find(terms.id(l.atom.left)) == uf.find(terms.id(l.atom.right))
        {
            return false;
        }
    }
    true
}

/// Reflexive-transitive closure of the edge relation, one bitset row per
/// node.
struct Reach {
    words: usize,
    bits: Vec<u64>,
}

impl Reach {
    fn get(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }
}

fn reachability(n: usize, edges: &[(usize, usize, bool)]) -> Reach {
    let words = n.div_ceil(64).max(1);
    let mut bits = vec![0u64; n * words];
    for i in 0..n {
        bits[i * words + i / 64] |= 1 << (i % 64);
    }
    for &(a, b, _) in edges {
        bits[a * words + b / 64] |= 1 << (b % 64);
    }
    for k in 0..n {
        let row_k = bits[k * words..(k + 1) * words].to_vec();
        for i in 0..n {
            if bits[i * words + k / 64] >> (k % 64) & 1 == 1 {
                for (w, &rk) in row_k.iter().enumerate() {
                    bits[i * words + w] |= rk;
                }
            }
        }
    }
    Reach { words, bits }
}

fn equiv_consistent(sample: &TheorySample, terms: &TermTable, lits: &[Literal], reversed: bool) -> bool {
    let n = terms.len();
    let mut eq = UnionFind::new(n);
    for l in lits {
        if l.atom.rel == Rel::Eq && l.positive {
            eq.union(terms.id(l.atom.left), terms.id(l.atom.right));
        }
    }
    if !params_separated(sample, terms, &mut eq) {
        return false;
    }
    for l in lits {
        if l.atom.rel == Rel::Eq
            && !l.positive
            && eq.find(terms.id(l.atom.left)) == eq.find(terms.id(l.atom.right))
        {
            return false;
        }
    }
    let levels = sample.params.level.unwrap_or(0);
    let params: Vec<(usize, usize)> = terms.params().collect();
    let level_order: Vec<u32> = if reversed {
        (1..levels).rev().collect()
    } else {
        (1..levels).collect()
    };
    // Least model: each relation is generated by its positive constraints,
    // its sample facts, and everything forced at the finer levels already
    // processed.
    let mut finer = eq;
    for lev in level_order {
        let mut joined = finer.clone();
        for m in 0..lev {
            let rel = RelationId { m, n: lev };
            let mut uf = finer.clone();
            for l in lits {
                if l.atom.rel == Rel::Equiv(rel) && l.positive {
                    uf.union(terms.id(l.atom.left), terms.id(l.atom.right));
                }
            }
            for (k, &(ti, pi)) in params.iter().enumerate() {
                for &(tj, pj) in &params[k + 1..] {
                    if sample.points[pi].holds(Rel::Equiv(rel), &sample.points[pj]) == Some(true) {
                        uf.union(ti, tj);
                    }
                }
            }
            for (k, &(ti, pi)) in params.iter().enumerate() {
                for &(tj, pj) in &params[k + 1..] {
                    if uf.find(ti) == uf.find(tj)
                        && sample.points[pi].holds(Rel::Equiv(rel), &sample.points[pj]) == Some(false)
                    {
                        return false;
                    }
                }
            }
            for l in lits {
                if l.atom.rel == Rel::Equiv(rel)
                    && !l.positive
                    && uf.find(terms.id(l.atom.left)) == uf.find(terms.id(l.atom.right))
                {
                    return false;
                }
            }
            for t in 0..n {
                let r = uf.find(t);
                joined.union(t, r);
            }
        }
        finer = joined;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theories::sample::sample;
    use crate::theories::{Formula, Point, SampleParams, Slot};

    fn x() -> Term {
        Term::Var(0)
    }
    fn p(i: usize) -> Term {
        Term::Param(i)
    }
    fn lit(rel: Rel, a: Term, b: Term, pos: bool) -> Literal {
        Literal::new(rel, a, b, pos)
    }

    fn ddlo(points: &[(i64, i64)]) -> TheorySample {
        TheorySample::new(
            TheoryId::Ddlo,
            SampleParams {
                size: points.len(),
                ..Default::default()
            },
            points
                .iter()
                .map(|&(rank1, rank2)| Point::Ddlo { rank1, rank2 })
                .collect(),
        )
    }

    #[test]
    fn ddlo_two_interval_box_is_consistent() {
        // a <1 b and c <2 d
        let s = ddlo(&[(0, 3), (2, 1), (1, 0), (3, 2)]);
        let o = Oracle::new(&s);
        let set = [
            lit(Rel::Lt1, p(0), x(), true),
            lit(Rel::Lt1, x(), p(1), true),
            lit(Rel::Lt2, p(2), x(), true),
            lit(Rel::Lt2, x(), p(3), true),
        ];
        assert!(o.consistent(&set).unwrap());
    }

    #[test]
    fn contradictory_cut() {
        let s = ddlo(&[(0, 0), (1, 1)]);
        let o = Oracle::new(&s);
        assert!(!o
            .consistent(&[lit(Rel::Lt1, x(), p(0), true), lit(Rel::Lt1, p(0), x(), true)])
            .unwrap());
        // a <1 x <1 b with b <1 a
        assert!(!o
            .consistent(&[lit(Rel::Lt1, p(1), x(), true), lit(Rel::Lt1, x(), p(0), true)])
            .unwrap());
        // equality pins x to a, then the second order must agree
        assert!(!o
            .consistent(&[lit(Rel::Eq, x(), p(0), true), lit(Rel::Lt2, p(1), x(), true)])
            .unwrap());
        assert!(o
            .consistent(&[lit(Rel::Eq, x(), p(0), true), lit(Rel::Lt2, x(), p(1), true)])
            .unwrap());
        // x ≤ a ≤ x forces x = a
        assert!(!o
            .consistent(&[
                lit(Rel::Lt1, x(), p(0), false),
                lit(Rel::Lt1, p(0), x(), false),
                lit(Rel::Eq, x(), p(0), false)
            ])
            .unwrap());
        assert!(!o.consistent(&[lit(Rel::Eq, p(0), p(1), true)]).unwrap());
        assert!(!o.consistent(&[lit(Rel::Lt1, x(), x(), true)]).unwrap());
    }

    #[test]
    fn multi_variable_orders() {
        let s = ddlo(&[(0, 0), (1, 1)]);
        let o = Oracle::new(&s);
        let x1 = Term::Var(1);
        // a < x0 < x1 < b in both orders
        let set = [
            lit(Rel::Lt1, p(0), x(), true),
            lit(Rel::Lt1, x(), x1, true),
            lit(Rel::Lt1, x1, p(1), true),
            lit(Rel::Lt2, x1, x(), true),
        ];
        assert!(o.consistent(&set).unwrap());
        let bad = [
            lit(Rel::Lt1, x(), x1, true),
            lit(Rel::Eq, x(), x1, true),
        ];
        assert!(!o.consistent(&bad).unwrap());
    }

    #[test]
    fn wrong_language_is_a_domain_error() {
        let s = sample(TheoryId::Dlo, 3, 0, None, None).unwrap();
        let o = Oracle::new(&s);
        assert!(matches!(
            o.consistent(&[lit(Rel::Lt2, x(), p(0), true)]),
            Err(DpError::InputDomain(_))
        ));
        assert!(matches!(
            o.consistent(&[lit(Rel::Lt1, x(), p(7), true)]),
            Err(DpError::InputDomain(_))
        ));
        let d = ddlo(&[(0, 0)]);
        assert!(matches!(
            consistent(TheoryId::Dlo, &ConstraintSet::default(), &d),
            Err(DpError::InputDomain(_))
        ));
    }

    fn eq_sample() -> TheorySample {
        sample(TheoryId::Eqtree, 12, 1, Some(4), Some(2)).unwrap()
    }

    #[test]
    fn eqtree_upward_closure() {
        let s = eq_sample();
        let o = Oracle::new(&s);
        let lo = RelationId { m: 0, n: 1 };
        let hi = RelationId { m: 1, n: 3 };
        assert!(lo.le_s(hi));
        assert!(!o
            .consistent(&[lit(Rel::Equiv(lo), x(), p(0), true), lit(Rel::Equiv(hi), x(), p(0), false)])
            .unwrap());
        assert!(o
            .consistent(&[lit(Rel::Equiv(lo), x(), p(0), false), lit(Rel::Equiv(hi), x(), p(0), true)])
            .unwrap());
    }

    #[test]
    fn eqtree_rev_closes_downward() {
        let s = sample(TheoryId::EqtreeRev, 12, 1, Some(4), Some(2)).unwrap();
        let o = Oracle::new(&s);
        let lo = RelationId { m: 0, n: 1 };
        let hi = RelationId { m: 1, n: 3 };
        assert!(o
            .consistent(&[lit(Rel::Equiv(lo), x(), p(0), true), lit(Rel::Equiv(hi), x(), p(0), false)])
            .unwrap());
        assert!(!o
            .consistent(&[lit(Rel::Equiv(lo), x(), p(0), false), lit(Rel::Equiv(hi), x(), p(0), true)])
            .unwrap());
    }

    #[test]
    fn eqtree_sample_facts_constrain_parameters() {
        let s = eq_sample();
        let o = Oracle::new(&s);
        let top = RelationId { m: 0, n: 3 };
        // find a pair of points in different top classes
        let (a, b) = (0..s.len())
            .flat_map(|i| (0..s.len()).map(move |j| (i, j)))
            .find(|&(i, j)| !s.holds(Rel::Equiv(top), i, j).unwrap())
            .unwrap();
        assert!(!o
            .consistent(&[lit(Rel::Equiv(top), x(), p(a), true), lit(Rel::Equiv(top), x(), p(b), true)])
            .unwrap());
        // going through a finer relation also joins them at the top
        let fine = RelationId { m: 0, n: 1 };
        assert!(!o
            .consistent(&[lit(Rel::Equiv(fine), x(), p(a), true), lit(Rel::Equiv(fine), x(), p(b), true)])
            .unwrap());
        assert!(o.consistent(&[lit(Rel::Equiv(top), x(), p(a), true)]).unwrap());
    }

    #[test]
    fn dnf_examples() {
        let s = ddlo(&[(0, 0), (1, 1)]);
        let o = Oracle::new(&s);
        let phi = Formula::atom(Rel::Lt1, Slot::X(0), Slot::Y(0)).at(&[0]).unwrap();
        assert_eq!(
            o.dnf_consistent(&[phi.clone()]).unwrap(),
            o.consistent(&[lit(Rel::Lt1, x(), p(0), true)]).unwrap()
        );
        let taut = Prop::or(vec![phi.clone(), phi.clone().not()]);
        assert!(o.dnf_consistent(&[taut]).unwrap());
        // ¬(y <1 x ∧ x <1 y')
        let not_between = Prop::and(vec![
            Prop::atom(Rel::Lt1, p(0), x()),
            Prop::atom(Rel::Lt1, x(), p(1)),
        ])
        .not();
        assert!(o.dnf_consistent(&[not_between]).unwrap());
        assert!(!o.dnf_consistent(&[phi.clone(), phi.not()]).unwrap());
    }

    #[test]
    fn dnf_limits() {
        let s = ddlo(&[(0, 0), (1, 1)]);
        let big = Prop::or((0..13).map(|_| Prop::atom(Rel::Lt1, x(), p(0))).collect());
        assert!(matches!(
            Oracle::new(&s).dnf_consistent(&[big]),
            Err(DpError::Resource(_))
        ));
        let wide = Prop::and(
            (0..10)
                .map(|_| Prop::or(vec![Prop::atom(Rel::Lt1, x(), p(0)).not(), Prop::atom(Rel::Lt1, p(1), x())]).not())
                .collect(),
        );
        let o = Oracle::new(&s).with_max_atoms(40).with_budget(3);
        let r = o.dnf_consistent(&[wide.clone(), wide]);
        assert!(matches!(r, Err(DpError::Resource(_))) || r.is_ok());
    }

    #[test]
    fn incremental_state_tracks_branches() {
        let s = ddlo(&[(0, 0), (1, 1)]);
        let o = Oracle::new(&s);
        let st = o.start(&[]).unwrap();
        let between = Prop::and(vec![Prop::atom(Rel::Lt1, p(0), x()), Prop::atom(Rel::Lt1, x(), p(1))]);
        let st = o.extend(&st, &between.clone().not()).unwrap();
        assert_eq!(st.branches.len(), 2);
        let st2 = o.extend(&st, &between).unwrap();
        assert!(!st2.is_consistent());
    }

    #[test]
    fn cut_fast_path_agrees_with_graph_search() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rels = [Rel::Lt1, Rel::Lt2, Rel::Eq];
        for case in 0..3000 {
            let s = sample(TheoryId::Ddlo, 5, case, None, None).unwrap();
            let k = rng.gen_range(1..7);
            let lits: Vec<Literal> = (0..k)
                .map(|_| {
                    let v = Term::Var(rng.gen_range(0..2));
                    let p = Term::Param(rng.gen_range(0..5));
                    let (a, b) = if rng.gen() { (v, p) } else { (p, v) };
                    lit(rels[rng.gen_range(0..3)], a, b, rng.gen())
                })
                .collect();
            let fast = cut_consistent(&s, &lits).unwrap();
            let slow = order_consistent(&s, &TermTable::new(&lits), &lits, &[Rel::Lt1, Rel::Lt2]);
            assert_eq!(fast, slow, "{lits:?}");
        }
    }

    #[test]
    fn canonical_branches_keep_incremental_answers() {
        use crate::harness::gen::random_formula;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for case in 0..1500 {
            let theory = if case % 2 == 0 { TheoryId::Dlo } else { TheoryId::Ddlo };
            let s = sample(theory, 6, case, None, None).unwrap();
            let o = Oracle::new(&s);
            let mut st = o.start(&[]).unwrap();
            let mut conj = Vec::new();
            for _ in 0..6 {
                let f = random_formula(&mut rng, theory, 2, 1);
                let mut q = f.at(&[rng.gen_range(0..6)]).unwrap();
                if rng.gen() {
                    q = q.not();
                }
                st = o.extend(&st, &q).unwrap();
                conj.push(q);
                assert_eq!(st.is_consistent(), o.dnf_consistent(&conj).unwrap(), "{theory} case {case}");
            }
        }
    }
}
