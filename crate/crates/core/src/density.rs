//! Counting Δ-types over growing parameter sets and fitting the growth
//! exponent on a log–log scale.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DpError, Result};
use crate::indisc::{check, Delta, Sequence};
use crate::theories::formula::Atom;
use crate::theories::oracle::{Oracle, OracleState};
use crate::theories::{sample, Formula, Point, Prop, Rel, Slot, TheoryId, TheorySample};

pub const CSV_HEADER: &str = "theory,delta,n,count,trials,seed";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Exact count of the types realized in the model completion.
    Oracle,
    /// Distinct traces of a random pool of realizations (a lower bound).
    Pool { size: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub theory: TheoryId,
    pub delta: String,
    pub n: usize,
    pub count: u64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    pub rows: Vec<CountRow>,
}

/// Quotes a CSV field when it contains a separator, quote or newline.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl CountTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.theory,
                csv_field(&r.delta),
                r.n,
                r.count,
                r.trials,
                r.seed
            );
        }
        out
    }
}

/// Text form of Δ used in tables.
pub fn describe(delta: &[Formula]) -> String {
    delta.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; ")
}

/// Position of the realization relative to the parameters seen so far: a
/// sample point, or an open cut in each order given by the nearest ranks
/// below and above.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Cell {
    At(usize),
    Cut([(i64, i64); 2]),
}

fn orders(theory: TheoryId) -> &'static [Rel] {
    match theory {
        TheoryId::Dlo => &[Rel::Lt1],
        _ => &[Rel::Lt1, Rel::Lt2],
    }
}

fn rank(p: &Point, k: usize) -> i64 {
    p.rank(if k == 0 { Rel::Lt1 } else { Rel::Lt2 }).unwrap_or(0)
}

/// Splits a cell by a new parameter: the realization may sit on either side
/// of it in every order where it falls inside the cut, or equal it when it
/// falls inside the cut in all orders.
fn refine(sample: &TheorySample, cell: Cell, p: usize, out: &mut Vec<Cell>) {
    let Cell::Cut(cuts) = cell else {
        out.push(cell);
        return;
    };
    let k = orders(sample.theory).len();
    let point = &sample.points[p];
    let mut ranks = [0i64; 2];
    let mut inside = [false; 2];
    for o in 0..k {
        ranks[o] = rank(point, o);
        inside[o] = cuts[o].0 < ranks[o] && ranks[o] < cuts[o].1;
    }
    if inside[..k].iter().all(|&b| b) {
        out.push(Cell::At(p));
    }
    let start = out.len();
    out.push(Cell::Cut(cuts));
    for o in 0..k {
        if !inside[o] {
            continue;
        }
        for i in start..out.len() {
            if let Cell::Cut(mut c) = out[i] {
                let mut above = c;
                above[o].0 = ranks[o];
                c[o].1 = ranks[o];
                out[i] = Cell::Cut(c);
                out.push(Cell::Cut(above));
            }
        }
    }
}

/// Truth of an atom with `x0` at the cell and `y_j` at `entry[j]`.
fn cell_atom(sample: &TheorySample, cell: Cell, entry: &[usize], a: &Atom<Slot>) -> Result<bool> {
    let x_vs_point = |rel: Rel, p: usize, x_left: bool| -> Result<bool> {
        match cell {
            Cell::At(q) => {
                let (l, r) = if x_left { (q, p) } else { (p, q) };
                sample.holds(rel, l, r)
            }
            Cell::Cut(cuts) => {
                let o = match rel {
                    Rel::Eq => return Ok(false),
                    Rel::Lt1 => 0,
                    Rel::Lt2 => 1,
                    Rel::Equiv(_) => return Err(DpError::domain("cells only cover the order theories")),
                };
                let r = rank(&sample.points[p], o);
                Ok(if x_left { cuts[o].1 <= r } else { r <= cuts[o].0 })
            }
        }
    };
    let y = |j: usize| -> Result<usize> {
        entry
            .get(j)
            .copied()
            .ok_or_else(|| DpError::domain(format!("entry has no coordinate {j}")))
    };
    match (a.left, a.right) {
        (Slot::X(i), _) | (_, Slot::X(i)) if i > 0 => {
            Err(DpError::domain("type counting covers a single realization variable"))
        }
        (Slot::X(_), Slot::X(_)) => Ok(a.rel == Rel::Eq),
        (Slot::X(_), Slot::Y(j)) => x_vs_point(a.rel, y(j)?, true),
        (Slot::Y(j), Slot::X(_)) => x_vs_point(a.rel, y(j)?, false),
        (Slot::Y(i), Slot::Y(j)) => sample.holds(a.rel, y(i)?, y(j)?),
    }
}

/// Assigns consecutive ids to `(previous id, new sign bits)` pairs, with a
/// dense table when Δ is small.
struct Interner {
    width: usize,
    dense: Vec<u32>,
    sparse: HashMap<(u32, u64), u32>,
    len: u32,
}

impl Interner {
    fn new(delta_len: usize, previous: usize) -> Self {
        let width = if delta_len <= 8 { 1 << delta_len } else { 0 };
        Interner {
            width,
            dense: vec![u32::MAX; width * previous],
            sparse: HashMap::new(),
            len: 0,
        }
    }

    fn id(&mut self, previous: u32, bits: u64) -> u32 {
        let fresh = self.len;
        let slot = if self.width > 0 {
            let i = previous as usize * self.width + bits as usize;
            if self.dense[i] == u32::MAX {
                self.dense[i] = fresh;
            }
            self.dense[i]
        } else {
            *self.sparse.entry((previous, bits)).or_insert(fresh)
        };
        if slot == fresh {
            self.len += 1;
        }
        slot
    }
}

/// Exact type counts over the prefixes of `entries`, for the order
/// theories: the cells are refined entry by entry and each carries an
/// interned id of its Δ-sign prefix. Returns the count after each entry.
fn cell_counts(sample: &TheorySample, delta: &[Formula], entries: &[Vec<usize>]) -> Result<Vec<u64>> {
    if delta.len() > 64 {
        return Err(DpError::resource("at most 64 formulas per Δ"));
    }
    let inf = [(i64::MIN, i64::MAX); 2];
    let mut frontier: Vec<(Cell, u32)> = vec![(Cell::Cut(inf), 0)];
    let mut counts = Vec::with_capacity(entries.len());
    let mut split = Vec::new();
    for entry in entries {
        let mut cells = frontier.iter().map(|&(c, _)| c).collect::<Vec<_>>();
        let mut owners: Vec<u32> = frontier.iter().map(|&(_, id)| id).collect();
        for &p in entry {
            let mut next_cells = Vec::with_capacity(cells.len() + 4);
            let mut next_owners = Vec::with_capacity(cells.len() + 4);
            for (c, id) in cells.iter().zip(&owners) {
                split.clear();
                refine(sample, *c, p, &mut split);
                for s in &split {
                    next_cells.push(*s);
                    next_owners.push(*id);
                }
            }
            cells = next_cells;
            owners = next_owners;
        }
        let mut intern = Interner::new(delta.len(), counts.last().copied().unwrap_or(1) as usize);
        let mut next = Vec::with_capacity(cells.len());
        // a cut cell's signs depend only on its side of each entry coordinate
        let k = orders(sample.theory).len();
        let side_bits = k * entry.len();
        let mut by_side: Vec<Option<u64>> = if side_bits <= 12 { vec![None; 1 << side_bits] } else { Vec::new() };
        let eval_cell = |c: Cell| -> Result<u64> {
            let mut bits = 0u64;
            for (i, d) in delta.iter().enumerate() {
                if d.eval_with(&mut |a| cell_atom(sample, c, entry, a))? {
                    bits |= 1 << i;
                }
            }
            Ok(bits)
        };
        for (c, id) in cells.into_iter().zip(owners) {
            let bits = match c {
                Cell::Cut(cuts) if !by_side.is_empty() => {
                    let mut key = 0usize;
                    for &p in entry {
                        for (o, cut) in cuts.iter().enumerate().take(k) {
                            key = key << 1 | usize::from(cut.1 <= rank(&sample.points[p], o));
                        }
                    }
                    match by_side[key] {
                        Some(b) => b,
                        None => {
                            let b = eval_cell(c)?;
                            by_side[key] = Some(b);
                            b
                        }
                    }
                }
                _ => eval_cell(c)?,
            };
            next.push((c, intern.id(id, bits)));
        }
        counts.push(intern.len as u64);
        frontier = next;
    }
    Ok(counts)
}

/// Exact counts by sign-vector search with the general oracle; used for the
/// equivalence theories and for cross-checks. Exponential in the count.
pub fn oracle_counts(sample: &TheorySample, delta: &[Formula], entries: &[Vec<usize>]) -> Result<Vec<u64>> {
    let oracle = Oracle::new(sample);
    let mut frontier: Vec<OracleState> = vec![oracle.start(&[])?];
    let mut counts = Vec::new();
    for entry in entries {
        let props = delta.iter().map(|d| d.at(entry)).collect::<Result<Vec<Prop>>>()?;
        for p in &props {
            let mut next = Vec::new();
            for st in &frontier {
                for q in [p.clone(), p.clone().not()] {
                    let s = oracle.extend(st, &q)?;
                    if s.is_consistent() {
                        next.push(s);
                    }
                }
            }
            frontier = next;
        }
        counts.push(frontier.len() as u64);
    }
    Ok(counts)
}

/// Sample with every rank doubled plus `size` fresh points at odd ranks;
/// returns the extended sample and the pool (fresh points followed by the
/// original ones).
fn pool_sample(sample: &TheorySample, size: usize, seed: u64) -> Result<(TheorySample, Vec<usize>)> {
    let n = sample.len() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut ext = sample.clone();
    for p in &mut ext.points {
        *p = match *p {
            Point::Dlo { rank } => Point::Dlo { rank: 2 * rank },
            Point::Ddlo { rank1, rank2 } => Point::Ddlo {
                rank1: 2 * rank1,
                rank2: 2 * rank2,
            },
            Point::Eqtree { .. } => return Err(DpError::domain("pool mode covers the order theories")),
        };
    }
    let lo1 = sample.points.iter().filter_map(|p| p.rank(Rel::Lt1)).min().unwrap_or(0);
    let lo2 = sample.points.iter().filter_map(|p| p.rank(Rel::Lt2)).min().unwrap_or(0);
    let mut used: HashSet<(i64, i64)> = HashSet::new();
    let mut pool = Vec::new();
    for _ in 0..size {
        // odd ranks between and around the doubled ones; the second order
        // gets a fractional offset so fresh points never collide
        let r1 = 2 * (lo1 + rng.gen_range(-1..n)) + 1;
        let point = if sample.theory == TheoryId::Dlo {
            Point::Dlo { rank: r1 }
        } else {
            let r2 = 2 * (lo2 + rng.gen_range(-1..n)) + 1;
            if !used.insert((r1, r2)) {
                continue;
            }
            Point::Ddlo { rank1: r1, rank2: r2 }
        };
        pool.push(ext.push(point)?);
    }
    pool.extend(0..sample.len());
    Ok((ext, pool))
}

fn pool_counts(
    sample: &TheorySample,
    delta: &[Formula],
    entries: &[Vec<usize>],
    size: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    let (ext, pool) = pool_sample(sample, size, seed)?;
    let mut prefix: Vec<u64> = vec![0; pool.len()];
    let mut counts = Vec::new();
    for entry in entries {
        let mut seen = HashSet::new();
        for (i, &c) in pool.iter().enumerate() {
            let mut h = prefix[i];
            for d in delta {
                let v = crate::theories::formula::eval(d, &ext, &[c], entry)?;
                h = h.wrapping_mul(0x100_0000_01b3).wrapping_add(1 + u64::from(v));
            }
            prefix[i] = h;
            seen.insert(h);
        }
        counts.push(seen.len() as u64);
    }
    Ok(counts)
}

fn counts_over(
    sample: &TheorySample,
    delta: &[Formula],
    entries: &[Vec<usize>],
    mode: Mode,
    seed: u64,
) -> Result<Vec<u64>> {
    for d in delta {
        d.check_language(sample.theory)?;
        if d.x_arity() > 1 {
            return Err(DpError::domain("type counting covers |x| = 1"));
        }
    }
    if delta.is_empty() {
        return Ok(vec![1; entries.len()]);
    }
    match mode {
        Mode::Oracle if sample.theory.is_order() => cell_counts(sample, delta, entries),
        Mode::Oracle => oracle_counts(sample, delta, entries),
        Mode::Pool { size } => pool_counts(sample, delta, entries, size, seed),
    }
}

fn trials(mode: Mode) -> u64 {
    match mode {
        Mode::Oracle => 1,
        Mode::Pool { size } => size as u64,
    }
}

/// Number of Δ-types over the first `n` points of a seeded sample.
pub fn count_types(theory: TheoryId, delta: &[Formula], n: usize, seed: u64, mode: Mode) -> Result<u64> {
    let table = count_table(theory, delta, &[n], seed, mode)?;
    Ok(table.rows[0].count)
}

/// Counts over nested prefixes of one seeded sample of the largest size.
pub fn count_table(theory: TheoryId, delta: &[Formula], sizes: &[usize], seed: u64, mode: Mode) -> Result<CountTable> {
    let max = sizes.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Err(DpError::domain("sizes must include a positive size"));
    }
    let (level, branching) = if theory.is_order() { (None, None) } else { (Some(3), Some(2)) };
    let s = sample(theory, max, seed, level, branching)?;
    let entries: Vec<Vec<usize>> = (0..max).map(|i| vec![i]).collect();
    let counts = counts_over(&s, delta, &entries, mode, seed)?;
    Ok(table_rows(theory, &describe(delta), sizes, &counts, mode, seed))
}

fn table_rows(theory: TheoryId, delta: &str, sizes: &[usize], counts: &[u64], mode: Mode, seed: u64) -> CountTable {
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    CountTable {
        rows: sorted
            .into_iter()
            .map(|n| CountRow {
                theory,
                delta: delta.to_string(),
                n,
                count: if n == 0 { 1 } else { counts[n - 1] },
                trials: trials(mode),
                seed,
            })
            .collect(),
    }
}

/// `formula`-types over the first `n` entries of an indiscernible sequence.
pub fn density_over_sequence(
    sample: &TheorySample,
    formula: &Formula,
    seq: &Sequence,
    sizes: &[usize],
    mode: Mode,
) -> Result<CountTable> {
    let r = check(sample, seq, &[], &Delta::Atomic, 2)?;
    if !r.ok {
        return Err(DpError::contract(format!(
            "sequence is not indiscernible: {:?}",
            r.witness
        )));
    }
    let max = sizes.iter().copied().max().unwrap_or(0);
    if max > seq.len() {
        return Err(DpError::domain(format!("size {max} exceeds the sequence length {}", seq.len())));
    }
    let counts = counts_over(sample, std::slice::from_ref(formula), &seq.tuples[..max], mode, sample.params.seed)?;
    Ok(table_rows(sample.theory, &formula.to_string(), sizes, &counts, mode, sample.params.seed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log–log points.
    pub residual: f64,
    pub sizes_used: Vec<usize>,
}

/// Least-squares line through `(ln n, ln count)` for sizes `>= drop_below`.
pub fn fit_exponent(table: &CountTable, drop_below: usize) -> Result<ExponentFit> {
    let pts: Vec<(usize, f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.n >= drop_below && r.n > 0)
        .map(|r| (r.n, (r.n as f64).ln(), (r.count as f64).ln()))
        .collect();
    if pts.len() < 3 {
        return Err(DpError::domain(format!(
            "need at least 3 sizes of at least {drop_below}, got {}",
            pts.len()
        )));
    }
    if table.rows.iter().any(|r| r.n >= drop_below && r.count == 0) {
        return Err(DpError::domain("counts must be positive"));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.2).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.1 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.1 - mx) * (p.2 - my)).sum();
    if sxx == 0.0 {
        return Err(DpError::domain("sizes must differ"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.2 - intercept - slope * p.1).powi(2)).sum::<f64>() / k).sqrt();
    Ok(ExponentFit {
        slope,
        intercept,
        residual,
        sizes_used: pts.iter().map(|p| p.0).collect(),
    })
}

/// Table with `count = n^exponent`, for self-tests of the fit.
pub fn power_law_table(exponent: u32, sizes: &[usize]) -> CountTable {
    CountTable {
        rows: sizes
            .iter()
            .map(|&n| CountRow {
                theory: TheoryId::Dlo,
                delta: format!("n^{exponent}"),
                n,
                count: (n as u64).pow(exponent),
                trials: 0,
                seed: 0,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    fn order_delta(theory: TheoryId) -> Vec<Formula> {
        let mut d = vec![f("x <1 y0"), f("x = y0")];
        if theory == TheoryId::Ddlo {
            d.insert(1, f("x <2 y0"));
        }
        d
    }

    #[test]
    fn dlo_counts_cuts_and_points() {
        let d = order_delta(TheoryId::Dlo);
        assert_eq!(count_types(TheoryId::Dlo, &d, 1, 0, Mode::Oracle).unwrap(), 3);
        for n in [2, 5, 17] {
            assert_eq!(count_types(TheoryId::Dlo, &d, n, 0, Mode::Oracle).unwrap(), 2 * n as u64 + 1);
        }
    }

    #[test]
    fn ddlo_counts_cut_pairs_and_points() {
        let d = order_delta(TheoryId::Ddlo);
        for seed in 0..3 {
            let t = count_table(TheoryId::Ddlo, &d, &[1, 2, 3, 4, 5, 6, 10], seed, Mode::Oracle).unwrap();
            for r in &t.rows {
                let n = r.n as u64;
                assert_eq!(r.count, (n + 1) * (n + 1) + n);
            }
            let pool = count_table(TheoryId::Ddlo, &d, &[1, 2, 3, 4, 5, 6], seed, Mode::Pool { size: 4000 }).unwrap();
            for (p, o) in pool.rows.iter().zip(&t.rows) {
                assert!(p.count <= o.count);
            }
            assert_eq!(pool.rows[5].count, 55);
        }
    }

    #[test]
    fn cells_agree_with_the_general_oracle() {
        let deltas = [
            vec![f("x <1 y0 | x <2 y0")],
            vec![f("(x <1 y0) <-> (x <2 y0)"), f("x = y0")],
            vec![f("y0 <1 x & x <2 y0")],
        ];
        for d in &deltas {
            let s = sample(TheoryId::Ddlo, 4, 3, None, None).unwrap();
            let entries: Vec<Vec<usize>> = (0..4).map(|i| vec![i]).collect();
            assert_eq!(
                cell_counts(&s, d, &entries).unwrap(),
                oracle_counts(&s, d, &entries).unwrap(),
                "{}",
                describe(d)
            );
        }
    }

    #[test]
    fn increasing_sequence_has_cut_types() {
        let s = sample(TheoryId::Dlo, 10, 0, None, None).unwrap();
        let seq = Sequence::singletons(&(0..10).collect::<Vec<_>>());
        let t = density_over_sequence(&s, &f("x < y0"), &seq, &[1, 4, 10], Mode::Oracle).unwrap();
        assert_eq!(t.rows.iter().map(|r| r.count).collect::<Vec<_>>(), vec![2, 5, 11]);
        assert_eq!(count_types(TheoryId::Dlo, &[], 5, 0, Mode::Oracle).unwrap(), 1);
    }

    #[test]
    fn power_laws_are_recovered() {
        let sizes: Vec<usize> = (2..=6).map(|k| 1 << k).collect();
        let fit = fit_exponent(&power_law_table(2, &sizes), 4).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-9);
        assert!(fit.residual < 1e-9);
        assert!(fit_exponent(&power_law_table(2, &[4, 8]), 1).is_err());
    }

    #[test]
    fn csv_has_the_fixed_header() {
        let t = count_table(TheoryId::Dlo, &order_delta(TheoryId::Dlo), &[1, 2], 7, Mode::Oracle).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("theory,delta,n,count,trials,seed\n"));
        assert!(csv.contains("dlo,x0<1 y0; x0=y0,2,5,1,7"));
    }
}
