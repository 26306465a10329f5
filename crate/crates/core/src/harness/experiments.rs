use std::collections::HashSet;
use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gen::{interval_sequence, interval_union, random_family, random_formula, random_indiscernible};
use super::report::csv_field;
use super::{run_experiment, Check, ExperimentConfig, EXPERIMENTS};
use crate::density::{count_table, fit_exponent, power_law_table, CountTable, Mode};
use crate::error::{DpError, Result};
use crate::indisc::{broken_count, Delta, Sequence};
use crate::patterns::{ddlo_pool, depth_search, eqtree_witness, library, verify, PatternSpec};
use crate::setfam::{for_each_combination, sauer_bound, SetFamily};
use crate::theories::oracle::budget_from_env;
use crate::theories::{
    consistent, sample, ConstraintSet, Formula, Literal, Point, Rel, SampleParams, Slot, Term, TheoryId, TheorySample,
};
use crate::transforms::{
    alternation_count, alternation_search_oracle, alternation_to_pattern, pattern_to_interleaved, spaced_subset,
    switchpoints_to_alternation, trace_realizable,
};

type Outcome = (Vec<Check>, String);

pub(super) fn run(cfg: &ExperimentConfig, start: &Instant) -> Result<Outcome> {
    match cfg.name.as_str() {
        "sauer-audit" => sauer_audit(cfg, start),
        "dual-law" => dual_law(cfg),
        "oracle-brute" => oracle_brute(cfg),
        "ddlo-depth" => ddlo_depth(cfg, start),
        "eqtree-depth" => eqtree_depth(cfg, start),
        "round-trip" => round_trip(cfg),
        "alt-audit" => alt_audit(cfg),
        "subadditivity" => subadditivity(cfg),
        "density-fit" => density_fit(cfg, start),
        "switch-points" => switch_points(cfg),
        "determinism" => determinism(cfg),
        other => Err(DpError::domain(format!("unknown experiment '{other}'"))),
    }
}

fn anchor(claim: &str) -> &'static str {
    match claim {
        "C1" => "trace counts are bounded by the binomial sum up to the VC dimension",
        "C2" => "VC* is the VC dimension with the roles of elements and sets exchanged",
        "C3" => "consistency of quantifier-free constraints is decided over the finite sample",
        "C4" => "every 1-type in two dense orders has dp-rank exactly 2",
        "C5" => "n nested equivalence relations carry a depth-n pattern broken by one element",
        "C6" => "patterns, definable subsets of indiscernibles and alternation are equivalent",
        "C7" => "alternation number of a formula is at most 2k|x|+1",
        "C8" => "the rank of a pair type is at most the sum of the ranks",
        "C9" => "VC* density of the order theories tracks their dp-rank",
        "C10" => "switch points of a trace become alternations of the biconditional",
        _ => "identical seeds give byte-identical output",
    }
}

fn check(claim: &str, label: &str, pass: bool, measured: impl Into<String>) -> Check {
    Check {
        claim: claim.to_string(),
        anchor: anchor(claim).to_string(),
        label: label.to_string(),
        pass,
        measured: measured.into(),
    }
}

fn time_check(claim: &str, start: &Instant, limit_secs: f64) -> Check {
    let secs = start.elapsed().as_secs_f64();
    check(claim, "time", secs < limit_secs, format!("{secs:.3} s (limit {limit_secs} s)"))
}

fn trial_rng(cfg: &ExperimentConfig, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(1_000_003).wrapping_add(trial as u64))
}

fn sauer_audit(cfg: &ExperimentConfig, start: &Instant) -> Result<Outcome> {
    let mut csv = String::from("trial,ground,members,vc,m,pi_m,bound\n");
    let mut inequalities = 0u64;
    let mut violations = 0u64;
    for t in 0..cfg.trials {
        let fam = random_family(&mut trial_rng(cfg, t), 12, 40);
        let vc = fam.vc_dimension();
        for entry in fam.shatter_profile()?.values {
            let bound = if vc < 0 { 0 } else { sauer_bound(entry.m as u64, vc as u64) };
            inequalities += 1;
            if entry.pi_m as u128 > bound {
                violations += 1;
            }
            let _ = writeln!(csv, "{t},{},{},{vc},{},{},{bound}", fam.ground_size(), fam.len(), entry.m, entry.pi_m);
        }
    }
    let checks = vec![
        check(
            "C1",
            "violations",
            violations == 0,
            format!("{violations} of {inequalities} inequalities over {} families", cfg.trials),
        ),
        time_check("C1", start, 10.0),
    ];
    Ok((checks, csv))
}

/// Largest set of members such that every subset of it is cut out by some
/// element, computed on the family itself.
fn dual_shatter_dimension(fam: &SetFamily) -> i64 {
    if fam.ground_size() == 0 {
        return -1;
    }
    let mut best = 0;
    for d in 1..=fam.len() {
        if fam.ground_size() < (1usize << d.min(63)) {
            break;
        }
        let found = for_each_combination(fam.len(), d, |members| {
            let patterns: HashSet<Vec<bool>> = (0..fam.ground_size())
                .map(|e| members.iter().map(|&m| fam.contains(m, e)).collect())
                .collect();
            patterns.len() < (1usize << d)
        });
        if !found {
            break;
        }
        best = d as i64;
    }
    best
}

fn dual_law(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut csv = String::from("trial,ground,members,vc,vc_dual,vc_star_direct,vc_double_dual\n");
    let mut disagreements = 0;
    for t in 0..cfg.trials {
        let fam = random_family(&mut trial_rng(cfg, t), 12, 40);
        let vc = fam.vc_dimension();
        let dual = fam.dual();
        let vc_dual = dual.vc_dimension();
        let direct = dual_shatter_dimension(&fam);
        let double = dual.dual().vc_dimension();
        if vc_dual != direct || double != vc {
            disagreements += 1;
        }
        let _ = writeln!(csv, "{t},{},{},{vc},{vc_dual},{direct},{double}", fam.ground_size(), fam.len());
    }
    let checks = vec![check(
        "C2",
        "agreement",
        disagreements == 0,
        format!("{disagreements} disagreements over {} families", cfg.trials),
    )];
    Ok((checks, csv))
}

/// Sample with every original point, one point in each pair of cuts of the
/// two orders, and random filler up to 50 points. Original point `i` keeps
/// index `i`.
fn super_sample(s: &TheorySample, rng: &mut impl Rng) -> TheorySample {
    let n = s.len() as i64;
    let position = |rel: Rel| -> Vec<i64> {
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by_key(|&i| s.points[i].rank(rel).unwrap_or(0));
        let mut pos = vec![0; s.len()];
        for (p, &i) in order.iter().enumerate() {
            pos[i] = p as i64;
        }
        pos
    };
    let (p1, p2) = (position(Rel::Lt1), position(Rel::Lt2));
    let mut points: Vec<Point> = (0..s.len())
        .map(|i| Point::Ddlo {
            rank1: 100 * (p1[i] + 1),
            rank2: 100 * (p2[i] + 1),
        })
        .collect();
    for i in 0..=n {
        for j in 0..=n {
            points.push(Point::Ddlo {
                rank1: 100 * i + 1 + j,
                rank2: 100 * j + 1 + i,
            });
        }
    }
    let mut used: HashSet<(i64, i64)> = HashSet::new();
    while points.len() < 50 {
        let r1 = 100 * rng.gen_range(0..=n) + rng.gen_range(10..100);
        let r2 = 100 * rng.gen_range(0..=n) + rng.gen_range(10..100);
        if used.insert((r1, r2)) {
            points.push(Point::Ddlo { rank1: r1, rank2: r2 });
        }
    }
    TheorySample::new(TheoryId::Ddlo, SampleParams { size: 50, ..Default::default() }, points)
}

fn random_constraints(rng: &mut impl Rng, size: usize) -> ConstraintSet {
    let mut params: Vec<usize> = (0..size).collect();
    params.shuffle(rng);
    params.truncate(rng.gen_range(1..=size.min(3)));
    let mut set = ConstraintSet::default();
    for _ in 0..rng.gen_range(1..=6) {
        let rel = match rng.gen_range(0..5) {
            0 => Rel::Eq,
            1 | 2 => Rel::Lt1,
            _ => Rel::Lt2,
        };
        let p = Term::Param(*params.choose(rng).expect("non-empty"));
        let other = if rng.gen_bool(0.15) {
            Term::Param(*params.choose(rng).expect("non-empty"))
        } else {
            Term::Var(0)
        };
        let (l, r) = if rng.gen_bool(0.5) { (p, other) } else { (other, p) };
        set.push(Literal::new(rel, l, r, rng.gen_bool(0.6)));
    }
    set
}

fn brute_force(sup: &TheorySample, set: &ConstraintSet) -> bool {
    (0..sup.len()).any(|c| {
        set.literals.iter().all(|lit| {
            let idx = |t: Term| match t {
                Term::Var(_) => c,
                Term::Param(p) => p,
            };
            let (a, b) = (&sup.points[idx(lit.atom.left)], &sup.points[idx(lit.atom.right)]);
            a.holds(lit.atom.rel, b) == Some(lit.positive)
        })
    })
}

fn oracle_brute(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut csv = String::from("trial,size,atoms,oracle,brute\n");
    let mut mismatches = 0;
    let mut satisfiable = 0;
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg, t);
        let size = rng.gen_range(1..=5);
        let s = sample(TheoryId::Ddlo, size, rng.gen(), None, None)?;
        let set = random_constraints(&mut rng, size);
        let sup = super_sample(&s, &mut rng);
        let fast = consistent(TheoryId::Ddlo, &set, &s)?;
        let brute = brute_force(&sup, &set);
        mismatches += usize::from(fast != brute);
        satisfiable += usize::from(brute);
        let _ = writeln!(csv, "{t},{size},{},{fast},{brute}", set.literals.len());
    }
    let checks = vec![check(
        "C3",
        "agreement",
        mismatches == 0,
        format!("{mismatches} mismatches over {} cases ({satisfiable} satisfiable)", cfg.trials),
    )];
    Ok((checks, csv))
}

fn ddlo_depth(cfg: &ExperimentConfig, start: &Instant) -> Result<Outcome> {
    let pool = ddlo_pool(cfg.n, cfg.sizes[0])?;
    let lib = library(&pool.sample, 1)?;
    let r = depth_search(&pool, &ConstraintSet::default(), &lib, cfg.max_depth, cfg.arity, budget_from_env())?;
    let depth = r.depth();
    let checked = r.verdict.as_ref().map_or(0, |v| v.assignments_checked);
    let mut csv = String::from("depth,attempts,verified\n");
    for (i, a) in r.attempts.iter().enumerate() {
        let _ = writeln!(csv, "{},{a},{}", i + 1, i < depth);
    }
    let above = r.attempts.get(2).copied().unwrap_or(0);
    let checks = vec![
        check("C4", "depth", depth == 2, format!("{depth} (exhaustive {})", r.exhaustive)),
        check("C4", "eta checks at depth 2", checked == 25, format!("{checked}")),
        check(
            "C4",
            "depth 3 attempts fail",
            r.exhaustive && depth < 3 && above > 0,
            format!("{above} attempts, none verified"),
        ),
        time_check("C4", start, 5.0),
    ];
    Ok((checks, csv))
}

fn eqtree_depth(cfg: &ExperimentConfig, start: &Instant) -> Result<Outcome> {
    let mut csv = String::from("n,depth,verified,assignments,broken\n");
    let mut bad = Vec::new();
    for n in 1..=cfg.n {
        let w = eqtree_witness(TheoryId::Eqtree, n as u32, cfg.sizes[0])?;
        let spec = w.spec()?;
        let v = verify(&w.pool.sample, &spec, cfg.arity)?;
        let broken = broken_count(&w.pool.sample, &spec.rows, &[], &[w.c], &Delta::Atomic, cfg.arity)?;
        if !(v.verified && v.depth == n && broken.count == n) {
            bad.push(n);
        }
        let _ = writeln!(
            csv,
            "{n},{},{},{},{}",
            v.depth, v.verified, v.assignments_checked, broken.count
        );
    }
    let checks = vec![
        check(
            "C5",
            "depth and broken rows",
            bad.is_empty(),
            format!("depth n with all n rows broken for n = 1..={}; failing n: {bad:?}", cfg.n),
        ),
        time_check("C5", start, 30.0),
    ];
    Ok((checks, csv))
}

fn round_trip_spec(theory: TheoryId, k: usize) -> Result<(TheorySample, PatternSpec)> {
    let len = 3 * k;
    if theory == TheoryId::Ddlo {
        let pool = ddlo_pool(k, len)?;
        // a 1-type has depth 2, so depth 3 needs a pair type
        let formulas = if k <= 2 {
            library(&pool.sample, 1)?[..k].to_vec()
        } else {
            let lib = library(&pool.sample, 2)?;
            let per = lib.len() / 2;
            let mut f = vec![lib[0].clone(), lib[1].clone(), lib[per].clone()];
            f.truncate(k);
            f
        };
        Ok((pool.sample.clone(), PatternSpec::new(pool.rows, formulas)?))
    } else {
        let w = eqtree_witness(theory, k as u32, len)?;
        Ok((w.pool.sample.clone(), w.spec()?))
    }
}

fn round_trip(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut csv = String::from("theory,k,pattern,subsets,all_definable,alternations,segments\n");
    let mut failing = Vec::new();
    let theories = match cfg.theory {
        Some(t) => vec![t],
        None => vec![TheoryId::Ddlo, TheoryId::Eqtree],
    };
    for &theory in &theories {
        for k in 1..=cfg.n {
            let (s, spec) = round_trip_spec(theory, k)?;
            let v = verify(&s, &spec, cfg.arity)?;
            let il = pattern_to_interleaved(&s, &spec)?;
            let chosen = spaced_subset(k);
            let bits: Vec<bool> = (0..il.sequence.len()).map(|j| chosen.contains(&j)).collect();
            let realized = trace_realizable(&s, &il.psi, &il.sequence, &chosen, &spec.partial_type)?;
            let alternations = alternation_count(&bits);
            let segments = match alternation_to_pattern(&s, &il.psi, &il.sequence, &bits, k, cfg.arity) {
                Ok((seg, verdict)) => verdict.verified && seg.depth() == k,
                Err(DpError::Contract(_)) => false,
                Err(e) => return Err(e),
            };
            let ok = v.verified && il.all_definable() && realized && alternations == 2 * k && segments;
            if !ok {
                failing.push(format!("{theory} k={k}"));
            }
            let _ = writeln!(
                csv,
                "{theory},{k},{},{},{},{alternations},{segments}",
                v.verified,
                il.subsets.len(),
                il.all_definable()
            );
        }
    }
    let checks = vec![check(
        "C6",
        "every link",
        failing.is_empty(),
        format!("k = 1..={} on {} theories; failing: {failing:?}", cfg.n, theories.len()),
    )];
    Ok((checks, csv))
}

struct AltStats {
    max: usize,
    violations: usize,
}

/// Oracle-mode alternation searches over seeded indiscernible sequences.
fn alt_trials(
    cfg: &ExperimentConfig,
    theory: TheoryId,
    x_arity: usize,
    len: usize,
    bound: usize,
    salt: usize,
    csv: &mut String,
) -> Result<AltStats> {
    let mut stats = AltStats { max: 0, violations: 0 };
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg, salt + t);
        let (s, seq, f) = if theory == TheoryId::Ddlo && x_arity == 1 && t % 4 == 0 {
            let (s, seq) = interval_sequence(len)?;
            (s, seq, interval_union())
        } else {
            let width = rng.gen_range(1..=2);
            let (s, seq) = random_indiscernible(&mut rng, theory, len, width)?;
            let f = random_formula(&mut rng, theory, x_arity, width);
            (s, seq, f)
        };
        let r = alternation_search_oracle(&s, &f, &seq, &ConstraintSet::default())?;
        stats.max = stats.max.max(r.max);
        stats.violations += usize::from(r.max > bound);
        let _ = writeln!(csv, "{theory},{x_arity},{t},{},{},{}", seq.width(), csv_field(&f.to_string()), r.max);
    }
    Ok(stats)
}

fn alt_audit(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut csv = String::from("theory,x_arity,trial,width,formula,max\n");
    let mut checks = Vec::new();
    let theories = match cfg.theory {
        Some(t) => vec![t],
        None => vec![TheoryId::Dlo, TheoryId::Ddlo],
    };
    for (i, &theory) in theories.iter().enumerate() {
        let (bound, attain) = match theory {
            TheoryId::Dlo => (3, 3),
            TheoryId::Ddlo => (5, 4),
            other => return Err(DpError::domain(format!("alternation audit covers DLO and DDLO, not {other}"))),
        };
        let stats = alt_trials(cfg, theory, 1, cfg.sizes[0], bound, i * 1_000_000, &mut csv)?;
        checks.push(check(
            "C7",
            &format!("{theory} bound {bound}"),
            stats.violations == 0,
            format!("{} violations over {} searches", stats.violations, cfg.trials),
        ));
        checks.push(check(
            "C7",
            &format!("{theory} attains {attain}"),
            stats.max >= attain,
            format!("largest alternation found {}", stats.max),
        ));
    }
    Ok((checks, csv))
}

fn subadditivity(cfg: &ExperimentConfig) -> Result<Outcome> {
    let pool = ddlo_pool(cfg.n, cfg.sizes[0])?;
    let mut csv = String::from("part,x_arity,trial,width,formula,value\n");
    let mut depths = Vec::new();
    for x_arity in [1, 2] {
        let lib = library(&pool.sample, x_arity)?;
        let r = depth_search(&pool, &ConstraintSet::default(), &lib, cfg.max_depth, cfg.arity, budget_from_env())?;
        let _ = writeln!(csv, "search,{x_arity},,,,{}", r.depth());
        depths.push((r.depth(), r.exhaustive));
    }
    let len = cfg.sizes.get(1).copied().unwrap_or(11);
    let mut alt_csv = String::new();
    let stats = alt_trials(cfg, TheoryId::Ddlo, 2, len, 9, 2_000_000, &mut alt_csv)?;
    for line in alt_csv.lines() {
        // theory,x_arity,trial,width,formula,max -> alt,x_arity,...
        let rest = line.split_once(',').map_or(line, |(_, r)| r);
        let _ = writeln!(csv, "alt,{rest}");
    }
    let (pair_depth, pair_exhaustive) = depths[1];
    let checks = vec![
        check(
            "C8",
            "pair depth",
            pair_depth == 4,
            format!("{pair_depth} (exhaustive {pair_exhaustive})"),
        ),
        check(
            "C8",
            "no search exceeds 4",
            depths.iter().all(|&(d, _)| d <= 4) && depths.iter().all(|&(_, e)| e),
            format!("depths {:?}", depths.iter().map(|d| d.0).collect::<Vec<_>>()),
        ),
        check(
            "C8",
            "pair alternation bound 9",
            stats.violations == 0,
            format!("{} violations over {} seeds, largest {}", stats.violations, cfg.trials, stats.max),
        ),
    ];
    Ok((checks, csv))
}

fn order_delta(theory: TheoryId) -> Vec<Formula> {
    let mut d = vec![Formula::atom(Rel::Lt1, Slot::X(0), Slot::Y(0))];
    if theory == TheoryId::Ddlo {
        d.push(Formula::atom(Rel::Lt2, Slot::X(0), Slot::Y(0)));
    }
    d.push(Formula::atom(Rel::Eq, Slot::X(0), Slot::Y(0)));
    d
}

fn density_fit(cfg: &ExperimentConfig, start: &Instant) -> Result<Outcome> {
    let theories = match cfg.theory {
        Some(t) => vec![t],
        None => vec![TheoryId::Dlo, TheoryId::Ddlo],
    };
    let mut all = CountTable { rows: Vec::new() };
    let mut checks = Vec::new();
    for &theory in &theories {
        let (lo, hi) = match theory {
            TheoryId::Dlo => (0.85, 1.15),
            TheoryId::Ddlo => (1.8, 2.2),
            other => return Err(DpError::domain(format!("density fit covers DLO and DDLO, not {other}"))),
        };
        let table = count_table(theory, &order_delta(theory), &cfg.sizes, cfg.seed, Mode::Oracle)?;
        let fit = fit_exponent(&table, 8)?;
        checks.push(check(
            "C9",
            &format!("{theory} slope"),
            (lo..=hi).contains(&fit.slope),
            format!("{:.4} in [{lo:.2}, {hi:.2}], residual {:.2e}", fit.slope, fit.residual),
        ));
        all.rows.extend(table.rows);
    }
    let worst = (1..=3)
        .map(|e| Ok((fit_exponent(&power_law_table(e, &cfg.sizes), 1)?.slope - e as f64).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(check(
        "C9",
        "power-law self-test",
        worst <= cfg.tolerance,
        format!("largest slope error {worst:.1e} (tolerance {:.0e})", cfg.tolerance),
    ));
    checks.push(time_check("C9", start, 60.0));
    Ok((checks, all.to_csv()))
}

/// DDLO sample whose first `4(k+1)` points form runs of four below and above
/// a candidate in the second order; the candidate `c` sees `k` switch points
/// for `x <2 y0`, a second candidate sees none.
fn planted_switches(k: usize) -> (TheorySample, Sequence, Vec<Vec<usize>>) {
    let len = 4 * (k + 1);
    let mut points: Vec<Point> = (0..len)
        .map(|i| {
            let above = (i / 4) % 2 == 1;
            Point::Ddlo {
                rank1: i as i64,
                rank2: if above { 1000 + i as i64 } else { i as i64 },
            }
        })
        .collect();
    points.push(Point::Ddlo { rank1: 500, rank2: 999 });
    points.push(Point::Ddlo { rank1: 501, rank2: 5000 });
    let s = TheorySample::new(TheoryId::Ddlo, SampleParams { size: len + 2, ..Default::default() }, points);
    let seq = Sequence::singletons(&(0..len).collect::<Vec<_>>());
    (s, seq, vec![vec![len + 1], vec![len]])
}

fn switch_points(cfg: &ExperimentConfig) -> Result<Outcome> {
    let phi = Formula::atom(Rel::Lt2, Slot::X(0), Slot::Y(0));
    let mut csv = String::from("k,switches,switches_used,alternations\n");
    let mut failing = Vec::new();
    for k in 1..=cfg.n {
        let (s, seq, candidates) = planted_switches(k);
        let out = switchpoints_to_alternation(&s, &phi, &seq, &candidates)?;
        let (switches, used, alternations) = out
            .as_ref()
            .map_or((0, 0, 0), |o| (o.switches, o.selection.switches_used, o.alternations));
        if !(switches == k && used == k && alternations == 2 * k) {
            failing.push(k);
        }
        let _ = writeln!(csv, "{k},{switches},{used},{alternations}");
    }
    let checks = vec![check(
        "C10",
        "alternations",
        failing.is_empty(),
        format!("exactly 2k for k = 1..={}; failing k: {failing:?}", cfg.n),
    )];
    Ok((checks, csv))
}

fn determinism(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut csv = String::from("experiment,csv_bytes,identical\n");
    let mut differing = Vec::new();
    for name in EXPERIMENTS.iter().filter(|&&n| n != "determinism") {
        let mut sub = ExperimentConfig::defaults(name)?;
        sub.seed = sub.seed.wrapping_add(cfg.seed);
        let first = run_experiment(&sub)?;
        let second = run_experiment(&sub)?;
        let same = first.csv == second.csv;
        if !same {
            differing.push(*name);
        }
        let _ = writeln!(csv, "{name},{},{same}", first.csv.len());
    }
    let checks = vec![check(
        "C11",
        "identical csv",
        differing.is_empty(),
        format!("{} experiments re-run; differing: {differing:?}", EXPERIMENTS.len() - 1),
    )];
    Ok((checks, csv))
}
