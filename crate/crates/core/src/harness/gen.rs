//! Seeded generators for the audits: set families, indiscernible sequences
//! in the order theories, and random quantifier-free formulas.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{DpError, Result};
use crate::indisc::{check, Delta, Sequence};
use crate::setfam::{BitRow, SetFamily};
use crate::theories::{Formula, Point, Rel, SampleParams, Slot, TheoryId, TheorySample};

/// Random family on at most `max_ground` elements with at most
/// `max_members` members, each element included with a per-family density.
pub fn random_family(rng: &mut impl Rng, max_ground: usize, max_members: usize) -> SetFamily {
    let ground = rng.gen_range(1..=max_ground);
    let members = rng.gen_range(0..=max_members);
    let density: f64 = rng.gen_range(0.1..0.9);
    let rows = (0..members)
        .map(|_| BitRow::from_bools(&(0..ground).map(|_| rng.gen_bool(density)).collect::<Vec<_>>()))
        .collect();
    SetFamily::new(ground, rows).expect("rows have the ground length")
}

/// An increasing-in-entries sequence built from order regions: in each
/// order every coordinate sits in a region (coordinates sharing a region
/// share its direction) at a fixed offset, so every pair of entries has the
/// same order type. The result is checked for atomic indiscernibility.
pub fn random_indiscernible(
    rng: &mut impl Rng,
    theory: TheoryId,
    len: usize,
    width: usize,
) -> Result<(TheorySample, Sequence)> {
    let orders = match theory {
        TheoryId::Dlo => 1,
        TheoryId::Ddlo => 2,
        _ => return Err(DpError::domain("indiscernible generator covers DLO and DDLO")),
    };
    if len == 0 || width == 0 {
        return Err(DpError::domain("need a positive length and width"));
    }
    let mut ranks = vec![vec![0i64; len * width]; orders];
    for order in ranks.iter_mut() {
        let regions: Vec<usize> = (0..width).map(|_| rng.gen_range(0..width)).collect();
        let ascending: Vec<bool> = (0..width).map(|_| rng.gen_bool(0.5)).collect();
        let mut offsets: Vec<i64> = (1..=width as i64).collect();
        offsets.shuffle(rng);
        for i in 0..len {
            for c in 0..width {
                let r = regions[c];
                let step = if ascending[r] { i } else { len - 1 - i } as i64;
                order[i * width + c] = r as i64 * 100_000 + step * 10 + offsets[c];
            }
        }
    }
    build(theory, len, width, &ranks)
}

/// Width-2 DDLO sequence whose entries are consecutive intervals, increasing
/// in the first order and decreasing in the second.
pub fn interval_sequence(len: usize) -> Result<(TheorySample, Sequence)> {
    let mut ranks = vec![vec![0i64; 2 * len]; 2];
    for i in 0..len {
        for c in 0..2 {
            ranks[0][2 * i + c] = (i * 10) as i64 + c as i64 + 1;
            ranks[1][2 * i + c] = ((len - 1 - i) * 10) as i64 + c as i64 + 1;
        }
    }
    build(TheoryId::Ddlo, len, 2, &ranks)
}

fn build(theory: TheoryId, len: usize, width: usize, ranks: &[Vec<i64>]) -> Result<(TheorySample, Sequence)> {
    let points = (0..len * width)
        .map(|p| match theory {
            TheoryId::Dlo => Point::Dlo { rank: ranks[0][p] },
            _ => Point::Ddlo {
                rank1: ranks[0][p],
                rank2: ranks[1][p],
            },
        })
        .collect::<Vec<_>>();
    let sample = TheorySample::new(
        theory,
        SampleParams {
            size: points.len(),
            ..Default::default()
        },
        points,
    );
    let seq = Sequence::new((0..len).map(|i| (i * width..(i + 1) * width).collect()).collect())?;
    let report = check(&sample, &seq, &[], &Delta::Atomic, 2)?;
    if !report.ok {
        return Err(DpError::contract(format!(
            "generated sequence is not indiscernible: {:?}",
            report.witness
        )));
    }
    Ok((sample, seq))
}

/// `(y0 <1 x0 & x0 <1 y1) | (y0 <2 x0 & x0 <2 y1)`.
pub fn interval_union() -> Formula {
    let interval = |rel| {
        Formula::and(vec![
            Formula::atom(rel, Slot::Y(0), Slot::X(0)),
            Formula::atom(rel, Slot::X(0), Slot::Y(1)),
        ])
    };
    Formula::or(vec![interval(Rel::Lt1), interval(Rel::Lt2)])
}

/// Random formula with at most four atoms, each relating some `x` variable
/// to a `y` variable or to another `x` variable.
pub fn random_formula(rng: &mut impl Rng, theory: TheoryId, x_arity: usize, y_arity: usize) -> Formula {
    random_tree(rng, theory, x_arity, y_arity, 2)
}

fn random_tree(rng: &mut impl Rng, theory: TheoryId, xa: usize, ya: usize, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.35) {
        return random_atom(rng, theory, xa, ya);
    }
    let child = |rng: &mut _| random_tree(rng, theory, xa, ya, depth - 1);
    match rng.gen_range(0..4) {
        0 => child(rng).not(),
        1 => Formula::and(vec![child(rng), child(rng)]),
        2 => Formula::or(vec![child(rng), child(rng)]),
        _ => Formula::iff(child(rng), child(rng)),
    }
}

fn random_atom(rng: &mut impl Rng, theory: TheoryId, xa: usize, ya: usize) -> Formula {
    let rel = match (theory, rng.gen_range(0..5)) {
        (_, 0) => Rel::Eq,
        (TheoryId::Ddlo, r) if r >= 3 => Rel::Lt2,
        _ => Rel::Lt1,
    };
    let x = rng.gen_range(0..xa);
    let other = if xa > 1 && rng.gen_bool(0.2) {
        Slot::X((x + rng.gen_range(1..xa)) % xa)
    } else {
        Slot::Y(rng.gen_range(0..ya))
    };
    if rng.gen_bool(0.5) {
        Formula::atom(rel, Slot::X(x), other)
    } else {
        Formula::atom(rel, other, Slot::X(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_sequences_are_indiscernible_at_arity_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for t in 0..60 {
            let theory = if t % 2 == 0 { TheoryId::Dlo } else { TheoryId::Ddlo };
            let (s, seq) = random_indiscernible(&mut rng, theory, 6, 1 + t % 2).unwrap();
            assert!(check(&s, &seq, &[], &Delta::Atomic, 3).unwrap().ok);
        }
        let (s, seq) = interval_sequence(6).unwrap();
        assert!(check(&s, &seq, &[], &Delta::Atomic, 3).unwrap().ok);
    }

    #[test]
    fn formulas_stay_in_language_and_arity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let f = random_formula(&mut rng, TheoryId::Dlo, 2, 2);
            f.check_language(TheoryId::Dlo).unwrap();
            assert!(f.x_arity() <= 2 && f.y_arity() <= 2 && f.atom_count() <= 4);
        }
    }
}
