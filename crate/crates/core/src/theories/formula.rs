//! Quantifier-free formulas over the theory atoms.
//!
//! [`Formula`] has variable slots `x_i` (realization tuple) and `y_j`
//! (parameter tuple). Instantiating the `y` slots with sample points and the
//! `x` slots with fresh variables gives a [`Prop`], the ground form the
//! consistency oracles consume.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Rel, TheoryId, TheorySample};
use crate::error::{DpError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    X(usize),
    Y(usize),
}

/// A term of a ground constraint: a fresh realization variable or a sample
/// point (by index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(usize),
    Param(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom<V> {
    pub rel: Rel,
    pub left: V,
    pub right: V,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr<V> {
    Const(bool),
    Atom(Atom<V>),
    Not(Box<Expr<V>>),
    And(Vec<Expr<V>>),
    Or(Vec<Expr<V>>),
    Iff(Box<Expr<V>>, Box<Expr<V>>),
}

pub type Formula = Expr<Slot>;
pub type Prop = Expr<Term>;

/// A signed ground atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom<Term>,
    pub positive: bool,
}

impl Literal {
    pub fn new(rel: Rel, left: Term, right: Term, positive: bool) -> Self {
        Literal {
            atom: Atom { rel, left, right },
            positive,
        }
    }

    pub fn negate(self) -> Self {
        Literal {
            positive: !self.positive,
            ..self
        }
    }

    pub fn to_prop(self) -> Prop {
        let atom = Expr::Atom(self.atom);
        if self.positive {
            atom
        } else {
            Expr::Not(Box::new(atom))
        }
    }
}

impl<V: Copy> Expr<V> {
    pub fn atom(rel: Rel, left: V, right: V) -> Self {
        Expr::Atom(Atom { rel, left, right })
    }

    pub fn not(self) -> Self {
        Expr::Not(Box::new(self))
    }

    pub fn and(parts: Vec<Self>) -> Self {
        Expr::And(parts)
    }

    pub fn or(parts: Vec<Self>) -> Self {
        Expr::Or(parts)
    }

    pub fn iff(a: Self, b: Self) -> Self {
        Expr::Iff(Box::new(a), Box::new(b))
    }

    /// Applies `f` to every leaf variable.
    pub fn map_vars<W: Copy>(&self, f: &mut impl FnMut(V) -> W) -> Expr<W> {
        match self {
            Expr::Const(b) => Expr::Const(*b),
            Expr::Atom(a) => Expr::Atom(Atom {
                rel: a.rel,
                left: f(a.left),
                right: f(a.right),
            }),
            Expr::Not(e) => Expr::Not(Box::new(e.map_vars(f))),
            Expr::And(es) => Expr::And(es.iter().map(|e| e.map_vars(f)).collect()),
            Expr::Or(es) => Expr::Or(es.iter().map(|e| e.map_vars(f)).collect()),
            Expr::Iff(a, b) => Expr::Iff(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
        }
    }

    pub fn atoms(&self) -> Vec<Atom<V>> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut Vec<Atom<V>>) {
        match self {
            Expr::Const(_) => {}
            Expr::Atom(a) => out.push(*a),
            Expr::Not(e) => e.collect_atoms(out),
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.collect_atoms(out)),
            Expr::Iff(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms().len()
    }

    /// Classical evaluation given a truth assignment for atoms.
    pub fn eval_with<E>(&self, atom_value: &mut impl FnMut(&Atom<V>) -> std::result::Result<bool, E>) -> std::result::Result<bool, E> {
        Ok(match self {
            Expr::Const(b) => *b,
            Expr::Atom(a) => atom_value(a)?,
            Expr::Not(e) => !e.eval_with(atom_value)?,
            Expr::And(es) => {
                for e in es {
                    if !e.eval_with(atom_value)? {
                        return Ok(false);
                    }
                }
                true
            }
            Expr::Or(es) => {
                for e in es {
                    if e.eval_with(atom_value)? {
                        return Ok(true);
                    }
                }
                false
            }
            Expr::Iff(a, b) => a.eval_with(atom_value)? == b.eval_with(atom_value)?,
        })
    }
}

impl Formula {
    /// Number of `x` slots, i.e. one more than the largest index used.
    pub fn x_arity(&self) -> usize {
        self.atoms()
            .iter()
            .flat_map(|a| [a.left, a.right])
            .filter_map(|s| match s {
                Slot::X(i) => Some(i + 1),
                Slot::Y(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn y_arity(&self) -> usize {
        self.atoms()
            .iter()
            .flat_map(|a| [a.left, a.right])
            .filter_map(|s| match s {
                Slot::Y(j) => Some(j + 1),
                Slot::X(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Renumbers `y_j` to `y_{j + offset}`.
    pub fn shift_y(&self, offset: usize) -> Formula {
        self.map_vars(&mut |s| match s {
            Slot::Y(j) => Slot::Y(j + offset),
            x => x,
        })
    }

    /// Renumbers `x_i` to `x_{map[i]}`.
    pub fn remap_x(&self, map: &[usize]) -> Formula {
        self.map_vars(&mut |s| match s {
            Slot::X(i) => Slot::X(map[i]),
            y => y,
        })
    }

    /// Checks that every atom is in the theory's language.
    pub fn check_language(&self, theory: TheoryId) -> Result<()> {
        for a in self.atoms() {
            if !theory.allows(a.rel) {
                return Err(DpError::domain(format!(
                    "atom {} is not in the language of {theory}",
                    a.rel
                )));
            }
        }
        Ok(())
    }

    /// Ground instance: `x_i ↦ x_terms[i]`, `y_j ↦ Param(y_params[j])`.
    pub fn instantiate(&self, x_terms: &[Term], y_params: &[usize]) -> Result<Prop> {
        let (xa, ya) = (self.x_arity(), self.y_arity());
        if xa > x_terms.len() || ya > y_params.len() {
            return Err(DpError::domain(format!(
                "formula needs |x| = {xa}, |y| = {ya}; got {} and {}",
                x_terms.len(),
                y_params.len()
            )));
        }
        Ok(self.map_vars(&mut |s| match s {
            Slot::X(i) => x_terms[i],
            Slot::Y(j) => Term::Param(y_params[j]),
        }))
    }

    /// Instance with fresh variables `x_i ↦ Var(i)`.
    pub fn at(&self, y_params: &[usize]) -> Result<Prop> {
        let xs: Vec<Term> = (0..self.x_arity()).map(Term::Var).collect();
        self.instantiate(&xs, y_params)
    }
}

/// Truth of `formula(x_args, y_args)` where both tuples are sample indices.
pub fn eval(
    formula: &Formula,
    sample: &TheorySample,
    x_args: &[usize],
    y_args: &[usize],
) -> Result<bool> {
    if formula.x_arity() > x_args.len() || formula.y_arity() > y_args.len() {
        return Err(DpError::domain(format!(
            "arity mismatch: formula needs ({}, {}), got ({}, {})",
            formula.x_arity(),
            formula.y_arity(),
            x_args.len(),
            y_args.len()
        )));
    }
    let resolve = |s: Slot| match s {
        Slot::X(i) => x_args[i],
        Slot::Y(j) => y_args[j],
    };
    formula.eval_with(&mut |a: &Atom<Slot>| sample.holds(a.rel, resolve(a.left), resolve(a.right)))
}

/// Truth of a ground proposition once the variables are bound to sample
/// points (`vars[i]` is the point for `Var(i)`).
pub fn eval_prop(prop: &Prop, sample: &TheorySample, vars: &[usize]) -> Result<bool> {
    let resolve = |t: Term| -> Result<usize> {
        match t {
            Term::Param(p) => Ok(p),
            Term::Var(i) => vars
                .get(i)
                .copied()
                .ok_or_else(|| DpError::domain(format!("variable x{i} is unbound"))),
        }
    };
    prop.eval_with(&mut |a: &Atom<Term>| sample.holds(a.rel, resolve(a.left)?, resolve(a.right)?))
}

impl Prop {
    /// Disjunctive normal form as a list of literal conjunctions. `Const(false)`
    /// yields no disjuncts and `Const(true)` a single empty one.
    pub fn dnf(&self) -> Vec<Vec<Literal>> {
        self.dnf_signed(true)
    }

    /// Worst-case number of disjuncts `dnf` would produce.
    pub fn dnf_width(&self, positive: bool) -> u128 {
        match self {
            Expr::Const(_) | Expr::Atom(_) => 1,
            Expr::Not(e) => e.dnf_width(!positive),
            Expr::And(es) if positive => es.iter().map(|e| e.dnf_width(true)).product(),
            Expr::Or(es) if !positive => es.iter().map(|e| e.dnf_width(false)).product(),
            Expr::And(es) | Expr::Or(es) => es.iter().map(|e| e.dnf_width(positive)).sum(),
            Expr::Iff(a, b) => {
                // a↔b ≡ (a∧b)∨(¬a∧¬b); ¬(a↔b) ≡ (a∧¬b)∨(¬a∧b)
                let (ap, an, bp, bn) = (
                    a.dnf_width(true),
                    a.dnf_width(false),
                    b.dnf_width(true),
                    b.dnf_width(false),
                );
                if positive {
                    ap * bp + an * bn
                } else {
                    ap * bn + an * bp
                }
            }
        }
    }

    fn dnf_signed(&self, positive: bool) -> Vec<Vec<Literal>> {
        match self {
            Expr::Const(b) => {
                if *b == positive {
                    vec![vec![]]
                } else {
                    vec![]
                }
            }
            Expr::Atom(a) => vec![vec![Literal {
                atom: *a,
                positive,
            }]],
            Expr::Not(e) => e.dnf_signed(!positive),
            Expr::And(es) if positive => product(es.iter().map(|e| e.dnf_signed(true))),
            Expr::Or(es) if !positive => product(es.iter().map(|e| e.dnf_signed(false))),
            Expr::And(es) | Expr::Or(es) => es
                .iter()
                .flat_map(|e| e.dnf_signed(positive))
                .collect(),
            Expr::Iff(a, b) => {
                let (ap, an) = (a.dnf_signed(true), a.dnf_signed(false));
                let (bp, bn) = (b.dnf_signed(true), b.dnf_signed(false));
                let (first, second) = if positive { (bp.clone(), bn) } else { (bn, bp) };
                let mut out = product([ap, first].into_iter());
                out.extend(product([an, second].into_iter()));
                out
            }
        }
    }

    pub fn params(&self) -> BTreeSet<usize> {
        self.atoms()
            .iter()
            .flat_map(|a| [a.left, a.right])
            .filter_map(|t| match t {
                Term::Param(p) => Some(p),
                Term::Var(_) => None,
            })
            .collect()
    }
}

fn product(parts: impl Iterator<Item = Vec<Vec<Literal>>>) -> Vec<Vec<Literal>> {
    let mut acc: Vec<Vec<Literal>> = vec![vec![]];
    for part in parts {
        let mut next = Vec::with_capacity(acc.len() * part.len());
        for left in &acc {
            for right in &part {
                let mut conj = left.clone();
                conj.extend_from_slice(right);
                next.push(conj);
            }
        }
        acc = next;
        if acc.is_empty() {
            break;
        }
    }
    acc
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::X(i) => write!(f, "x{i}"),
            Slot::Y(j) => write!(f, "y{j}"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "x{i}"),
            Term::Param(p) => write!(f, "#{p}"),
        }
    }
}

fn precedence<V>(e: &Expr<V>) -> u8 {
    match e {
        Expr::Iff(..) => 0,
        Expr::Or(_) => 1,
        Expr::And(_) => 2,
        _ => 3,
    }
}

impl<V: fmt::Display + Copy> Expr<V> {
    fn fmt_child(&self, child: &Expr<V>, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if precedence(child) < min {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl<V: fmt::Display + Copy> fmt::Display for Expr<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(true) => f.write_str("true"),
            Expr::Const(false) => f.write_str("false"),
            Expr::Atom(a) => match a.rel {
                Rel::Eq => write!(f, "{}={}", a.left, a.right),
                Rel::Equiv(r) => write!(f, "{} E{} {}", a.left, r, a.right),
                rel => write!(f, "{}{} {}", a.left, rel, a.right),
            },
            Expr::Not(e) => {
                f.write_str("!")?;
                self.fmt_child(e, 3, f)
            }
            Expr::And(es) | Expr::Or(es) if es.is_empty() => {
                f.write_str(if matches!(self, Expr::And(_)) { "true" } else { "false" })
            }
            Expr::And(es) => {
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    self.fmt_child(e, 3, f)?;
                }
                Ok(())
            }
            Expr::Or(es) => {
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    self.fmt_child(e, 2, f)?;
                }
                Ok(())
            }
            Expr::Iff(a, b) => {
                self.fmt_child(a, 1, f)?;
                f.write_str(" <-> ")?;
                self.fmt_child(b, 1, f)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theories::RelationId;

    fn lit(rel: Rel, l: Term, r: Term, pos: bool) -> Literal {
        Literal::new(rel, l, r, pos)
    }

    #[test]
    fn arities_and_shift() {
        let f = Formula::and(vec![
            Formula::atom(Rel::Lt1, Slot::Y(0), Slot::X(0)),
            Formula::atom(Rel::Lt1, Slot::X(0), Slot::Y(1)),
        ]);
        assert_eq!((f.x_arity(), f.y_arity()), (1, 2));
        assert_eq!(f.shift_y(2).y_arity(), 4);
        assert_eq!(f.remap_x(&[1]).x_arity(), 2);
    }

    #[test]
    fn dnf_of_negated_interval_has_two_disjuncts() {
        let f = Formula::and(vec![
            Formula::atom(Rel::Lt1, Slot::Y(0), Slot::X(0)),
            Formula::atom(Rel::Lt1, Slot::X(0), Slot::Y(1)),
        ])
        .not();
        let p = f.at(&[3, 4]).unwrap();
        let d = p.dnf();
        assert_eq!(d.len(), 2);
        assert_eq!(p.dnf_width(true), 2);
        assert_eq!(d[0], vec![lit(Rel::Lt1, Term::Param(3), Term::Var(0), false)]);
    }

    #[test]
    fn dnf_of_iff_matches_width() {
        let a = Prop::atom(Rel::Lt1, Term::Var(0), Term::Param(0));
        let b = Prop::atom(Rel::Lt2, Term::Var(0), Term::Param(0));
        let iff = Prop::iff(a.clone(), b.clone());
        assert_eq!(iff.dnf().len(), 2);
        assert_eq!(iff.clone().not().dnf().len(), 2);
        assert_eq!(iff.dnf_width(true), 2);
        assert_eq!(Prop::Const(false).dnf().len(), 0);
        assert_eq!(Prop::Const(true).dnf(), vec![Vec::<Literal>::new()]);
        let or3 = Prop::or(vec![a.clone(), b.clone(), a.clone().not()]);
        assert_eq!(or3.dnf().len(), 3);
        assert_eq!(or3.not().dnf().len(), 1);
    }

    #[test]
    fn dnf_agrees_with_evaluation() {
        // Every assignment of two atoms: DNF satisfied iff formula true.
        let a = Prop::atom(Rel::Lt1, Term::Var(0), Term::Param(0));
        let b = Prop::atom(Rel::Equiv(RelationId { m: 0, n: 1 }), Term::Var(0), Term::Param(1));
        let forms = vec![
            Prop::iff(a.clone(), b.clone()),
            Prop::or(vec![a.clone().not(), Prop::and(vec![a.clone(), b.clone()])]),
            Prop::iff(a.clone(), b.clone()).not(),
        ];
        for f in &forms {
            let d = f.dnf();
            for mask in 0..4u8 {
                let val = |at: &Atom<Term>| -> bool {
                    if at.rel == Rel::Lt1 {
                        mask & 1 == 1
                    } else {
                        mask & 2 == 2
                    }
                };
                let truth = f
                    .eval_with(&mut |at| Ok::<_, ()>(val(at)))
                    .unwrap();
                let via_dnf = d
                    .iter()
                    .any(|conj| conj.iter().all(|l| val(&l.atom) == l.positive));
                assert_eq!(truth, via_dnf, "{f} under {mask}");
            }
        }
    }
}
