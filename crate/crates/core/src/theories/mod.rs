//! Executable finite models of the example theories: dense linear order
//! (DLO), two independent dense linear orders (DDLO), and the nested
//! equivalence relations indexed by `S = {(m, n) : m < n}` in its forward
//! (EQTREE) and reversed (EQTREE_REV) nesting.
//!
//! Samples are finite substructures; the consistency oracles in [`oracle`]
//! answer questions about the model completion, in which every finite
//! configuration consistent with the universal axioms is realized.

pub mod formula;
pub mod oracle;
pub mod parse;
pub mod sample;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DpError, Result};

pub use formula::{Atom, Expr, Formula, Literal, Prop, Slot, Term};
pub use oracle::{consistent, dnf_consistent, ConstraintSet, Oracle};
pub use sample::{incomparable_relations, sample, validate, Validation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryId {
    Dlo,
    Ddlo,
    Eqtree,
    EqtreeRev,
}

impl TheoryId {
    pub fn name(self) -> &'static str {
        match self {
            TheoryId::Dlo => "dlo",
            TheoryId::Ddlo => "ddlo",
            TheoryId::Eqtree => "eqtree",
            TheoryId::EqtreeRev => "eqtree_rev",
        }
    }

    pub fn is_order(self) -> bool {
        matches!(self, TheoryId::Dlo | TheoryId::Ddlo)
    }

    pub fn is_equivalence(self) -> bool {
        !self.is_order()
    }

    /// Whether `rel` belongs to the language of this theory.
    pub fn allows(self, rel: Rel) -> bool {
        match (self, rel) {
            (_, Rel::Eq) => true,
            (TheoryId::Dlo, Rel::Lt1) | (TheoryId::Ddlo, Rel::Lt1 | Rel::Lt2) => true,
            (TheoryId::Eqtree | TheoryId::EqtreeRev, Rel::Equiv(_)) => true,
            _ => false,
        }
    }
}

impl fmt::Display for TheoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TheoryId {
    type Err = DpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "dlo" => Ok(TheoryId::Dlo),
            "ddlo" => Ok(TheoryId::Ddlo),
            "eqtree" => Ok(TheoryId::Eqtree),
            "eqtree_rev" => Ok(TheoryId::EqtreeRev),
            other => Err(DpError::domain(format!("unknown theory {other:?}"))),
        }
    }
}

/// Index `(m, n)` of an equivalence relation `E_(m,n)`, `m < n`; its level
/// is `n`. Distinct relations are comparable exactly when their levels differ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationId {
    pub m: u32,
    pub n: u32,
}

impl RelationId {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m >= n {
            return Err(DpError::domain(format!("relation ({m},{n}) needs m < n")));
        }
        Ok(RelationId { m, n })
    }

    pub fn level(self) -> u32 {
        self.n
    }

    /// Position in the canonical enumeration (0,1), (0,2), (1,2), (0,3), ...
    pub fn index(self) -> usize {
        let n = self.n as usize;
        n * (n - 1) / 2 + self.m as usize
    }

    pub fn from_index(index: usize) -> Self {
        let mut n = 1usize;
        while (n + 1) * n / 2 <= index {
            n += 1;
        }
        RelationId {
            m: (index - n * (n - 1) / 2) as u32,
            n: n as u32,
        }
    }

    /// The partial order `≤_S`: equal, or strictly lower level.
    pub fn le_s(self, other: RelationId) -> bool {
        self == other || self.n < other.n
    }

    pub fn comparable(self, other: RelationId) -> bool {
        self.le_s(other) || other.le_s(self)
    }

    /// Number of relations in the language truncated below level `levels`.
    pub fn count_below(levels: u32) -> usize {
        let l = levels as usize;
        l * l.saturating_sub(1) / 2
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

/// Atomic relation symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rel {
    Lt1,
    Lt2,
    Eq,
    Equiv(RelationId),
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rel::Lt1 => f.write_str("<1"),
            Rel::Lt2 => f.write_str("<2"),
            Rel::Eq => f.write_str("="),
            Rel::Equiv(r) => write!(f, "E{r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Dlo { rank: i64 },
    Ddlo { rank1: i64, rank2: i64 },
    /// `classes[r]` is the class id at the relation with canonical index `r`.
    Eqtree { id: u32, classes: Vec<u32> },
}

impl Point {
    pub fn theory_matches(&self, theory: TheoryId) -> bool {
        matches!(
            (self, theory),
            (Point::Dlo { .. }, TheoryId::Dlo)
                | (Point::Ddlo { .. }, TheoryId::Ddlo)
                | (Point::Eqtree { .. }, TheoryId::Eqtree | TheoryId::EqtreeRev)
        )
    }

    /// Rank in the given order, if the variant carries it.
    pub fn rank(&self, rel: Rel) -> Option<i64> {
        match (self, rel) {
            (Point::Dlo { rank }, Rel::Lt1) => Some(*rank),
            (Point::Ddlo { rank1, .. }, Rel::Lt1) => Some(*rank1),
            (Point::Ddlo { rank2, .. }, Rel::Lt2) => Some(*rank2),
            _ => None,
        }
    }

    /// Truth of `self rel other`, or `None` if `rel` is not in the variant's
    /// language or the variants differ.
    pub fn holds(&self, rel: Rel, other: &Point) -> Option<bool> {
        match (self, other) {
            (Point::Dlo { rank: a }, Point::Dlo { rank: b }) => match rel {
                Rel::Lt1 => Some(a < b),
                Rel::Eq => Some(a == b),
                _ => None,
            },
            (
                Point::Ddlo {
                    rank1: a1,
                    rank2: a2,
                },
                Point::Ddlo {
                    rank1: b1,
                    rank2: b2,
                },
            ) => match rel {
                Rel::Lt1 => Some(a1 < b1),
                Rel::Lt2 => Some(a2 < b2),
                Rel::Eq => Some(a1 == b1 && a2 == b2),
                Rel::Equiv(_) => None,
            },
            (
                Point::Eqtree { id: a, classes: ca },
                Point::Eqtree { id: b, classes: cb },
            ) => match rel {
                Rel::Eq => Some(a == b),
                Rel::Equiv(r) => {
                    let i = r.index();
                    Some(a == b || (ca.get(i)? == cb.get(i)?))
                }
                _ => None,
            },
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleParams {
    pub size: usize,
    pub seed: u64,
    /// Truncation level `L` for the equivalence theories.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branching: Option<u32>,
}

/// A finite substructure of one of the example theories.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheorySample {
    pub theory: TheoryId,
    pub params: SampleParams,
    pub points: Vec<Point>,
}

impl TheorySample {
    pub fn new(theory: TheoryId, params: SampleParams, points: Vec<Point>) -> Self {
        TheorySample {
            theory,
            params,
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Result<&Point> {
        self.points
            .get(i)
            .ok_or_else(|| DpError::domain(format!("point index {i} outside sample of {}", self.len())))
    }

    /// Number of relation indices carried by EQTREE points.
    pub fn relation_count(&self) -> usize {
        self.params.level.map_or(0, RelationId::count_below)
    }

    /// Truth of `points[a] rel points[b]`.
    pub fn holds(&self, rel: Rel, a: usize, b: usize) -> Result<bool> {
        if !self.theory.allows(rel) {
            return Err(DpError::domain(format!(
                "relation {rel} is not in the language of {}",
                self.theory
            )));
        }
        self.point(a)?
            .holds(rel, self.point(b)?)
            .ok_or_else(|| DpError::domain(format!("cannot evaluate {rel} on points {a}, {b}")))
    }

    /// Appends a point, returning its index.
    pub fn push(&mut self, point: Point) -> Result<usize> {
        if !point.theory_matches(self.theory) {
            return Err(DpError::domain(format!(
                "point variant does not match theory {}",
                self.theory
            )));
        }
        self.points.push(point);
        self.params.size = self.points.len();
        Ok(self.points.len() - 1)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sample: TheorySample = serde_json::from_str(text)?;
        if let Some(i) = sample
            .points
            .iter()
            .position(|p| !p.theory_matches(sample.theory))
        {
            return Err(DpError::domain(format!(
                "point {i} does not match theory {}",
                sample.theory
            )));
        }
        Ok(sample)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_indexing_round_trips() {
        for index in 0..45 {
            let r = RelationId::from_index(index);
            assert!(r.m < r.n);
            assert_eq!(r.index(), index);
        }
        assert_eq!(RelationId::new(0, 1).unwrap().index(), 0);
        assert_eq!(RelationId::new(2, 3).unwrap().index(), 5);
        assert!(RelationId::new(2, 2).is_err());
        assert_eq!(RelationId::count_below(4), 6);
    }

    #[test]
    fn order_on_s_is_by_level() {
        let a = RelationId::new(0, 2).unwrap();
        let b = RelationId::new(1, 2).unwrap();
        let c = RelationId::new(0, 3).unwrap();
        assert!(!a.comparable(b));
        assert!(a.le_s(c) && b.le_s(c));
        assert!(!c.le_s(a));
        assert!(a.le_s(a));
    }

    #[test]
    fn ddlo_point_comparisons() {
        let p = Point::Ddlo { rank1: 0, rank2: 3 };
        let q = Point::Ddlo { rank1: 1, rank2: 0 };
        assert_eq!(p.holds(Rel::Lt1, &q), Some(true));
        assert_eq!(p.holds(Rel::Lt2, &q), Some(false));
        assert_eq!(p.holds(Rel::Eq, &p), Some(true));
        assert_eq!(p.holds(Rel::Equiv(RelationId { m: 0, n: 1 }), &q), None);
    }

    #[test]
    fn theory_names_parse() {
        for t in [TheoryId::Dlo, TheoryId::Ddlo, TheoryId::Eqtree, TheoryId::EqtreeRev] {
            assert_eq!(t.name().parse::<TheoryId>().unwrap(), t);
        }
        assert!("eqtree-rev".parse::<TheoryId>().is_ok());
        assert!("zfc".parse::<TheoryId>().is_err());
    }
}
