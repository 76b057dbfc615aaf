//! Sharp/coarse threshold classification of Boolean constraint sets.
//!
//! A set is *interesting* when one relation forbids the all-zeros row and
//! one forbids the all-ones row. For interesting sets the threshold of the
//! satisfiability property is coarse when some relation has a unit clause
//! or an inequality `x_i ≠ x_j` among its implicates, and sharp otherwise.
//!
//! Sets classified `Sharp` are additionally assumed to be well-behaved
//! (tree-like and unicyclic formulas over them are satisfiable); that
//! property is taken as given and not re-derived here.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::relation::{ConstraintRelation, ConstraintSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NotInteresting,
    CoarseUnitDependence,
    CoarseXorDependence,
    Sharp,
}

/// Data justifying a non-sharp verdict. Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// No relation rejects the all-zeros row (`zeros`) or the all-ones row (`ones`).
    MissingExclusion { zeros: bool, ones: bool },
    Unit { relation: String, position: usize, value: bool },
    Xor { relation: String, positions: (usize, usize) },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdClass {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

/// Every satisfying row of `c1` also satisfies `c2`.
pub fn is_implicate(c1: &ConstraintRelation, c2: &ConstraintRelation) -> Result<bool> {
    if c1.arity() != c2.arity() {
        return Err(Error::Arity {
            relation: c2.name().to_string(),
            expected: c1.arity(),
            found: c2.arity(),
        });
    }
    Ok(c1.rows().all(|r| c2.accepts(r as usize)))
}

/// A 1-based position and the value it takes in every satisfying row.
/// Smallest position wins, then `false` before `true`.
pub fn strongly_depends_on_literal(rel: &ConstraintRelation) -> Option<(usize, bool)> {
    // bits that are 1 in every row / 0 in every row
    let full = (1u32 << rel.arity()) - 1;
    let (always_one, always_zero) = rel
        .rows()
        .fold((full, full), |(one, zero), r| (one & r, zero & !r));
    (0..rel.arity()).find_map(|i| {
        if always_zero >> i & 1 == 1 {
            Some((i + 1, false))
        } else if always_one >> i & 1 == 1 {
            Some((i + 1, true))
        } else {
            None
        }
    })
}

/// The lexicographically smallest 1-based pair `(i, j)`, `i < j`, with
/// argument `i` different from argument `j` in every satisfying row.
pub fn strongly_depends_on_2xor(rel: &ConstraintRelation) -> Option<(usize, usize)> {
    let k = rel.arity();
    (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .find(|&(i, j)| rel.rows().all(|r| (r >> i & 1) != (r >> j & 1)))
        .map(|(i, j)| (i + 1, j + 1))
}

pub fn is_interesting(cs: &ConstraintSet) -> bool {
    let ones = (1usize << cs.arity()) - 1;
    let kills_zeros = cs.relations().iter().any(|r| !r.accepts(0));
    let kills_ones = cs.relations().iter().any(|r| !r.accepts(ones));
    kills_zeros && kills_ones
}

pub fn classify(cs: &ConstraintSet) -> ThresholdClass {
    if !is_interesting(cs) {
        let ones = (1usize << cs.arity()) - 1;
        return ThresholdClass {
            verdict: Verdict::NotInteresting,
            witness: Some(Witness::MissingExclusion {
                zeros: cs.relations().iter().all(|r| r.accepts(0)),
                ones: cs.relations().iter().all(|r| r.accepts(ones)),
            }),
        };
    }
    for rel in cs.relations() {
        if let Some((position, value)) = strongly_depends_on_literal(rel) {
            return ThresholdClass {
                verdict: Verdict::CoarseUnitDependence,
                witness: Some(Witness::Unit { relation: rel.name().to_string(), position, value }),
            };
        }
    }
    for rel in cs.relations() {
        if let Some(positions) = strongly_depends_on_2xor(rel) {
            return ThresholdClass {
                verdict: Verdict::CoarseXorDependence,
                witness: Some(Witness::Xor { relation: rel.name().to_string(), positions }),
            };
        }
    }
    ThresholdClass { verdict: Verdict::Sharp, witness: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(name: &str, k: usize, rows: &[u32]) -> ConstraintRelation {
        ConstraintRelation::new(name, k, rows.iter().copied()).unwrap()
    }

    #[test]
    fn implicate_is_row_inclusion() {
        let and2 = rel("AND2", 2, &[3]);
        let or2 = rel("OR2", 2, &[1, 2, 3]);
        assert!(is_implicate(&and2, &or2).unwrap());
        assert!(!is_implicate(&or2, &and2).unwrap());
        assert!(is_implicate(&or2, &or2).unwrap());
        assert!(is_implicate(&or2, &ConstraintRelation::one_in_k(3)).is_err());
    }

    #[test]
    fn unit_dependence_examples() {
        assert_eq!(strongly_depends_on_literal(&rel("u", 2, &[1, 3])), Some((1, true)));
        assert_eq!(strongly_depends_on_literal(&rel("OR2", 2, &[1, 2, 3])), None);
        assert_eq!(strongly_depends_on_literal(&rel("z", 2, &[0])), Some((1, false)));
    }

    #[test]
    fn xor_dependence_examples() {
        assert_eq!(strongly_depends_on_2xor(&ConstraintRelation::xor2()), Some((1, 2)));
        assert_eq!(strongly_depends_on_2xor(&rel("OR2", 2, &[1, 2, 3])), None);
        assert_eq!(strongly_depends_on_2xor(&ConstraintRelation::one_in_k(3)), None);
        assert_eq!(strongly_depends_on_2xor(&rel("u", 1, &[1])), None);
    }

    #[test]
    fn interesting_examples() {
        assert!(is_interesting(&ConstraintSet::ksat(2)));
        assert!(!is_interesting(&ConstraintSet::new(vec![rel("OR2", 2, &[1, 2, 3])]).unwrap()));
        assert!(is_interesting(&ConstraintSet::xor2()));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&ConstraintSet::ksat(3)).verdict, Verdict::Sharp);
        assert_eq!(classify(&ConstraintSet::one_in_k(3)).verdict, Verdict::Sharp);
        let xor = classify(&ConstraintSet::xor2());
        assert_eq!(xor.verdict, Verdict::CoarseXorDependence);
        assert_eq!(
            xor.witness,
            Some(Witness::Xor { relation: "xor2".into(), positions: (1, 2) })
        );
        // unit-forcing relation plus the all-negative clause makes the set interesting
        let unit = ConstraintSet::new(vec![rel("u", 2, &[1, 3]), ConstraintRelation::clause(2, 3)]).unwrap();
        let c = classify(&unit);
        assert_eq!(c.verdict, Verdict::CoarseUnitDependence);
        assert_eq!(c.witness, Some(Witness::Unit { relation: "u".into(), position: 1, value: true }));
        let or = classify(&ConstraintSet::new(vec![rel("OR2", 2, &[1, 2, 3])]).unwrap());
        assert_eq!(or.verdict, Verdict::NotInteresting);
        assert_eq!(or.witness, Some(Witness::MissingExclusion { zeros: false, ones: true }));
    }
}
