//! Boolean constraint relations given by explicit truth tables.
//!
//! A row of an arity-`k` relation is an integer in `[0, 2^k)` whose bit `i`
//! (least significant first) carries the value of argument `i + 1`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest supported arity. Truth tables are stored explicitly.
pub const MAX_ARITY: usize = 10;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ConstraintRelation {
    name: String,
    arity: usize,
    // bitset over rows, 2^arity bits
    table: Vec<u64>,
}

impl ConstraintRelation {
    pub fn new(name: impl Into<String>, arity: usize, rows: impl IntoIterator<Item = u32>) -> Result<Self> {
        let name = name.into();
        if !is_identifier(&name) {
            return Err(Error::Input(format!("relation name `{name}` is not an identifier")));
        }
        if arity == 0 || arity > MAX_ARITY {
            return Err(Error::Input(format!(
                "relation `{name}`: arity {arity} outside 1..={MAX_ARITY}"
            )));
        }
        let size = 1usize << arity;
        let mut table = vec![0u64; size.div_ceil(64)];
        for row in rows {
            let row = row as usize;
            if row >= size {
                return Err(Error::Input(format!(
                    "relation `{name}`: row {row} outside [0, {size})"
                )));
            }
            table[row / 64] |= 1 << (row % 64);
        }
        if table.iter().all(|&w| w == 0) {
            return Err(Error::Input(format!("relation `{name}` has no satisfying rows")));
        }
        Ok(Self { name, arity, table })
    }

    /// The clause `l_1 ∨ … ∨ l_k` where argument `i` appears negated iff
    /// bit `i` of `negated` is set.
    pub fn clause(arity: usize, negated: u32) -> Self {
        assert!((1..=MAX_ARITY).contains(&arity) && (negated as usize) < (1 << arity));
        let name: String = std::iter::once("or_".to_string())
            .chain((0..arity).map(|i| if negated >> i & 1 == 1 { "n" } else { "p" }.to_string()))
            .collect();
        // the only falsifying row sets every positive argument to 0 and every negated one to 1
        let rows = (0..1u32 << arity).filter(|&r| r != negated);
        Self::new(name, arity, rows).expect("clause relation is well formed")
    }

    /// Exactly one of the `k` arguments is true.
    pub fn one_in_k(arity: usize) -> Self {
        let rows = (0..arity).map(|i| 1u32 << i);
        Self::new(format!("one_in_{arity}"), arity, rows).expect("1-in-k relation is well formed")
    }

    /// `x_1 ≠ x_2`.
    pub fn xor2() -> Self {
        Self::new("xor2", 2, [1, 2]).unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn num_rows(&self) -> usize {
        1 << self.arity
    }

    #[inline]
    pub fn accepts(&self, row: usize) -> bool {
        self.table[row / 64] >> (row % 64) & 1 == 1
    }

    /// Satisfying rows in increasing order.
    pub fn rows(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.num_rows() as u32).filter(|&r| self.accepts(r as usize))
    }

    pub fn rejected_rows(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.num_rows() as u32).filter(|&r| !self.accepts(r as usize))
    }

    pub fn num_satisfying(&self) -> usize {
        self.table.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Truth-table lookup of `args` (argument 1 first).
    pub fn eval(&self, args: &[bool]) -> Result<bool> {
        if args.len() != self.arity {
            return Err(Error::Arity {
                relation: self.name.clone(),
                expected: self.arity,
                found: args.len(),
            });
        }
        Ok(self.accepts(encode_row(args)))
    }

    /// For a disjunction of literals, the negation mask of its arguments
    /// (bit `i` set iff argument `i + 1` is negated). `None` for any other
    /// relation.
    pub fn as_clause(&self) -> Option<u32> {
        let mut rejected = self.rejected_rows();
        match (rejected.next(), rejected.next()) {
            (Some(r), None) => Some(r),
            _ => None,
        }
    }

    /// Same relation with arguments reordered: argument `i` of the result is
    /// argument `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.arity {
            return Err(Error::Length { expected: self.arity, found: perm.len() });
        }
        let rows = self.rows().map(|r| {
            perm.iter()
                .enumerate()
                .fold(0u32, |acc, (i, &src)| acc | (r >> src & 1) << i)
        });
        Self::new(self.name.clone(), self.arity, rows.collect::<Vec<_>>())
    }
}

impl fmt::Debug for ConstraintRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintRelation")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("rows", &self.rows().collect::<Vec<_>>())
            .finish()
    }
}

impl Serialize for ConstraintRelation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ConstraintRelation", 3)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("arity", &self.arity)?;
        st.serialize_field("rows", &self.rows().collect::<Vec<_>>())?;
        st.end()
    }
}

/// Row index of an argument vector, argument 1 in the least significant bit.
#[inline]
pub fn encode_row(args: &[bool]) -> usize {
    args.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (b as usize) << i)
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// A nonempty family of relations of one common arity with distinct names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ConstraintSet {
    relations: Vec<ConstraintRelation>,
}

impl ConstraintSet {
    pub fn new(relations: Vec<ConstraintRelation>) -> Result<Self> {
        let Some(first) = relations.first() else {
            return Err(Error::Input("constraint set is empty".into()));
        };
        let k = first.arity();
        for (i, r) in relations.iter().enumerate() {
            if r.arity() != k {
                return Err(Error::Input(format!(
                    "relation `{}` has arity {}, set arity is {k}",
                    r.name(),
                    r.arity()
                )));
            }
            if relations[..i].iter().any(|o| o.name() == r.name()) {
                return Err(Error::Input(format!("duplicate relation name `{}`", r.name())));
            }
        }
        Ok(Self { relations })
    }

    /// All `2^k` sign patterns of the width-`k` clause, indexed by negation mask.
    pub fn ksat(k: usize) -> Self {
        Self::new((0..1u32 << k).map(|m| ConstraintRelation::clause(k, m)).collect())
            .expect("k-SAT set is well formed")
    }

    pub fn one_in_k(k: usize) -> Self {
        Self::new(vec![ConstraintRelation::one_in_k(k)]).unwrap()
    }

    pub fn xor2() -> Self {
        Self::new(vec![ConstraintRelation::xor2()]).unwrap()
    }

    /// Built-in library: `2sat`, `ksat:K` (or `Ksat`), `xor2`, `1in:K` (or `1inK`).
    pub fn builtin(spec: &str) -> Result<Self> {
        let bad = || Error::Input(format!("unknown constraint set `{spec}`"));
        let parse_k = |s: &str| -> Result<usize> {
            let k: usize = s.parse().map_err(|_| bad())?;
            if (1..=MAX_ARITY).contains(&k) {
                Ok(k)
            } else {
                Err(bad())
            }
        };
        let s = spec.trim().to_ascii_lowercase();
        if s == "xor2" {
            return Ok(Self::xor2());
        }
        if let Some(k) = s.strip_prefix("ksat:") {
            return Ok(Self::ksat(parse_k(k)?));
        }
        if let Some(k) = s.strip_suffix("sat") {
            return Ok(Self::ksat(parse_k(k)?));
        }
        if let Some(k) = s.strip_prefix("1in:").or_else(|| s.strip_prefix("1in")) {
            let k = parse_k(k)?;
            if k < 2 {
                return Err(bad());
            }
            return Ok(Self::one_in_k(k));
        }
        Err(bad())
    }

    pub fn arity(&self) -> usize {
        self.relations[0].arity()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn relations(&self) -> &[ConstraintRelation] {
        &self.relations
    }

    pub fn get(&self, idx: usize) -> Option<&ConstraintRelation> {
        self.relations.get(idx)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name() == name)
    }

    /// True iff every relation is a disjunction of literals.
    pub fn is_clausal(&self) -> bool {
        self.relations.iter().all(|r| r.as_clause().is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn or2() -> ConstraintRelation {
        ConstraintRelation::new("OR2", 2, [1, 2, 3]).unwrap()
    }

    #[test]
    fn eval_uses_lsb_first_encoding() {
        let r = or2();
        assert!(!r.eval(&[false, false]).unwrap());
        assert!(r.eval(&[true, false]).unwrap());
        let x = ConstraintRelation::xor2();
        assert!(!x.eval(&[true, true]).unwrap());
        assert!(x.eval(&[false, true]).unwrap());
    }

    #[test]
    fn eval_rejects_wrong_arity() {
        assert!(matches!(or2().eval(&[true]), Err(Error::Arity { expected: 2, found: 1, .. })));
    }

    #[test]
    fn empty_or_oversized_relations_are_rejected() {
        assert!(ConstraintRelation::new("e", 2, []).is_err());
        assert!(ConstraintRelation::new("big", 11, [0]).is_err());
        assert!(ConstraintRelation::new("r", 2, [4]).is_err());
        assert!(ConstraintRelation::new("1bad", 2, [1]).is_err());
    }

    #[test]
    fn clause_excludes_exactly_the_negation_mask() {
        let c = ConstraintRelation::clause(2, 0b10);
        assert_eq!(c.name(), "or_pn");
        assert_eq!(c.rows().collect::<Vec<_>>(), vec![0, 1, 3]);
        assert_eq!(c.as_clause(), Some(2));
        assert_eq!(ConstraintRelation::xor2().as_clause(), None);
    }

    #[test]
    fn builtin_library_matches_definitions() {
        // exhaustive over k ≤ 5
        for k in 1..=5usize {
            let set = ConstraintSet::builtin(&format!("ksat:{k}")).unwrap();
            assert_eq!(set.len(), 1 << k);
            for (mask, rel) in set.relations().iter().enumerate() {
                for row in 0..1usize << k {
                    let args: Vec<bool> = (0..k).map(|i| row >> i & 1 == 1).collect();
                    let clause = (0..k).any(|i| args[i] != (mask >> i & 1 == 1));
                    assert_eq!(rel.eval(&args).unwrap(), clause);
                }
            }
            if k >= 2 {
                let one = ConstraintSet::builtin(&format!("1in:{k}")).unwrap();
                for row in 0..1usize << k {
                    assert_eq!(one.relations()[0].accepts(row), row.count_ones() == 1);
                }
            }
        }
        assert_eq!(ConstraintSet::builtin("2sat").unwrap(), ConstraintSet::ksat(2));
        assert_eq!(ConstraintSet::builtin("1in3").unwrap(), ConstraintSet::one_in_k(3));
        let x = ConstraintSet::builtin("xor2").unwrap();
        assert_eq!(x.relations()[0].rows().collect::<Vec<_>>(), vec![1, 2]);
        assert!(ConstraintSet::builtin("nope").is_err());
        assert!(ConstraintSet::builtin("ksat:11").is_err());
    }

    #[test]
    fn set_requires_uniform_arity_and_unique_names() {
        assert!(ConstraintSet::new(vec![]).is_err());
        assert!(ConstraintSet::new(vec![or2(), ConstraintRelation::one_in_k(3)]).is_err());
        assert!(ConstraintSet::new(vec![or2(), or2()]).is_err());
    }

    #[test]
    fn permutation_moves_arguments() {
        // rows {1,3}: x1 always 1; swapping arguments gives x2 always 1
        let r = ConstraintRelation::new("u", 2, [1, 3]).unwrap();
        let p = r.permuted(&[1, 0]).unwrap();
        assert_eq!(p.rows().collect::<Vec<_>>(), vec![2, 3]);
    }
}
