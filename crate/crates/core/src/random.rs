//! Seeded random formula generators.
//!
//! The sample space is the set of pairs (ordered tuple of `k` distinct
//! variables, relation of the set). The constant-probability model keeps
//! each pair independently with probability `p`; the counting model draws
//! `m` distinct pairs; the multiset model draws `m` pairs with replacement.
//!
//! Every draw is a pure function of its [`GenSpec`], so trials can be
//! generated in any order on any number of threads.

use std::sync::Arc;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{Application, Formula};
use crate::relation::ConstraintSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    ConstantProbability { p: f64 },
    Counting { m: u64 },
    Multiset { m: u64 },
}

#[derive(Debug, Clone)]
pub struct GenSpec {
    pub model: Model,
    pub n: usize,
    pub set: Arc<ConstraintSet>,
    pub seed: u64,
}

impl GenSpec {
    /// Counting model with `round(c·n)` constraints.
    pub fn at_density(set: Arc<ConstraintSet>, n: usize, c: f64, seed: u64) -> Self {
        let m = (c * n as f64).round().max(0.0) as u64;
        Self { model: Model::Counting { m }, n, set, seed }
    }
}

/// splitmix64 finalizer applied to `master ⊕ golden·(index+1)`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n·(n−1)···(n−k+1)`, or `None` on overflow.
fn ordered_tuples(n: usize, k: usize) -> Option<u128> {
    if n < k {
        return Some(0);
    }
    (0..k).try_fold(1u128, |acc, i| acc.checked_mul((n - i) as u128))
}

/// Number of (ordered distinct tuple, relation) pairs.
pub fn num_pairs(cs: &ConstraintSet, n: usize) -> Option<u128> {
    ordered_tuples(n, cs.arity())?.checked_mul(cs.len() as u128)
}

/// `p · |cs| · n·(n−1)···(n−k+1)`.
pub fn expected_constraint_count(cs: &ConstraintSet, n: usize, p: f64) -> f64 {
    let k = cs.arity();
    let tuples: f64 = (0..k).map(|i| n.saturating_sub(i) as f64).product();
    p * cs.len() as f64 * tuples
}

/// The `p` whose expected constraint count equals `c·n`.
pub fn density_to_p(cs: &ConstraintSet, n: usize, c: f64) -> Result<f64> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::Input(format!("density {c} must be a finite value ≥ 0")));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    let per_unit = expected_constraint_count(cs, n, 1.0);
    let p = c * n as f64 / per_unit;
    if !(p <= 1.0) {
        return Err(Error::Input(format!(
            "density {c} needs p = {p} > 1 at n = {n}"
        )));
    }
    Ok(p)
}

fn validate(spec: &GenSpec) -> Result<u64> {
    let k = spec.set.arity();
    if spec.n < k {
        return Err(Error::Input(format!("n = {} is smaller than the arity {k}", spec.n)));
    }
    let total = num_pairs(&spec.set, spec.n)
        .filter(|&t| t <= u64::MAX as u128 && t <= usize::MAX as u128)
        .ok_or_else(|| Error::Input("sample space too large".into()))?;
    Ok(total as u64)
}

/// Maps a pair index to its application. Tuples are ranked in
/// lexicographic order, the relation index varies fastest.
fn decode_pair(mut idx: u64, n: usize, k: usize, num_rel: usize) -> Application {
    let relation = (idx % num_rel as u64) as usize;
    idx /= num_rel as u64;
    let mut digits = [0u64; crate::relation::MAX_ARITY];
    for pos in (0..k).rev() {
        let base = (n - pos) as u64;
        digits[pos] = idx % base;
        idx /= base;
    }
    let mut taken: Vec<u32> = Vec::with_capacity(k);
    let mut vars = Vec::with_capacity(k);
    for &d in &digits[..k] {
        // d-th variable not yet used
        let mut v = d as u32;
        for &t in &taken {
            if v >= t {
                v += 1;
            }
        }
        let at = taken.partition_point(|&t| t < v);
        taken.insert(at, v);
        vars.push(v);
    }
    Application { relation, vars }
}

pub fn generate(spec: &GenSpec) -> Result<Formula> {
    let total = validate(spec)?;
    let (n, k, nrel) = (spec.n, spec.set.arity(), spec.set.len());
    let mut rng = rng_from_seed(spec.seed);
    let mut indices: Vec<u64> = match spec.model {
        Model::ConstantProbability { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Input(format!("probability {p} outside [0, 1]")));
            }
            let count = if total == 0 {
                0
            } else {
                Binomial::new(total, p)
                    .map_err(|e| Error::Input(e.to_string()))?
                    .sample(&mut rng)
            };
            let mut v: Vec<u64> = index::sample(&mut rng, total as usize, count as usize)
                .into_iter()
                .map(|i| i as u64)
                .collect();
            v.sort_unstable();
            v
        }
        Model::Counting { m } => {
            if m > total {
                return Err(Error::Input(format!(
                    "counting model needs {m} distinct pairs, only {total} exist"
                )));
            }
            let mut v: Vec<u64> = index::sample(&mut rng, total as usize, m as usize)
                .into_iter()
                .map(|i| i as u64)
                .collect();
            v.sort_unstable();
            v
        }
        Model::Multiset { m } => {
            if total == 0 && m > 0 {
                return Err(Error::Input("no pairs to draw from".into()));
            }
            (0..m).map(|_| rng.random_range(0..total)).collect()
        }
    };
    let apps = indices
        .drain(..)
        .map(|i| decode_pair(i, n, k, nrel))
        .collect();
    Formula::new(n, spec.set.clone(), apps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::ConstraintRelation;
    use std::collections::HashSet;

    fn or2() -> Arc<ConstraintSet> {
        Arc::new(ConstraintSet::new(vec![ConstraintRelation::new("OR2", 2, [1, 2, 3]).unwrap()]).unwrap())
    }

    #[test]
    fn degenerate_probabilities() {
        let spec = GenSpec { model: Model::ConstantProbability { p: 0.0 }, n: 5, set: or2(), seed: 1 };
        assert_eq!(generate(&spec).unwrap().num_constraints(), 0);
        let spec = GenSpec { model: Model::ConstantProbability { p: 1.0 }, n: 3, set: or2(), seed: 1 };
        let phi = generate(&spec).unwrap();
        let tuples: HashSet<Vec<u32>> = phi.applications().iter().map(|a| a.vars.clone()).collect();
        assert_eq!(phi.num_constraints(), 6);
        assert_eq!(tuples.len(), 6);
    }

    #[test]
    fn decode_is_a_bijection_onto_ordered_tuples() {
        let (n, k, r) = (5, 3, 2);
        let total = (5 * 4 * 3 * 2) as u64;
        let all: HashSet<(usize, Vec<u32>)> = (0..total)
            .map(|i| {
                let a = decode_pair(i, n, k, r);
                let mut s = a.vars.clone();
                s.sort();
                s.dedup();
                assert_eq!(s.len(), k);
                assert!(a.vars.iter().all(|&v| (v as usize) < n));
                (a.relation, a.vars)
            })
            .collect();
        assert_eq!(all.len() as u64, total);
        // lexicographic tuple order
        assert_eq!(decode_pair(0, n, k, r).vars, vec![0, 1, 2]);
        assert_eq!(decode_pair(2, n, k, r).vars, vec![0, 1, 3]);
    }

    #[test]
    fn moment_helpers() {
        let cs = or2();
        assert_eq!(expected_constraint_count(&cs, 10, 0.0), 0.0);
        assert_eq!(expected_constraint_count(&cs, 2, 1.0), 2.0);
        assert!((expected_constraint_count(&cs, 10, 0.01) - 0.9).abs() < 1e-12);
        assert_eq!(density_to_p(&cs, 10, 0.0).unwrap(), 0.0);
        assert!((density_to_p(&cs, 10, 0.9).unwrap() - 0.1).abs() < 1e-12);
        let full = ConstraintSet::ksat(2);
        let p = density_to_p(&full, 50, 0.7).unwrap();
        assert!((p - 0.7 / (4.0 * 49.0)).abs() < 1e-15);
        assert!(density_to_p(&cs, 3, 100.0).is_err());
        assert!(density_to_p(&cs, 3, -1.0).is_err());
    }

    #[test]
    fn counting_model_has_no_duplicates() {
        let set = Arc::new(ConstraintSet::ksat(2));
        let spec = GenSpec { model: Model::Counting { m: 300 }, n: 12, set, seed: 9 };
        let phi = generate(&spec).unwrap();
        let uniq: HashSet<&Application> = phi.applications().iter().collect();
        assert_eq!(uniq.len(), 300);
        let too_many = GenSpec { model: Model::Counting { m: 12 * 11 * 4 + 1 }, ..spec.clone() };
        assert!(generate(&too_many).is_err());
        let all = GenSpec { model: Model::Counting { m: 12 * 11 * 4 }, ..spec };
        assert_eq!(generate(&all).unwrap().num_constraints(), 528);
    }

    #[test]
    fn multiset_model_draws_with_replacement() {
        let spec = GenSpec { model: Model::Multiset { m: 50 }, n: 2, set: or2(), seed: 3 };
        // only two pairs exist, so repeats are certain
        let phi = generate(&spec).unwrap();
        assert_eq!(phi.num_constraints(), 50);
        let uniq: HashSet<&Application> = phi.applications().iter().collect();
        assert!(uniq.len() <= 2);
    }

    #[test]
    fn same_seed_same_formula() {
        let set = Arc::new(ConstraintSet::ksat(3));
        let spec = GenSpec { model: Model::ConstantProbability { p: 0.001 }, n: 40, set, seed: 42 };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = GenSpec { seed: 43, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn arity_larger_than_n_is_rejected() {
        let set = Arc::new(ConstraintSet::ksat(3));
        let spec = GenSpec { model: Model::Counting { m: 0 }, n: 2, set, seed: 0 };
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let s: HashSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(s.len(), 1000);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }
}
