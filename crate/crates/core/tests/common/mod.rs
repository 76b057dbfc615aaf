//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::VecDeque;
use std::sync::Arc;

use proptest::prelude::*;
use satgeom::classify::{is_implicate, Verdict};
use satgeom::formula::{agreement_in_band, Application};
use satgeom::random::{generate, GenSpec};
use satgeom::{Assignment, BandWidth, ConstraintRelation, ConstraintSet, Formula, Rational};

/// Every assignment in increasing bit order, checked constraint by constraint.
pub fn naive_solutions(phi: &Formula) -> Vec<u32> {
    let n = phi.num_vars();
    (0..1u32 << n)
        .filter(|&x| {
            phi.applications().iter().all(|app| {
                let rel = phi.relation_of(app);
                let args: Vec<bool> = app.vars.iter().map(|&v| x >> v & 1 == 1).collect();
                rel.eval(&args).unwrap()
            })
        })
        .collect()
}

/// Cluster labels by breadth-first search, numbered in order of first member.
pub fn bfs_clusters(sols: &[u32], f: u32) -> Vec<u32> {
    let mut label = vec![u32::MAX; sols.len()];
    let mut next = 0;
    for s in 0..sols.len() {
        if label[s] != u32::MAX {
            continue;
        }
        label[s] = next;
        let mut queue = VecDeque::from([s]);
        while let Some(i) = queue.pop_front() {
            for j in 0..sols.len() {
                if label[j] == u32::MAX && (sols[i] ^ sols[j]).count_ones() <= f {
                    label[j] = next;
                    queue.push_back(j);
                }
            }
        }
        next += 1;
    }
    label
}

/// Is there a pair of solutions with in-band agreement?
pub fn naive_q_overlap(sols: &[u32], n: usize, q: Rational, width: BandWidth, distinct: bool) -> bool {
    for (i, &x) in sols.iter().enumerate() {
        for (j, &y) in sols.iter().enumerate() {
            if distinct && i == j {
                continue;
            }
            let agree = n - (x ^ y).count_ones() as usize;
            if agreement_in_band(agree, n, q, width) {
                return true;
            }
        }
    }
    false
}

pub fn ksat(k: usize) -> Arc<ConstraintSet> {
    Arc::new(ConstraintSet::ksat(k))
}

pub fn random_formula(set: &Arc<ConstraintSet>, n: usize, c: f64, seed: u64) -> Formula {
    generate(&GenSpec::at_density(set.clone(), n, c, seed)).unwrap()
}

/// Relations of arity `k` given by a nonempty row bitmask.
pub fn arb_relation(k: usize, name: &'static str) -> impl Strategy<Value = ConstraintRelation> {
    let rows = 1u64 << k;
    (1u64..(1u64 << rows).min(u64::MAX >> 1)).prop_map(move |mask| {
        ConstraintRelation::new(name, k, (0..rows as u32).filter(|&r| mask >> r & 1 == 1)).unwrap()
    })
}

pub fn arb_set(k: usize) -> impl Strategy<Value = ConstraintSet> {
    (arb_relation(k, "r0"), arb_relation(k, "r1"))
        .prop_map(|(a, b)| ConstraintSet::new(vec![a, b]).unwrap())
}

/// Random formulas with explicit applications over an arbitrary set.
pub fn arb_formula(k: usize, max_n: usize, max_m: usize) -> impl Strategy<Value = Formula> {
    (arb_set(k), k..=max_n).prop_flat_map(move |(set, n)| {
        let set = Arc::new(set);
        let app = (0..set.len(), Just(()).prop_perturb(move |_, mut rng| {
            let mut vars: Vec<u32> = (0..n as u32).collect();
            for i in 0..k {
                let j = i + (rng.next_u32() as usize) % (n - i);
                vars.swap(i, j);
            }
            vars.truncate(k);
            vars
        }));
        prop::collection::vec(app, 0..=max_m).prop_map(move |apps| {
            let apps = apps.into_iter().map(|(relation, vars)| Application { relation, vars }).collect();
            Formula::new(n, set.clone(), apps).unwrap()
        })
    })
}

pub fn arb_assignment(n: usize) -> impl Strategy<Value = Assignment> {
    prop::collection::vec(any::<bool>(), n).prop_map(Assignment::new)
}

/// Unit relations `x_i = b` and inequalities `x_i ≠ x_j` as truth tables.
pub fn unit_table(k: usize, i: usize, value: bool) -> ConstraintRelation {
    ConstraintRelation::new("u", k, (0..1u32 << k).filter(|r| (r >> i & 1 == 1) == value)).unwrap()
}

pub fn xor_table(k: usize, i: usize, j: usize) -> ConstraintRelation {
    ConstraintRelation::new("x", k, (0..1u32 << k).filter(|r| (r >> i & 1) != (r >> j & 1))).unwrap()
}

/// Classification by searching for implicates among all unit and 2-XOR tables.
pub fn brute_classify(cs: &ConstraintSet) -> Verdict {
    let k = cs.arity();
    let all = (1usize << k) - 1;
    let zeros = cs.relations().iter().any(|r| !r.accepts(0));
    let ones = cs.relations().iter().any(|r| !r.accepts(all));
    if !(zeros && ones) {
        return Verdict::NotInteresting;
    }
    let unit = cs.relations().iter().any(|r| {
        (0..k).any(|i| [false, true].iter().any(|&b| is_implicate(r, &unit_table(k, i, b)).unwrap()))
    });
    if unit {
        return Verdict::CoarseUnitDependence;
    }
    let xor = cs.relations().iter().any(|r| {
        (0..k).any(|i| (i + 1..k).any(|j| is_implicate(r, &xor_table(k, i, j)).unwrap()))
    });
    if xor {
        Verdict::CoarseXorDependence
    } else {
        Verdict::Sharp
    }
}
