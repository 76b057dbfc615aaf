//! Exact analysis of small formulas: every satisfying assignment, the
//! clusters they form under bounded-Hamming adjacency, overlap histograms
//! and the q-overlap decision.
//!
//! Assignments are packed into integers with variable 1 in the least
//! significant bit.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{agreement_in_band, log2_squared_ceil, Assignment, BandWidth, Formula, Rational};

/// Largest formula that [`enumerate_solutions`] accepts.
pub const ENUMERATION_BOUND: usize = 30;

const LANE_BITS: usize = 6;
const LANES: usize = 1 << LANE_BITS;
/// Blocks handed to one worker at a time.
const BLOCKS_PER_TASK: u64 = 1 << 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionSet {
    pub n: usize,
    /// Sorted, duplicate free.
    pub solutions: Vec<u32>,
    /// Produced by exhaustive enumeration.
    pub complete: bool,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn assignment(&self, idx: usize) -> Assignment {
        Assignment::from_bits(self.solutions[idx] as u64, self.n)
    }

    fn require_complete(&self) -> Result<()> {
        if !self.complete {
            return Err(Error::Input("solution set is not the result of exhaustive enumeration".into()));
        }
        Ok(())
    }
}

/// One constraint compiled for 64-lane evaluation.
struct LaneConstraint {
    vars: Vec<u32>,
    rows: Vec<u32>,
    /// `rows` lists the rejected rows rather than the accepted ones.
    rejected: bool,
}

impl LaneConstraint {
    #[inline]
    fn eval(&self, words: &[u64]) -> u64 {
        let mut hit = 0u64;
        for &row in &self.rows {
            let mut m = !0u64;
            for (i, &v) in self.vars.iter().enumerate() {
                let w = words[v as usize];
                m &= if row >> i & 1 == 1 { w } else { !w };
            }
            hit |= m;
        }
        if self.rejected {
            !hit
        } else {
            hit
        }
    }
}

fn compile(phi: &Formula) -> Vec<LaneConstraint> {
    phi.applications()
        .iter()
        .map(|app| {
            let rel = phi.relation_of(app);
            let accepted = rel.num_satisfying();
            let rejected = accepted * 2 > rel.num_rows();
            let rows = if rejected { rel.rejected_rows().collect() } else { rel.rows().collect() };
            LaneConstraint { vars: app.vars.clone(), rows, rejected }
        })
        .collect()
}

/// All satisfying assignments, found by evaluating 64 assignments at a time.
pub fn enumerate_solutions(phi: &Formula) -> Result<SolutionSet> {
    let n = phi.num_vars();
    if n > ENUMERATION_BOUND {
        return Err(Error::TooLarge { n, bound: ENUMERATION_BOUND });
    }
    let constraints = compile(phi);
    let low = n.min(LANE_BITS);
    let valid: u64 = if low == LANE_BITS { !0 } else { (1u64 << (1 << low)) - 1 };
    let num_blocks: u64 = 1 << (n - low);

    let lane_words: Vec<u64> = (0..low)
        .map(|v| (0..LANES).fold(0u64, |acc, lane| acc | ((lane >> v & 1) as u64) << lane))
        .collect();

    let scan = |first: u64, last: u64| -> Vec<u32> {
        let mut words = vec![0u64; n];
        words[..low].copy_from_slice(&lane_words);
        let mut out = Vec::new();
        for block in first..last {
            for (j, w) in words[low..].iter_mut().enumerate() {
                *w = if block >> j & 1 == 1 { !0 } else { 0 };
            }
            let mut acc = valid;
            for c in &constraints {
                acc &= c.eval(&words);
                if acc == 0 {
                    break;
                }
            }
            let base = (block << low) as u32;
            while acc != 0 {
                let lane = acc.trailing_zeros();
                out.push(base | lane);
                acc &= acc - 1;
            }
        }
        out
    };

    let solutions: Vec<u32> = if num_blocks <= BLOCKS_PER_TASK {
        scan(0, num_blocks)
    } else {
        let tasks: Vec<u64> = (0..num_blocks.div_ceil(BLOCKS_PER_TASK)).collect();
        tasks
            .par_iter()
            .map(|&t| scan(t * BLOCKS_PER_TASK, ((t + 1) * BLOCKS_PER_TASK).min(num_blocks)))
            .collect::<Vec<_>>()
            .concat()
    };
    debug_assert!(solutions.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(solutions.iter().all(|&s| phi.eval_bits(s as u64)));
    Ok(SolutionSet { n, solutions, complete: true })
}

/// Default adjacency threshold `max(1, ceil(log2(n)^2))`.
pub fn default_adjacency(n: usize) -> usize {
    log2_squared_ceil(n)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterReport {
    pub adjacency_threshold: usize,
    /// Cluster of each solution, parallel to `SolutionSet::solutions`.
    /// Clusters are numbered by their smallest member.
    pub cluster_of: Vec<u32>,
    pub sizes: Vec<usize>,
    pub num_clusters: usize,
    /// Smallest Hamming distance between solutions of different clusters.
    pub min_cross_distance: Option<u32>,
}

struct DisjointSets {
    parent: Vec<u32>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as root
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Calls `f` with every nonzero mask over `n` bits of weight at most `f_max`.
fn for_each_mask(n: usize, max_weight: usize, f: &mut impl FnMut(u32)) {
    fn rec(start: usize, n: usize, left: usize, mask: u32, f: &mut impl FnMut(u32)) {
        for i in start..n {
            let m = mask | 1 << i;
            f(m);
            if left > 1 {
                rec(i + 1, n, left - 1, m, f);
            }
        }
    }
    if max_weight > 0 {
        rec(0, n, max_weight, 0, f);
    }
}

/// Connected components of the graph joining solutions at Hamming distance ≤ `f`.
pub fn clusters(sols: &SolutionSet, f: usize) -> Result<ClusterReport> {
    sols.require_complete()?;
    if f == 0 {
        return Err(Error::Input("adjacency threshold must be at least 1".into()));
    }
    let s = sols.len();
    let n = sols.n;
    let xs = &sols.solutions;
    let mut dsu = DisjointSets::new(s);

    if f >= n {
        for i in 1..s {
            dsu.union(0, i as u32);
        }
    } else {
        let neighbor_cost = s as f64 * (1..=f).map(|i| binomial(n, i)).sum::<f64>();
        let pair_cost = s as f64 * s as f64 / 2.0;
        if neighbor_cost < pair_cost {
            for (i, &x) in xs.iter().enumerate() {
                for_each_mask(n, f, &mut |m| {
                    let y = x ^ m;
                    if y > x {
                        if let Ok(j) = xs.binary_search(&y) {
                            dsu.union(i as u32, j as u32);
                        }
                    }
                });
            }
        } else {
            for i in 0..s {
                for j in i + 1..s {
                    if (xs[i] ^ xs[j]).count_ones() as usize <= f {
                        dsu.union(i as u32, j as u32);
                    }
                }
            }
        }
    }

    let mut id_of_root = vec![u32::MAX; s];
    let mut cluster_of = Vec::with_capacity(s);
    let mut sizes = Vec::new();
    for i in 0..s {
        let r = dsu.find(i as u32) as usize;
        if id_of_root[r] == u32::MAX {
            id_of_root[r] = sizes.len() as u32;
            sizes.push(0);
        }
        let id = id_of_root[r];
        sizes[id as usize] += 1;
        cluster_of.push(id);
    }
    let num_clusters = sizes.len();
    let min_cross_distance = if num_clusters < 2 {
        None
    } else {
        (0..s)
            .into_par_iter()
            .filter_map(|i| {
                (i + 1..s)
                    .filter(|&j| cluster_of[i] != cluster_of[j])
                    .map(|j| (xs[i] ^ xs[j]).count_ones())
                    .min()
            })
            .min()
    };
    Ok(ClusterReport { adjacency_threshold: f, cluster_of, sizes, num_clusters, min_cross_distance })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverlapHistogram {
    pub n: usize,
    /// Unordered pairs of distinct solutions, indexed by agreement count.
    pub pairs: Vec<u64>,
    pub within_cluster: Option<Vec<u64>>,
    pub cross_cluster: Option<Vec<u64>>,
}

impl OverlapHistogram {
    pub fn total(&self) -> u64 {
        self.pairs.iter().sum()
    }
}

/// Pair counts by Hamming distance among `xs`.
fn distance_counts(xs: &[u32], n: usize) -> Vec<u64> {
    let s = xs.len();
    let pair_cost = s as f64 * s as f64 / 2.0;
    let transform_cost = (n.max(1) * (1usize << n)) as f64 * 4.0;
    if n <= 24 && transform_cost < pair_cost {
        distance_counts_transform(xs, n)
    } else {
        (0..s)
            .into_par_iter()
            .fold(
                || vec![0u64; n + 1],
                |mut acc, i| {
                    for &y in &xs[i + 1..] {
                        acc[(xs[i] ^ y).count_ones() as usize] += 1;
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u64; n + 1],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    }
}

fn walsh_hadamard(v: &mut [i64]) {
    let mut h = 1;
    while h < v.len() {
        for chunk in v.chunks_mut(2 * h) {
            let (a, b) = chunk.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let (p, q) = (*x, *y);
                *x = p + q;
                *y = p - q;
            }
        }
        h *= 2;
    }
}

/// Autocorrelation of the solution indicator over the hypercube:
/// `#{(a, b) : a ⊕ b = x}` for every `x`, via two Walsh–Hadamard transforms.
fn distance_counts_transform(xs: &[u32], n: usize) -> Vec<u64> {
    let size = 1usize << n;
    let mut v = vec![0i64; size];
    for &x in xs {
        v[x as usize] = 1;
    }
    walsh_hadamard(&mut v);
    v.iter_mut().for_each(|x| *x *= *x);
    walsh_hadamard(&mut v);
    let mut ordered = vec![0u64; n + 1];
    for (x, &c) in v.iter().enumerate() {
        ordered[x.count_ones() as usize] += (c >> n) as u64;
    }
    // drop the identity pairs, then halve ordered pairs
    ordered[0] -= xs.len() as u64;
    ordered.iter().map(|c| c / 2).collect()
}

pub fn overlap_histogram(sols: &SolutionSet, report: Option<&ClusterReport>) -> Result<OverlapHistogram> {
    sols.require_complete()?;
    let n = sols.n;
    let by_agreement = |dist: Vec<u64>| -> Vec<u64> { dist.into_iter().rev().collect() };
    let pairs = by_agreement(distance_counts(&sols.solutions, n));
    let (within_cluster, cross_cluster) = match report {
        None => (None, None),
        Some(r) => {
            if r.cluster_of.len() != sols.len() {
                return Err(Error::Input("cluster report does not match the solution set".into()));
            }
            let mut members: Vec<Vec<u32>> = vec![Vec::new(); r.num_clusters];
            for (&x, &c) in sols.solutions.iter().zip(&r.cluster_of) {
                members[c as usize].push(x);
            }
            let mut within = vec![0u64; n + 1];
            for m in &members {
                for (w, c) in within.iter_mut().zip(by_agreement(distance_counts(m, n))) {
                    *w += c;
                }
            }
            let cross = pairs.iter().zip(&within).map(|(p, w)| p - w).collect();
            (Some(within), Some(cross))
        }
    };
    Ok(OverlapHistogram { n, pairs, within_cluster, cross_cluster })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct QOverlapOptions {
    pub width: BandWidth,
    /// Require the two assignments to differ.
    pub distinct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QOverlapDecision {
    pub satisfiable: bool,
    pub witness: Option<(Assignment, Assignment)>,
    pub agreement: Option<usize>,
}

/// Exact q-overlap decision by enumeration.
pub fn decide_q_overlap(phi: &Formula, q: Rational, opts: QOverlapOptions) -> Result<QOverlapDecision> {
    let sols = enumerate_solutions(phi)?;
    decide_q_overlap_in(&sols, q, opts)
}

/// Among achievable in-band agreement counts the one closest to `q·n`
/// wins, ties going to the larger count.
pub fn decide_q_overlap_in(sols: &SolutionSet, q: Rational, opts: QOverlapOptions) -> Result<QOverlapDecision> {
    sols.require_complete()?;
    let n = sols.n;
    let none = QOverlapDecision { satisfiable: false, witness: None, agreement: None };
    if sols.is_empty() {
        return Ok(none);
    }
    let hist = overlap_histogram(sols, None)?;
    let target = |a: usize| (a as u128 * *q.denom() as u128).abs_diff(*q.numer() as u128 * n as u128);
    let best = (0..=n)
        .filter(|&a| hist.pairs[a] > 0 || (a == n && !opts.distinct))
        .filter(|&a| agreement_in_band(a, n, q, opts.width))
        .min_by_key(|&a| (target(a), std::cmp::Reverse(a)));
    let Some(a) = best else {
        return Ok(none);
    };
    let xs = &sols.solutions;
    let witness = if a == n {
        (xs[0], xs[0])
    } else {
        let d = (n - a) as u32;
        let (i, j) = (0..xs.len())
            .find_map(|i| {
                xs[i + 1..]
                    .iter()
                    .position(|&y| (xs[i] ^ y).count_ones() == d)
                    .map(|j| (i, i + 1 + j))
            })
            .expect("histogram promises a pair at this distance");
        (xs[i], xs[j])
    };
    Ok(QOverlapDecision {
        satisfiable: true,
        witness: Some((Assignment::from_bits(witness.0 as u64, n), Assignment::from_bits(witness.1 as u64, n))),
        agreement: Some(a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Application;
    use crate::relation::ConstraintSet;
    use std::sync::Arc;

    fn two_sat(n: usize, clauses: &[(usize, u32, u32)]) -> Formula {
        // (negation mask, var1, var2), 1-based vars
        let set = Arc::new(ConstraintSet::ksat(2));
        let apps = clauses
            .iter()
            .map(|&(mask, a, b)| Application { relation: mask, vars: vec![a - 1, b - 1] })
            .collect();
        Formula::new(n, set, apps).unwrap()
    }

    fn phi1() -> Formula {
        two_sat(2, &[(0, 1, 2), (1, 1, 2)])
    }

    fn phi_unsat() -> Formula {
        two_sat(2, &[(0, 1, 2), (1, 1, 2), (2, 1, 2), (3, 1, 2)])
    }

    fn set_of(n: usize, xs: &[u32]) -> SolutionSet {
        SolutionSet { n, solutions: xs.to_vec(), complete: true }
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_solutions(&phi1()).unwrap().solutions, vec![2, 3]);
        let empty = Formula::empty(3, Arc::new(ConstraintSet::ksat(2))).unwrap();
        assert_eq!(enumerate_solutions(&empty).unwrap().solutions, (0..8).collect::<Vec<_>>());
        assert!(enumerate_solutions(&phi_unsat()).unwrap().is_empty());
    }

    #[test]
    fn enumeration_refuses_large_formulas() {
        let big = Formula::empty(31, Arc::new(ConstraintSet::ksat(2))).unwrap();
        assert!(matches!(enumerate_solutions(&big), Err(Error::TooLarge { n: 31, bound: 30 })));
    }

    #[test]
    fn enumeration_crosses_block_boundaries() {
        // x1 ∨ x9 on 10 variables: per-assignment loop as oracle
        let phi = two_sat(10, &[(0, 1, 9), (3, 2, 10)]);
        let sols = enumerate_solutions(&phi).unwrap();
        let naive: Vec<u32> = (0..1u32 << 10).filter(|&x| phi.eval_bits(x as u64)).collect();
        assert_eq!(sols.solutions, naive);
    }

    #[test]
    fn cluster_examples() {
        let r = clusters(&set_of(2, &[2, 3]), 1).unwrap();
        assert_eq!((r.num_clusters, r.sizes.clone()), (1, vec![2]));
        let r = clusters(&set_of(3, &[0, 7]), 1).unwrap();
        assert_eq!(r.num_clusters, 2);
        assert_eq!(r.min_cross_distance, Some(3));
        assert_eq!(clusters(&set_of(3, &[0, 7]), 3).unwrap().num_clusters, 1);
        let partial = SolutionSet { complete: false, ..set_of(3, &[0]) };
        assert!(clusters(&partial, 1).is_err());
        assert!(clusters(&set_of(3, &[0]), 0).is_err());
    }

    #[test]
    fn cluster_strategies_agree() {
        // chain 000 - 001 - 011, plus 110 at distance ≥ 2 from all but 011 (distance 2)
        let sols = set_of(5, &[0, 1, 3, 6, 24, 28]);
        for f in 1..5 {
            let a = clusters(&sols, f).unwrap();
            // force the pairwise path by a tiny solution count re-check
            let mut manual = DisjointSets::new(sols.len());
            for i in 0..sols.len() {
                for j in i + 1..sols.len() {
                    if ((sols.solutions[i] ^ sols.solutions[j]).count_ones() as usize) <= f {
                        manual.union(i as u32, j as u32);
                    }
                }
            }
            let roots: std::collections::BTreeSet<u32> = (0..sols.len() as u32).map(|i| manual.find(i)).collect();
            assert_eq!(a.num_clusters, roots.len(), "f = {f}");
        }
    }

    #[test]
    fn histogram_examples() {
        let h = overlap_histogram(&set_of(2, &[2, 3]), None).unwrap();
        assert_eq!(h.pairs, vec![0, 1, 0]);
        let h = overlap_histogram(&set_of(3, &[5]), None).unwrap();
        assert_eq!(h.pairs, vec![0; 4]);
        let sols = set_of(3, &[0, 7]);
        let r = clusters(&sols, 1).unwrap();
        let h = overlap_histogram(&sols, Some(&r)).unwrap();
        assert_eq!(h.pairs, vec![1, 0, 0, 0]);
        assert_eq!(h.within_cluster, Some(vec![0; 4]));
        assert_eq!(h.cross_cluster, Some(vec![1, 0, 0, 0]));
    }

    #[test]
    fn transform_matches_pairwise_counts() {
        let xs: Vec<u32> = (0..256u32).filter(|x| x.count_ones() % 3 != 1).collect();
        let n = 8;
        let mut pairwise = vec![0u64; n + 1];
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                pairwise[(xs[i] ^ xs[j]).count_ones() as usize] += 1;
            }
        }
        assert_eq!(distance_counts_transform(&xs, n), pairwise);
    }

    #[test]
    fn q_overlap_examples() {
        let opts = QOverlapOptions::default();
        let d = decide_q_overlap(&phi1(), Rational::from_integer(1), opts).unwrap();
        assert!(d.satisfiable);
        let (a, b) = d.witness.unwrap();
        assert_eq!(a, b);
        let d = decide_q_overlap(&phi1(), Rational::new(1, 2), opts).unwrap();
        assert_eq!(d.agreement, Some(1));
        let (a, b) = d.witness.unwrap();
        assert_eq!((a.to_string(), b.to_string()), ("01".into(), "11".into()));
        for q in [Rational::new(0, 1), Rational::new(1, 2), Rational::from_integer(1)] {
            assert!(!decide_q_overlap(&phi_unsat(), q, opts).unwrap().satisfiable);
        }
    }

    #[test]
    fn distinct_flag_excludes_identity_pairs() {
        let one = two_sat(2, &[(0, 1, 2), (1, 1, 2), (2, 1, 2)]);
        assert_eq!(enumerate_solutions(&one).unwrap().solutions, vec![3]);
        let q = Rational::from_integer(1);
        assert!(decide_q_overlap(&one, q, QOverlapOptions::default()).unwrap().satisfiable);
        let strict = QOverlapOptions { distinct: true, ..Default::default() };
        assert!(!decide_q_overlap(&one, q, strict).unwrap().satisfiable);
    }
}
