//! Single-solution search for formulas too large to enumerate.
//!
//! Binary sets go through the implication graph. Wider sets are split into
//! variable-connected components, each searched by DPLL with chronological
//! backtracking; propagation scans the satisfying rows of every touched
//! constraint that agree with the current partial assignment.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::{Assignment, Formula};
use crate::random::rng_from_seed;
use crate::twosat::TwoSatGeometry;

/// A satisfying assignment, or `None` if `phi` is unsatisfiable.
/// `polarity_seed` drives branching order and values, so different seeds
/// tend to land on different solutions.
pub fn solve_one(phi: &Formula, polarity_seed: u64) -> Option<Assignment> {
    if phi.constraint_set().arity() <= 2 {
        let geo = TwoSatGeometry::binary(phi).expect("arity checked");
        return geo.random_solution(polarity_seed);
    }
    let n = phi.num_vars();
    let mut rng = rng_from_seed(polarity_seed);

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for app in phi.applications() {
        let mut r = find(&mut parent, app.vars[0] as usize);
        for &v in &app.vars[1..] {
            let s = find(&mut parent, v as usize);
            if s != r {
                let (lo, hi) = (r.min(s), r.max(s));
                parent[hi] = lo;
                r = lo;
            }
        }
    }
    let mut comp_vars: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut used = vec![false; n];
    for app in phi.applications() {
        for &v in &app.vars {
            used[v as usize] = true;
        }
    }
    for v in 0..n {
        if used[v] {
            let r = find(&mut parent, v);
            comp_vars[r].push(v);
        }
    }
    let mut comp_apps: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, app) in phi.applications().iter().enumerate() {
        let r = find(&mut parent, app.vars[0] as usize);
        comp_apps[r].push(i);
    }

    let rows: Vec<Vec<u32>> = phi
        .constraint_set()
        .relations()
        .iter()
        .map(|r| r.rows().collect())
        .collect();
    let mut values: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    for root in 0..n {
        if comp_vars[root].is_empty() {
            continue;
        }
        let local = Component::new(phi, &rows, &comp_vars[root], &comp_apps[root]);
        let sol = local.search(&mut rng)?;
        for (i, &v) in comp_vars[root].iter().enumerate() {
            values[v] = sol[i];
        }
    }
    let a = Assignment::new(values);
    assert!(phi.eval(&a).unwrap_or(false), "search returned a non-solution");
    Some(a)
}

struct Component<'a> {
    rows: &'a [Vec<u32>],
    /// (relation, local variable per argument)
    cons: Vec<(usize, Vec<usize>)>,
    occurs: Vec<Vec<usize>>,
}

const UNSET: i8 = -1;

impl<'a> Component<'a> {
    fn new(phi: &Formula, rows: &'a [Vec<u32>], vars: &[usize], apps: &[usize]) -> Self {
        let mut local = std::collections::HashMap::with_capacity(vars.len());
        for (i, &v) in vars.iter().enumerate() {
            local.insert(v, i);
        }
        let mut occurs = vec![Vec::new(); vars.len()];
        let cons = apps
            .iter()
            .enumerate()
            .map(|(ci, &ai)| {
                let app = &phi.applications()[ai];
                let args: Vec<usize> = app.vars.iter().map(|v| local[&(*v as usize)]).collect();
                for &a in &args {
                    if occurs[a].last() != Some(&ci) {
                        occurs[a].push(ci);
                    }
                }
                (app.relation, args)
            })
            .collect();
        Self { rows, cons, occurs }
    }

    /// Assigns forced values until fixpoint; `false` on conflict.
    fn propagate(&self, value: &mut [i8], trail: &mut Vec<usize>, mut queue: Vec<usize>) -> bool {
        let mut queued = vec![false; self.cons.len()];
        for &c in &queue {
            queued[c] = true;
        }
        while let Some(c) = queue.pop() {
            queued[c] = false;
            let (rel, args) = &self.cons[c];
            let (mut mask, mut val) = (0u32, 0u32);
            for (i, &a) in args.iter().enumerate() {
                if value[a] != UNSET {
                    mask |= 1 << i;
                    val |= (value[a] as u32) << i;
                }
            }
            if mask.count_ones() as usize == args.len() {
                if self.rows[*rel].binary_search(&val).is_err() {
                    return false;
                }
                continue;
            }
            let (mut all, mut any, mut seen) = (u32::MAX, 0u32, false);
            for &r in &self.rows[*rel] {
                if r & mask == val {
                    all &= r;
                    any |= r;
                    seen = true;
                }
            }
            if !seen {
                return false;
            }
            for (i, &a) in args.iter().enumerate() {
                if value[a] != UNSET {
                    continue;
                }
                let forced = if all >> i & 1 == 1 {
                    1
                } else if any >> i & 1 == 0 {
                    0
                } else {
                    continue;
                };
                value[a] = forced;
                trail.push(a);
                for &d in &self.occurs[a] {
                    if !queued[d] {
                        queued[d] = true;
                        queue.push(d);
                    }
                }
            }
        }
        true
    }

    fn search(&self, rng: &mut impl Rng) -> Option<Vec<bool>> {
        let nv = self.occurs.len();
        let mut order: Vec<usize> = (0..nv).collect();
        order.shuffle(rng);
        order.sort_by_key(|&v| std::cmp::Reverse(self.occurs[v].len()));

        let mut value = vec![UNSET; nv];
        let mut trail = Vec::new();
        if !self.propagate(&mut value, &mut trail, (0..self.cons.len()).collect()) {
            return None;
        }
        // (trail length before the decision, variable, first value, second tried)
        let mut stack: Vec<(usize, usize, bool, bool)> = Vec::new();
        loop {
            let Some(&var) = order.iter().find(|&&v| value[v] == UNSET) else {
                break;
            };
            let pol = rng.random_bool(0.5);
            stack.push((trail.len(), var, pol, false));
            value[var] = pol as i8;
            trail.push(var);
            let mut ok = self.propagate(&mut value, &mut trail, self.occurs[var].clone());
            while !ok {
                let frame = stack.last_mut()?;
                for v in trail.drain(frame.0..) {
                    value[v] = UNSET;
                }
                if frame.3 {
                    stack.pop();
                    continue;
                }
                frame.3 = true;
                let v = frame.1;
                value[v] = !frame.2 as i8;
                trail.push(v);
                ok = self.propagate(&mut value, &mut trail, self.occurs[v].clone());
            }
        }
        Some(value.iter().map(|&x| x == 1).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Application;
    use crate::random::{generate, GenSpec};
    use crate::relation::ConstraintSet;
    use crate::solutions::enumerate_solutions;
    use std::sync::Arc;

    #[test]
    fn agrees_with_enumeration_on_satisfiability() {
        for (spec, c) in [("3sat", 3.0), ("3sat", 5.0), ("1in3", 0.6), ("2sat", 1.2), ("xor2", 0.6)] {
            let set = Arc::new(ConstraintSet::builtin(spec).unwrap());
            for seed in 0..40 {
                let phi = generate(&GenSpec::at_density(set.clone(), 12, c, seed)).unwrap();
                let exact = !enumerate_solutions(&phi).unwrap().is_empty();
                let found = solve_one(&phi, seed);
                assert_eq!(found.is_some(), exact, "{spec} c={c} seed={seed}");
                if let Some(a) = found {
                    assert!(phi.eval(&a).unwrap());
                }
            }
        }
    }

    #[test]
    fn xor_chain_is_linear() {
        // a long even cycle of inequalities splits into no backtracking trouble
        let n = 2000;
        let apps = (0..n as u32)
            .map(|i| Application { relation: 0, vars: vec![i, (i + 1) % n as u32] })
            .collect();
        let phi = Formula::new(n, Arc::new(ConstraintSet::xor2()), apps).unwrap();
        assert!(solve_one(&phi, 1).is_some());
    }

    #[test]
    fn seeds_reach_different_solutions() {
        let set = Arc::new(ConstraintSet::ksat(3));
        let phi = generate(&GenSpec::at_density(set, 30, 2.0, 5)).unwrap();
        let sols: std::collections::HashSet<_> = (0..20).filter_map(|s| solve_one(&phi, s)).collect();
        assert!(sols.len() > 1);
    }

    #[test]
    fn empty_formula() {
        let phi = Formula::empty(5, Arc::new(ConstraintSet::ksat(3))).unwrap();
        assert_eq!(solve_one(&phi, 0).unwrap().len(), 5);
    }
}
