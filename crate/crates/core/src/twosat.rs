//! Implication-graph machinery for 2-CNF formulas.
//!
//! Literal nodes: `2·v` is the positive literal of variable `v` (0-based)
//! and `2·v + 1` its negation, so complementing a literal flips the low bit.
//! A clause `α ∨ β` contributes the edges `¬α → β` and `¬β → α`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{agreement_in_band, Assignment, BandWidth, Formula, Rational};
use crate::random::rng_from_seed;

pub type Literal = u32;

#[inline]
pub fn literal(var: usize, negated: bool) -> Literal {
    (2 * var + negated as usize) as Literal
}

#[inline]
pub fn var_of(l: Literal) -> usize {
    (l >> 1) as usize
}

#[inline]
pub fn is_negated(l: Literal) -> bool {
    l & 1 == 1
}

#[inline]
pub fn complement(l: Literal) -> Literal {
    l ^ 1
}

/// Value of `l` under `a`.
#[inline]
fn holds(a: &Assignment, l: Literal) -> bool {
    a.get(var_of(l)) != is_negated(l)
}

/// Makes `l` true in `a`.
#[inline]
fn make_true(a: &mut Assignment, l: Literal) {
    a.set(var_of(l), !is_negated(l));
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicationGraph {
    n: usize,
    /// Two edges per clause, in clause order.
    edges: Vec<(Literal, Literal)>,
    succ: Vec<Vec<Literal>>,
    pred: Vec<Vec<Literal>>,
}

impl ImplicationGraph {
    /// Graph of `n` variables from clauses given as literal pairs.
    pub fn from_clauses(n: usize, clauses: impl IntoIterator<Item = (Literal, Literal)>) -> Self {
        let mut edges = Vec::new();
        let mut succ = vec![Vec::new(); 2 * n];
        let mut pred = vec![Vec::new(); 2 * n];
        for (a, b) in clauses {
            for (u, w) in [(complement(a), b), (complement(b), a)] {
                edges.push((u, w));
                succ[u as usize].push(w);
                pred[w as usize].push(u);
            }
        }
        for list in succ.iter_mut().chain(pred.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        Self { n, edges, succ, pred }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_nodes(&self) -> usize {
        2 * self.n
    }

    pub fn edges(&self) -> &[(Literal, Literal)] {
        &self.edges
    }

    pub fn successors(&self, l: Literal) -> &[Literal] {
        &self.succ[l as usize]
    }

    pub fn predecessors(&self, l: Literal) -> &[Literal] {
        &self.pred[l as usize]
    }

    /// `u → w` exists iff `¬w → ¬u` exists.
    pub fn is_skew_symmetric(&self) -> bool {
        (0..self.num_nodes() as Literal).all(|u| {
            self.successors(u)
                .iter()
                .all(|&w| self.successors(complement(w)).binary_search(&complement(u)).is_ok())
        })
    }

    /// Literals reachable from `start`, `start` included, in BFS order.
    pub fn forward_closure(&self, start: Literal) -> Vec<Literal> {
        let mut seen = vec![false; self.num_nodes()];
        let mut out = vec![start];
        seen[start as usize] = true;
        let mut head = 0;
        while head < out.len() {
            let u = out[head];
            head += 1;
            for &w in self.successors(u) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    out.push(w);
                }
            }
        }
        out
    }
}

/// Implication graph of a formula whose relations are all width-2 clauses.
pub fn build_graph(phi: &Formula) -> Result<ImplicationGraph> {
    let set = phi.constraint_set();
    if set.arity() != 2 {
        return Err(Error::NotTwoCnf(format!("relations have arity {}", set.arity())));
    }
    let masks = set
        .relations()
        .iter()
        .map(|r| {
            r.as_clause()
                .ok_or_else(|| Error::NotTwoCnf(format!("relation `{}` is not a clause", r.name())))
        })
        .collect::<Result<Vec<_>>>()?;
    let clauses = phi.applications().iter().map(|app| {
        let mask = masks[app.relation];
        (
            literal(app.vars[0] as usize, mask & 1 == 1),
            literal(app.vars[1] as usize, mask & 2 == 2),
        )
    });
    Ok(ImplicationGraph::from_clauses(phi.num_vars(), clauses))
}

/// Implication graph of any formula over relations of arity at most 2.
/// Each rejected row becomes the clause excluding it.
pub fn binary_graph(phi: &Formula) -> Result<ImplicationGraph> {
    let k = phi.constraint_set().arity();
    if k > 2 {
        return Err(Error::NotTwoCnf(format!("relations have arity {k}")));
    }
    let rejected: Vec<Vec<u32>> = phi
        .constraint_set()
        .relations()
        .iter()
        .map(|r| r.rejected_rows().collect())
        .collect();
    let mut clauses = Vec::new();
    for app in phi.applications() {
        for &row in &rejected[app.relation] {
            let lits: Vec<Literal> = app
                .vars
                .iter()
                .enumerate()
                .map(|(i, &v)| literal(v as usize, row >> i & 1 == 1))
                .collect();
            clauses.push((lits[0], *lits.last().unwrap()));
        }
    }
    Ok(ImplicationGraph::from_clauses(phi.num_vars(), clauses))
}

/// Strongly connected components, numbered in topological order of the
/// condensation (every edge between components goes from a lower id to a
/// higher one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccInfo {
    pub component: Vec<u32>,
    /// Sorted literal nodes of each component.
    pub members: Vec<Vec<Literal>>,
    /// Condensation DAG, sorted and deduplicated.
    pub dag: Vec<Vec<u32>>,
    pub dag_pred: Vec<Vec<u32>>,
    /// Component holding the complements of a component's literals.
    pub complement: Vec<u32>,
    /// No variable has both of its literals in one component.
    pub satisfiable: bool,
}

impl SccInfo {
    pub fn num_components(&self) -> usize {
        self.members.len()
    }

    /// Number of literal nodes in a component.
    pub fn weight(&self, c: u32) -> usize {
        self.members[c as usize].len()
    }

    /// The canonical satisfying assignment: a literal is true when its
    /// component comes after its complement's in topological order.
    pub fn canonical_solution(&self) -> Option<Assignment> {
        if !self.satisfiable {
            return None;
        }
        let n = self.component.len() / 2;
        Some(Assignment::new(
            (0..n)
                .map(|v| self.component[2 * v] > self.component[2 * v + 1])
                .collect(),
        ))
    }
}

/// Iterative Tarjan. Returns the component of every node, numbered in
/// order of completion (reverse topological), and the component count.
fn tarjan(succ: &[Vec<Literal>]) -> (Vec<u32>, usize) {
    const UNSET: u32 = u32::MAX;
    let n = succ.len();
    let mut index = vec![UNSET; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut comp = vec![UNSET; n];
    let mut next_index = 0u32;
    let mut count = 0usize;
    let mut call: Vec<(u32, usize)> = Vec::new();

    for root in 0..n as u32 {
        if index[root as usize] != UNSET {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (u, ref mut pos)) = call.last_mut() {
            let ui = u as usize;
            if let Some(&w) = succ[ui].get(*pos) {
                *pos += 1;
                let wi = w as usize;
                if index[wi] == UNSET {
                    index[wi] = next_index;
                    low[wi] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[wi] = true;
                    call.push((w, 0));
                } else if on_stack[wi] {
                    low[ui] = low[ui].min(index[wi]);
                }
                continue;
            }
            call.pop();
            if let Some(&(p, _)) = call.last() {
                low[p as usize] = low[p as usize].min(low[ui]);
            }
            if low[ui] == index[ui] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w as usize] = false;
                    comp[w as usize] = count as u32;
                    if w == u {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    (comp, count)
}

pub fn scc_analysis(g: &ImplicationGraph) -> SccInfo {
    let (raw, count) = tarjan(&g.succ);
    let component: Vec<u32> = raw.iter().map(|&c| (count - 1) as u32 - c).collect();
    let mut members = vec![Vec::new(); count];
    for (node, &c) in component.iter().enumerate() {
        members[c as usize].push(node as Literal);
    }
    let mut dag = vec![Vec::new(); count];
    let mut dag_pred = vec![Vec::new(); count];
    for (u, list) in g.succ.iter().enumerate() {
        let cu = component[u];
        for &w in list {
            let cw = component[w as usize];
            if cu != cw {
                debug_assert!(cu < cw);
                dag[cu as usize].push(cw);
                dag_pred[cw as usize].push(cu);
            }
        }
    }
    for list in dag.iter_mut().chain(dag_pred.iter_mut()) {
        list.sort_unstable();
        list.dedup();
    }
    let complement_of: Vec<u32> = members
        .iter()
        .map(|m| component[complement(m[0]) as usize])
        .collect();
    let satisfiable = (0..g.num_vars()).all(|v| component[2 * v] != component[2 * v + 1]);
    SccInfo { component, members, dag, dag_pred, complement: complement_of, satisfiable }
}

/// Cycle structure read off the strongly connected components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleReport {
    /// Components with at least two literal nodes.
    pub nontrivial_components: usize,
    /// Every nontrivial component is a simple directed cycle.
    pub all_simple_cycles: bool,
    /// Some nontrivial component reaches a different one.
    pub path_connected_pair: bool,
    /// Literal nodes over all nontrivial components.
    pub total_cycle_length: usize,
    /// Some literal reaches two different nontrivial components.
    pub literal_implying_two_cycles: bool,
    pub largest_component: usize,
}

pub fn cycle_diagnostics(g: &ImplicationGraph, info: &SccInfo) -> CycleReport {
    let count = info.num_components();
    let nontrivial: Vec<bool> = info.members.iter().map(|m| m.len() >= 2).collect();

    let all_simple_cycles = info.members.iter().filter(|m| m.len() >= 2).all(|m| {
        let c = info.component[m[0] as usize];
        m.iter().all(|&u| {
            let inside = |l: &&Literal| info.component[**l as usize] == c;
            g.successors(u).iter().filter(inside).count() == 1
                && g.predecessors(u).iter().filter(inside).count() == 1
        })
    });

    // sources first: is a component reachable from some other nontrivial one?
    let mut reached = vec![false; count];
    let mut path_connected_pair = false;
    for c in 0..count {
        if reached[c] && nontrivial[c] {
            path_connected_pair = true;
        }
        let carry = reached[c] || nontrivial[c];
        if carry {
            for &d in &info.dag[c] {
                reached[d as usize] = true;
            }
        }
    }

    // sinks first: up to two distinct nontrivial components reachable from each component
    let mut seen: Vec<[u32; 2]> = vec![[u32::MAX; 2]; count];
    let mut literal_implying_two_cycles = false;
    for c in (0..count).rev() {
        let mut acc = [u32::MAX; 2];
        let mut add = |x: u32| {
            if x == u32::MAX || acc.contains(&x) {
                return;
            }
            if acc[0] == u32::MAX {
                acc[0] = x;
            } else if acc[1] == u32::MAX {
                acc[1] = x;
            }
        };
        if nontrivial[c] {
            add(c as u32);
        }
        for &d in &info.dag[c] {
            let [a, b] = seen[d as usize];
            add(a);
            add(b);
        }
        if acc[1] != u32::MAX {
            literal_implying_two_cycles = true;
        }
        seen[c] = acc;
    }

    CycleReport {
        nontrivial_components: nontrivial.iter().filter(|&&b| b).count(),
        all_simple_cycles,
        path_connected_pair,
        total_cycle_length: info.members.iter().filter(|m| m.len() >= 2).map(|m| m.len()).sum(),
        literal_implying_two_cycles,
        largest_component: info.members.iter().map(|m| m.len()).max().unwrap_or(0),
    }
}

/// Literals `x` with `x →* y` and `x →* ¬y` for some `y`; equivalently
/// `x →* ¬x`. Each is false in every satisfying assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadLiteralSet {
    pub bad: Vec<bool>,
    pub count: usize,
}

impl BadLiteralSet {
    pub fn contains(&self, l: Literal) -> bool {
        self.bad[l as usize]
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.bad
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(l, _)| l as Literal)
    }

    /// Bad literals per variable.
    pub fn fraction(&self) -> f64 {
        let n = self.bad.len() / 2;
        if n == 0 {
            0.0
        } else {
            self.count as f64 / n as f64
        }
    }
}

const BITSET_REACH_LIMIT: usize = 1 << 14;

/// Does each component reach its complement?
fn reaches_complement(info: &SccInfo) -> Vec<bool> {
    let count = info.num_components();
    if count <= BITSET_REACH_LIMIT {
        let words = count.div_ceil(64);
        let mut reach = vec![0u64; count * words];
        for c in (0..count).rev() {
            let (done, rest) = reach.split_at_mut(c * words + words);
            let own = &mut done[c * words..];
            own[c / 64] |= 1 << (c % 64);
            let _ = rest;
            for &d in &info.dag[c] {
                let d = d as usize;
                // d > c, so its row lives in the later part of the buffer
                let (head, tail) = reach.split_at_mut(d * words);
                let src = &tail[..words];
                let dst = &mut head[c * words..c * words + words];
                for (x, y) in dst.iter_mut().zip(src) {
                    *x |= *y;
                }
            }
        }
        (0..count)
            .map(|c| {
                let t = info.complement[c] as usize;
                reach[c * words + t / 64] >> (t % 64) & 1 == 1
            })
            .collect()
    } else {
        let mut mark = vec![u32::MAX; count];
        (0..count)
            .map(|c| {
                let target = info.complement[c] as usize;
                if target == c {
                    return true;
                }
                if target < c {
                    return false;
                }
                let mut queue = VecDeque::from([c]);
                mark[c] = c as u32;
                while let Some(u) = queue.pop_front() {
                    for &d in &info.dag[u] {
                        let d = d as usize;
                        if d == target {
                            return true;
                        }
                        if d < target && mark[d] != c as u32 {
                            mark[d] = c as u32;
                            queue.push_back(d);
                        }
                    }
                }
                false
            })
            .collect()
    }
}

pub fn bad_literals_with(info: &SccInfo) -> BadLiteralSet {
    let comp_bad = reaches_complement(info);
    let bad: Vec<bool> = info.component.iter().map(|&c| comp_bad[c as usize]).collect();
    let count = bad.iter().filter(|&&b| b).count();
    BadLiteralSet { bad, count }
}

pub fn bad_literals(g: &ImplicationGraph) -> BadLiteralSet {
    bad_literals_with(&scc_analysis(g))
}

/// A solution of `phi` one step closer to a target solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub next: Assignment,
    /// Variables changed by the step.
    pub flipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathReport {
    /// `path[0]` is the start, the last entry the target.
    pub path: Vec<Assignment>,
    pub max_flips: usize,
}

impl PathReport {
    pub fn steps(&self) -> usize {
        self.path.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipTarget {
    /// Flip `round((1−q)·n)` variables so the overlap lands near `q`.
    #[default]
    Overlap,
    /// Flip `round(q·n)` variables, i.e. aim for overlap near `1−q`.
    FalseCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PairOptions {
    pub width: BandWidth,
    pub flip_target: FlipTarget,
    /// Require `A ≠ B` even when `q = 1`.
    pub distinct: bool,
    /// Proceed on components that are not simple cycles and skip nodes
    /// that would overshoot the band instead of failing.
    pub relaxed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairStatus {
    Success,
    FailOverlappingCycles,
    FailBandUnreachable,
    FailUnsat,
}

struct Staged {
    b: Assignment,
    flips: usize,
    overshoot: bool,
}

/// Alternations of "farthest greedy solution" used when re-choosing A.
const REFINE_ROUNDS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapPairResult {
    pub status: PairStatus,
    pub a: Option<Assignment>,
    pub b: Option<Assignment>,
    pub agreement: Option<usize>,
    /// Overlap the band is centred on.
    pub target_overlap: String,
    pub target_flips: usize,
    pub flips: usize,
    /// The first choice of A ran out of flippable literals and was replaced.
    pub refined: bool,
    pub cycles: CycleReport,
    pub bad_literals: usize,
    pub bad_literal_fraction: f64,
}

/// Graph, components and cycle data of one 2-CNF formula, computed once.
#[derive(Debug, Clone)]
pub struct TwoSatGeometry<'a> {
    phi: &'a Formula,
    graph: ImplicationGraph,
    scc: SccInfo,
}

impl<'a> TwoSatGeometry<'a> {
    pub fn new(phi: &'a Formula) -> Result<Self> {
        let graph = build_graph(phi)?;
        let scc = scc_analysis(&graph);
        Ok(Self { phi, graph, scc })
    }

    /// Like [`TwoSatGeometry::new`] but accepts any relations of arity at
    /// most 2 (each is a conjunction of clauses).
    pub fn binary(phi: &'a Formula) -> Result<Self> {
        let graph = binary_graph(phi)?;
        let scc = scc_analysis(&graph);
        Ok(Self { phi, graph, scc })
    }

    pub fn graph(&self) -> &ImplicationGraph {
        &self.graph
    }

    pub fn scc(&self) -> &SccInfo {
        &self.scc
    }

    pub fn cycle_report(&self) -> CycleReport {
        cycle_diagnostics(&self.graph, &self.scc)
    }

    pub fn bad_literals(&self) -> BadLiteralSet {
        bad_literals_with(&self.scc)
    }

    fn require_solution(&self, a: &Assignment, which: &str) -> Result<()> {
        if !self.phi.eval(a)? {
            return Err(Error::Input(format!("{which} does not satisfy the formula")));
        }
        Ok(())
    }

    /// Moves from `a` towards `b` by making true the forward closure of an
    /// implication-minimal literal that is true in `b` and false in `a`.
    pub fn adjacent_step(&self, a: &Assignment, b: &Assignment) -> Result<Step> {
        self.require_solution(a, "start assignment")?;
        self.require_solution(b, "target assignment")?;
        self.step_unchecked(a, b)
    }

    fn step_unchecked(&self, a: &Assignment, b: &Assignment) -> Result<Step> {
        // Picking the literal whose component is earliest in topological
        // order guarantees no other differing literal implies it.
        let start = (0..a.len())
            .filter(|&v| a.get(v) != b.get(v))
            .map(|v| literal(v, !b.get(v)))
            .min_by_key(|&l| (self.scc.component[l as usize], l))
            .ok_or_else(|| Error::Input("assignments are equal".into()))?;
        let mut next = a.clone();
        let mut flipped = 0;
        for l in self.graph.forward_closure(start) {
            if !holds(&next, l) {
                make_true(&mut next, l);
                flipped += 1;
            }
        }
        if !self.phi.eval(&next)? {
            return Err(Error::Certificate("step left the solution space".into()));
        }
        if next.hamming(b)? >= a.hamming(b)? {
            return Err(Error::Certificate("step did not approach the target".into()));
        }
        Ok(Step { next, flipped })
    }

    /// Iterated steps from `a` to `b`.
    pub fn path_between(&self, a: &Assignment, b: &Assignment, step_budget: usize) -> Result<PathReport> {
        self.require_solution(a, "start assignment")?;
        self.require_solution(b, "target assignment")?;
        let mut path = vec![a.clone()];
        let mut max_flips = 0;
        let mut cur = a.clone();
        while cur != *b {
            if path.len() > step_budget {
                return Err(Error::StepBudget(step_budget));
            }
            let step = self.step_unchecked(&cur, b)?;
            max_flips = max_flips.max(step.flipped);
            cur = step.next;
            path.push(cur.clone());
        }
        Ok(PathReport { path, max_flips })
    }

    /// A satisfying assignment built by setting variables in random order
    /// to random values and propagating implications, or `None` if the
    /// formula is unsatisfiable.
    pub fn random_solution(&self, seed: u64) -> Option<Assignment> {
        if !self.scc.satisfiable {
            return None;
        }
        let n = self.phi.num_vars();
        let mut rng = rng_from_seed(seed);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let prefer: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        Some(self.greedy_solution(&order, &prefer))
    }

    /// Visits variables in `order`, giving each its preferred value unless
    /// the implied literals conflict with earlier choices, in which case the
    /// other value is forced. Requires a satisfiable formula.
    fn greedy_solution(&self, order: &[usize], prefer: &[bool]) -> Assignment {
        let n = self.phi.num_vars();
        // 0 unassigned, 1 true, 2 false, per literal node
        let mut value = vec![0u8; 2 * n];
        let mut trail: Vec<Literal> = Vec::new();
        let mut queue: Vec<Literal> = Vec::new();

        let mut try_set = |value: &mut Vec<u8>, l: Literal| -> bool {
            trail.clear();
            queue.clear();
            queue.push(l);
            while let Some(u) = queue.pop() {
                match value[u as usize] {
                    1 => continue,
                    2 => {
                        for &t in &trail {
                            value[t as usize] = 0;
                            value[complement(t) as usize] = 0;
                        }
                        return false;
                    }
                    _ => {}
                }
                value[u as usize] = 1;
                value[complement(u) as usize] = 2;
                trail.push(u);
                queue.extend_from_slice(self.graph.successors(u));
            }
            true
        };

        for &v in order {
            if value[2 * v] != 0 {
                continue;
            }
            let l = literal(v, !prefer[v]);
            if !try_set(&mut value, l) {
                let ok = try_set(&mut value, complement(l));
                assert!(ok, "propagation failed on a satisfiable 2-CNF");
            }
        }
        let a = Assignment::new((0..n).map(|v| value[2 * v] == 1).collect());
        debug_assert!(self.phi.eval(&a).unwrap_or(false));
        a
    }

    /// Two satisfying assignments with overlap in the band around `q`.
    pub fn construct_overlap_pair(&self, q: Rational, opts: PairOptions) -> Result<OverlapPairResult> {
        if q > Rational::from_integer(1) || q == Rational::from_integer(0) {
            return Err(Error::Input(format!("target overlap {q} outside (0, 1]")));
        }
        let n = self.phi.num_vars();
        let q_eff = match opts.flip_target {
            FlipTarget::Overlap => q,
            FlipTarget::FalseCount => Rational::from_integer(1) - q,
        };
        let cycles = self.cycle_report();
        let mut result = OverlapPairResult {
            status: PairStatus::FailUnsat,
            a: None,
            b: None,
            agreement: None,
            target_overlap: q_eff.to_string(),
            target_flips: 0,
            flips: 0,
            refined: false,
            cycles,
            bad_literals: 0,
            bad_literal_fraction: 0.0,
        };
        if !self.scc.satisfiable {
            return Ok(result);
        }
        if !result.cycles.all_simple_cycles && !opts.relaxed {
            result.status = PairStatus::FailOverlappingCycles;
            return Ok(result);
        }

        let info = &self.scc;
        let count = info.num_components();
        let bad = self.bad_literals();
        result.bad_literals = bad.count;
        result.bad_literal_fraction = bad.fraction();

        // bad components and their complements leave the graph with fixed values
        let removed: Vec<bool> = (0..count)
            .map(|c| {
                bad.contains(info.members[c][0])
                    || bad.contains(info.members[info.complement[c] as usize][0])
            })
            .collect();

        // allowed flip counts form an interval around round((1−q)·n)
        let allowed: Vec<usize> = (0..=n)
            .filter(|&f| agreement_in_band(n - f, n, q_eff, opts.width))
            .filter(|&f| !opts.distinct || f >= 1)
            .collect();
        let (Some(&f_lo), Some(&f_hi)) = (allowed.first(), allowed.last()) else {
            result.status = PairStatus::FailBandUnreachable;
            return Ok(result);
        };
        let (qn, qd) = (*q_eff.numer() as u128, *q_eff.denom() as u128);
        let ideal = (2 * (qd - qn) * n as u128 + qd) / (2 * qd);
        let target = (ideal as usize).clamp(f_lo, f_hi);
        result.target_flips = target;

        let in_s = self.successor_closed_half(&removed)?;
        let mut a = Assignment::all(n, false);
        for (l, &is_bad) in bad.bad.iter().enumerate() {
            if is_bad {
                make_true(&mut a, complement(l as Literal));
            }
        }
        for c in (0..count).filter(|&c| in_s[c]) {
            for &l in &info.members[c] {
                make_true(&mut a, l);
            }
        }
        let mut staged = self.staged_flips(&a, &in_s, &removed, target, f_hi, opts.relaxed);

        if staged.flips < f_lo && !staged.overshoot {
            // Ran out of flippable literals. Re-choose A as a solution far
            // from a solution far from the first one, and stage again.
            let order: Vec<usize> = (0..n).collect();
            for _ in 0..REFINE_ROUNDS {
                let away: Vec<bool> = a.values().iter().map(|&x| !x).collect();
                a = self.greedy_solution(&order, &away);
            }
            let in_s: Vec<bool> = (0..count)
                .map(|c| !removed[c] && holds(&a, info.members[c][0]))
                .collect();
            staged = self.staged_flips(&a, &in_s, &removed, target, f_hi, opts.relaxed);
            result.refined = true;
        }
        let b = staged.b;
        result.flips = staged.flips;
        if !(f_lo..=f_hi).contains(&staged.flips) {
            result.status = PairStatus::FailBandUnreachable;
            return Ok(result);
        }

        if !self.phi.eval(&a)? {
            return Err(Error::Certificate("first assignment does not satisfy the formula".into()));
        }
        if !self.phi.eval(&b)? {
            return Err(Error::Certificate("second assignment does not satisfy the formula".into()));
        }
        let agreement = a.agreement(&b)?;
        if !agreement_in_band(agreement, n, q_eff, opts.width) {
            return Err(Error::Certificate(format!("agreement {agreement} outside the band")));
        }
        result.status = PairStatus::Success;
        result.agreement = Some(agreement);
        result.a = Some(a);
        result.b = Some(b);
        Ok(result)
    }

    /// Sets S-components false in order of stage label, then lowest literal
    /// node, starting from `a`, until `target` variables have changed.
    fn staged_flips(
        &self,
        a: &Assignment,
        in_s: &[bool],
        removed: &[bool],
        target: usize,
        f_hi: usize,
        relaxed: bool,
    ) -> Staged {
        let info = &self.scc;
        let count = info.num_components();
        let mut indeg = vec![0usize; count];
        for c in (0..count).filter(|&c| in_s[c]) {
            indeg[c] = info.dag_pred[c].iter().filter(|&&p| in_s[p as usize]).count();
        }
        let mut ready: BinaryHeap<Reverse<(usize, Literal, u32)>> = (0..count)
            .filter(|&c| in_s[c] && indeg[c] == 0)
            .map(|c| Reverse((0, info.members[c][0], c as u32)))
            .collect();
        // Flipping c makes the complement of each non-S predecessor p true
        // in B; the S-literal ¬p must then stay true, so it is locked.
        let mut locked = vec![false; count];
        let mut b = a.clone();
        let mut flips = 0;
        let mut stage = 0;
        while flips < target {
            let Some(Reverse((_, _, c))) = ready.pop() else {
                break;
            };
            if locked[c as usize] {
                continue;
            }
            let w = info.weight(c);
            if flips + w > f_hi {
                if relaxed {
                    continue;
                }
                return Staged { b, flips, overshoot: true };
            }
            stage += 1;
            for &l in &info.members[c as usize] {
                make_true(&mut b, complement(l));
            }
            flips += w;
            for &p in &info.dag_pred[c as usize] {
                let p = p as usize;
                if !in_s[p] && !removed[p] {
                    locked[info.complement[p] as usize] = true;
                }
            }
            for &d in &info.dag[c as usize] {
                let d = d as usize;
                if in_s[d] {
                    indeg[d] -= 1;
                    if indeg[d] == 0 {
                        ready.push(Reverse((stage, info.members[d][0], d as u32)));
                    }
                }
            }
        }
        Staged { b, flips, overshoot: false }
    }

    /// Picks one component of every complementary pair that is not removed,
    /// so that the chosen set is closed under implication: repeatedly take
    /// the current sinks and drop their complements (the current sources).
    /// When a component and its complement are both isolated, the one
    /// holding the smaller literal node is taken.
    fn successor_closed_half(&self, removed: &[bool]) -> Result<Vec<bool>> {
        let info = &self.scc;
        let count = info.num_components();
        let mut in_v: Vec<bool> = removed.iter().map(|r| !r).collect();
        let mut outdeg: Vec<usize> = (0..count)
            .map(|c| info.dag[c].iter().filter(|&&d| in_v[d as usize]).count())
            .collect();
        let mut in_s = vec![false; count];
        let mut round: Vec<u32> = (0..count as u32)
            .filter(|&c| in_v[c as usize] && outdeg[c as usize] == 0)
            .collect();
        let mut left = in_v.iter().filter(|&&b| b).count();

        while left > 0 {
            if round.is_empty() {
                return Err(Error::Certificate("condensation has no sink".into()));
            }
            let mut decided = Vec::new();
            for &c in &round {
                let cb = info.complement[c as usize];
                if !in_v[c as usize] || decided.contains(&c) {
                    continue;
                }
                let keep = if outdeg[cb as usize] == 0 {
                    if info.members[c as usize][0] < info.members[cb as usize][0] {
                        c
                    } else {
                        cb
                    }
                } else {
                    c
                };
                in_s[keep as usize] = true;
                decided.push(c);
                decided.push(cb);
            }
            let mut next = Vec::new();
            for &c in &decided {
                in_v[c as usize] = false;
                left -= 1;
            }
            for &c in &decided {
                for &p in &info.dag_pred[c as usize] {
                    let p = p as usize;
                    if in_v[p] {
                        outdeg[p] -= 1;
                        if outdeg[p] == 0 {
                            next.push(p as u32);
                        }
                    }
                }
            }
            next.sort_unstable();
            next.dedup();
            round = next;
        }

        // exactly one literal per remaining variable
        let n = self.phi.num_vars();
        let mut per_var = vec![0u8; n];
        for c in (0..count).filter(|&c| in_s[c]) {
            for &l in &info.members[c] {
                per_var[var_of(l)] += 1;
            }
        }
        for (v, &k) in per_var.iter().enumerate() {
            let expected = !removed[info.component[2 * v] as usize] as u8;
            if k != expected {
                return Err(Error::Certificate(format!(
                    "variable {} has {k} literals in the chosen half",
                    v + 1
                )));
            }
        }
        Ok(in_s)
    }
}

pub fn adjacent_step(phi: &Formula, a: &Assignment, b: &Assignment) -> Result<Assignment> {
    Ok(TwoSatGeometry::new(phi)?.adjacent_step(a, b)?.next)
}

pub fn path_between(phi: &Formula, a: &Assignment, b: &Assignment, step_budget: usize) -> Result<PathReport> {
    TwoSatGeometry::new(phi)?.path_between(a, b, step_budget)
}

pub fn construct_overlap_pair(phi: &Formula, q: Rational, opts: PairOptions) -> Result<OverlapPairResult> {
    TwoSatGeometry::new(phi)?.construct_overlap_pair(q, opts)
}
