//! Monte Carlo experiments over random formulas: probability estimates at a
//! density, threshold location by bisection, sharpness widths and
//! overlap-threshold curves.
//!
//! All outputs are finite-`n` estimates. Trial `t` of a probe with seed `s`
//! uses generator seed `derive_seed(s, t)`, so results do not depend on the
//! number of worker threads.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{serialize_rational, BandWidth, Formula, Rational};
use crate::random::{derive_seed, generate, GenSpec};
use crate::relation::ConstraintSet;
use crate::solutions::{decide_q_overlap, QOverlapOptions, ENUMERATION_BOUND};
use crate::solve::solve_one;
use crate::twosat::{scc_analysis, binary_graph, PairOptions, PairStatus, TwoSatGeometry};

/// 97.5% standard normal quantile.
pub const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "property", rename_all = "snake_case")]
pub enum Property {
    Sat,
    /// Two solutions with overlap in the band around `q`.
    QSat {
        #[serde(serialize_with = "serialize_rational")]
        q: Rational,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QSatBackend {
    /// Enumeration up to the enumeration bound, construction beyond it.
    #[default]
    Auto,
    Exact,
    /// Pair construction for 2-CNF; enumeration only when it fails on a
    /// formula small enough to enumerate.
    Constructive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TrialOptions {
    pub width: BandWidth,
    pub distinct: bool,
    pub backend: QSatBackend,
}

/// What to measure: the property of random formulas over `set` with `n` variables.
#[derive(Debug, Clone, Serialize)]
pub struct Experiment {
    #[serde(serialize_with = "set_names")]
    pub set: Arc<ConstraintSet>,
    pub n: usize,
    pub property: Property,
    pub trials: usize,
    pub options: TrialOptions,
}

fn set_names<S: serde::Serializer>(set: &Arc<ConstraintSet>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(set.relations().iter().map(|r| r.name()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Yes,
    No,
    Undecided,
}

impl Experiment {
    pub fn new(set: Arc<ConstraintSet>, n: usize, property: Property, trials: usize) -> Self {
        Self { set, n, property, trials, options: TrialOptions::default() }
    }

    /// Name of the decision procedure used at this size.
    pub fn backend_name(&self) -> Result<&'static str> {
        match self.property {
            Property::Sat if self.set.arity() <= 2 => Ok("implication-graph"),
            Property::Sat => Ok("dpll"),
            Property::QSat { .. } => match self.qsat_route()? {
                QSatBackend::Exact => Ok("enumeration"),
                _ => Ok("pair-construction"),
            },
        }
    }

    fn qsat_route(&self) -> Result<QSatBackend> {
        let small = self.n <= ENUMERATION_BOUND;
        let two_cnf = self.set.arity() == 2 && self.set.is_clausal();
        match self.options.backend {
            QSatBackend::Auto if small => Ok(QSatBackend::Exact),
            QSatBackend::Auto | QSatBackend::Constructive if two_cnf => Ok(QSatBackend::Constructive),
            QSatBackend::Exact if small => Ok(QSatBackend::Exact),
            _ => Err(Error::Input(format!(
                "no q-overlap decision procedure for this constraint set at n = {}",
                self.n
            ))),
        }
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Input("trials must be at least 1".into()));
        }
        if let Property::QSat { q } = self.property {
            if q == Rational::from_integer(0) || q > Rational::from_integer(1) {
                return Err(Error::Input(format!("q = {q} outside (0, 1]")));
            }
            self.qsat_route()?;
        }
        Ok(())
    }

    fn decide(&self, phi: &Formula, seed: u64) -> Result<Outcome> {
        let yes = |b: bool| if b { Outcome::Yes } else { Outcome::No };
        match self.property {
            Property::Sat if self.set.arity() <= 2 => Ok(yes(scc_analysis(&binary_graph(phi)?).satisfiable)),
            Property::Sat => Ok(yes(solve_one(phi, seed).is_some())),
            Property::QSat { q } => {
                let exact_opts = QOverlapOptions { width: self.options.width, distinct: self.options.distinct };
                match self.qsat_route()? {
                    QSatBackend::Exact => Ok(yes(decide_q_overlap(phi, q, exact_opts)?.satisfiable)),
                    _ => {
                        let geo = TwoSatGeometry::new(phi)?;
                        let mut opts = PairOptions {
                            width: self.options.width,
                            distinct: self.options.distinct,
                            ..Default::default()
                        };
                        let strict = geo.construct_overlap_pair(q, opts)?;
                        match strict.status {
                            PairStatus::Success => return Ok(Outcome::Yes),
                            PairStatus::FailUnsat => return Ok(Outcome::No),
                            _ => {}
                        }
                        opts.relaxed = true;
                        if geo.construct_overlap_pair(q, opts)?.status == PairStatus::Success {
                            return Ok(Outcome::Yes);
                        }
                        if self.n <= ENUMERATION_BOUND {
                            return Ok(yes(decide_q_overlap(phi, q, exact_opts)?.satisfiable));
                        }
                        Ok(Outcome::Undecided)
                    }
                }
            }
        }
    }
}

/// Wilson score interval for `k` successes in `t` trials.
pub fn wilson_interval(k: usize, t: usize, z: f64) -> (f64, f64) {
    if t == 0 {
        return (0.0, 1.0);
    }
    let (k, t) = (k as f64, t as f64);
    let p = k / t;
    let z2 = z * z;
    let denom = 1.0 + z2 / t;
    let centre = (p + z2 / (2.0 * t)) / denom;
    let half = z * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: usize,
    pub density: f64,
    pub trials: usize,
    pub successes: usize,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
    /// Trials counted as failures because no procedure could certify them.
    pub undecided: usize,
}

impl ScanRow {
    pub const CSV_HEADER: &'static str = "n,density,trials,successes,p_hat,ci_lo,ci_hi,seed";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{}",
            self.n, self.density, self.trials, self.successes, self.p_hat, self.ci_lo, self.ci_hi, self.seed
        )
    }
}

/// Frequency of the property over `exp.trials` formulas with `round(density·n)` constraints.
pub fn estimate_probability(exp: &Experiment, density: f64, seed: u64) -> Result<ScanRow> {
    exp.check()?;
    if !(density >= 0.0) || !density.is_finite() {
        return Err(Error::Input(format!("density {density} must be finite and ≥ 0")));
    }
    let outcomes = (0..exp.trials as u64)
        .into_par_iter()
        .map(|t| {
            let trial_seed = derive_seed(seed, t);
            let phi = generate(&GenSpec::at_density(exp.set.clone(), exp.n, density, trial_seed))?;
            exp.decide(&phi, derive_seed(trial_seed, 0))
        })
        .collect::<Result<Vec<_>>>()?;
    let successes = outcomes.iter().filter(|&&o| o == Outcome::Yes).count();
    let undecided = outcomes.iter().filter(|&&o| o == Outcome::Undecided).count();
    let (ci_lo, ci_hi) = wilson_interval(successes, exp.trials, Z95);
    Ok(ScanRow {
        n: exp.n,
        density,
        trials: exp.trials,
        successes,
        p_hat: successes as f64 / exp.trials as f64,
        ci_lo,
        ci_hi,
        seed,
        undecided,
    })
}

/// Seed used for the probe at `density` under master seed `seed`.
pub fn probe_seed(seed: u64, density: f64) -> u64 {
    derive_seed(seed, density.to_bits())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdEstimate {
    pub target: f64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// No probe is significantly above the target.
    pub censored_lo: bool,
    /// No probe is significantly below the target.
    pub censored_hi: bool,
    /// The bracket had zero width.
    pub degenerate: bool,
    pub probes: usize,
}

impl ThresholdEstimate {
    /// Do the two confidence intervals intersect?
    pub fn compatible(&self, other: &ThresholdEstimate) -> bool {
        self.ci_lo <= other.ci_hi && other.ci_lo <= self.ci_hi
    }
}

/// Non-increasing least-squares fit (pool adjacent violators), weighted by trials.
fn antitonic_fit(rows: &[ScanRow]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new(); // (mean, weight, length)
    for r in rows {
        let mut cur = (r.p_hat, r.trials as f64, 1usize);
        while let Some(&(m, w, l)) = blocks.last() {
            if m >= cur.0 {
                break;
            }
            blocks.pop();
            let tw = w + cur.1;
            cur = ((m * w + cur.0 * cur.1) / tw, tw, l + cur.2);
        }
        blocks.push(cur);
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, l)| std::iter::repeat_n(m, l))
        .collect()
}

/// Density where the fitted curve crosses `target`, by linear interpolation.
fn crossing(rows: &[ScanRow], fit: &[f64], target: f64) -> f64 {
    let above = fit.iter().take_while(|&&g| g >= target).count();
    if above == 0 {
        return rows[0].density;
    }
    if above == rows.len() {
        return rows[rows.len() - 1].density;
    }
    let (i, j) = (above - 1, above);
    let (gi, gj) = (fit[i], fit[j]);
    let (di, dj) = (rows[i].density, rows[j].density);
    if gi == target {
        di
    } else {
        di + (gi - target) / (gi - gj) * (dj - di)
    }
}

type Observer<'a> = Box<dyn FnMut(&ScanRow) + Send + 'a>;

/// Runs probes for one experiment and keeps every result, so repeated
/// bisections share data and probes at the same density are not rerun.
pub struct Prober<'a> {
    exp: Experiment,
    seed: u64,
    cache: BTreeMap<u64, ScanRow>,
    observer: Option<Observer<'a>>,
}

impl<'a> Prober<'a> {
    pub fn new(exp: Experiment, seed: u64) -> Result<Self> {
        exp.check()?;
        Ok(Self { exp, seed, cache: BTreeMap::new(), observer: None })
    }

    /// Called on every newly computed probe.
    pub fn with_observer(mut self, f: impl FnMut(&ScanRow) + Send + 'a) -> Self {
        self.observer = Some(Box::new(f));
        self
    }

    pub fn experiment(&self) -> &Experiment {
        &self.exp
    }

    pub fn probe(&mut self, density: f64) -> Result<ScanRow> {
        if let Some(row) = self.cache.get(&density.to_bits()) {
            return Ok(row.clone());
        }
        let row = estimate_probability(&self.exp, density, probe_seed(self.seed, density))?;
        if let Some(f) = self.observer.as_mut() {
            f(&row);
        }
        self.cache.insert(density.to_bits(), row.clone());
        Ok(row)
    }

    /// All probes so far, by increasing density.
    pub fn pool(&self) -> Vec<ScanRow> {
        let mut rows: Vec<ScanRow> = self.cache.values().cloned().collect();
        rows.sort_by(|a, b| a.density.total_cmp(&b.density));
        rows
    }

    /// Bisects `[lo, hi]` for the density where the probability falls to
    /// `target`, stopping once the bracket is narrower than `tol`.
    pub fn find_threshold(&mut self, target: f64, lo: f64, hi: f64, tol: f64) -> Result<ThresholdEstimate> {
        if !(0.0..=1.0).contains(&target) {
            return Err(Error::Input(format!("target probability {target} outside [0, 1]")));
        }
        if !(lo <= hi) || lo < 0.0 || !hi.is_finite() {
            return Err(Error::Bracket(format!("[{lo}, {hi}] is not a density interval")));
        }
        if !(tol > 0.0) {
            return Err(Error::Input(format!("tolerance {tol} must be positive")));
        }
        if lo == hi {
            let row = self.probe(lo)?;
            return Ok(ThresholdEstimate {
                target,
                estimate: lo,
                ci_lo: lo,
                ci_hi: hi,
                censored_lo: row.ci_lo <= target,
                censored_hi: row.ci_hi >= target,
                degenerate: true,
                probes: 1,
            });
        }
        let p_lo = self.probe(lo)?.p_hat;
        let p_hi = self.probe(hi)?.p_hat;
        if !(p_lo >= target && target >= p_hi) {
            return Err(Error::Bracket(format!(
                "probability {p_lo} at {lo} and {p_hi} at {hi} do not bracket {target}"
            )));
        }
        let (mut a, mut b) = (lo, hi);
        let mut probes = 2;
        while b - a > tol {
            let mid = (a + b) / 2.0;
            probes += 1;
            if self.probe(mid)?.p_hat >= target {
                a = mid;
            } else {
                b = mid;
            }
        }
        let mut est = self.estimate_from_pool(target);
        est.probes = probes;
        Ok(est)
    }

    /// Crossing of `target` on the monotone fit of every probe so far.
    pub fn estimate_from_pool(&self, target: f64) -> ThresholdEstimate {
        let rows = self.pool();
        let fit = antitonic_fit(&rows);
        let estimate = crossing(&rows, &fit, target);
        let lower = rows
            .iter()
            .filter(|r| r.ci_lo > target && r.density <= estimate)
            .map(|r| r.density)
            .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
        let upper = rows
            .iter()
            .filter(|r| r.ci_hi < target && r.density >= estimate)
            .map(|r| r.density)
            .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.min(d))));
        ThresholdEstimate {
            target,
            estimate,
            ci_lo: lower.unwrap_or(rows[0].density),
            ci_hi: upper.unwrap_or(rows[rows.len() - 1].density),
            censored_lo: lower.is_none(),
            censored_hi: upper.is_none(),
            degenerate: false,
            probes: rows.len(),
        }
    }

    /// `(c_ε − c_{1−ε}) / c_{1/2}` from the pooled fit, where `c_x` is the
    /// density at which the probability falls to `x`.
    pub fn width_from_pool(&self, epsilon: f64) -> Result<SharpnessWidth> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::Input(format!("epsilon {epsilon} outside (0, 1/2)")));
        }
        let low = self.estimate_from_pool(1.0 - epsilon);
        let mid = self.estimate_from_pool(0.5);
        let high = self.estimate_from_pool(epsilon);
        if mid.estimate <= 0.0 {
            return Err(Error::Bracket("median crossing at density 0".into()));
        }
        Ok(SharpnessWidth {
            epsilon,
            ratio: (high.estimate - low.estimate) / mid.estimate,
            low,
            mid,
            high,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessWidth {
    pub epsilon: f64,
    pub ratio: f64,
    /// Crossing of `1 − ε`.
    pub low: ThresholdEstimate,
    pub mid: ThresholdEstimate,
    /// Crossing of `ε`.
    pub high: ThresholdEstimate,
}

/// Bisection bracket and stopping width shared by the scanning routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

impl Default for Bracket {
    fn default() -> Self {
        Self { lo: 0.0, hi: 3.0, tol: 0.01 }
    }
}

pub fn find_threshold(exp: Experiment, target: f64, bracket: Bracket, seed: u64) -> Result<ThresholdEstimate> {
    Prober::new(exp, seed)?.find_threshold(target, bracket.lo, bracket.hi, bracket.tol)
}

/// Runs the three bisections on one shared pool, then reads all crossings
/// off the pooled fit.
pub fn sharpness_width(prober: &mut Prober<'_>, epsilon: f64, bracket: Bracket) -> Result<SharpnessWidth> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Input(format!("epsilon {epsilon} outside (0, 1/2)")));
    }
    for target in [0.5, 1.0 - epsilon, epsilon] {
        prober.find_threshold(target, bracket.lo, bracket.hi, bracket.tol)?;
    }
    prober.width_from_pool(epsilon)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WPoint {
    #[serde(serialize_with = "serialize_rational")]
    pub q: Rational,
    /// `None` when the crossing is not inside the bracket.
    pub threshold: Option<ThresholdEstimate>,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WCurve {
    pub target: f64,
    pub points: Vec<WPoint>,
    /// Threshold of plain satisfiability on the same formulas.
    pub sat: Option<ThresholdEstimate>,
    /// Largest gap by which a later point's interval lies above an earlier one's.
    pub max_significant_rise: f64,
    /// Largest gap by which a later point's interval lies below an earlier one's.
    pub max_significant_drop: f64,
    pub monotone: bool,
}

impl WCurve {
    pub fn all_pairwise_compatible(&self) -> bool {
        let est: Vec<&ThresholdEstimate> = self.points.iter().filter_map(|p| p.threshold.as_ref()).collect();
        est.len() == self.points.len()
            && est.iter().enumerate().all(|(i, a)| est[i + 1..].iter().all(|b| a.compatible(b)))
    }

    pub fn all_compatible_with_sat(&self) -> bool {
        let Some(sat) = &self.sat else { return false };
        self.points
            .iter()
            .all(|p| p.threshold.as_ref().is_some_and(|t| t.compatible(sat)))
    }
}

/// Threshold of the q-overlap property for every `q` of the grid. Every
/// point uses the same master seed, so all points see the same formulas.
pub fn scan_w_curve(
    base: &Experiment,
    q_grid: &[Rational],
    target: f64,
    bracket: Bracket,
    seed: u64,
    mut observer: impl FnMut(Option<Rational>, &ScanRow) + Send,
) -> Result<WCurve> {
    let mut points = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let exp = Experiment { property: Property::QSat { q }, ..base.clone() };
        let mut prober = Prober::new(exp, seed)?.with_observer(|r| observer(Some(q), r));
        let threshold = match prober.find_threshold(target, bracket.lo, bracket.hi, bracket.tol) {
            Ok(t) => Some(t),
            Err(Error::Bracket(_)) => None,
            Err(e) => return Err(e),
        };
        drop(prober);
        points.push(WPoint { q, censored: threshold.is_none(), threshold });
    }
    let sat = if q_grid.is_empty() {
        None
    } else {
        let exp = Experiment { property: Property::Sat, ..base.clone() };
        let mut prober = Prober::new(exp, seed)?.with_observer(|r| observer(None, r));
        match prober.find_threshold(target, bracket.lo, bracket.hi, bracket.tol) {
            Ok(t) => Some(t),
            Err(Error::Bracket(_)) => None,
            Err(e) => return Err(e),
        }
    };

    let mut rise: f64 = 0.0;
    let mut drop_: f64 = 0.0;
    let est: Vec<&ThresholdEstimate> = points.iter().filter_map(|p| p.threshold.as_ref()).collect();
    for (i, a) in est.iter().enumerate() {
        for b in &est[i + 1..] {
            rise = rise.max(b.ci_lo - a.ci_hi);
            drop_ = drop_.max(a.ci_lo - b.ci_hi);
        }
    }
    Ok(WCurve {
        target,
        points,
        sat,
        max_significant_rise: rise,
        max_significant_drop: drop_,
        monotone: rise == 0.0 || drop_ == 0.0,
    })
}
