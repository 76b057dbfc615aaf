//! Formulas, assignments and the overlap between assignments.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::relation::{ConstraintRelation, ConstraintSet};

/// Exact rational used for overlaps and target overlaps.
pub type Rational = Ratio<u64>;

/// One relation applied to an ordered tuple of distinct variables.
///
/// Variables are 0-based here; every text format uses 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Application {
    pub relation: usize,
    pub vars: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    num_vars: usize,
    set: Arc<ConstraintSet>,
    apps: Vec<Application>,
}

impl Formula {
    pub fn new(num_vars: usize, set: Arc<ConstraintSet>, apps: Vec<Application>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::Input("formula needs at least one variable".into()));
        }
        if num_vars > u32::MAX as usize {
            return Err(Error::Input(format!("{num_vars} variables is too many")));
        }
        for app in &apps {
            check_application(num_vars, &set, app)?;
        }
        Ok(Self { num_vars, set, apps })
    }

    /// Formula without constraints.
    pub fn empty(num_vars: usize, set: Arc<ConstraintSet>) -> Result<Self> {
        Self::new(num_vars, set, Vec::new())
    }

    pub fn push(&mut self, app: Application) -> Result<()> {
        check_application(self.num_vars, &self.set, &app)?;
        self.apps.push(app);
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraint_set(&self) -> &Arc<ConstraintSet> {
        &self.set
    }

    pub fn applications(&self) -> &[Application] {
        &self.apps
    }

    pub fn num_constraints(&self) -> usize {
        self.apps.len()
    }

    pub fn relation_of(&self, app: &Application) -> &ConstraintRelation {
        &self.set.relations()[app.relation]
    }

    /// Constraints per variable.
    pub fn density(&self) -> f64 {
        self.apps.len() as f64 / self.num_vars as f64
    }

    pub fn eval(&self, a: &Assignment) -> Result<bool> {
        if a.len() != self.num_vars {
            return Err(Error::Length { expected: self.num_vars, found: a.len() });
        }
        Ok(self.apps.iter().all(|app| self.app_holds(app, |v| a.get(v))))
    }

    /// Evaluation against an assignment packed into an integer (variable 1 =
    /// least significant bit). Only meaningful for `num_vars ≤ 64`.
    pub fn eval_bits(&self, bits: u64) -> bool {
        self.apps
            .iter()
            .all(|app| self.app_holds(app, |v| bits >> v & 1 == 1))
    }

    #[inline]
    fn app_holds(&self, app: &Application, value: impl Fn(usize) -> bool) -> bool {
        let row = app
            .vars
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &v)| acc | (value(v as usize) as usize) << i);
        self.relation_of(app).accepts(row)
    }

    /// Equality up to relation naming and set membership: both formulas
    /// apply the same truth tables to the same tuples in the same order.
    pub fn same_constraints(&self, other: &Formula) -> bool {
        self.num_vars == other.num_vars
            && self.apps.len() == other.apps.len()
            && self.apps.iter().zip(&other.apps).all(|(a, b)| {
                a.vars == b.vars && {
                    let (ra, rb) = (self.relation_of(a), other.relation_of(b));
                    ra.arity() == rb.arity() && ra.rows().eq(rb.rows())
                }
            })
    }

    /// Every relation is a width-2 clause.
    pub fn is_two_cnf(&self) -> bool {
        self.set.arity() == 2 && self.set.is_clausal()
    }
}

fn check_application(n: usize, set: &ConstraintSet, app: &Application) -> Result<()> {
    let rel = set
        .get(app.relation)
        .ok_or_else(|| Error::Input(format!("relation index {} not in set", app.relation)))?;
    if app.vars.len() != rel.arity() {
        return Err(Error::Arity {
            relation: rel.name().to_string(),
            expected: rel.arity(),
            found: app.vars.len(),
        });
    }
    for (i, &v) in app.vars.iter().enumerate() {
        if v as usize >= n {
            return Err(Error::VariableRange { line: 0, var: v as u64 + 1, n });
        }
        if app.vars[..i].contains(&v) {
            return Err(Error::DuplicateVariable { line: 0, var: v as u64 + 1 });
        }
    }
    Ok(())
}

/// A full Boolean assignment; index 0 is variable 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Self(values)
    }

    pub fn all(n: usize, value: bool) -> Self {
        Self(vec![value; n])
    }

    pub fn from_bits(bits: u64, n: usize) -> Self {
        assert!(n <= 64);
        Self((0..n).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn to_bits(&self) -> Option<u64> {
        (self.0.len() <= 64).then(|| {
            self.0
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &b)| acc | (b as u64) << i)
        })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, var: usize) -> bool {
        self.0[var]
    }

    pub fn set(&mut self, var: usize, value: bool) {
        self.0[var] = value;
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|b| !b).collect())
    }

    pub fn hamming(&self, other: &Assignment) -> Result<usize> {
        check_len(self, other)?;
        Ok(self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count())
    }

    /// Number of variables on which the two assignments agree.
    pub fn agreement(&self, other: &Assignment) -> Result<usize> {
        Ok(self.len() - self.hamming(other)?)
    }
}

fn check_len(a: &Assignment, b: &Assignment) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Length { expected: a.len(), found: b.len() });
    }
    if a.is_empty() {
        return Err(Error::Input("empty assignment".into()));
    }
    Ok(())
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|&b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Input(format!("assignment character `{c}` is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Fraction of variables on which `a` and `b` agree.
pub fn overlap(a: &Assignment, b: &Assignment) -> Result<Rational> {
    let agree = a.agreement(b)?;
    Ok(Rational::new(agree as u64, a.len() as u64))
}

/// Half-width of the overlap band around the target `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandWidth {
    /// `1/√n`, i.e. `√n` agreements either side of `q·n`.
    #[default]
    InvSqrt,
    /// `ceil(log2(n)^2) / n`.
    Log2Squared,
    /// A fixed number of agreements either side of `q·n`.
    Agreements(u64),
}

impl BandWidth {
    /// Exact test of a deviation of `dev_num / dev_den` agreements from `q·n`.
    fn admits(self, n: u64, dev_num: u128, dev_den: u128) -> bool {
        let bound = match self {
            BandWidth::InvSqrt => {
                // dev² ≤ n
                return match (dev_num.checked_mul(dev_num), dev_den.checked_mul(dev_den)) {
                    (Some(l), Some(d2)) => match d2.checked_mul(n as u128) {
                        Some(r) => l <= r,
                        None => true,
                    },
                    _ => (dev_num as f64 / dev_den as f64) <= (n as f64).sqrt(),
                };
            }
            BandWidth::Log2Squared => log2_squared_ceil(n as usize) as u128,
            BandWidth::Agreements(b) => b as u128,
        };
        match bound.checked_mul(dev_den) {
            Some(r) => dev_num <= r,
            None => true,
        }
    }
}

/// `ceil(log2(n)^2)`, at least 1.
pub fn log2_squared_ceil(n: usize) -> usize {
    let l = (n.max(1) as f64).log2();
    ((l * l).ceil() as usize).max(1)
}

/// Is the normalized overlap `v` within the band around `q` for `n` variables?
pub fn in_overlap_band(v: Rational, q: Rational, n: usize, width: BandWidth) -> bool {
    assert!(n >= 1);
    // |v - q|·n in exact arithmetic: |v.num·q.den − q.num·v.den|·n / (v.den·q.den)
    let (vn, vd) = (*v.numer() as u128, *v.denom() as u128);
    let (qn, qd) = (*q.numer() as u128, *q.denom() as u128);
    let diff = (vn * qd).abs_diff(qn * vd);
    let den = vd * qd;
    match diff.checked_mul(n as u128) {
        Some(num) => width.admits(n as u64, num, den),
        None => {
            let dev = diff as f64 / den as f64 * n as f64;
            match width {
                BandWidth::InvSqrt => dev <= (n as f64).sqrt(),
                BandWidth::Log2Squared => dev <= log2_squared_ceil(n) as f64,
                BandWidth::Agreements(b) => dev <= b as f64,
            }
        }
    }
}

/// Band test in agreement counts.
pub fn agreement_in_band(agree: usize, n: usize, q: Rational, width: BandWidth) -> bool {
    in_overlap_band(Rational::new(agree as u64, n as u64), q, n, width)
}

/// Serializes a rational as `"num/den"`.
pub fn serialize_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

/// Parses `"3/10"`, `"0.3"` or `"1"` into an exact rational in `[0, 1]`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Input(format!("`{s}` is not a rational in [0, 1]"));
    let s = s.trim();
    let r = if let Some((num, den)) = s.split_once('/') {
        let num: u64 = num.trim().parse().map_err(|_| bad())?;
        let den: u64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        Rational::new(num, den)
    } else if let Some((int, frac)) = s.split_once('.') {
        if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10u64.pow(frac.len() as u32);
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        Rational::new(int * den + frac, den)
    } else {
        Rational::from_integer(s.parse().map_err(|_| bad())?)
    };
    if r > Rational::from_integer(1) {
        return Err(bad());
    }
    Ok(r)
}
