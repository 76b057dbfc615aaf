use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use satgeom::classify::classify;
use satgeom::formula::{log2_squared_ceil, parse_rational};
use satgeom::io::{emit_formula, parse_formula, parse_relations, Format};
use satgeom::lab::{
    estimate_probability, scan_w_curve, sharpness_width, Bracket, Experiment, Prober, Property, QSatBackend, ScanRow,
};
use satgeom::random::{derive_seed, generate, GenSpec, Model};
use satgeom::solutions::{clusters, decide_q_overlap_in, default_adjacency, enumerate_solutions, overlap_histogram, QOverlapOptions};
use satgeom::solve::solve_one;
use satgeom::twosat::{FlipTarget, PairOptions, PairStatus, TwoSatGeometry};
use satgeom::{Assignment, BandWidth, ConstraintSet, Formula, Rational};

#[derive(Parser)]
#[command(name = "satgeom", version, about = "Solution-space geometry of random Boolean CSPs")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true, env = "SATGEOM_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
    Gbcsp,
    Dimacs,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random formula.
    Gen(Instance),
    /// Threshold class of a constraint set.
    Classify(SetArgs),
    /// Find one solution.
    Solve(Instance),
    /// List every solution (small n).
    Enumerate(Instance),
    /// Solution clusters at Hamming distance f.
    Clusters {
        #[command(flatten)]
        inst: Instance,
        /// Adjacency threshold (default ceil(log2(n)^2)).
        #[arg(long)]
        f: Option<usize>,
    },
    /// Histogram of pairwise agreement counts.
    Overlaps {
        #[command(flatten)]
        inst: Instance,
        /// Split pairs by clusters at this threshold (default ceil(log2(n)^2)).
        #[arg(long)]
        f: Option<usize>,
    },
    /// Exact q-overlap decision by enumeration.
    Qsat {
        #[command(flatten)]
        inst: Instance,
        #[arg(long, value_parser = rational)]
        q: Rational,
        #[command(flatten)]
        band: BandArgs,
    },
    /// Implication-graph tools for 2-CNF formulas.
    #[command(subcommand)]
    Twosat(TwoSatCommand),
    /// Monte Carlo scans over density.
    #[command(subcommand)]
    Scan(ScanCommand),
}

#[derive(Subcommand)]
enum TwoSatCommand {
    /// Components, cycle report and bad literals.
    Diag(Instance),
    /// Monotone path of solutions from A to B.
    Path {
        #[command(flatten)]
        inst: Instance,
        /// Start solution as a 0/1 string, variable 1 first.
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Maximum number of steps (default n + 1).
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Construct two solutions with overlap near q.
    Pair {
        #[command(flatten)]
        inst: Instance,
        #[arg(long, value_parser = rational)]
        q: Rational,
        #[command(flatten)]
        band: BandArgs,
        /// Flip round(q·n) variables instead of round((1−q)·n).
        #[arg(long)]
        false_count: bool,
        /// Continue past non-simple cycle components.
        #[arg(long)]
        relaxed: bool,
    },
}

#[derive(Subcommand)]
enum ScanCommand {
    /// Probability of satisfiability.
    Sat(ScanArgs),
    /// Probability of the q-overlap property.
    Qsat {
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long, value_parser = rational)]
        q: Rational,
        #[command(flatten)]
        trial: TrialArgs,
    },
    /// q-overlap thresholds over a grid of q.
    Wcurve {
        #[command(flatten)]
        scan: ScanArgs,
        /// Comma separated, e.g. 0.1,0.3,1/2.
        #[arg(long, value_delimiter = ',', value_parser = rational, default_value = "0.1,0.3,0.5,0.7,0.9")]
        q_grid: Vec<Rational>,
        #[command(flatten)]
        trial: TrialArgs,
    },
    /// Density window between the 1−ε and ε crossings of satisfiability.
    Width {
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
}

#[derive(Args)]
struct SetArgs {
    /// Built-in set: 2sat, ksat:K, xor2, 1in:K.
    #[arg(long, conflicts_with = "relations")]
    set: Option<String>,
    /// gbcsp file whose relation records form the set.
    #[arg(long)]
    relations: Option<PathBuf>,
}

impl SetArgs {
    fn load(&self) -> anyhow::Result<Arc<ConstraintSet>> {
        let set = match (&self.set, &self.relations) {
            (_, Some(path)) => parse_relations(&read(path)?)?,
            (Some(name), None) => ConstraintSet::builtin(name)?,
            (None, None) => ConstraintSet::ksat(2),
        };
        Ok(Arc::new(set))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Counting,
    Constant,
    Multiset,
}

/// A formula read from a file or generated from the master seed.
#[derive(Args)]
struct Instance {
    /// Read the formula from this file (.cnf/.dimacs are DIMACS, otherwise gbcsp).
    #[arg(long, conflicts_with_all = ["set", "relations", "n", "c", "p", "m"])]
    input: Option<PathBuf>,
    #[command(flatten)]
    set: SetArgs,
    #[arg(long)]
    n: Option<usize>,
    /// Density: constraints per variable.
    #[arg(long, conflicts_with_all = ["p", "m"])]
    c: Option<f64>,
    /// Per-tuple probability (constant-probability model).
    #[arg(long, conflicts_with = "m")]
    p: Option<f64>,
    /// Exact constraint count.
    #[arg(long)]
    m: Option<u64>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
}

impl Instance {
    fn load(&self, seed: u64) -> anyhow::Result<Formula> {
        if let Some(path) = &self.input {
            return Ok(parse_formula(&read(path)?, Format::from_path(path))?);
        }
        let set = self.set.load()?;
        let n = self.n.ok_or_else(|| usage("--n or --input is required"))?;
        let model = match (self.model, self.p, self.m, self.c) {
            (Some(ModelArg::Constant) | None, Some(p), _, _) => Model::ConstantProbability { p },
            (Some(ModelArg::Constant), None, _, _) => return Err(usage("the constant model needs --p")),
            (Some(ModelArg::Multiset), _, Some(m), _) => Model::Multiset { m },
            (Some(ModelArg::Counting) | None, _, Some(m), _) => Model::Counting { m },
            (model, None, None, Some(c)) => {
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(usage(format!("density {c} must be non-negative")));
                }
                let m = (c * n as f64).round() as u64;
                match model {
                    Some(ModelArg::Multiset) => Model::Multiset { m },
                    _ => Model::Counting { m },
                }
            }
            (_, Some(_), _, _) => return Err(usage("--p is only valid with the constant model")),
            _ => return Err(usage("one of --c, --p or --m is required")),
        };
        Ok(generate(&GenSpec { model, n, set, seed })?)
    }
}

#[derive(Args)]
struct BandArgs {
    /// Half-width of the overlap band in agreements (default sqrt(n)).
    #[arg(long, conflicts_with = "log_band")]
    band: Option<u64>,
    /// Use ceil(log2(n)^2) agreements as the half-width.
    #[arg(long)]
    log_band: bool,
    /// Require the two solutions to differ.
    #[arg(long)]
    distinct: bool,
}

impl BandArgs {
    fn width(&self) -> BandWidth {
        match (self.band, self.log_band) {
            (Some(b), _) => BandWidth::Agreements(b),
            (None, true) => BandWidth::Log2Squared,
            (None, false) => BandWidth::InvSqrt,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Auto,
    Exact,
    Constructive,
}

#[derive(Args)]
struct TrialArgs {
    #[command(flatten)]
    band: BandArgs,
    #[arg(long, value_enum, default_value = "auto")]
    backend: BackendArg,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    set: SetArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    /// Fixed density grid `lo:hi:step`; without it the threshold is bisected.
    #[arg(long)]
    grid: Option<String>,
    /// Probability level whose crossing is located.
    #[arg(long, default_value_t = 0.5)]
    target: f64,
    #[arg(long, default_value_t = 0.0)]
    lo: f64,
    #[arg(long, default_value_t = 3.0)]
    hi: f64,
    #[arg(long, default_value_t = 0.01)]
    tol: f64,
}

impl ScanArgs {
    fn bracket(&self) -> Bracket {
        Bracket { lo: self.lo, hi: self.hi, tol: self.tol }
    }

    fn grid(&self) -> anyhow::Result<Option<Vec<f64>>> {
        let Some(spec) = &self.grid else { return Ok(None) };
        let parts: Vec<f64> = spec
            .split(':')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| usage(format!("grid `{spec}` is not lo:hi:step")))?;
        let [lo, hi, step] = parts[..] else {
            return Err(usage(format!("grid `{spec}` is not lo:hi:step")));
        };
        if !(step > 0.0 && lo >= 0.0 && hi >= lo) {
            return Err(usage(format!("grid `{spec}` needs 0 ≤ lo ≤ hi and step > 0")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok(Some((0..=count).map(|i| lo + i as f64 * step).collect()))
    }
}

/// An error caused by bad flags or flag values (exit status 2).
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl std::fmt::Display) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.to_string()))
}

/// A well-formed run whose answer is a failure (exit status 1).
#[derive(Debug)]
struct DomainFailure;

impl std::fmt::Display for DomainFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("domain failure")
    }
}

impl std::error::Error for DomainFailure {}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn read(path: &PathBuf) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn assignment(s: &str, n: usize) -> anyhow::Result<Assignment> {
    let a: Assignment = s.parse()?;
    if a.len() != n {
        return Err(usage(format!("assignment has {} values, formula has {n} variables", a.len())));
    }
    Ok(a)
}

fn set_names(set: &ConstraintSet) -> Vec<&str> {
    set.relations().iter().map(|r| r.name()).collect()
}

fn meta(cli: &Cli, command: &str, phi: Option<&Formula>) -> Value {
    let mut m = json!({ "command": command, "seed": cli.seed, "version": env!("CARGO_PKG_VERSION") });
    if let Some(phi) = phi {
        m["n"] = json!(phi.num_vars());
        m["constraints"] = json!(phi.num_constraints());
        m["set"] = json!(set_names(phi.constraint_set()));
    }
    m
}

struct Out;

impl Out {
    fn json(&mut self, meta: Value, body: impl Serialize) -> anyhow::Result<()> {
        let mut v = serde_json::to_value(body)?;
        match &mut v {
            Value::Object(map) => {
                map.insert("metadata".into(), meta);
            }
            _ => v = json!({ "metadata": meta, "result": v }),
        }
        writeln!(io::stdout(), "{}", serde_json::to_string_pretty(&v)?)?;
        Ok(())
    }

    fn line(&mut self, s: &str) -> anyhow::Result<()> {
        let mut w = io::stdout().lock();
        writeln!(w, "{s}")?;
        w.flush()?;
        Ok(())
    }
}

fn pick(cli: &Cli, default: OutFormat, allowed: &[OutFormat]) -> anyhow::Result<OutFormat> {
    let f = cli.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(usage("this subcommand does not support the requested --format"))
    }
}

fn run(cli: &Cli, out: &mut Out) -> anyhow::Result<()> {
    use OutFormat::*;
    let seed = cli.seed;
    match &cli.command {
        Command::Gen(inst) => {
            let phi = inst.load(seed)?;
            let format = match pick(cli, Gbcsp, &[Gbcsp, Dimacs])? {
                Dimacs => Format::Dimacs,
                _ => Format::Gbcsp,
            };
            write!(io::stdout(), "{}", emit_formula(&phi, format)?)?;
        }
        Command::Classify(set) => {
            pick(cli, Json, &[Json])?;
            let set = set.load()?;
            let class = classify(&set);
            out.json(json!({ "command": "classify", "set": set_names(&set) }), class)?;
        }
        Command::Solve(inst) => {
            let fmt = pick(cli, Json, &[Json, Csv])?;
            let phi = inst.load(seed)?;
            let sol = solve_one(&phi, derive_seed(seed, 1));
            match fmt {
                Csv => out.line(&sol.as_ref().map_or("UNSAT".into(), |a| a.to_string()))?,
                _ => out.json(meta(cli, "solve", Some(&phi)), json!({ "satisfiable": sol.is_some(), "solution": sol }))?,
            }
            if sol.is_none() {
                return Err(anyhow::Error::new(DomainFailure));
            }
        }
        Command::Enumerate(inst) => {
            let fmt = pick(cli, Json, &[Json, Csv])?;
            let phi = inst.load(seed)?;
            let sols = enumerate_solutions(&phi)?;
            let list: Vec<String> = (0..sols.len()).map(|i| sols.assignment(i).to_string()).collect();
            match fmt {
                Csv => {
                    out.line("solution")?;
                    for s in &list {
                        out.line(s)?;
                    }
                }
                _ => out.json(meta(cli, "enumerate", Some(&phi)), json!({ "count": list.len(), "solutions": list }))?,
            }
        }
        Command::Clusters { inst, f } => {
            let fmt = pick(cli, Json, &[Json, Csv])?;
            let phi = inst.load(seed)?;
            let sols = enumerate_solutions(&phi)?;
            let report = clusters(&sols, f.unwrap_or_else(|| default_adjacency(phi.num_vars())))?;
            match fmt {
                Csv => {
                    out.line("solution,cluster")?;
                    for (i, c) in report.cluster_of.iter().enumerate() {
                        out.line(&format!("{},{c}", sols.assignment(i)))?;
                    }
                }
                _ => out.json(meta(cli, "clusters", Some(&phi)), &report)?,
            }
        }
        Command::Overlaps { inst, f } => {
            let fmt = pick(cli, Csv, &[Json, Csv])?;
            let phi = inst.load(seed)?;
            let sols = enumerate_solutions(&phi)?;
            let report = clusters(&sols, f.unwrap_or_else(|| default_adjacency(phi.num_vars())))?;
            let hist = overlap_histogram(&sols, Some(&report))?;
            match fmt {
                Csv => {
                    out.line("agreement_count,pairs,within_cluster_pairs,cross_cluster_pairs")?;
                    let within = hist.within_cluster.as_deref().unwrap_or(&[]);
                    let cross = hist.cross_cluster.as_deref().unwrap_or(&[]);
                    for (k, p) in hist.pairs.iter().enumerate() {
                        let w = within.get(k).copied().unwrap_or(0);
                        let x = cross.get(k).copied().unwrap_or(0);
                        out.line(&format!("{k},{p},{w},{x}"))?;
                    }
                }
                _ => out.json(meta(cli, "overlaps", Some(&phi)), &hist)?,
            }
        }
        Command::Qsat { inst, q, band } => {
            pick(cli, Json, &[Json])?;
            let phi = inst.load(seed)?;
            let sols = enumerate_solutions(&phi)?;
            let opts = QOverlapOptions { width: band.width(), distinct: band.distinct };
            let d = decide_q_overlap_in(&sols, *q, opts)?;
            let mut m = meta(cli, "qsat", Some(&phi));
            m["q"] = json!(q.to_string());
            out.json(m, &d)?;
        }
        Command::Twosat(cmd) => {
            pick(cli, Json, &[Json])?;
            twosat(cli, cmd, out)?;
        }
        Command::Scan(cmd) => scan(cli, cmd, out)?,
    }
    Ok(())
}

fn twosat(cli: &Cli, cmd: &TwoSatCommand, out: &mut Out) -> anyhow::Result<()> {
    let seed = cli.seed;
    match cmd {
        TwoSatCommand::Diag(inst) => {
            let phi = inst.load(seed)?;
            let geo = TwoSatGeometry::new(&phi)?;
            let scc = geo.scc();
            let bad = geo.bad_literals();
            let lits: Vec<i64> = bad
                .literals()
                .map(|l| {
                    let v = (l / 2) as i64 + 1;
                    if l % 2 == 1 {
                        -v
                    } else {
                        v
                    }
                })
                .collect();
            let body = json!({
                "satisfiable": scc.satisfiable,
                "components": scc.num_components(),
                "canonical_solution": scc.canonical_solution(),
                "cycles": geo.cycle_report(),
                "bad_literals": lits,
                "bad_literal_fraction": bad.fraction(),
                "path_step_bound": log2_squared_ceil(phi.num_vars()),
            });
            out.json(meta(cli, "twosat diag", Some(&phi)), body)?;
        }
        TwoSatCommand::Path { inst, a, b, budget } => {
            let phi = inst.load(seed)?;
            let n = phi.num_vars();
            let (a, b) = (assignment(a, n)?, assignment(b, n)?);
            for (name, x) in [("A", &a), ("B", &b)] {
                if !phi.eval(x)? {
                    return Err(usage(format!("{name} does not satisfy the formula")));
                }
            }
            let geo = TwoSatGeometry::new(&phi)?;
            let report = geo.path_between(&a, &b, budget.unwrap_or(n + 1))?;
            let body = json!({
                "steps": report.steps(),
                "max_flips": report.max_flips,
                "path": report.path,
                "all_satisfying": report.path.iter().all(|x| phi.eval(x).unwrap_or(false)),
            });
            out.json(meta(cli, "twosat path", Some(&phi)), body)?;
        }
        TwoSatCommand::Pair { inst, q, band, false_count, relaxed } => {
            let phi = inst.load(seed)?;
            let geo = TwoSatGeometry::new(&phi)?;
            let opts = PairOptions {
                width: band.width(),
                flip_target: if *false_count { FlipTarget::FalseCount } else { FlipTarget::Overlap },
                distinct: band.distinct,
                relaxed: *relaxed,
            };
            let r = geo.construct_overlap_pair(*q, opts)?;
            let certified = match (&r.a, &r.b) {
                (Some(a), Some(b)) => Some(json!({ "a_satisfies": phi.eval(a)?, "b_satisfies": phi.eval(b)? })),
                _ => None,
            };
            let mut v = serde_json::to_value(&r)?;
            v["certificates"] = json!(certified);
            let mut m = meta(cli, "twosat pair", Some(&phi));
            m["q"] = json!(q.to_string());
            out.json(m, v)?;
            if r.status != PairStatus::Success {
                return Err(anyhow::Error::new(DomainFailure));
            }
        }
    }
    Ok(())
}

fn scan(cli: &Cli, cmd: &ScanCommand, out: &mut Out) -> anyhow::Result<()> {
    let fmt = pick(cli, OutFormat::Csv, &[OutFormat::Json, OutFormat::Csv])?;
    let csv = fmt == OutFormat::Csv;
    let seed = cli.seed;
    let (args, property, trial) = match cmd {
        ScanCommand::Sat(a) | ScanCommand::Width { scan: a, .. } => (a, Property::Sat, None),
        ScanCommand::Qsat { scan, q, trial } => (scan, Property::QSat { q: *q }, Some(trial)),
        ScanCommand::Wcurve { scan, trial, .. } => (scan, Property::Sat, Some(trial)),
    };
    let mut exp = Experiment::new(args.set.load()?, args.n, property, args.trials);
    if let Some(t) = trial {
        exp.options.width = t.band.width();
        exp.options.distinct = t.band.distinct;
        exp.options.backend = match t.backend {
            BackendArg::Auto => QSatBackend::Auto,
            BackendArg::Exact => QSatBackend::Exact,
            BackendArg::Constructive => QSatBackend::Constructive,
        };
    }
    let mut m = json!({
        "command": "scan",
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": &exp,
        "bracket": args.bracket(),
        "estimates": "finite-n",
    });
    // validates the experiment before any output
    Prober::new(exp.clone(), seed)?;

    let emit = |prefix: Option<String>, row: &ScanRow| {
        if csv {
            let mut w = io::stdout().lock();
            let _ = match prefix {
                Some(p) => writeln!(w, "{p},{}", row.csv()),
                None => writeln!(w, "{}", row.csv()),
            };
            let _ = w.flush();
        }
    };

    match cmd {
        ScanCommand::Wcurve { q_grid, .. } => {
            if csv {
                out.line(&format!("q,{}", ScanRow::CSV_HEADER))?;
            }
            m["backend"] = json!(Experiment { property: Property::QSat { q: Rational::new(1, 2) }, ..exp.clone() }
                .backend_name()
                ?);
            let curve = scan_w_curve(&exp, q_grid, args.target, args.bracket(), seed, |q, r| {
                emit(Some(q.map_or("sat".into(), |q| q.to_string())), r)
            })
            ?;
            if !csv {
                out.json(m, &curve)?;
            }
        }
        ScanCommand::Width { epsilon, .. } => {
            if csv {
                out.line(ScanRow::CSV_HEADER)?;
            }
            let mut prober = Prober::new(exp.clone(), seed)?.with_observer(|r| emit(None, r));
            let width = sharpness_width(&mut prober, *epsilon, args.bracket())?;
            let pool = prober.pool();
            drop(prober);
            if !csv {
                out.json(m, json!({ "width": width, "rows": pool }))?;
            }
        }
        _ => {
            m["backend"] = json!(exp.backend_name()?);
            if csv {
                out.line(ScanRow::CSV_HEADER)?;
            }
            match args.grid()? {
                Some(grid) => {
                    let mut rows = Vec::with_capacity(grid.len());
                    for c in grid {
                        let row = estimate_probability(&exp, c, satgeom::lab::probe_seed(seed, c))?;
                        emit(None, &row);
                        rows.push(row);
                    }
                    if !csv {
                        out.json(m, json!({ "rows": rows }))?;
                    }
                }
                None => {
                    let mut prober = Prober::new(exp.clone(), seed)?.with_observer(|r| emit(None, r));
                    let t = prober.find_threshold(args.target, args.lo, args.hi, args.tol)?;
                    let pool = prober.pool();
                    drop(prober);
                    if !csv {
                        out.json(m, json!({ "threshold": t, "rows": pool }))?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(k) = cli.workers {
        if k == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut out = Out;
    match run(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<DomainFailure>() => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage_error = e.is::<Usage>()
                || matches!(
                    e.downcast_ref::<satgeom::Error>(),
                    Some(satgeom::Error::Input(_) | satgeom::Error::Bracket(_) | satgeom::Error::UnsupportedFormat(_))
                );
            ExitCode::from(if usage_error { 2 } else { 1 })
        }
    }
}

