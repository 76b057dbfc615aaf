//! Text formats: the line-oriented `gbcsp` format and DIMACS CNF.
//!
//! `gbcsp` records, one per line:
//!
//! ```text
//! c free-form comment
//! p gbcsp <n> <m>
//! r <name> <k> <s> <row_1> ... <row_s>
//! a <name> <v_1> ... <v_k>
//! ```
//!
//! Rows follow the relation encoding (argument 1 is the least significant
//! bit); variables are 1-based. A DIMACS clause of width `k` becomes an
//! application of the width-`k` clause relation of matching sign pattern.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::formula::{Application, Formula};
use crate::relation::{ConstraintRelation, ConstraintSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Gbcsp,
    Dimacs,
}

impl Format {
    /// `.cnf` and `.dimacs` are DIMACS, everything else is gbcsp.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("cnf") | Some("dimacs") => Format::Dimacs,
            _ => Format::Gbcsp,
        }
    }
}

pub fn parse_formula(text: &str, format: Format) -> Result<Formula> {
    match format {
        Format::Gbcsp => parse_gbcsp(text),
        Format::Dimacs => parse_dimacs(text),
    }
}

pub fn emit_formula(phi: &Formula, format: Format) -> Result<String> {
    match format {
        Format::Gbcsp => Ok(emit_gbcsp(phi)),
        Format::Dimacs => emit_dimacs(phi),
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, msg: msg.into() }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| syntax(line, format!("{what} `{tok}` is not a valid number")))
}

struct Header {
    n: usize,
    m: usize,
}

fn parse_relation_line(line: usize, toks: &mut std::str::SplitWhitespace) -> Result<ConstraintRelation> {
    let name = toks.next().ok_or_else(|| syntax(line, "missing relation name"))?;
    let k: usize = parse_num(toks.next(), line, "arity")?;
    let s: usize = parse_num(toks.next(), line, "row count")?;
    let rows = toks
        .map(|t| t.parse::<u32>().map_err(|_| syntax(line, format!("row `{t}` is not a number"))))
        .collect::<Result<Vec<_>>>()?;
    if rows.len() != s {
        return Err(syntax(line, format!("declared {s} rows, found {}", rows.len())));
    }
    ConstraintRelation::new(name, k, rows).map_err(|e| syntax(line, e.to_string()))
}

/// Reads only the relation records of a gbcsp document.
pub fn parse_relations(text: &str) -> Result<ConstraintSet> {
    let mut rels = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let mut toks = raw.split_whitespace();
        if toks.next() == Some("r") {
            rels.push(parse_relation_line(idx + 1, &mut toks)?);
        }
    }
    ConstraintSet::new(rels)
}

fn parse_gbcsp(text: &str) -> Result<Formula> {
    let mut header: Option<Header> = None;
    let mut rels = Vec::new();
    let mut raw_apps: Vec<(usize, String, Vec<u64>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut toks = raw.split_whitespace();
        match toks.next() {
            None | Some("c") => {}
            Some("p") => {
                if header.is_some() {
                    return Err(syntax(line, "duplicate header"));
                }
                if toks.next() != Some("gbcsp") {
                    return Err(syntax(line, "expected `p gbcsp <n> <m>`"));
                }
                let n = parse_num(toks.next(), line, "variable count")?;
                let m = parse_num(toks.next(), line, "constraint count")?;
                if toks.next().is_some() {
                    return Err(syntax(line, "trailing tokens after header"));
                }
                header = Some(Header { n, m });
            }
            Some("r") => rels.push(parse_relation_line(line, &mut toks)?),
            Some("a") => {
                let name = toks.next().ok_or_else(|| syntax(line, "missing relation name"))?;
                let vars = toks
                    .map(|t| t.parse::<u64>().map_err(|_| syntax(line, format!("variable `{t}` is not a number"))))
                    .collect::<Result<Vec<_>>>()?;
                raw_apps.push((line, name.to_string(), vars));
            }
            Some(other) => return Err(syntax(line, format!("unknown record `{other}`"))),
        }
    }

    let set = Arc::new(ConstraintSet::new(rels)?);
    let n = match &header {
        Some(h) => h.n,
        None => raw_apps
            .iter()
            .flat_map(|(_, _, v)| v.iter().copied())
            .max()
            .unwrap_or(1) as usize,
    };
    if n == 0 {
        return Err(syntax(1, "formula needs at least one variable"));
    }
    if let Some(h) = &header {
        if h.m != raw_apps.len() {
            return Err(syntax(0, format!("header declares {} constraints, found {}", h.m, raw_apps.len())));
        }
    }
    let mut apps = Vec::with_capacity(raw_apps.len());
    for (line, name, vars) in raw_apps {
        let relation = set
            .position(&name)
            .ok_or_else(|| syntax(line, format!("undeclared relation `{name}`")))?;
        let k = set.arity();
        if vars.len() != k {
            return Err(syntax(line, format!("relation `{name}` takes {k} variables, got {}", vars.len())));
        }
        apps.push(Application { relation, vars: check_vars(line, n, &vars)? });
    }
    Formula::new(n, set, apps)
}

fn check_vars(line: usize, n: usize, vars: &[u64]) -> Result<Vec<u32>> {
    let mut out = Vec::with_capacity(vars.len());
    for &v in vars {
        if v == 0 || v > n as u64 {
            return Err(Error::VariableRange { line, var: v, n });
        }
        let v0 = (v - 1) as u32;
        if out.contains(&v0) {
            return Err(Error::DuplicateVariable { line, var: v });
        }
        out.push(v0);
    }
    Ok(out)
}

fn parse_dimacs(text: &str) -> Result<Formula> {
    let mut header: Option<Header> = None;
    let mut clauses: Vec<(usize, Vec<i64>)> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut current_line = 0;

    'lines: for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.starts_with('c') || trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            let mut toks = trimmed.split_whitespace().skip(1);
            if header.is_some() {
                return Err(syntax(line, "duplicate header"));
            }
            if toks.next() != Some("cnf") {
                return Err(syntax(line, "expected `p cnf <n> <m>`"));
            }
            let n = parse_num(toks.next(), line, "variable count")?;
            let m = parse_num(toks.next(), line, "clause count")?;
            header = Some(Header { n, m });
            continue;
        }
        let Some(h) = &header else {
            return Err(syntax(line, "clause before `p cnf` header"));
        };
        for tok in trimmed.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| syntax(line, format!("literal `{tok}` is not an integer")))?;
            if current.is_empty() {
                current_line = line;
            }
            if lit == 0 {
                if current.is_empty() {
                    return Err(syntax(line, "empty clause"));
                }
                clauses.push((current_line, std::mem::take(&mut current)));
                if clauses.len() > h.m {
                    break 'lines;
                }
                continue;
            }
            if lit.unsigned_abs() > h.n as u64 {
                return Err(Error::VariableRange { line, var: lit.unsigned_abs(), n: h.n });
            }
            current.push(lit);
        }
    }
    let h = header.ok_or_else(|| syntax(0, "missing `p cnf` header"))?;
    if !current.is_empty() {
        return Err(syntax(current_line, "clause not terminated by 0"));
    }
    if clauses.len() != h.m {
        return Err(syntax(0, format!("header declares {} clauses, found {}", h.m, clauses.len())));
    }
    if h.n == 0 {
        return Err(syntax(0, "formula needs at least one variable"));
    }
    let k = clauses.first().map_or(2, |(_, c)| c.len());
    if k > crate::relation::MAX_ARITY {
        return Err(Error::UnsupportedFormat(format!("clause width {k} exceeds the supported arity")));
    }
    let set = Arc::new(ConstraintSet::ksat(k));
    let mut apps = Vec::with_capacity(clauses.len());
    for (line, clause) in clauses {
        if clause.len() != k {
            return Err(Error::UnsupportedFormat(format!(
                "line {line}: clause width {} differs from {k}; mixed widths are not representable",
                clause.len()
            )));
        }
        let vars: Vec<u64> = clause.iter().map(|l| l.unsigned_abs()).collect();
        let negated = clause
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &l)| acc | ((l < 0) as u32) << i);
        apps.push(Application { relation: negated as usize, vars: check_vars(line, h.n, &vars)? });
    }
    Formula::new(h.n, set, apps)
}

fn emit_gbcsp(phi: &Formula) -> String {
    let mut out = String::new();
    let set = phi.constraint_set();
    writeln!(out, "p gbcsp {} {}", phi.num_vars(), phi.num_constraints()).unwrap();
    for rel in set.relations() {
        write!(out, "r {} {} {}", rel.name(), rel.arity(), rel.num_satisfying()).unwrap();
        for row in rel.rows() {
            write!(out, " {row}").unwrap();
        }
        out.push('\n');
    }
    for app in phi.applications() {
        write!(out, "a {}", phi.relation_of(app).name()).unwrap();
        for v in &app.vars {
            write!(out, " {}", v + 1).unwrap();
        }
        out.push('\n');
    }
    out
}

fn emit_dimacs(phi: &Formula) -> Result<String> {
    let set = phi.constraint_set();
    let masks = set
        .relations()
        .iter()
        .map(|r| {
            r.as_clause().ok_or_else(|| {
                Error::UnsupportedFormat(format!("relation `{}` is not a clause; DIMACS cannot express it", r.name()))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", phi.num_vars(), phi.num_constraints()).unwrap();
    for app in phi.applications() {
        let mask = masks[app.relation];
        for (i, v) in app.vars.iter().enumerate() {
            let sign = if mask >> i & 1 == 1 { "-" } else { "" };
            write!(out, "{sign}{} ", v + 1).unwrap();
        }
        out.push_str("0\n");
    }
    Ok(out)
}
