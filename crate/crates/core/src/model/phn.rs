//! Line-oriented text format for networks and evidence.
//!
//! ```text
//! # comment
//! var 1 2
//! var 2 2
//! parents 2 1
//! cpt 1 0.4 0.6
//! cpt 2 0.8 0.2 0.3 0.7
//! ```
//!
//! Ids and values are one-based. CPT entries follow the canonical layout of
//! [`crate::model::Cpt`]. Evidence files hold `evidence <id> <value>` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::cpt::Cpt;
use super::net::{BayesNet, Evidence};
use super::validate::{validate_with, ValidationOptions, DEFAULT_MAX_PARENTS};
use crate::error::{Error, Result};
use crate::scalar::Probability;

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    pub max_parents: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            max_parents: DEFAULT_MAX_PARENTS,
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
}

fn parse_id(tok: &str, line: usize) -> Result<usize> {
    match parse_usize(tok, line, "id")? {
        0 => Err(parse_err(line, "ids start at 1")),
        id => Ok(id - 1),
    }
}

fn meaningful_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

pub fn parse_network<T: Probability>(text: &str) -> Result<BayesNet<T>> {
    parse_network_with(text, &LoadOptions::default())
}

/// Parses, validates and renormalizes a network. Rows off by more than the
/// normalization tolerance are rejected.
pub fn parse_network_with<T: Probability>(text: &str, opts: &LoadOptions) -> Result<BayesNet<T>> {
    let mut ranges: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut parents: BTreeMap<usize, (usize, Vec<usize>)> = BTreeMap::new();
    let mut tables: BTreeMap<usize, (usize, Vec<f64>)> = BTreeMap::new();
    for (line, toks) in meaningful_lines(text) {
        match toks[0] {
            "var" => {
                if toks.len() != 3 {
                    return Err(parse_err(line, "expected 'var <id> <range>'"));
                }
                let id = parse_id(toks[1], line)?;
                let r = parse_usize(toks[2], line, "range")?;
                if r == 0 {
                    return Err(parse_err(line, "range must be at least 1"));
                }
                if ranges.insert(id, (r, line)).is_some() {
                    return Err(parse_err(
                        line,
                        format!("variable {} declared twice", id + 1),
                    ));
                }
            }
            "parents" => {
                if toks.len() < 2 {
                    return Err(parse_err(line, "expected 'parents <id> <p1> ...'"));
                }
                let id = parse_id(toks[1], line)?;
                let ps = toks[2..]
                    .iter()
                    .map(|t| parse_id(t, line))
                    .collect::<Result<Vec<_>>>()?;
                if parents.insert(id, (line, ps)).is_some() {
                    return Err(parse_err(
                        line,
                        format!("parents of {} given twice", id + 1),
                    ));
                }
            }
            "cpt" => {
                if toks.len() < 2 {
                    return Err(parse_err(line, "expected 'cpt <id> <e1> ...'"));
                }
                let id = parse_id(toks[1], line)?;
                let es = toks[2..]
                    .iter()
                    .map(|t| {
                        t.parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| parse_err(line, format!("invalid probability '{t}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if tables.insert(id, (line, es)).is_some() {
                    return Err(parse_err(line, format!("cpt of {} given twice", id + 1)));
                }
            }
            other => return Err(parse_err(line, format!("unknown directive '{other}'"))),
        }
    }

    let n = ranges.len();
    if n == 0 {
        return Err(parse_err(0, "no variables declared"));
    }
    if let Some((&id, &(_, line))) = ranges.iter().find(|(&id, _)| id >= n) {
        return Err(parse_err(
            line,
            format!(
                "variable {} exceeds declared count {n}; ids must be 1..n",
                id + 1
            ),
        ));
    }
    let range_vec: Vec<usize> = ranges.values().map(|&(r, _)| r).collect();
    for (&id, (line, ps)) in &parents {
        if id >= n {
            return Err(parse_err(*line, format!("unknown variable {}", id + 1)));
        }
        if let Some(p) = ps.iter().find(|&&p| p >= n) {
            return Err(parse_err(*line, format!("unknown parent {}", p + 1)));
        }
    }
    let mut cpts = Vec::with_capacity(n);
    for (v, &r) in range_vec.iter().enumerate() {
        let pa = parents.remove(&v).map(|(_, ps)| ps).unwrap_or_default();
        let (line, es) = tables
            .remove(&v)
            .ok_or_else(|| parse_err(0, format!("missing cpt for variable {}", v + 1)))?;
        let pr: Vec<usize> = pa.iter().map(|&p| range_vec[p]).collect();
        let expected = r * pr.iter().product::<usize>();
        if es.len() != expected {
            return Err(parse_err(
                line,
                format!(
                    "cpt for variable {} has {} entries, expected {}",
                    v + 1,
                    es.len(),
                    expected
                ),
            ));
        }
        let entries = es.into_iter().map(T::from_prob).collect();
        cpts.push(Cpt::new(v, r, pa, pr, entries)?);
    }
    if let Some((&id, &(line, _))) = tables.iter().next() {
        return Err(parse_err(
            line,
            format!("cpt for unknown variable {}", id + 1),
        ));
    }

    let mut net = BayesNet::new(range_vec, cpts)?;
    let report = validate_with(
        &net,
        &ValidationOptions {
            index_order: true,
            max_parents: Some(opts.max_parents),
        },
    );
    if !report.is_valid() {
        return Err(Error::Validation(report));
    }
    net.normalize();
    Ok(net)
}

pub fn parse_evidence(text: &str) -> Result<Evidence> {
    let mut items = Vec::new();
    for (line, toks) in meaningful_lines(text) {
        if toks[0] != "evidence" || toks.len() != 3 {
            return Err(parse_err(line, "expected 'evidence <id> <value>'"));
        }
        let id = parse_id(toks[1], line)?;
        let value = match parse_usize(toks[2], line, "value")? {
            0 => return Err(parse_err(line, "values start at 1")),
            a => a - 1,
        };
        items.push((id, value));
    }
    Ok(Evidence::new(items))
}

pub fn write_network<T: Probability>(net: &BayesNet<T>) -> String {
    let mut out = String::new();
    for v in 0..net.len() {
        writeln!(out, "var {} {}", v + 1, net.range(v)).unwrap();
    }
    for v in 0..net.len() {
        if !net.parents(v).is_empty() {
            let ps: Vec<String> = net.parents(v).iter().map(|p| (p + 1).to_string()).collect();
            writeln!(out, "parents {} {}", v + 1, ps.join(" ")).unwrap();
        }
    }
    for v in 0..net.len() {
        let es: Vec<String> = net
            .cpt(v)
            .entries()
            .iter()
            .map(|x| x.as_f64().to_string())
            .collect();
        writeln!(out, "cpt {} {}", v + 1, es.join(" ")).unwrap();
    }
    out
}

pub fn write_evidence(ev: &Evidence) -> String {
    ev.items()
        .iter()
        .map(|&(v, a)| format!("evidence {} {}\n", v + 1, a + 1))
        .collect()
}
