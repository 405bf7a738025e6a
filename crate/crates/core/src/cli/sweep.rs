//! Parameterised word families and their probability tables.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use thiserror::Error;

use crate::automaton::GeneralQf1ca;
use crate::dynamics::{run, RunError, RunResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("bad pattern token {0:?}")]
    BadToken(String),
    #[error("bad range {0:?}, expected name=lo..hi")]
    BadRange(String),
    #[error("variable {0} has no range")]
    MissingRange(String),
    #[error("range given for {0}, which the pattern does not use")]
    UnusedRange(String),
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("word {word:?}: {source}")]
    Run {
        word: String,
        #[source]
        source: RunError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Accept,
    Reject,
    Residual,
    RejectTotal,
}

impl Column {
    pub const ALL: [Column; 4] = [Column::Accept, Column::Reject, Column::Residual, Column::RejectTotal];

    pub fn name(self) -> &'static str {
        match self {
            Column::Accept => "p_accept",
            Column::Reject => "p_reject",
            Column::Residual => "p_residual",
            Column::RejectTotal => "p_reject_total",
        }
    }

    pub fn from_name(name: &str) -> Option<Column> {
        Column::ALL.into_iter().find(|c| c.name() == name)
    }

    fn value(self, r: &RunResult) -> f64 {
        match self {
            Column::Accept => r.p_accept,
            Column::Reject => r.p_reject,
            Column::Residual => r.p_residual,
            Column::RejectTotal => r.p_reject_total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Count {
    Fixed(usize),
    Var(String),
}

/// One whitespace-separated pattern token: `text` or `text^count`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Piece {
    text: String,
    count: Count,
}

/// A word family such as `0^a 1 0^b` with an inclusive range per variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSpec {
    pieces: Vec<Piece>,
    /// In order of first appearance in the pattern.
    pub variables: Vec<(String, RangeInclusive<usize>)>,
    pub columns: Vec<Column>,
}

fn is_name(s: &str) -> bool {
    let mut it = s.chars();
    matches!(it.next(), Some(c) if c.is_ascii_alphabetic()) && it.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_range(s: &str) -> Result<(String, RangeInclusive<usize>), SweepError> {
    let bad = || SweepError::BadRange(s.to_string());
    let (name, span) = s.split_once('=').ok_or_else(bad)?;
    let (lo, hi) = span.split_once("..").ok_or_else(bad)?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    let name = name.trim();
    if !is_name(name) {
        return Err(bad());
    }
    Ok((name.to_string(), lo..=hi))
}

impl SweepSpec {
    /// `ranges` are `name=lo..hi` (inclusive; `lo > hi` is empty).
    /// `columns` defaults to all four probabilities.
    pub fn parse(pattern: &str, ranges: &[String], columns: Option<&[String]>) -> Result<Self, SweepError> {
        let mut pieces = Vec::new();
        let mut order: Vec<String> = Vec::new();
        for token in pattern.split_whitespace() {
            let piece = match token.split_once('^') {
                None => Piece { text: token.to_string(), count: Count::Fixed(1) },
                Some((text, count)) => {
                    if text.is_empty() {
                        return Err(SweepError::BadToken(token.to_string()));
                    }
                    let count = if let Ok(k) = count.parse() {
                        Count::Fixed(k)
                    } else if is_name(count) {
                        if !order.iter().any(|v| v == count) {
                            order.push(count.to_string());
                        }
                        Count::Var(count.to_string())
                    } else {
                        return Err(SweepError::BadToken(token.to_string()));
                    };
                    Piece { text: text.to_string(), count }
                }
            };
            pieces.push(piece);
        }
        let mut given = BTreeMap::new();
        for r in ranges {
            let (name, span) = parse_range(r)?;
            if !order.contains(&name) {
                return Err(SweepError::UnusedRange(name));
            }
            given.insert(name, span);
        }
        let variables = order
            .into_iter()
            .map(|v| match given.remove(&v) {
                Some(span) => Ok((v, span)),
                None => Err(SweepError::MissingRange(v)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let columns = match columns {
            None => Column::ALL.to_vec(),
            Some(names) => names
                .iter()
                .map(|n| Column::from_name(n).ok_or_else(|| SweepError::UnknownColumn(n.clone())))
                .collect::<Result<_, _>>()?,
        };
        Ok(SweepSpec { pieces, variables, columns })
    }

    /// Every assignment, lexicographic in variable order.
    pub fn assignments(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new()];
        for (_, span) in &self.variables {
            rows = rows
                .into_iter()
                .flat_map(|prefix| {
                    span.clone().map(move |v| {
                        let mut row = prefix.clone();
                        row.push(v);
                        row
                    })
                })
                .collect();
        }
        rows
    }

    pub fn word(&self, values: &[usize]) -> String {
        let mut out = String::new();
        for p in &self.pieces {
            let k = match &p.count {
                Count::Fixed(k) => *k,
                Count::Var(v) => {
                    let pos = self.variables.iter().position(|(name, _)| name == v).expect("variable is declared");
                    values[pos]
                }
            };
            out.push_str(&p.text.repeat(k));
        }
        out
    }
}

/// Twelve significant digits, shortest form.
pub fn fmt12(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded:?}")
}

/// The CSV table; rows are evaluated in parallel but emitted in order.
pub fn sweep_csv(a: &GeneralQf1ca, spec: &SweepSpec) -> Result<String, SweepError> {
    let rows = spec.assignments();
    let results: Vec<Result<RunResult, SweepError>> = rows
        .par_iter()
        .map(|values| {
            let word = spec.word(values);
            run(a, &word).map_err(|source| SweepError::Run { word, source })
        })
        .collect();
    let mut out = String::new();
    let header: Vec<&str> = spec
        .variables
        .iter()
        .map(|(v, _)| v.as_str())
        .chain(spec.columns.iter().map(|c| c.name()))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (values, result) in rows.iter().zip(results) {
        let r = result?;
        let fields: Vec<String> = values
            .iter()
            .map(|v| v.to_string())
            .chain(spec.columns.iter().map(|c| fmt12(c.value(&r))))
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}
