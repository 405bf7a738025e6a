//! JSON automaton files.
//!
//! ```json
//! {
//!   "kind": "simple",
//!   "alphabet": ["0", "1"],
//!   "states": ["q0", "q1"], "initial": "q0",
//!   "accepting": ["q1"], "rejecting": [],
//!   "acceptance": "state_and_zero", "observation": "mm", "counter_domain": "int",
//!   "unitaries": { "#|0": [[{"re": 0.0, "im": 0.0}, ...], ...], ... },
//!   "direction": { "q0|#": "D", ... }
//! }
//! ```
//!
//! General files replace `unitaries`/`direction` with a `delta` list of
//! `{from, symbol, sign, to, dir, amp}` records. Numbers are written with
//! shortest round-trip precision, so parse after emit is bit-exact.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{
    AcceptanceType, AutomatonError, Control, CounterDomain, GeneralQf1ca, Observation, SimpleQf1ca, Transition,
};
use crate::basis::{Amplitude, CounterSign, Direction, TapeSymbol};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Amplitude> for ComplexJson {
    fn from(z: Amplitude) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for Amplitude {
    fn from(z: ComplexJson) -> Self {
        Amplitude::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaRecord {
    pub from: String,
    pub symbol: String,
    pub sign: u8,
    pub to: String,
    pub dir: String,
    pub amp: ComplexJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonFile {
    pub kind: String,
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub initial: String,
    pub accepting: Vec<String>,
    pub rejecting: Vec<String>,
    pub acceptance: String,
    pub observation: String,
    pub counter_domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitaries: Option<BTreeMap<String, Vec<Vec<ComplexJson>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<DeltaRecord>>,
}

/// A parsed file in whichever representation it was written.
#[derive(Debug, Clone, PartialEq)]
pub enum Loaded {
    Simple(SimpleQf1ca),
    General(GeneralQf1ca),
}

impl Loaded {
    pub fn control(&self) -> &Control {
        match self {
            Loaded::Simple(a) => &a.control,
            Loaded::General(a) => &a.control,
        }
    }

    pub fn general(&self) -> Result<GeneralQf1ca, AutomatonError> {
        match self {
            Loaded::Simple(a) => crate::automaton::general_from_simple(a),
            Loaded::General(a) => Ok(a.clone()),
        }
    }
}

fn symbol_key(symbol: TapeSymbol, s: CounterSign) -> String {
    format!("{}|{}", symbol.as_char(), s.bit())
}

fn single_char(s: &str) -> Result<char, FormatError> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => invalid(format!("expected a single character, got {s:?}")),
    }
}

fn control_to_file(c: &Control, kind: &str) -> AutomatonFile {
    let names = |set: &BTreeSet<usize>| set.iter().map(|&q| c.states[q].clone()).collect();
    AutomatonFile {
        kind: kind.to_string(),
        alphabet: c.alphabet.iter().map(|ch| ch.to_string()).collect(),
        states: c.states.clone(),
        initial: c.states[c.initial].clone(),
        accepting: names(&c.accepting),
        rejecting: names(&c.rejecting),
        acceptance: c.acceptance.code().to_string(),
        observation: c.observation.code().to_string(),
        counter_domain: c.counter_domain.code().to_string(),
        unitaries: None,
        direction: None,
        delta: None,
    }
}

pub fn simple_to_file(a: &SimpleQf1ca) -> AutomatonFile {
    let mut f = control_to_file(&a.control, "simple");
    let unitaries = a
        .unitaries
        .iter()
        .map(|(&(symbol, s), m)| {
            let rows = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect()).collect();
            (symbol_key(symbol, s), rows)
        })
        .collect();
    let direction = a
        .direction
        .iter()
        .map(|(&(q, symbol), d)| (format!("{}|{}", a.control.states[q], symbol.as_char()), d.code().to_string()))
        .collect();
    f.unitaries = Some(unitaries);
    f.direction = Some(direction);
    f
}

pub fn general_to_file(a: &GeneralQf1ca) -> AutomatonFile {
    let mut f = control_to_file(&a.control, "general");
    let name = |q: usize| a.control.states[q].clone();
    let mut delta = Vec::new();
    for (&(q, symbol, s), list) in &a.delta {
        for t in list {
            delta.push(DeltaRecord {
                from: name(q),
                symbol: symbol.as_char().to_string(),
                sign: s.bit(),
                to: name(t.to),
                dir: t.dir.code().to_string(),
                amp: t.amp.into(),
            });
        }
    }
    f.delta = Some(delta);
    f
}

pub fn loaded_to_file(a: &Loaded) -> AutomatonFile {
    match a {
        Loaded::Simple(s) => simple_to_file(s),
        Loaded::General(g) => general_to_file(g),
    }
}

fn file_control(f: &AutomatonFile) -> Result<Control, FormatError> {
    let mut index = BTreeMap::new();
    for (i, q) in f.states.iter().enumerate() {
        if q.contains('|') {
            return invalid(format!("state name {q:?} may not contain '|'"));
        }
        if index.insert(q.as_str(), i).is_some() {
            return invalid(format!("state {q:?} listed twice"));
        }
    }
    let lookup = |q: &str| index.get(q).copied().ok_or_else(|| AutomatonError::UnknownState(q.to_string()));
    let set = |names: &[String]| names.iter().map(|q| lookup(q)).collect::<Result<BTreeSet<_>, _>>();
    let alphabet = f.alphabet.iter().map(|s| single_char(s)).collect::<Result<Vec<_>, _>>()?;
    let control = Control {
        alphabet,
        states: f.states.clone(),
        initial: lookup(&f.initial)?,
        accepting: set(&f.accepting)?,
        rejecting: set(&f.rejecting)?,
        acceptance: AcceptanceType::from_code(&f.acceptance)
            .ok_or_else(|| FormatError::Invalid(format!("unknown acceptance {:?}", f.acceptance)))?,
        observation: Observation::from_code(&f.observation)
            .ok_or_else(|| FormatError::Invalid(format!("unknown observation {:?}", f.observation)))?,
        counter_domain: CounterDomain::from_code(&f.counter_domain)
            .ok_or_else(|| FormatError::Invalid(format!("unknown counter domain {:?}", f.counter_domain)))?,
    };
    let problems = crate::automaton::validate_control(&control);
    if let Some(p) = problems.first() {
        return invalid(p.to_string());
    }
    Ok(control)
}

fn tape_symbol(control: &Control, s: &str) -> Result<TapeSymbol, FormatError> {
    let symbol = TapeSymbol::from_char(single_char(s)?);
    match symbol {
        TapeSymbol::Input(c) if !control.accepts_letter(c) => invalid(format!("symbol {c:?} not in alphabet")),
        _ => Ok(symbol),
    }
}

pub fn file_to_loaded(f: &AutomatonFile) -> Result<Loaded, FormatError> {
    let control = file_control(f)?;
    let n = control.num_states();
    match f.kind.as_str() {
        "simple" => {
            if f.delta.is_some() {
                return invalid("simple files carry no delta");
            }
            let (Some(unitaries), Some(direction)) = (&f.unitaries, &f.direction) else {
                return invalid("simple files need unitaries and direction");
            };
            let mut matrices = BTreeMap::new();
            for (key, rows) in unitaries {
                let (sym, bit) = key.split_once('|').ok_or_else(|| FormatError::Invalid(format!("bad key {key:?}")))?;
                let symbol = tape_symbol(&control, sym)?;
                let s = bit
                    .parse()
                    .ok()
                    .and_then(CounterSign::from_bit)
                    .ok_or_else(|| FormatError::Invalid(format!("bad sign in key {key:?}")))?;
                if rows.iter().any(|r| r.len() != rows.len()) {
                    return invalid(format!("matrix {key:?} is not square"));
                }
                let m = DMatrix::from_fn(rows.len(), rows.len(), |i, j| Amplitude::from(rows[i][j]));
                matrices.insert((symbol, s), m);
            }
            let mut dirs = BTreeMap::new();
            for (key, code) in direction {
                let (q, sym) = key.rsplit_once('|').ok_or_else(|| FormatError::Invalid(format!("bad key {key:?}")))?;
                let q = control.state_index(q).ok_or_else(|| AutomatonError::UnknownState(q.to_string()))?;
                let d = Direction::from_code(code)
                    .ok_or_else(|| FormatError::Invalid(format!("bad direction {code:?}")))?;
                dirs.insert((q, tape_symbol(&control, sym)?), d);
            }
            Ok(Loaded::Simple(SimpleQf1ca::new(control, matrices, dirs)?))
        }
        "general" => {
            if f.unitaries.is_some() || f.direction.is_some() {
                return invalid("general files carry only delta");
            }
            let Some(delta) = &f.delta else {
                return invalid("general files need delta");
            };
            let mut g = GeneralQf1ca::new(control);
            for r in delta {
                let from = g.control.state_index(&r.from).ok_or_else(|| AutomatonError::UnknownState(r.from.clone()))?;
                let to = g.control.state_index(&r.to).ok_or_else(|| AutomatonError::UnknownState(r.to.clone()))?;
                let symbol = tape_symbol(&g.control, &r.symbol)?;
                let s = CounterSign::from_bit(r.sign).ok_or_else(|| FormatError::Invalid(format!("bad sign {}", r.sign)))?;
                let dir = Direction::from_code(&r.dir)
                    .ok_or_else(|| FormatError::Invalid(format!("bad direction {:?}", r.dir)))?;
                debug_assert!(from < n && to < n);
                g.delta.entry((from, symbol, s)).or_default().push(Transition { to, dir, amp: r.amp.into() });
            }
            Ok(Loaded::General(g))
        }
        other => invalid(format!("unknown kind {other:?}")),
    }
}

pub fn parse(text: &str) -> Result<Loaded, FormatError> {
    file_to_loaded(&serde_json::from_str(text)?)
}

pub fn emit(a: &Loaded) -> String {
    let mut s = serde_json::to_string_pretty(&loaded_to_file(a)).expect("automaton files always serialise");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{build_theorem5, catalog};

    #[test]
    fn zoo_round_trip_is_exact() {
        for e in catalog() {
            let a = Loaded::Simple(e.automaton.clone());
            let back = parse(&emit(&a)).unwrap();
            assert_eq!(back, a, "{}", e.name);
            let g = Loaded::General(e.automaton.to_general());
            assert_eq!(parse(&emit(&g)).unwrap(), g, "{}", e.name);
        }
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(parse("{"), Err(FormatError::Json(_))));
        let mut f = simple_to_file(&build_theorem5());
        f.alphabet.push("$".into());
        assert!(file_to_loaded(&f).is_err());
        let mut f = simple_to_file(&build_theorem5());
        f.direction.as_mut().unwrap().remove("q1|0");
        assert!(matches!(file_to_loaded(&f), Err(FormatError::Automaton(AutomatonError::MissingDirection { .. }))));
        let mut f = simple_to_file(&build_theorem5());
        f.kind = "other".into();
        assert!(file_to_loaded(&f).is_err());
        let mut f = general_to_file(&build_theorem5().to_general());
        f.delta.as_mut().unwrap()[0].to = "nowhere".into();
        assert!(file_to_loaded(&f).is_err());
    }

    #[test]
    fn negative_zero_survives() {
        let mut a = build_theorem5();
        a.unitaries.get_mut(&(TapeSymbol::LeftEnd, CounterSign::Zero)).unwrap()[(5, 5)] = Amplitude::new(-0.0, -0.0);
        let back = parse(&emit(&Loaded::Simple(a.clone()))).unwrap();
        let Loaded::Simple(b) = back else { panic!() };
        let z = b.unitaries[&(TapeSymbol::LeftEnd, CounterSign::Zero)][(5, 5)];
        assert!(z.re.is_sign_negative() && z.im.is_sign_negative());
    }
}
