//! The two automaton representations: a general transition table and the
//! factored form with one unitary per (symbol, counter sign) plus a
//! direction function on target states.
//!
//! Matrix convention used everywhere: entry `(row q', col q)` of
//! `unitaries[(γ, s)]` is `<q'|V_{γ,s}|q>`, so column `q` is the image of
//! source state `q`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use thiserror::Error;

use crate::basis::{
    Amplitude, Configuration, CounterSign, Direction, TapeSymbol, LEFT_END, RIGHT_END,
};
use crate::wellformed::{complete_unitary, CompletionError};

/// Stored amplitudes may exceed modulus 1 by at most this much.
pub const AMPLITUDE_SLACK: f64 = 1e-12;

/// Which configurations count as accepting and rejecting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AcceptanceType {
    /// Accept in an accepting state with counter 0; reject in any rejecting state.
    StateAndZero,
    /// Accept whenever the counter is 0; reject in a rejecting state with nonzero counter.
    ZeroCounter,
    /// Accept in an accepting state; reject in a rejecting state.
    StateOnly,
}

impl AcceptanceType {
    pub fn code(self) -> &'static str {
        match self {
            AcceptanceType::StateAndZero => "state_and_zero",
            AcceptanceType::ZeroCounter => "zero",
            AcceptanceType::StateOnly => "state",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "state_and_zero" => Some(AcceptanceType::StateAndZero),
            "zero" => Some(AcceptanceType::ZeroCounter),
            "state" => Some(AcceptanceType::StateOnly),
            _ => None,
        }
    }
}

/// When the computational observable is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observation {
    ManyMeasure,
    OnceMeasure,
}

impl Observation {
    pub fn code(self) -> &'static str {
        match self {
            Observation::ManyMeasure => "mm",
            Observation::OnceMeasure => "mo",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "mm" => Some(Observation::ManyMeasure),
            "mo" => Some(Observation::OnceMeasure),
            _ => None,
        }
    }
}

/// Declared range of the counter. `NonNegative` is enforced at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CounterDomain {
    AllIntegers,
    NonNegative,
}

impl CounterDomain {
    pub fn code(self) -> &'static str {
        match self {
            CounterDomain::AllIntegers => "int",
            CounterDomain::NonNegative => "nonneg",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "int" => Some(CounterDomain::AllIntegers),
            "nonneg" => Some(CounterDomain::NonNegative),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConfigClass {
    Accept,
    Reject,
    NonHalting,
}

/// Finite control shared by both representations: alphabets, state sets and
/// the observation policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Control {
    /// Input alphabet, sorted and free of endmarkers.
    pub alphabet: Vec<char>,
    /// State names; a state is referred to by its index in this list.
    pub states: Vec<String>,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    pub rejecting: BTreeSet<usize>,
    pub acceptance: AcceptanceType,
    pub observation: Observation,
    pub counter_domain: CounterDomain,
}

impl Control {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.states[q]
    }

    /// `#`, the input letters in order, then `$`.
    pub fn tape_alphabet(&self) -> Vec<TapeSymbol> {
        let mut out = vec![TapeSymbol::LeftEnd];
        out.extend(self.alphabet.iter().map(|&c| TapeSymbol::Input(c)));
        out.push(TapeSymbol::RightEnd);
        out
    }

    pub fn accepts_letter(&self, c: char) -> bool {
        self.alphabet.contains(&c)
    }

    pub fn classify(&self, c: &Configuration) -> ConfigClass {
        let acc = self.accepting.contains(&c.state);
        let rej = self.rejecting.contains(&c.state);
        let zero = c.counter == 0;
        let (is_acc, is_rej) = match self.acceptance {
            AcceptanceType::StateAndZero => (acc && zero, rej),
            AcceptanceType::ZeroCounter => (zero, rej && !zero),
            AcceptanceType::StateOnly => (acc, rej),
        };
        if is_acc {
            ConfigClass::Accept
        } else if is_rej {
            ConfigClass::Reject
        } else {
            ConfigClass::NonHalting
        }
    }
}

/// One nonzero entry `δ(q, γ, s, to, dir)` of a general transition table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub to: usize,
    pub dir: Direction,
    pub amp: Amplitude,
}

/// Sparse key of the general table.
pub type DeltaKey = (usize, TapeSymbol, CounterSign);

/// A quantum one-counter automaton given by its full transition table.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralQf1ca {
    pub control: Control,
    /// Only nonzero amplitudes are stored. At most one entry per
    /// `(to, dir)` within a list.
    pub delta: BTreeMap<DeltaKey, Vec<Transition>>,
}

impl GeneralQf1ca {
    pub fn new(control: Control) -> Self {
        GeneralQf1ca { control, delta: BTreeMap::new() }
    }

    pub fn transitions(&self, q: usize, symbol: TapeSymbol, s: CounterSign) -> &[Transition] {
        self.delta.get(&(q, symbol, s)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `δ(q, γ, s, to, dir)`, zero when absent.
    pub fn amplitude(
        &self,
        q: usize,
        symbol: TapeSymbol,
        s: CounterSign,
        to: usize,
        dir: Direction,
    ) -> Amplitude {
        self.transitions(q, symbol, s)
            .iter()
            .find(|t| t.to == to && t.dir == dir)
            .map(|t| t.amp)
            .unwrap_or_default()
    }

    /// Adds `amp` to `δ(q, γ, s, to, dir)`; entries that cancel to exactly
    /// zero are removed.
    pub fn add_transition(
        &mut self,
        q: usize,
        symbol: TapeSymbol,
        s: CounterSign,
        to: usize,
        dir: Direction,
        amp: Amplitude,
    ) {
        let list = self.delta.entry((q, symbol, s)).or_default();
        match list.iter_mut().find(|t| t.to == to && t.dir == dir) {
            Some(t) => t.amp += amp,
            None => list.push(Transition { to, dir, amp }),
        }
        list.retain(|t| t.amp != Amplitude::new(0.0, 0.0));
        if list.is_empty() {
            self.delta.remove(&(q, symbol, s));
        }
    }

    /// Overwrites `δ(q, γ, s, to, dir)`.
    pub fn set_transition(
        &mut self,
        q: usize,
        symbol: TapeSymbol,
        s: CounterSign,
        to: usize,
        dir: Direction,
        amp: Amplitude,
    ) {
        let list = self.delta.entry((q, symbol, s)).or_default();
        list.retain(|t| !(t.to == to && t.dir == dir));
        if amp != Amplitude::new(0.0, 0.0) {
            list.push(Transition { to, dir, amp });
        }
        if list.is_empty() {
            self.delta.remove(&(q, symbol, s));
        }
    }

    pub fn transition_count(&self) -> usize {
        self.delta.values().map(Vec::len).sum()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutomatonError {
    #[error("direction function undefined for state {state} on symbol {symbol}")]
    MissingDirection { state: String, symbol: TapeSymbol },
    #[error("matrix for ({symbol}, {sign:?}) has shape {rows}x{cols}, expected {n}x{n}")]
    BadMatrixShape { symbol: TapeSymbol, sign: CounterSign, rows: usize, cols: usize, n: usize },
    #[error("no matrix for ({symbol}, {sign:?})")]
    MissingMatrix { symbol: TapeSymbol, sign: CounterSign },
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("unitary completion failed for ({symbol}, {sign:?}): {source}")]
    Completion {
        symbol: TapeSymbol,
        sign: CounterSign,
        #[source]
        source: CompletionError,
    },
}

/// The factored form: `δ(q,γ,s,q',d) = <q'|V_{γ,s}|q>` when `D(q',γ) = d`, else 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleQf1ca {
    pub control: Control,
    pub unitaries: BTreeMap<(TapeSymbol, CounterSign), DMatrix<Amplitude>>,
    pub direction: BTreeMap<(usize, TapeSymbol), Direction>,
}

impl SimpleQf1ca {
    /// Checks shapes and totality; unitarity is left to
    /// [`crate::wellformed::check_simple`].
    pub fn new(
        control: Control,
        unitaries: BTreeMap<(TapeSymbol, CounterSign), DMatrix<Amplitude>>,
        direction: BTreeMap<(usize, TapeSymbol), Direction>,
    ) -> Result<Self, AutomatonError> {
        let a = SimpleQf1ca { control, unitaries, direction };
        let n = a.control.num_states();
        for symbol in a.control.tape_alphabet() {
            for sign in CounterSign::ALL {
                let m = a
                    .unitaries
                    .get(&(symbol, sign))
                    .ok_or(AutomatonError::MissingMatrix { symbol, sign })?;
                if m.nrows() != n || m.ncols() != n {
                    return Err(AutomatonError::BadMatrixShape {
                        symbol,
                        sign,
                        rows: m.nrows(),
                        cols: m.ncols(),
                        n,
                    });
                }
            }
            for q in 0..n {
                if !a.direction.contains_key(&(q, symbol)) {
                    return Err(AutomatonError::MissingDirection {
                        state: a.control.states[q].clone(),
                        symbol,
                    });
                }
            }
        }
        Ok(a)
    }

    pub fn unitary(&self, symbol: TapeSymbol, sign: CounterSign) -> &DMatrix<Amplitude> {
        &self.unitaries[&(symbol, sign)]
    }

    pub fn to_general(&self) -> GeneralQf1ca {
        general_from_simple(self).expect("direction is total by construction")
    }
}

/// Expands the factored form into a sparse general table. Amplitudes are
/// copied verbatim from the matrices.
pub fn general_from_simple(a: &SimpleQf1ca) -> Result<GeneralQf1ca, AutomatonError> {
    let n = a.control.num_states();
    let mut g = GeneralQf1ca::new(a.control.clone());
    for (&(symbol, sign), m) in &a.unitaries {
        for q in 0..n {
            let mut list = Vec::new();
            for to in 0..n {
                let amp = m[(to, q)];
                if amp == Amplitude::new(0.0, 0.0) {
                    continue;
                }
                let dir = *a.direction.get(&(to, symbol)).ok_or_else(|| {
                    AutomatonError::MissingDirection { state: a.control.states[to].clone(), symbol }
                })?;
                list.push(Transition { to, dir, amp });
            }
            if !list.is_empty() {
                g.delta.insert((q, symbol, sign), list);
            }
        }
    }
    Ok(g)
}

pub fn classify_config(control: &Control, c: &Configuration) -> ConfigClass {
    control.classify(c)
}

/// A set-level defect of a general automaton.
#[derive(Debug, Clone, PartialEq)]
pub enum StructureViolation {
    Disjointness(String),
    UnknownState { field: &'static str, index: usize },
    ReservedSymbol(char),
    DuplicateLetter(char),
    SymbolNotInAlphabet(char),
    AmplitudeTooLarge { from: String, symbol: TapeSymbol, to: String, modulus: f64 },
    DuplicateEntry { from: String, symbol: TapeSymbol, to: String, dir: Direction },
    NoStates,
}

impl fmt::Display for StructureViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureViolation::Disjointness(q) => {
                write!(f, "state {q} is both accepting and rejecting")
            }
            StructureViolation::UnknownState { field, index } => {
                write!(f, "{field} references unknown state index {index}")
            }
            StructureViolation::ReservedSymbol(c) => {
                write!(f, "endmarker {c:?} may not be an input letter")
            }
            StructureViolation::DuplicateLetter(c) => write!(f, "letter {c:?} listed twice"),
            StructureViolation::SymbolNotInAlphabet(c) => {
                write!(f, "transition on {c:?} which is not in the tape alphabet")
            }
            StructureViolation::AmplitudeTooLarge { from, symbol, to, modulus } => {
                write!(f, "amplitude {from} --{symbol}--> {to} has modulus {modulus}")
            }
            StructureViolation::DuplicateEntry { from, symbol, to, dir } => {
                write!(f, "duplicate entry {from} --{symbol}--> ({to}, {})", dir.code())
            }
            StructureViolation::NoStates => write!(f, "state set is empty"),
        }
    }
}

pub fn validate_control(control: &Control) -> Vec<StructureViolation> {
    let mut out = Vec::new();
    let n = control.num_states();
    if n == 0 {
        out.push(StructureViolation::NoStates);
    }
    if control.initial >= n {
        out.push(StructureViolation::UnknownState { field: "initial", index: control.initial });
    }
    for &q in &control.accepting {
        if q >= n {
            out.push(StructureViolation::UnknownState { field: "accepting", index: q });
        }
    }
    for &q in &control.rejecting {
        if q >= n {
            out.push(StructureViolation::UnknownState { field: "rejecting", index: q });
        }
    }
    for q in control.accepting.intersection(&control.rejecting) {
        let name = control.states.get(*q).cloned().unwrap_or_else(|| q.to_string());
        out.push(StructureViolation::Disjointness(name));
    }
    let mut seen = BTreeSet::new();
    for &c in &control.alphabet {
        if c == LEFT_END || c == RIGHT_END {
            out.push(StructureViolation::ReservedSymbol(c));
        }
        if !seen.insert(c) {
            out.push(StructureViolation::DuplicateLetter(c));
        }
    }
    out
}

/// Lists every violated set-level invariant; empty means structurally valid.
pub fn validate_structure(a: &GeneralQf1ca) -> Vec<StructureViolation> {
    let control = &a.control;
    let mut out = validate_control(control);
    let n = control.num_states();
    let name = |q: usize| control.states.get(q).cloned().unwrap_or_else(|| format!("#{q}"));
    for (&(q, symbol, _), list) in &a.delta {
        if q >= n {
            out.push(StructureViolation::UnknownState { field: "delta.from", index: q });
        }
        if let TapeSymbol::Input(c) = symbol {
            if !control.accepts_letter(c) {
                out.push(StructureViolation::SymbolNotInAlphabet(c));
            }
        }
        let mut targets = BTreeSet::new();
        for t in list {
            if t.to >= n {
                out.push(StructureViolation::UnknownState { field: "delta.to", index: t.to });
                continue;
            }
            if t.amp.norm() > 1.0 + AMPLITUDE_SLACK {
                out.push(StructureViolation::AmplitudeTooLarge {
                    from: name(q),
                    symbol,
                    to: name(t.to),
                    modulus: t.amp.norm(),
                });
            }
            if !targets.insert((t.to, t.dir)) {
                out.push(StructureViolation::DuplicateEntry {
                    from: name(q),
                    symbol,
                    to: name(t.to),
                    dir: t.dir,
                });
            }
        }
    }
    out
}

type PartialColumns = BTreeMap<usize, Vec<(usize, Amplitude)>>;

/// Incremental construction of a [`SimpleQf1ca`] from partially specified
/// columns. Unspecified columns of every `V_{γ,s}` are filled in by
/// [`complete_unitary`]; unspecified directions default to `Stay`.
#[derive(Debug, Clone)]
pub struct SimpleBuilder {
    alphabet: Vec<char>,
    states: Vec<String>,
    accepting: BTreeSet<usize>,
    rejecting: BTreeSet<usize>,
    acceptance: AcceptanceType,
    observation: Observation,
    counter_domain: CounterDomain,
    columns: BTreeMap<(TapeSymbol, CounterSign), PartialColumns>,
    direction: BTreeMap<(usize, TapeSymbol), Direction>,
}

impl SimpleBuilder {
    pub fn new(alphabet: &[char]) -> Self {
        let mut alphabet = alphabet.to_vec();
        alphabet.sort_unstable();
        SimpleBuilder {
            alphabet,
            states: Vec::new(),
            accepting: BTreeSet::new(),
            rejecting: BTreeSet::new(),
            acceptance: AcceptanceType::StateAndZero,
            observation: Observation::ManyMeasure,
            counter_domain: CounterDomain::AllIntegers,
            columns: BTreeMap::new(),
            direction: BTreeMap::new(),
        }
    }

    /// Adds a state; the first state added is the initial state.
    pub fn state(&mut self, name: &str) -> usize {
        assert!(!self.states.iter().any(|s| s == name), "duplicate state {name}");
        self.states.push(name.to_string());
        self.states.len() - 1
    }

    pub fn accepting(&mut self, name: &str) -> usize {
        let q = self.state(name);
        self.accepting.insert(q);
        q
    }

    pub fn rejecting(&mut self, name: &str) -> usize {
        let q = self.state(name);
        self.rejecting.insert(q);
        q
    }

    pub fn acceptance(&mut self, acceptance: AcceptanceType) -> &mut Self {
        self.acceptance = acceptance;
        self
    }

    pub fn observation(&mut self, observation: Observation) -> &mut Self {
        self.observation = observation;
        self
    }

    pub fn counter_domain(&mut self, domain: CounterDomain) -> &mut Self {
        self.counter_domain = domain;
        self
    }

    /// Sets column `from` of `V_{γ,s}` for the given signs.
    pub fn column(
        &mut self,
        symbol: TapeSymbol,
        signs: &[CounterSign],
        from: usize,
        image: &[(usize, Amplitude)],
    ) -> &mut Self {
        for &s in signs {
            self.columns.entry((symbol, s)).or_default().insert(from, image.to_vec());
        }
        self
    }

    /// `V_{γ,s}|from> = |to>` for every listed sign.
    pub fn maps(&mut self, symbol: TapeSymbol, signs: &[CounterSign], from: usize, to: usize) -> &mut Self {
        self.column(symbol, signs, from, &[(to, Amplitude::new(1.0, 0.0))])
    }

    pub fn direction(&mut self, to: usize, symbol: TapeSymbol, dir: Direction) -> &mut Self {
        self.direction.insert((to, symbol), dir);
        self
    }

    pub fn build(&self) -> Result<SimpleQf1ca, AutomatonError> {
        let n = self.states.len();
        if n == 0 {
            return Err(AutomatonError::BadParameter("automaton has no states".into()));
        }
        let control = Control {
            alphabet: self.alphabet.clone(),
            states: self.states.clone(),
            initial: 0,
            accepting: self.accepting.clone(),
            rejecting: self.rejecting.clone(),
            acceptance: self.acceptance,
            observation: self.observation,
            counter_domain: self.counter_domain,
        };
        let mut unitaries = BTreeMap::new();
        let mut direction = BTreeMap::new();
        for symbol in control.tape_alphabet() {
            for sign in CounterSign::ALL {
                let mut partial = BTreeMap::new();
                if let Some(cols) = self.columns.get(&(symbol, sign)) {
                    for (&from, image) in cols {
                        let mut v = DVector::from_element(n, Amplitude::new(0.0, 0.0));
                        for &(to, amp) in image {
                            v[to] += amp;
                        }
                        partial.insert(from, v);
                    }
                }
                let m = complete_unitary(&partial, n)
                    .map_err(|source| AutomatonError::Completion { symbol, sign, source })?;
                unitaries.insert((symbol, sign), m);
            }
            for q in 0..n {
                let d = self.direction.get(&(q, symbol)).copied().unwrap_or(Direction::Stay);
                direction.insert((q, symbol), d);
            }
        }
        SimpleQf1ca::new(control, unitaries, direction)
    }
}

/// Haar-ish random simple automaton over `{0, 1}`: each `V_{γ,s}` completes a
/// random orthonormal set of `1..=n` columns, and `D` is uniform. States 0 and
/// the last two are initial, accepting and rejecting respectively.
pub fn random_simple<R: Rng + ?Sized>(rng: &mut R, num_states: usize) -> SimpleQf1ca {
    assert!(num_states >= 3, "need room for initial, accepting and rejecting states");
    let n = num_states;
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let control = Control {
        alphabet: vec!['0', '1'],
        states,
        initial: 0,
        accepting: BTreeSet::from([n - 2]),
        rejecting: BTreeSet::from([n - 1]),
        acceptance: AcceptanceType::StateAndZero,
        observation: Observation::ManyMeasure,
        counter_domain: CounterDomain::AllIntegers,
    };
    let mut unitaries = BTreeMap::new();
    let mut direction = BTreeMap::new();
    for symbol in control.tape_alphabet() {
        for sign in CounterSign::ALL {
            let given = rng.random_range(1..=n);
            let mut cols: Vec<DVector<Amplitude>> = Vec::new();
            while cols.len() < given {
                let mut v = DVector::from_fn(n, |_, _| {
                    Amplitude::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
                });
                for _ in 0..2 {
                    for c in &cols {
                        let proj = c.dotc(&v);
                        v -= c * proj;
                    }
                }
                let norm = v.norm();
                if norm > 1e-3 {
                    cols.push(v / Amplitude::new(norm, 0.0));
                }
            }
            let mut slots: Vec<usize> = (0..n).collect();
            let mut partial = BTreeMap::new();
            for c in cols {
                let pick = rng.random_range(0..slots.len());
                partial.insert(slots.swap_remove(pick), c);
            }
            let m = complete_unitary(&partial, n).expect("random columns are orthonormal");
            unitaries.insert((symbol, sign), m);
        }
        for q in 0..n {
            direction.insert((q, symbol), Direction::ALL[rng.random_range(0..3)]);
        }
    }
    SimpleQf1ca::new(control, unitaries, direction).expect("random automaton is total")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Amplitude {
        Amplitude::new(1.0, 0.0)
    }

    fn control(acceptance: AcceptanceType) -> Control {
        Control {
            alphabet: vec!['0', '1'],
            states: vec!["q0".into(), "qa".into(), "qr".into()],
            initial: 0,
            accepting: BTreeSet::from([1]),
            rejecting: BTreeSet::from([2]),
            acceptance,
            observation: Observation::ManyMeasure,
            counter_domain: CounterDomain::AllIntegers,
        }
    }

    pub(crate) fn identity_automaton() -> SimpleQf1ca {
        let c = control(AcceptanceType::StateAndZero);
        let n = c.num_states();
        let mut unitaries = BTreeMap::new();
        let mut direction = BTreeMap::new();
        for symbol in c.tape_alphabet() {
            for sign in CounterSign::ALL {
                unitaries.insert((symbol, sign), DMatrix::identity(n, n));
            }
            for q in 0..n {
                direction.insert((q, symbol), Direction::Stay);
            }
        }
        SimpleQf1ca::new(c, unitaries, direction).unwrap()
    }

    #[test]
    fn classify_by_acceptance_type() {
        let t1 = control(AcceptanceType::StateAndZero);
        assert_eq!(t1.classify(&Configuration::new(1, 0)), ConfigClass::Accept);
        assert_eq!(t1.classify(&Configuration::new(1, 3)), ConfigClass::NonHalting);
        assert_eq!(t1.classify(&Configuration::new(2, 3)), ConfigClass::Reject);
        assert_eq!(t1.classify(&Configuration::new(2, 0)), ConfigClass::Reject);

        let t2 = control(AcceptanceType::ZeroCounter);
        assert_eq!(t2.classify(&Configuration::new(0, 0)), ConfigClass::Accept);
        assert_eq!(t2.classify(&Configuration::new(2, 0)), ConfigClass::Accept);
        assert_eq!(t2.classify(&Configuration::new(2, -1)), ConfigClass::Reject);
        assert_eq!(t2.classify(&Configuration::new(1, 4)), ConfigClass::NonHalting);

        let t3 = control(AcceptanceType::StateOnly);
        assert_eq!(t3.classify(&Configuration::new(1, 3)), ConfigClass::Accept);
        assert_eq!(t3.classify(&Configuration::new(2, 0)), ConfigClass::Reject);
        assert_eq!(t3.classify(&Configuration::new(0, 0)), ConfigClass::NonHalting);
    }

    #[test]
    fn classify_partitions_every_configuration() {
        for acceptance in
            [AcceptanceType::StateAndZero, AcceptanceType::ZeroCounter, AcceptanceType::StateOnly]
        {
            let c = control(acceptance);
            let mut both = c.clone();
            both.rejecting.insert(0);
            for q in 0..3 {
                for k in -2..=2 {
                    // classify is a function, so exactly one class; check the
                    // class agrees with the set definitions
                    let cfg = Configuration::new(q, k);
                    let class = both.classify(&cfg);
                    let acc_set = match acceptance {
                        AcceptanceType::StateAndZero => q == 1 && k == 0,
                        AcceptanceType::ZeroCounter => k == 0,
                        AcceptanceType::StateOnly => q == 1,
                    };
                    assert_eq!(class == ConfigClass::Accept, acc_set);
                }
            }
        }
    }

    #[test]
    fn identity_expands_to_stay_loops() {
        let g = identity_automaton().to_general();
        for symbol in g.control.tape_alphabet() {
            for s in CounterSign::ALL {
                for q in 0..3 {
                    let ts = g.transitions(q, symbol, s);
                    assert_eq!(ts, &[Transition { to: q, dir: Direction::Stay, amp: one() }]);
                }
            }
        }
    }

    #[test]
    fn general_from_simple_copies_entries_verbatim() {
        let mut rng = rand::rng();
        let a = random_simple(&mut rng, 4);
        let g = general_from_simple(&a).unwrap();
        for (&(symbol, sign), m) in &a.unitaries {
            for q in 0..4 {
                for to in 0..4 {
                    let d = a.direction[&(to, symbol)];
                    assert_eq!(g.amplitude(q, symbol, sign, to, d), m[(to, q)]);
                    for other in Direction::ALL.into_iter().filter(|&x| x != d) {
                        assert_eq!(g.amplitude(q, symbol, sign, to, other), Amplitude::default());
                    }
                }
                let col: f64 = g.transitions(q, symbol, sign).iter().map(|t| t.amp.norm_sqr()).sum();
                assert!((col - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn missing_direction_is_reported() {
        let mut a = identity_automaton();
        a.direction.remove(&(1, TapeSymbol::Input('0')));
        assert!(matches!(general_from_simple(&a), Err(AutomatonError::MissingDirection { .. })));
    }

    #[test]
    fn structure_violations() {
        let g = identity_automaton().to_general();
        assert!(validate_structure(&g).is_empty());

        let mut bad = g.clone();
        bad.control.rejecting.insert(1);
        assert_eq!(validate_structure(&bad), vec![StructureViolation::Disjointness("qa".into())]);

        let mut bad = g.clone();
        bad.add_transition(0, TapeSymbol::Input('0'), CounterSign::Zero, 9, Direction::Stay, one());
        assert!(validate_structure(&bad)
            .contains(&StructureViolation::UnknownState { field: "delta.to", index: 9 }));

        let mut bad = g;
        bad.control.alphabet.push('$');
        assert!(validate_structure(&bad).contains(&StructureViolation::ReservedSymbol('$')));
    }

    #[test]
    fn builder_defaults_to_stay_and_completes() {
        let mut b = SimpleBuilder::new(&['0']);
        let q0 = b.state("q0");
        let q1 = b.state("q1");
        b.maps(TapeSymbol::LeftEnd, &[CounterSign::Zero], q0, q1);
        let a = b.build().unwrap();
        let m = a.unitary(TapeSymbol::LeftEnd, CounterSign::Zero);
        assert_eq!(m[(1, 0)], one());
        assert_eq!(m[(0, 1)], one());
        assert_eq!(a.direction[&(q1, TapeSymbol::RightEnd)], Direction::Stay);
    }
}
