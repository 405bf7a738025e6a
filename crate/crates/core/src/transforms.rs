//! Automaton-to-automaton constructions that duplicate the state set:
//! measure-once to measure-many, and removal of negative counter values.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::automaton::{AcceptanceType, Control, CounterDomain, GeneralQf1ca, Observation};
use crate::basis::{Amplitude, CounterSign, Direction, TapeSymbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("acceptance type {0:?} is not supported by this construction")]
    UnsupportedAcceptance(AcceptanceType),
    #[error("automaton is not measure-once")]
    NotMeasureOnce,
}

/// Primed companions `q'` of the original states. Originals keep indices
/// `0..n`, companion of `q` is `n + q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDuplication {
    pub original: usize,
    pub names: Vec<String>,
}

impl StateDuplication {
    pub fn new(control: &Control) -> Self {
        let mut taken: BTreeSet<String> = control.states.iter().cloned().collect();
        let mut names = control.states.clone();
        for q in &control.states {
            let mut fresh = format!("{q}'");
            while taken.contains(&fresh) {
                fresh.push('\'');
            }
            taken.insert(fresh.clone());
            names.push(fresh);
        }
        StateDuplication { original: control.num_states(), names }
    }

    pub fn primed(&self, q: usize) -> usize {
        self.original + q
    }

    pub fn primed_set(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        set.iter().map(|&q| self.primed(q)).collect()
    }
}

fn one() -> Amplitude {
    Amplitude::new(1.0, 0.0)
}

/// Measure-many automaton whose run equals the measure-once run of `a`.
///
/// Before `$` the original states evolve untouched and are all non-halting;
/// `$` swaps the original and primed halves through the original
/// `$`-transitions, and only primed states accept or reject. Primed states
/// idle on every other symbol.
pub fn mo_to_mm(a: &GeneralQf1ca) -> Result<GeneralQf1ca, TransformError> {
    if a.control.acceptance == AcceptanceType::ZeroCounter {
        return Err(TransformError::UnsupportedAcceptance(a.control.acceptance));
    }
    if a.control.observation != Observation::OnceMeasure {
        return Err(TransformError::NotMeasureOnce);
    }
    let dup = StateDuplication::new(&a.control);
    let control = Control {
        states: dup.names.clone(),
        accepting: dup.primed_set(&a.control.accepting),
        rejecting: dup.primed_set(&a.control.rejecting),
        observation: Observation::ManyMeasure,
        ..a.control.clone()
    };
    let mut out = GeneralQf1ca::new(control);
    for (&(q, symbol, s), list) in &a.delta {
        for t in list {
            if symbol == TapeSymbol::RightEnd {
                out.add_transition(q, symbol, s, dup.primed(t.to), t.dir, t.amp);
                out.add_transition(dup.primed(q), symbol, s, t.to, t.dir, t.amp);
            } else {
                out.add_transition(q, symbol, s, t.to, t.dir, t.amp);
            }
        }
    }
    for q in 0..dup.original {
        for symbol in a.control.tape_alphabet() {
            if symbol == TapeSymbol::RightEnd {
                continue;
            }
            for s in CounterSign::ALL {
                out.add_transition(dup.primed(q), symbol, s, dup.primed(q), Direction::Stay, one());
            }
        }
    }
    Ok(out)
}

/// Equivalent automaton over the non-negative counter domain.
///
/// Configuration `(q, k)` with `k >= 0` stands for itself; `(q', k)` stands
/// for `(q, -k-1)`. This is a bijection of configuration spaces, so the
/// evolution is conjugated exactly. Primed states always read the original
/// table at sign 1; their own sign only tells whether the simulated counter
/// is -1, where a `→` move lands back on the unprimed zero.
///
/// Primed accepting states accept only under state acceptance, because they
/// always represent a nonzero counter. Zero-counter acceptance cannot be
/// expressed: every primed configuration at counter 0 would accept.
pub fn eliminate_negative(a: &GeneralQf1ca) -> Result<GeneralQf1ca, TransformError> {
    let accepting_primed = match a.control.acceptance {
        AcceptanceType::ZeroCounter => {
            return Err(TransformError::UnsupportedAcceptance(a.control.acceptance))
        }
        AcceptanceType::StateAndZero => false,
        AcceptanceType::StateOnly => true,
    };
    let dup = StateDuplication::new(&a.control);
    let mut accepting = a.control.accepting.clone();
    if accepting_primed {
        accepting.extend(dup.primed_set(&a.control.accepting));
    }
    let mut rejecting = a.control.rejecting.clone();
    rejecting.extend(dup.primed_set(&a.control.rejecting));
    let control = Control {
        states: dup.names.clone(),
        accepting,
        rejecting,
        counter_domain: CounterDomain::NonNegative,
        ..a.control.clone()
    };
    let mut out = GeneralQf1ca::new(control);
    use CounterSign::{NonZero, Zero};
    use Direction::{Left, Right, Stay};
    for q in 0..dup.original {
        let qp = dup.primed(q);
        for symbol in a.control.tape_alphabet() {
            for t in a.transitions(q, symbol, NonZero) {
                out.add_transition(q, symbol, NonZero, t.to, t.dir, t.amp);
            }
            for t in a.transitions(q, symbol, Zero) {
                match t.dir {
                    Left => out.add_transition(q, symbol, Zero, dup.primed(t.to), Stay, t.amp),
                    d => out.add_transition(q, symbol, Zero, t.to, d, t.amp),
                }
            }
            for t in a.transitions(q, symbol, NonZero) {
                let to = dup.primed(t.to);
                out.add_transition(qp, symbol, NonZero, to, t.dir.reversed(), t.amp);
                match t.dir {
                    Right => out.add_transition(qp, symbol, Zero, t.to, Stay, t.amp),
                    d => out.add_transition(qp, symbol, Zero, to, d.reversed(), t.amp),
                }
            }
        }
    }
    Ok(out)
}
