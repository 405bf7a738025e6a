//! Evolution operator and run semantics.
//!
//! Measure-many runs observe after every tape symbol, including both
//! endmarkers; halting mass is removed and the survivor is *not*
//! renormalised. Whatever survives the right endmarker is the residual, and
//! counts toward rejection in `p_reject_total`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::automaton::{ConfigClass, CounterDomain, GeneralQf1ca, Observation};
use crate::basis::{sign, tape, Amplitude, Configuration, StateVector, TapeSymbol};

/// Longest word accepted by [`brute_force_run`].
pub const BRUTE_FORCE_MAX_LEN: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error("counter reached {counter} in state {state} on a non-negative automaton")]
    NegativeCounter { state: String, counter: i64 },
    #[error("letter {0:?} is not in the input alphabet")]
    UnknownSymbol(char),
    #[error("word of length {len} exceeds the brute-force bound {max}")]
    TooLong { len: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub step_index: usize,
    pub symbol: TapeSymbol,
    pub p_accept_inc: f64,
    pub p_reject_inc: f64,
    pub residual_norm2: f64,
    pub surviving: Option<StateVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub p_accept: f64,
    pub p_reject: f64,
    pub p_residual: f64,
    /// `p_reject + p_residual`.
    pub p_reject_total: f64,
    pub trace: Vec<StepTrace>,
}

impl RunResult {
    fn from_totals(p_accept: f64, p_reject: f64, p_residual: f64, trace: Vec<StepTrace>) -> Self {
        RunResult { p_accept, p_reject, p_residual, p_reject_total: p_reject + p_residual, trace }
    }

    pub fn total(&self) -> f64 {
        self.p_accept + self.p_reject + self.p_residual
    }
}

fn check_word(a: &GeneralQf1ca, word: &str) -> Result<(), RunError> {
    match word.chars().find(|&c| !a.control.accepts_letter(c)) {
        Some(c) => Err(RunError::UnknownSymbol(c)),
        None => Ok(()),
    }
}

fn initial_vector(a: &GeneralQf1ca) -> StateVector {
    StateVector::basis(Configuration::new(a.control.initial, 0))
}

/// One application of the evolution operator for tape symbol `symbol`.
///
/// The sign read by each configuration is that of its counter before the
/// step.
pub fn evolve_step(a: &GeneralQf1ca, symbol: TapeSymbol, v: &StateVector) -> Result<StateVector, RunError> {
    let mut out = StateVector::with_prune_eps(v.prune_eps());
    for (c, amp) in v.iter() {
        for t in a.transitions(c.state, symbol, sign(c.counter)) {
            out.add(Configuration::new(t.to, c.counter + t.dir.displacement()), amp * t.amp);
        }
    }
    out.prune();
    if a.control.counter_domain == CounterDomain::NonNegative {
        if let Some((c, _)) = out.iter().find(|(c, _)| c.counter < 0) {
            return Err(RunError::NegativeCounter {
                state: a.control.state_name(c.state).to_string(),
                counter: c.counter,
            });
        }
    }
    Ok(out)
}

/// Splits `v` into accepting, rejecting and non-halting parts.
fn observe(a: &GeneralQf1ca, v: &StateVector) -> (StateVector, StateVector, StateVector) {
    let (accept, rest) = v.split(|c| a.control.classify(c) == ConfigClass::Accept);
    let (reject, survive) = rest.split(|c| a.control.classify(c) == ConfigClass::Reject);
    (accept, reject, survive)
}

/// Measure-many run; `keep_states` stores the surviving vector in every
/// trace row.
pub fn run_mm_with(a: &GeneralQf1ca, word: &str, keep_states: bool) -> Result<RunResult, RunError> {
    check_word(a, word)?;
    let mut v = initial_vector(a);
    let (mut p_accept, mut p_reject) = (0.0, 0.0);
    let mut trace = Vec::new();
    for (i, symbol) in tape(word).into_iter().enumerate() {
        let next = evolve_step(a, symbol, &v)?;
        let (accept, reject, survive) = observe(a, &next);
        let (inc_a, inc_r) = (accept.norm2(), reject.norm2());
        p_accept += inc_a;
        p_reject += inc_r;
        trace.push(StepTrace {
            step_index: i,
            symbol,
            p_accept_inc: inc_a,
            p_reject_inc: inc_r,
            residual_norm2: survive.norm2(),
            surviving: keep_states.then(|| survive.clone()),
        });
        v = survive;
    }
    Ok(RunResult::from_totals(p_accept, p_reject, v.norm2(), trace))
}

pub fn run_mm(a: &GeneralQf1ca, word: &str) -> Result<RunResult, RunError> {
    run_mm_with(a, word, false)
}

/// Measure-once run: the observable is applied only after `$`.
pub fn run_mo_with(a: &GeneralQf1ca, word: &str, keep_states: bool) -> Result<RunResult, RunError> {
    check_word(a, word)?;
    let symbols = tape(word);
    let last = symbols.len() - 1;
    let mut v = initial_vector(a);
    let mut trace = Vec::new();
    let mut totals = (0.0, 0.0);
    for (i, symbol) in symbols.into_iter().enumerate() {
        v = evolve_step(a, symbol, &v)?;
        if i == last {
            let (accept, reject, survive) = observe(a, &v);
            totals = (accept.norm2(), reject.norm2());
            v = survive;
        }
        trace.push(StepTrace {
            step_index: i,
            symbol,
            p_accept_inc: if i == last { totals.0 } else { 0.0 },
            p_reject_inc: if i == last { totals.1 } else { 0.0 },
            residual_norm2: v.norm2(),
            surviving: keep_states.then(|| v.clone()),
        });
    }
    Ok(RunResult::from_totals(totals.0, totals.1, v.norm2(), trace))
}

pub fn run_mo(a: &GeneralQf1ca, word: &str) -> Result<RunResult, RunError> {
    run_mo_with(a, word, false)
}

/// Runs with the automaton's declared observation policy.
pub fn run(a: &GeneralQf1ca, word: &str) -> Result<RunResult, RunError> {
    match a.control.observation {
        Observation::ManyMeasure => run_mm(a, word),
        Observation::OnceMeasure => run_mo(a, word),
    }
}

/// Measure-many semantics by explicit enumeration of counter trajectories.
///
/// Every trajectory is carried separately with its amplitude product; per
/// step, trajectories ending in the same configuration have their
/// amplitudes summed before squaring, halting configurations are measured
/// and their trajectories dropped. Exponential, hence the length bound.
pub fn brute_force_run(a: &GeneralQf1ca, word: &str) -> Result<RunResult, RunError> {
    let len = word.chars().count();
    if len > BRUTE_FORCE_MAX_LEN {
        return Err(RunError::TooLong { len, max: BRUTE_FORCE_MAX_LEN });
    }
    check_word(a, word)?;
    let start = Configuration::new(a.control.initial, 0);
    let mut paths: Vec<(Vec<Configuration>, Amplitude)> = vec![(vec![start], Amplitude::new(1.0, 0.0))];
    let (mut p_accept, mut p_reject, mut p_residual) = (0.0, 0.0, 0.0);
    let mut trace = Vec::new();
    for (i, symbol) in tape(word).into_iter().enumerate() {
        let mut extended = Vec::new();
        for (path, amp) in &paths {
            let here = *path.last().expect("paths are never empty");
            for t in a.transitions(here.state, symbol, sign(here.counter)) {
                let next = Configuration::new(t.to, here.counter + t.dir.displacement());
                if a.control.counter_domain == CounterDomain::NonNegative && next.counter < 0 {
                    return Err(RunError::NegativeCounter {
                        state: a.control.state_name(next.state).to_string(),
                        counter: next.counter,
                    });
                }
                let mut p = path.clone();
                p.push(next);
                extended.push((p, amp * t.amp));
            }
        }
        let mut endpoint: BTreeMap<Configuration, Amplitude> = BTreeMap::new();
        for (p, amp) in &extended {
            *endpoint.entry(*p.last().unwrap()).or_default() += amp;
        }
        let (mut inc_a, mut inc_r, mut surv) = (0.0, 0.0, 0.0);
        for (c, amp) in &endpoint {
            match a.control.classify(c) {
                ConfigClass::Accept => inc_a += amp.norm_sqr(),
                ConfigClass::Reject => inc_r += amp.norm_sqr(),
                ConfigClass::NonHalting => surv += amp.norm_sqr(),
            }
        }
        p_accept += inc_a;
        p_reject += inc_r;
        p_residual = surv;
        trace.push(StepTrace {
            step_index: i,
            symbol,
            p_accept_inc: inc_a,
            p_reject_inc: inc_r,
            residual_norm2: surv,
            surviving: None,
        });
        paths = extended
            .into_iter()
            .filter(|(p, _)| a.control.classify(p.last().unwrap()) == ConfigClass::NonHalting)
            .collect();
    }
    Ok(RunResult::from_totals(p_accept, p_reject, p_residual, trace))
}

/// Smallest acceptance probability over `members` and smallest total
/// rejection probability over `nonmembers`.
pub fn recognition_margin<S: AsRef<str>>(
    a: &GeneralQf1ca,
    members: &[S],
    nonmembers: &[S],
) -> Result<(f64, f64), RunError> {
    let mut min_accept = f64::INFINITY;
    for w in members {
        min_accept = min_accept.min(run(a, w.as_ref())?.p_accept);
    }
    let mut min_reject = f64::INFINITY;
    for w in nonmembers {
        min_reject = min_reject.min(run(a, w.as_ref())?.p_reject_total);
    }
    Ok((min_accept, min_reject))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{general_from_simple, random_simple};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn runs_conserve_probability_on_random_automata() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let g = general_from_simple(&random_simple(&mut rng, 4)).unwrap();
            for w in ["", "0", "10", "0110", "10101"] {
                let r = run_mm(&g, w).unwrap();
                assert!((r.total() - 1.0).abs() < 1e-9);
                let mut prev = 1.0;
                for row in &r.trace {
                    assert!(row.residual_norm2 <= prev + 1e-12);
                    assert!((row.p_accept_inc + row.p_reject_inc + row.residual_norm2 - prev).abs() < 1e-9);
                    prev = row.residual_norm2;
                }
                let mo = run_mo(&g, w).unwrap();
                assert!((mo.total() - 1.0).abs() < 1e-9);
                let bf = brute_force_run(&g, w).unwrap();
                assert!((bf.p_accept - r.p_accept).abs() < 1e-9);
                assert!((bf.p_reject - r.p_reject).abs() < 1e-9);
                assert!((bf.p_residual - r.p_residual).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn evolve_step_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = general_from_simple(&random_simple(&mut rng, 3)).unwrap();
        let v: StateVector = [
            (Configuration::new(0, 0), Amplitude::new(0.6, 0.0)),
            (Configuration::new(1, 2), Amplitude::new(0.0, 0.8)),
        ]
        .into_iter()
        .collect();
        let w: StateVector = [
            (Configuration::new(2, -1), Amplitude::new(0.3, 0.4)),
            (Configuration::new(0, 0), Amplitude::new(-0.5, 0.1)),
        ]
        .into_iter()
        .collect();
        let (alpha, beta) = (Amplitude::new(0.2, -1.3), Amplitude::new(0.7, 0.5));
        let symbol = TapeSymbol::Input('1');
        let lhs = evolve_step(&g, symbol, &v.scaled(alpha).plus(&w.scaled(beta))).unwrap();
        let rhs = evolve_step(&g, symbol, &v)
            .unwrap()
            .scaled(alpha)
            .plus(&evolve_step(&g, symbol, &w).unwrap().scaled(beta));
        for (c, _) in lhs.iter().chain(rhs.iter()) {
            assert!((lhs.get(c) - rhs.get(c)).norm() < 1e-12);
        }
    }

    #[test]
    fn unknown_letter_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = general_from_simple(&random_simple(&mut rng, 3)).unwrap();
        assert_eq!(run_mm(&g, "012"), Err(RunError::UnknownSymbol('2')));
    }

    #[test]
    fn brute_force_refuses_long_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = general_from_simple(&random_simple(&mut rng, 3)).unwrap();
        assert!(matches!(brute_force_run(&g, "000000000"), Err(RunError::TooLong { len: 9, .. })));
    }
}
