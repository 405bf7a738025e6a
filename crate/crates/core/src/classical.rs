//! Deterministic and probabilistic one-counter automata, used as baselines.
//!
//! These machines read the bare word, without endmarkers, and decide by the
//! final state alone.

use std::collections::{BTreeMap, BTreeSet};

use crate::automaton::AutomatonError;
use crate::basis::{sign, CounterSign, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected,
    Neither,
}

pub type CpfaDelta = BTreeMap<(usize, char, CounterSign), Vec<(usize, Direction, f64)>>;

/// One-counter deterministic automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct Cdfa {
    pub alphabet: Vec<char>,
    pub states: Vec<String>,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    pub rejecting: BTreeSet<usize>,
    pub delta: BTreeMap<(usize, char, CounterSign), (usize, Direction)>,
}

/// One-counter probabilistic automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpfa {
    pub alphabet: Vec<char>,
    pub states: Vec<String>,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    pub rejecting: BTreeSet<usize>,
    pub delta: CpfaDelta,
}

impl Cdfa {
    /// `(q, σ, s)` triples with no transition, or whose target is unknown.
    pub fn undefined(&self) -> Vec<(usize, char, CounterSign)> {
        let mut out = Vec::new();
        for q in 0..self.states.len() {
            for &c in &self.alphabet {
                for s in CounterSign::ALL {
                    match self.delta.get(&(q, c, s)) {
                        Some(&(to, _)) if to < self.states.len() => {}
                        _ => out.push((q, c, s)),
                    }
                }
            }
        }
        out
    }
}

impl Cpfa {
    /// `(q, σ, s)` triples whose outgoing probabilities are negative or do
    /// not sum to 1 within `1e-12`.
    pub fn improper_rows(&self) -> Vec<(usize, char, CounterSign)> {
        let mut out = Vec::new();
        for q in 0..self.states.len() {
            for &c in &self.alphabet {
                for s in CounterSign::ALL {
                    let row = self.delta.get(&(q, c, s)).map(Vec::as_slice).unwrap_or(&[]);
                    let total: f64 = row.iter().map(|t| t.2).sum();
                    if row.iter().any(|t| t.2 < 0.0) || (total - 1.0).abs() > 1e-12 {
                        out.push((q, c, s));
                    }
                }
            }
        }
        out
    }
}

/// Runs a deterministic automaton from counter 0.
///
/// # Panics
///
/// If the transition function is not total on the letters of `word`.
pub fn run_cdfa(a: &Cdfa, word: &str) -> Verdict {
    let (mut q, mut k) = (a.initial, 0i64);
    for c in word.chars() {
        let (to, d) = a.delta[&(q, c, sign(k))];
        q = to;
        k += d.displacement();
    }
    if a.accepting.contains(&q) {
        Verdict::Accepted
    } else if a.rejecting.contains(&q) {
        Verdict::Rejected
    } else {
        Verdict::Neither
    }
}

/// Exact forward propagation of the distribution over `(state, counter)`;
/// returns the mass on accepting states after the last letter.
pub fn run_cpfa(a: &Cpfa, word: &str) -> f64 {
    run_cpfa_distribution(a, word)
        .into_iter()
        .filter(|((q, _), _)| a.accepting.contains(q))
        .map(|(_, p)| p)
        .sum()
}

/// Final distribution over `(state, counter)`.
pub fn run_cpfa_distribution(a: &Cpfa, word: &str) -> BTreeMap<(usize, i64), f64> {
    let mut dist = BTreeMap::from([((a.initial, 0i64), 1.0)]);
    for c in word.chars() {
        let mut next: BTreeMap<(usize, i64), f64> = BTreeMap::new();
        for (&(q, k), &p) in &dist {
            for &(to, d, prob) in &a.delta[&(q, c, sign(k))] {
                *next.entry((to, k + d.displacement())).or_default() += p * prob;
            }
        }
        dist = next;
    }
    dist
}

/// Deterministic recogniser of `0^n 1 0^n` (`n >= 0`).
///
/// The first zero is not counted, so the last zero of the second block is
/// read exactly when the counter is 0 and the verdict can be taken from the
/// state alone.
pub fn build_example1() -> Cdfa {
    let states: Vec<String> = ["start", "first", "second", "done", "dead"].map(String::from).to_vec();
    let (start, first, second, done, dead) = (0, 1, 2, 3, 4);
    let mut delta = BTreeMap::new();
    for s in CounterSign::ALL {
        delta.insert((start, '0', s), (first, Direction::Stay));
        delta.insert((start, '1', s), (done, Direction::Stay));
        delta.insert((first, '0', s), (first, Direction::Right));
        delta.insert((first, '1', s), (second, Direction::Stay));
        delta.insert((second, '1', s), (dead, Direction::Stay));
        delta.insert((done, '0', s), (dead, Direction::Stay));
        delta.insert((done, '1', s), (dead, Direction::Stay));
        delta.insert((dead, '0', s), (dead, Direction::Stay));
        delta.insert((dead, '1', s), (dead, Direction::Stay));
    }
    delta.insert((second, '0', CounterSign::NonZero), (second, Direction::Left));
    delta.insert((second, '0', CounterSign::Zero), (done, Direction::Stay));
    Cdfa {
        alphabet: vec!['0', '1'],
        states,
        initial: start,
        accepting: BTreeSet::from([done]),
        rejecting: BTreeSet::from([start, first, second, dead]),
        delta,
    }
}

/// State layout of one deterministic path of the block-word checker.
struct PathLayout {
    modulus: usize,
    base: usize,
}

impl PathLayout {
    // first block: a_r, r = zeros mod i
    fn a(&self, r: usize) -> usize {
        self.base + r
    }
    // second block: b_r remembers r
    fn b(&self, r: usize) -> usize {
        self.base + self.modulus + r
    }
    // third block: c_{r,t,z}, t = zeros mod i, z = counter is zero now
    fn c(&self, r: usize, t: usize, z: bool) -> usize {
        self.base + 2 * self.modulus + 2 * (r * self.modulus + t) + usize::from(z)
    }
    fn dead(&self) -> usize {
        self.base + 2 * self.modulus + 2 * self.modulus * self.modulus
    }
    fn len(&self) -> usize {
        2 * self.modulus + 2 * self.modulus * self.modulus + 1
    }
    // counter change caused by the zero read at residue t of the third block
    fn third_block_step(&self, t: usize) -> Direction {
        if (t + 1).is_multiple_of(self.modulus) {
            Direction::Stay
        } else {
            Direction::Right
        }
    }
}

/// Adds path `i` (states and transitions, apart from the entry from the
/// initial state) to a deterministic table. The path accepts
/// `0^l 1 0^m 1 0^n` iff `l - n = i (m - n)`.
///
/// Counter: `+1` on every `i`-th zero of the first block, `-1` on every zero
/// of the second, `+1` on all but every `i`-th zero of the third, so the
/// final counter is `⌊l/i⌋ - m + n - ⌊n/i⌋`; with `l ≡ n (mod i)` that is zero
/// exactly when the relation holds. In the third block the move for the
/// *next* zero is applied one letter early, so that the sign read on each
/// zero tells whether the true counter is zero after it.
fn add_classical_path(
    i: usize,
    base: usize,
    names: &mut Vec<String>,
    delta: &mut BTreeMap<(usize, char, CounterSign), (usize, Direction)>,
    accepting: &mut BTreeSet<usize>,
) -> PathLayout {
    let p = PathLayout { modulus: i, base };
    for r in 0..i {
        names.push(format!("p{i}_a{r}"));
    }
    for r in 0..i {
        names.push(format!("p{i}_b{r}"));
    }
    for r in 0..i {
        for t in 0..i {
            names.push(format!("p{i}_c{r}_{t}"));
            names.push(format!("p{i}_c{r}_{t}z"));
        }
    }
    names.push(format!("p{i}_dead"));
    debug_assert_eq!(names.len(), base + p.len());

    for s in CounterSign::ALL {
        for r in 0..i {
            let next = (r + 1) % i;
            let d = if next == 0 { Direction::Right } else { Direction::Stay };
            delta.insert((p.a(r), '0', s), (p.a(next), d));
            delta.insert((p.a(r), '1', s), (p.b(r), Direction::Stay));
            delta.insert((p.b(r), '0', s), (p.b(r), Direction::Left));
            let z = s == CounterSign::Zero;
            delta.insert((p.b(r), '1', s), (p.c(r, 0, z), p.third_block_step(0)));
            for t in 0..i {
                for zf in [false, true] {
                    let t2 = (t + 1) % i;
                    delta.insert((p.c(r, t, zf), '0', s), (p.c(r, t2, z), p.third_block_step(t2)));
                    delta.insert((p.c(r, t, zf), '1', s), (p.dead(), Direction::Stay));
                }
            }
        }
        delta.insert((p.dead(), '0', s), (p.dead(), Direction::Stay));
        delta.insert((p.dead(), '1', s), (p.dead(), Direction::Stay));
    }
    for r in 0..i {
        accepting.insert(p.c(r, r, true));
    }
    p
}

/// Path `i` of the block-word checker as a stand-alone deterministic automaton.
pub fn build_example2_path(i: usize) -> Result<Cdfa, AutomatonError> {
    if i == 0 {
        return Err(AutomatonError::BadParameter("path index must be >= 1".into()));
    }
    let mut names = Vec::new();
    let mut delta = BTreeMap::new();
    let mut accepting = BTreeSet::new();
    let p = add_classical_path(i, 0, &mut names, &mut delta, &mut accepting);
    let rejecting = (0..p.len()).filter(|q| !accepting.contains(q)).collect();
    Ok(Cdfa { alphabet: vec!['0', '1'], states: names, initial: p.a(0), accepting, rejecting, delta })
}

/// Probabilistic recogniser of `0^n 1 0^n 1 0^n`: the first letter picks one
/// of `n` deterministic paths uniformly. Members are accepted with
/// probability 1, other block words with probability at most `1/n`, and
/// anything else is rejected.
pub fn build_example2(n: usize) -> Result<Cpfa, AutomatonError> {
    if n < 2 {
        return Err(AutomatonError::BadParameter(format!("need n >= 2, got {n}")));
    }
    let mut names = vec!["start".to_string()];
    let mut det = BTreeMap::new();
    let mut accepting = BTreeSet::new();
    let mut layouts = Vec::new();
    for i in 1..=n {
        let base = names.len();
        layouts.push(add_classical_path(i, base, &mut names, &mut det, &mut accepting));
    }
    let mut delta: CpfaDelta =
        det.into_iter().map(|(k, (to, d))| (k, vec![(to, d, 1.0)])).collect();
    let weight = 1.0 / n as f64;
    for c in ['0', '1'] {
        // the start state behaves like a_0 of every path at once
        let row: Vec<(usize, Direction, f64)> = layouts
            .iter()
            .map(|p| {
                let (to, d, _) = delta[&(p.a(0), c, CounterSign::Zero)][0];
                (to, d, weight)
            })
            .collect();
        for s in CounterSign::ALL {
            delta.insert((0, c, s), row.clone());
        }
    }
    let rejecting = (0..names.len()).filter(|q| !accepting.contains(q)).collect();
    Ok(Cpfa { alphabet: vec!['0', '1'], states: names, initial: 0, accepting, rejecting, delta })
}
