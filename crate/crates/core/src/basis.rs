//! Value types shared by every automaton: tape symbols, head-free counter
//! moves, configurations and sparse state vectors over configurations.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

/// Complex transition amplitude.
pub type Amplitude = Complex64;

/// Entries with modulus below this are dropped after each linear operation.
pub const DEFAULT_PRUNE_EPS: f64 = 1e-15;

/// Left endmarker character.
pub const LEFT_END: char = '#';
/// Right endmarker character.
pub const RIGHT_END: char = '$';

/// A symbol of the tape alphabet: an input letter or one of the two endmarkers.
///
/// The derived order puts `#` first and `$` last so that iteration over a
/// tape alphabet follows tape order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TapeSymbol {
    LeftEnd,
    Input(char),
    RightEnd,
}

impl TapeSymbol {
    pub fn as_char(self) -> char {
        match self {
            TapeSymbol::LeftEnd => LEFT_END,
            TapeSymbol::Input(c) => c,
            TapeSymbol::RightEnd => RIGHT_END,
        }
    }

    /// Reads `#`, `$` as endmarkers and anything else as an input letter.
    pub fn from_char(c: char) -> Self {
        match c {
            LEFT_END => TapeSymbol::LeftEnd,
            RIGHT_END => TapeSymbol::RightEnd,
            c => TapeSymbol::Input(c),
        }
    }
}

impl fmt::Display for TapeSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Counter move attached to a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Left,
    Stay,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Left, Direction::Stay, Direction::Right];

    pub fn displacement(self) -> i64 {
        match self {
            Direction::Left => -1,
            Direction::Stay => 0,
            Direction::Right => 1,
        }
    }

    /// The move with the opposite displacement.
    pub fn reversed(self) -> Direction {
        match self {
            Direction::Left => Direction::Right,
            Direction::Stay => Direction::Stay,
            Direction::Right => Direction::Left,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Direction::Left => "L",
            Direction::Stay => "D",
            Direction::Right => "R",
        }
    }

    pub fn from_code(code: &str) -> Option<Direction> {
        match code {
            "L" => Some(Direction::Left),
            "D" => Some(Direction::Stay),
            "R" => Some(Direction::Right),
            _ => None,
        }
    }
}

/// Free-function form of [`Direction::displacement`].
pub fn displacement(d: Direction) -> i64 {
    d.displacement()
}

/// The only counter information visible to a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CounterSign {
    Zero,
    NonZero,
}

impl CounterSign {
    pub const ALL: [CounterSign; 2] = [CounterSign::Zero, CounterSign::NonZero];

    pub fn bit(self) -> u8 {
        match self {
            CounterSign::Zero => 0,
            CounterSign::NonZero => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Option<CounterSign> {
        match bit {
            0 => Some(CounterSign::Zero),
            1 => Some(CounterSign::NonZero),
            _ => None,
        }
    }
}

pub fn sign(counter: i64) -> CounterSign {
    if counter == 0 {
        CounterSign::Zero
    } else {
        CounterSign::NonZero
    }
}

/// Builds the tape `# word $`.
pub fn tape(word: &str) -> Vec<TapeSymbol> {
    let mut out = Vec::with_capacity(word.chars().count() + 2);
    out.push(TapeSymbol::LeftEnd);
    out.extend(word.chars().map(TapeSymbol::Input));
    out.push(TapeSymbol::RightEnd);
    out
}

/// A basis configuration: control state index plus counter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub state: usize,
    pub counter: i64,
}

impl Configuration {
    pub fn new(state: usize, counter: i64) -> Self {
        Configuration { state, counter }
    }
}

/// Sparse superposition of configurations.
///
/// Entries are kept in a `BTreeMap` so iteration order, and therefore every
/// floating-point accumulation over a vector, is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    entries: BTreeMap<Configuration, Amplitude>,
    prune_eps: f64,
}

impl Default for StateVector {
    fn default() -> Self {
        StateVector::new()
    }
}

impl StateVector {
    pub fn new() -> Self {
        StateVector::with_prune_eps(DEFAULT_PRUNE_EPS)
    }

    pub fn with_prune_eps(prune_eps: f64) -> Self {
        StateVector { entries: BTreeMap::new(), prune_eps }
    }

    /// The unit ket `|c>`.
    pub fn basis(c: Configuration) -> Self {
        let mut v = StateVector::new();
        v.add(c, Amplitude::new(1.0, 0.0));
        v
    }

    pub fn prune_eps(&self) -> f64 {
        self.prune_eps
    }

    /// Accumulates `amp` onto the entry for `c`. Pruning is deferred to
    /// [`StateVector::prune`].
    pub fn add(&mut self, c: Configuration, amp: Amplitude) {
        *self.entries.entry(c).or_insert(Amplitude::new(0.0, 0.0)) += amp;
    }

    pub fn get(&self, c: &Configuration) -> Amplitude {
        self.entries.get(c).copied().unwrap_or_default()
    }

    pub fn prune(&mut self) {
        let eps = self.prune_eps;
        self.entries.retain(|_, a| a.norm() >= eps);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Configuration, &Amplitude)> {
        self.entries.iter()
    }

    pub fn norm2(&self) -> f64 {
        self.entries.values().map(|a| a.norm_sqr()).sum()
    }

    /// Partitions the entries by `member`; the first vector holds the matches.
    pub fn split<F>(&self, mut member: F) -> (StateVector, StateVector)
    where
        F: FnMut(&Configuration) -> bool,
    {
        let mut inside = StateVector::with_prune_eps(self.prune_eps);
        let mut outside = StateVector::with_prune_eps(self.prune_eps);
        for (c, a) in &self.entries {
            if member(c) {
                inside.entries.insert(*c, *a);
            } else {
                outside.entries.insert(*c, *a);
            }
        }
        (inside, outside)
    }

    pub fn scaled(&self, factor: Amplitude) -> StateVector {
        let mut out = StateVector::with_prune_eps(self.prune_eps);
        for (c, a) in &self.entries {
            out.entries.insert(*c, a * factor);
        }
        out.prune();
        out
    }

    /// `self + other`.
    pub fn plus(&self, other: &StateVector) -> StateVector {
        let mut out = self.clone();
        for (c, a) in &other.entries {
            out.add(*c, *a);
        }
        out.prune();
        out
    }

    pub fn min_counter(&self) -> Option<i64> {
        self.entries.keys().map(|c| c.counter).min()
    }
}

impl FromIterator<(Configuration, Amplitude)> for StateVector {
    fn from_iter<I: IntoIterator<Item = (Configuration, Amplitude)>>(iter: I) -> Self {
        let mut v = StateVector::new();
        for (c, a) in iter {
            v.add(c, a);
        }
        v.prune();
        v
    }
}

/// Free-function form of [`StateVector::norm2`].
pub fn norm2(v: &StateVector) -> f64 {
    v.norm2()
}

/// Free-function form of [`StateVector::split`].
pub fn split<F>(v: &StateVector, member: F) -> (StateVector, StateVector)
where
    F: FnMut(&Configuration) -> bool,
{
    v.split(member)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Amplitude {
        Amplitude::new(re, 0.0)
    }

    #[test]
    fn sign_of_counter() {
        assert_eq!(sign(0), CounterSign::Zero);
        assert_eq!(sign(5), CounterSign::NonZero);
        assert_eq!(sign(-3), CounterSign::NonZero);
    }

    #[test]
    fn displacement_values() {
        assert_eq!(displacement(Direction::Left), -1);
        assert_eq!(displacement(Direction::Stay), 0);
        assert_eq!(displacement(Direction::Right), 1);
        for d in Direction::ALL {
            assert!(d.displacement().abs() <= 1);
            assert_eq!(d.reversed().displacement(), -d.displacement());
        }
    }

    #[test]
    fn tape_wraps_word_in_endmarkers() {
        use TapeSymbol::*;
        assert_eq!(tape("01"), vec![LeftEnd, Input('0'), Input('1'), RightEnd]);
        assert_eq!(tape(""), vec![LeftEnd, RightEnd]);
        assert_eq!(tape("000").len(), 5);
    }

    #[test]
    fn norm2_examples() {
        assert_eq!(StateVector::new().norm2(), 0.0);
        assert_eq!(StateVector::basis(Configuration::new(0, 0)).norm2(), 1.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v: StateVector =
            [(Configuration::new(0, 0), c(h)), (Configuration::new(0, 1), c(h))].into_iter().collect();
        assert!((v.norm2() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn split_examples() {
        let v = StateVector::basis(Configuration::new(0, 0));
        let (i, o) = v.split(|c| c.counter == 0);
        assert_eq!(i.len(), 1);
        assert!(o.is_empty());

        let v: StateVector =
            [(Configuration::new(0, 0), c(0.6)), (Configuration::new(0, 1), c(0.8))].into_iter().collect();
        let (i, o) = v.split(|c| c.counter == 0);
        assert!((i.norm2() - 0.36).abs() < 1e-15);
        assert!((o.norm2() - 0.64).abs() < 1e-15);

        let (i, o) = v.split(|_| false);
        assert!(i.is_empty());
        assert_eq!(o, v);
    }

    #[test]
    fn prune_drops_tiny_entries() {
        let mut v = StateVector::new();
        v.add(Configuration::new(0, 0), c(1e-16));
        v.add(Configuration::new(1, 0), c(0.5));
        v.prune();
        assert_eq!(v.len(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn tape_has_endmarkers_only_at_ends(word in "[01]{0,20}") {
            let t = tape(&word);
            prop_assert_eq!(t.len(), word.len() + 2);
            prop_assert_eq!(t[0], TapeSymbol::LeftEnd);
            prop_assert_eq!(*t.last().unwrap(), TapeSymbol::RightEnd);
            for s in &t[1..t.len() - 1] {
                prop_assert!(matches!(s, TapeSymbol::Input(_)));
            }
        }

        #[test]
        fn split_conserves_norm(
            amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -50i64..50), 0..10_000),
            pivot in -50i64..50,
        ) {
            let v: StateVector = amps
                .iter()
                .enumerate()
                .map(|(i, &(re, im, k))| (Configuration::new(i % 7, k), Amplitude::new(re, im)))
                .collect();
            let (i, o) = v.split(|c| c.counter < pivot);
            prop_assert!((i.norm2() + o.norm2() - v.norm2()).abs() <= 1e-12 * v.norm2().max(1.0));
        }
    }
}
