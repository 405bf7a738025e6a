//! Numerical well-formedness checks.
//!
//! Three independent views of the same property are provided:
//!
//! * [`check_conditions`] evaluates the local sum conditions on a general
//!   transition table (orthonormality, separability I and II).
//! * [`check_simple`] tests each `V_{γ,s}` of a factored automaton for
//!   unitarity.
//! * [`isometry_oracle`] materialises the evolution operator on a truncated
//!   configuration space and measures how far its column Gram matrix is from
//!   the identity. It shares no code with the other two and is the ground
//!   truth they are tested against.
//!
//! Residuals are element-wise max norms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::automaton::{CounterDomain, GeneralQf1ca, SimpleQf1ca};
use crate::basis::{sign, tape, Amplitude, Configuration, CounterSign, Direction, TapeSymbol};

/// Default tolerance for unitarity residuals.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Which of the three sum conditions a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    /// Local probability and orthogonality.
    Orthonormality,
    /// `→` against `↓` and `↓` against `←`: counters one apart.
    SeparabilityI,
    /// `→` against `←`: counters two apart.
    SeparabilityII,
}

impl Condition {
    pub fn number(self) -> u8 {
        match self {
            Condition::Orthonormality => 1,
            Condition::SeparabilityI => 2,
            Condition::SeparabilityII => 3,
        }
    }
}

/// How counter signs are assigned to the two factors of each sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckMode {
    /// Every condition is evaluated with one shared sign, as the conditions
    /// are usually written.
    Literal,
    /// Separability sums are evaluated for every sign pair that two
    /// configurations one or two counter steps apart can actually have in
    /// the automaton's counter domain. Orthonormality always compares equal
    /// counters, hence equal signs.
    Strict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub condition: Condition,
    pub symbol: TapeSymbol,
    /// Sign seen by the first (conjugated) factor, then by the second.
    pub signs: (CounterSign, CounterSign),
    pub states: (usize, usize),
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub violations: Vec<Violation>,
    pub max_residual: f64,
    pub mode: CheckMode,
}

impl ConditionReport {
    fn new(mode: CheckMode, mut violations: Vec<Violation>) -> Self {
        violations.sort_by(|a, b| {
            (a.condition, a.symbol, a.signs, a.states).cmp(&(b.condition, b.symbol, b.signs, b.states))
        });
        let max_residual = violations.iter().map(|v| v.residual).fold(0.0, f64::max);
        ConditionReport { violations, max_residual, mode }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_condition(&self, condition: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "condition ({}) symbol {} signs ({},{}) states ({},{}) residual {:.3e}",
            self.condition.number(),
            self.symbol,
            self.signs.0.bit(),
            self.signs.1.bit(),
            self.states.0,
            self.states.1,
            self.residual
        )
    }
}

type TargetIndex = BTreeMap<(usize, Direction), Vec<(usize, Amplitude)>>;

/// For one `(γ, s)`: target `(q', d)` → list of `(source q, δ(q,γ,s,q',d))`.
fn index_by_target(a: &GeneralQf1ca, symbol: TapeSymbol, s: CounterSign) -> TargetIndex {
    let mut idx: TargetIndex = BTreeMap::new();
    for q in 0..a.control.num_states() {
        for t in a.transitions(q, symbol, s) {
            idx.entry((t.to, t.dir)).or_default().push((q, t.amp));
        }
    }
    idx
}

fn accumulate(
    sums: &mut BTreeMap<(usize, usize), Amplitude>,
    first: Option<&Vec<(usize, Amplitude)>>,
    second: Option<&Vec<(usize, Amplitude)>>,
) {
    let (Some(first), Some(second)) = (first, second) else { return };
    for &(q1, a1) in first {
        for &(q2, a2) in second {
            *sums.entry((q1, q2)).or_default() += a1.conj() * a2;
        }
    }
}

fn separability_sign_pairs(mode: CheckMode, domain: CounterDomain) -> Vec<(CounterSign, CounterSign)> {
    use CounterSign::{NonZero, Zero};
    match (mode, domain) {
        (CheckMode::Literal, _) => vec![(Zero, Zero), (NonZero, NonZero)],
        (CheckMode::Strict, CounterDomain::AllIntegers) => {
            vec![(Zero, NonZero), (NonZero, Zero), (NonZero, NonZero)]
        }
        (CheckMode::Strict, CounterDomain::NonNegative) => vec![(Zero, NonZero), (NonZero, NonZero)],
    }
}

/// Evaluates the three sum conditions for every tape symbol, every ordered
/// state pair and the sign pairs selected by `mode`. Sums whose deviation
/// exceeds `tol` are reported.
pub fn check_conditions(a: &GeneralQf1ca, tol: f64, mode: CheckMode) -> ConditionReport {
    let n = a.control.num_states();
    let mut violations = Vec::new();
    let sep_pairs = separability_sign_pairs(mode, a.control.counter_domain);

    for symbol in a.control.tape_alphabet() {
        let index: BTreeMap<CounterSign, TargetIndex> =
            CounterSign::ALL.iter().map(|&s| (s, index_by_target(a, symbol, s))).collect();

        for s in CounterSign::ALL {
            let idx = &index[&s];
            let mut sums = BTreeMap::new();
            for list in idx.values() {
                accumulate(&mut sums, Some(list), Some(list));
            }
            for q in 0..n {
                sums.entry((q, q)).or_default();
            }
            for ((q1, q2), sum) in sums {
                let expected = if q1 == q2 { 1.0 } else { 0.0 };
                let residual = (sum - Amplitude::new(expected, 0.0)).norm();
                if residual > tol {
                    violations.push(Violation {
                        condition: Condition::Orthonormality,
                        symbol,
                        signs: (s, s),
                        states: (q1, q2),
                        residual,
                    });
                }
            }
        }

        let targets: BTreeSet<usize> =
            index.values().flat_map(|idx| idx.keys().map(|&(to, _)| to)).collect();
        for &(s1, s2) in &sep_pairs {
            let (first, second) = (&index[&s1], &index[&s2]);
            let mut sep1 = BTreeMap::new();
            let mut sep2 = BTreeMap::new();
            for &to in &targets {
                accumulate(&mut sep1, first.get(&(to, Direction::Right)), second.get(&(to, Direction::Stay)));
                accumulate(&mut sep1, first.get(&(to, Direction::Stay)), second.get(&(to, Direction::Left)));
                accumulate(&mut sep2, first.get(&(to, Direction::Right)), second.get(&(to, Direction::Left)));
            }
            for (condition, sums) in [(Condition::SeparabilityI, sep1), (Condition::SeparabilityII, sep2)] {
                for ((q1, q2), sum) in sums {
                    let residual = sum.norm();
                    if residual > tol {
                        violations.push(Violation {
                            condition,
                            symbol,
                            signs: (s1, s2),
                            states: (q1, q2),
                            residual,
                        });
                    }
                }
            }
        }
    }
    ConditionReport::new(mode, violations)
}

/// Max-norm of `m†m − I` together with the entry where it is attained.
fn unitarity_residual(m: &DMatrix<Amplitude>) -> (f64, (usize, usize)) {
    let gram = m.adjoint() * m;
    let mut worst = (0.0, (0, 0));
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let expected = if i == j { Amplitude::new(1.0, 0.0) } else { Amplitude::new(0.0, 0.0) };
            let r = (gram[(i, j)] - expected).norm();
            if r > worst.0 {
                worst = (r, (i, j));
            }
        }
    }
    worst
}

/// Returns whether `m` is unitary within `tol`, and the residual.
pub fn check_matrix_unitary(m: &DMatrix<Amplitude>, tol: f64) -> (bool, f64) {
    if m.nrows() != m.ncols() {
        return (false, f64::INFINITY);
    }
    let (r, _) = unitarity_residual(m);
    (r <= tol, r)
}

/// Unitarity of every `V_{γ,s}`. Failures are reported as orthonormality
/// violations at the worst column pair.
pub fn check_simple(a: &SimpleQf1ca, tol: f64) -> ConditionReport {
    let mut violations = Vec::new();
    for (&(symbol, s), m) in &a.unitaries {
        let (residual, states) = unitarity_residual(m);
        if residual > tol {
            violations.push(Violation {
                condition: Condition::Orthonormality,
                symbol,
                signs: (s, s),
                states,
                residual,
            });
        }
    }
    ConditionReport::new(CheckMode::Strict, violations)
}

/// Column of the evolution operator for one source configuration, built
/// straight from the transition table.
fn operator_column(a: &GeneralQf1ca, symbol: TapeSymbol, q: usize, k: i64) -> BTreeMap<Configuration, Amplitude> {
    let mut col: BTreeMap<Configuration, Amplitude> = BTreeMap::new();
    for t in a.transitions(q, symbol, sign(k)) {
        *col.entry(Configuration::new(t.to, k + t.dir.displacement())).or_default() += t.amp;
    }
    col
}

/// Largest deviation from the identity of the column Gram matrix of the
/// one-step operator, over every step of `# word $`.
///
/// Source columns are all configurations with `|k| <= counter_bound`
/// (`0 <= k <= counter_bound` for non-negative automata); their images may
/// reach one step further. The Gram matrix of a set of columns is exact
/// regardless of the truncation, so any bound gives a valid lower estimate
/// of the global defect; `|word| + 2` covers every reachable configuration.
pub fn isometry_oracle(a: &GeneralQf1ca, word: &str, counter_bound: i64) -> f64 {
    let n = a.control.num_states();
    let low = match a.control.counter_domain {
        CounterDomain::AllIntegers => -counter_bound,
        CounterDomain::NonNegative => 0,
    };
    let symbols: BTreeSet<TapeSymbol> = tape(word).into_iter().collect();
    let mut worst: f64 = 0.0;
    for symbol in symbols {
        let mut columns = Vec::new();
        for q in 0..n {
            for k in low..=counter_bound {
                columns.push(operator_column(a, symbol, q, k));
            }
        }
        // rows[target] = [(column index, amplitude)]
        let mut rows: BTreeMap<Configuration, Vec<(usize, Amplitude)>> = BTreeMap::new();
        for (j, col) in columns.iter().enumerate() {
            for (c, amp) in col {
                rows.entry(*c).or_default().push((j, *amp));
            }
        }
        let mut gram: BTreeMap<(usize, usize), Amplitude> = BTreeMap::new();
        for entries in rows.values() {
            for &(i, ai) in entries {
                for &(j, aj) in entries {
                    *gram.entry((i, j)).or_default() += ai.conj() * aj;
                }
            }
        }
        for j in 0..columns.len() {
            gram.entry((j, j)).or_default();
        }
        for ((i, j), g) in gram {
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - Amplitude::new(expected, 0.0)).norm());
        }
    }
    worst
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompletionError {
    #[error("given columns are not orthonormal (residual {residual:.3e})")]
    NotIsometric { residual: f64 },
    #[error("column index {index} out of range for order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("column {index} has length {len}, expected {order}")]
    WrongLength { index: usize, len: usize, order: usize },
}

const ISOMETRY_TOL: f64 = 1e-9;
const PIVOT_MIN: f64 = 1e-6;

fn orthogonalize(v: &mut DVector<Amplitude>, basis: &[DVector<Amplitude>]) {
    // two passes keep the result orthogonal to machine precision
    for _ in 0..2 {
        for b in basis {
            let proj = b.dotc(v);
            *v -= b * proj;
        }
    }
}

/// Extends the given orthonormal columns to an `order × order` unitary.
///
/// Unspecified columns are filled in ascending column order, each with the
/// next standard basis vector (ascending index) that is not already in the
/// span of the columns placed so far, orthonormalised by Gram-Schmidt. The
/// result is bit-for-bit reproducible.
pub fn complete_unitary(
    partial: &BTreeMap<usize, DVector<Amplitude>>,
    order: usize,
) -> Result<DMatrix<Amplitude>, CompletionError> {
    for (&index, v) in partial {
        if index >= order {
            return Err(CompletionError::IndexOutOfRange { index, order });
        }
        if v.len() != order {
            return Err(CompletionError::WrongLength { index, len: v.len(), order });
        }
    }
    let given: Vec<&DVector<Amplitude>> = partial.values().collect();
    let mut residual: f64 = 0.0;
    for (i, a) in given.iter().enumerate() {
        for (j, b) in given.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            residual = residual.max((a.dotc(b) - Amplitude::new(expected, 0.0)).norm());
        }
    }
    if residual > ISOMETRY_TOL {
        return Err(CompletionError::NotIsometric { residual });
    }

    let mut basis: Vec<DVector<Amplitude>> = given.iter().map(|v| (*v).clone()).collect();
    let mut filled: BTreeMap<usize, DVector<Amplitude>> = BTreeMap::new();
    let mut candidate = 0;
    for col in (0..order).filter(|c| !partial.contains_key(c)) {
        let mut chosen = None;
        while candidate < order {
            let mut v = DVector::from_element(order, Amplitude::new(0.0, 0.0));
            v[candidate] = Amplitude::new(1.0, 0.0);
            candidate += 1;
            orthogonalize(&mut v, &basis);
            let norm = v.norm();
            if norm > PIVOT_MIN {
                chosen = Some(v / Amplitude::new(norm, 0.0));
                break;
            }
        }
        let v = match chosen {
            Some(v) => v,
            // Only reachable when the given columns are orthonormal but
            // nearly aligned with many basis vectors: take the basis vector
            // with the largest remaining component.
            None => {
                let mut best = None;
                let mut best_norm = 0.0;
                for b in 0..order {
                    let mut v = DVector::from_element(order, Amplitude::new(0.0, 0.0));
                    v[b] = Amplitude::new(1.0, 0.0);
                    orthogonalize(&mut v, &basis);
                    let norm = v.norm();
                    if norm > best_norm {
                        best_norm = norm;
                        best = Some(v / Amplitude::new(norm, 0.0));
                    }
                }
                best.expect("complement of a proper subspace is nonempty")
            }
        };
        basis.push(v.clone());
        filled.insert(col, v);
    }

    let mut m = DMatrix::from_element(order, order, Amplitude::new(0.0, 0.0));
    for (col, v) in partial.iter().chain(filled.iter()) {
        m.set_column(*col, v);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{general_from_simple, random_simple};
    use crate::basis::TapeSymbol::Input;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Amplitude {
        Amplitude::new(re, 0.0)
    }

    fn unit(n: usize, i: usize) -> DVector<Amplitude> {
        let mut v = DVector::from_element(n, c(0.0));
        v[i] = c(1.0);
        v
    }

    #[test]
    fn matrix_unitarity_examples() {
        let id = DMatrix::<Amplitude>::identity(2, 2);
        assert_eq!(check_matrix_unitary(&id, 1e-12), (true, 0.0));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = DMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)]);
        let (ok, r) = check_matrix_unitary(&had, 1e-15);
        assert!(ok, "residual {r}");

        let shear = DMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        let (ok, r) = check_matrix_unitary(&shear, 1e-9);
        assert!(!ok);
        assert!(r >= 1.0);
    }

    #[test]
    fn completion_of_single_basis_column_is_identity() {
        let partial = BTreeMap::from([(0, unit(3, 0))]);
        let m = complete_unitary(&partial, 3).unwrap();
        assert_eq!(m, DMatrix::identity(3, 3));
    }

    #[test]
    fn completion_of_swapped_column_is_permutation() {
        let partial = BTreeMap::from([(0, unit(3, 1))]);
        let m = complete_unitary(&partial, 3).unwrap();
        assert_eq!(m.column(1).into_owned(), unit(3, 0));
        assert_eq!(m.column(2).into_owned(), unit(3, 2));
    }

    #[test]
    fn completion_rejects_non_isometric_input() {
        let partial = BTreeMap::from([(0, unit(3, 1)), (2, unit(3, 1))]);
        assert!(matches!(complete_unitary(&partial, 3), Err(CompletionError::NotIsometric { .. })));
        let partial = BTreeMap::from([(0, unit(3, 1) * c(2.0))]);
        assert!(matches!(complete_unitary(&partial, 3), Err(CompletionError::NotIsometric { .. })));
    }

    #[test]
    fn completion_is_deterministic_and_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_simple(&mut rng, 5);
            for m in a.unitaries.values() {
                let (ok, r) = check_matrix_unitary(m, 1e-12);
                assert!(ok, "residual {r}");
            }
        }
        let p = 0.3f64;
        let mut c1 = DVector::from_element(6, c(0.0));
        c1[1] = c(1.0 - p);
        c1[2] = c((p * (1.0 - p)).sqrt());
        c1[4] = c(p.sqrt());
        let mut c2 = DVector::from_element(6, c(0.0));
        c2[1] = c((p * (1.0 - p)).sqrt());
        c2[2] = c(p);
        c2[4] = c(-(1.0 - p).sqrt());
        let partial = BTreeMap::from([(1, c1), (2, c2)]);
        let m1 = complete_unitary(&partial, 6).unwrap();
        let m2 = complete_unitary(&partial, 6).unwrap();
        assert_eq!(m1, m2);
        assert!(check_matrix_unitary(&m1, 1e-12).0);
    }

    #[test]
    fn random_automata_pass_both_modes_and_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = random_simple(&mut rng, 3);
            let g = general_from_simple(&a).unwrap();
            assert!(check_simple(&a, 1e-9).passed());
            assert!(check_conditions(&g, 1e-9, CheckMode::Literal).passed());
            assert!(check_conditions(&g, 1e-9, CheckMode::Strict).passed());
            for w in ["", "0", "01", "110"] {
                assert!(isometry_oracle(&g, w, w.len() as i64 + 2) <= 1e-9);
            }
        }
    }

    #[test]
    fn scaled_amplitude_breaks_condition_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_simple(&mut rng, 3);
        let mut g = general_from_simple(&a).unwrap();
        let key = (0, Input('0'), CounterSign::NonZero);
        let t = g.delta[&key][0];
        g.set_transition(0, Input('0'), CounterSign::NonZero, t.to, t.dir, t.amp * 1.01);
        let report = check_conditions(&g, 1e-9, CheckMode::Strict);
        let diag = report
            .violations
            .iter()
            .find(|v| v.condition == Condition::Orthonormality && v.states == (0, 0))
            .expect("diagonal violation");
        assert!((diag.residual - 0.0201 * t.amp.norm_sqr()).abs() < 1e-12);
        assert!(isometry_oracle(&g, "0", 3) >= diag.residual - 1e-12);
    }

    #[test]
    fn sign_boundary_defect_is_strict_only() {
        // δ(q,0,0,q,→)=1 and δ(q,0,1,q,↓)=1 on a single state: columns at
        // k=0 and k=1 both land on (q,1). Same-sign sums cannot see this.
        use crate::automaton::{AcceptanceType, Control, Observation};
        let control = Control {
            alphabet: vec!['0'],
            states: vec!["q".into()],
            initial: 0,
            accepting: BTreeSet::new(),
            rejecting: BTreeSet::new(),
            acceptance: AcceptanceType::StateAndZero,
            observation: Observation::ManyMeasure,
            counter_domain: CounterDomain::AllIntegers,
        };
        let mut g = GeneralQf1ca::new(control);
        for symbol in g.control.tape_alphabet() {
            for s in CounterSign::ALL {
                g.set_transition(0, symbol, s, 0, Direction::Stay, c(1.0));
            }
        }
        g.set_transition(0, Input('0'), CounterSign::Zero, 0, Direction::Stay, c(0.0));
        g.set_transition(0, Input('0'), CounterSign::Zero, 0, Direction::Right, c(1.0));
        assert!(check_conditions(&g, 1e-9, CheckMode::Literal).passed());
        let strict = check_conditions(&g, 1e-9, CheckMode::Strict);
        assert!(strict.has_condition(Condition::SeparabilityI));
        assert!(isometry_oracle(&g, "0", 3) > 0.5);
    }

    #[test]
    fn zeroed_row_fails_check_simple() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut a = random_simple(&mut rng, 4);
        let key = (Input('1'), CounterSign::Zero);
        let m = a.unitaries.get_mut(&key).unwrap();
        for j in 0..4 {
            m[(2, j)] = c(0.0);
        }
        let report = check_simple(&a, 1e-9);
        assert!(!report.passed());
        assert!(report.violations.iter().all(|v| (v.symbol, v.signs.0) == key));
        let g = general_from_simple(&a).unwrap();
        assert!(!check_conditions(&g, 1e-9, CheckMode::Strict).passed());
    }
}
