//! Concrete automata: the block-word recognisers and their parameters.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::automaton::{AcceptanceType, AutomatonError, CounterDomain, Observation, SimpleBuilder, SimpleQf1ca};
use crate::basis::{Amplitude, CounterSign, Direction, TapeSymbol};

use CounterSign::{NonZero, Zero};
use Direction::{Left, Right, Stay};

const BOTH: &[CounterSign] = &[Zero, NonZero];
const HASH: TapeSymbol = TapeSymbol::LeftEnd;
const END: TapeSymbol = TapeSymbol::RightEnd;
const ZERO: TapeSymbol = TapeSymbol::Input('0');
const ONE: TapeSymbol = TapeSymbol::Input('1');

fn re(x: f64) -> Amplitude {
    Amplitude::new(x, 0.0)
}

/// Real root of `p³ + p - 1`, by bisection on `[0, 1]`.
pub fn critical_p() -> f64 {
    let f = |p: f64| p * p * p + p - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterVariant {
    IntegerCounter,
    NonNegative,
}

/// Deterministic recogniser of `0^n 1 0^n`.
///
/// The counter goes up on the first block and down on the second; `$`
/// accepts from `q2` at counter 0. A second `1` is rejected on the spot.
/// The non-negative variant rejects a zero read at counter 0 in the second
/// block instead of letting the counter go below 0.
pub fn build_example3(variant: CounterVariant) -> SimpleQf1ca {
    let mut b = SimpleBuilder::new(&['0', '1']);
    let q0 = b.state("q0");
    let q1 = b.state("q1");
    let q2 = b.state("q2");
    let qa = b.accepting("q_a");
    let qr = b.rejecting("q_r");
    let qr2 = b.rejecting("q_r2");
    b.maps(HASH, &[Zero], q0, q1)
        .maps(ZERO, BOTH, q1, q1)
        .maps(ONE, BOTH, q1, q2)
        .maps(ONE, BOTH, q2, qr2)
        .maps(END, BOTH, q1, qr)
        .maps(END, &[NonZero], q2, qr2)
        .maps(END, &[Zero], q2, qa)
        .direction(q1, HASH, Stay)
        .direction(q1, ZERO, Right)
        .direction(q2, ZERO, Left)
        .direction(q2, ONE, Stay);
    match variant {
        CounterVariant::IntegerCounter => {
            b.maps(ZERO, BOTH, q2, q2);
        }
        CounterVariant::NonNegative => {
            b.maps(ZERO, &[NonZero], q2, q2)
                .maps(ZERO, &[Zero], q2, qr)
                .counter_domain(CounterDomain::NonNegative);
        }
    }
    b.build().expect("columns are orthonormal")
}

/// Recogniser of `0^n 1^n` accepting members with probability `p`.
///
/// `√(1-p)|q1> + √p|q2>` is a fixed point of the 0-step, so zeros cost
/// nothing; the first `1` rejects the `q1` part and `q2` counts down.
pub fn build_example4(p: f64) -> Result<SimpleQf1ca, AutomatonError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(AutomatonError::BadParameter(format!("p must lie in (0, 1), got {p}")));
    }
    let (sp, sq) = (p.sqrt(), (1.0 - p).sqrt());
    let mut b = SimpleBuilder::new(&['0', '1']);
    let q0 = b.state("q0");
    let q1 = b.state("q1");
    let q2 = b.state("q2");
    let qa = b.accepting("q_a");
    let qr = b.rejecting("q_r");
    let qr2 = b.rejecting("q_r2");
    b.column(HASH, &[Zero], q0, &[(q1, re(sq)), (q2, re(sp))])
        .column(ZERO, BOTH, q1, &[(q1, re(1.0 - p)), (q2, re(sp * sq)), (qr, re(sp))])
        .column(ZERO, BOTH, q2, &[(q1, re(sp * sq)), (q2, re(p)), (qr, re(-sq))])
        .maps(ONE, BOTH, q1, qr)
        .maps(ONE, &[NonZero], q2, q2)
        .maps(ONE, &[Zero], q2, qr2)
        .maps(END, BOTH, q1, qr)
        .maps(END, &[NonZero], q2, qr2)
        .maps(END, &[Zero], q2, qa);
    for q in [q1, q2] {
        b.direction(q, HASH, Stay).direction(q, ZERO, Right).direction(q, ONE, Left);
    }
    b.build()
}

/// Whether path `i` accepts `0^l 1 0^m 1 0^n`: `l - n = i (m - n)`.
pub fn path_predicate(i: usize, l: usize, m: usize, n: usize) -> bool {
    let (i, l, m, n) = (i as i64, l as i64, m as i64, n as i64);
    l - n == i * (m - n)
}

/// Adds the reversible path `i` to `b` and returns its entry state.
///
/// Block 1 counts up once per `i` zeros (`a_r`, `r = l mod i`), block 2
/// counts down on every zero (`b_r`), block 3 counts up on all but every
/// `i`-th zero (`c_{r,t}`, `t = n mod i`). The counter ends at 0 with
/// `r = t` iff `l - n = i (m - n)`.
fn add_quantum_path(b: &mut SimpleBuilder, i: usize) -> usize {
    let a: Vec<usize> = (0..i).map(|r| b.state(&format!("p{i}_a{r}"))).collect();
    let bb: Vec<usize> = (0..i).map(|r| b.state(&format!("p{i}_b{r}"))).collect();
    let c: Vec<Vec<usize>> =
        (0..i).map(|r| (0..i).map(|t| b.state(&format!("p{i}_c{r}_{t}"))).collect()).collect();
    let acc: Vec<usize> = (0..i).map(|r| b.accepting(&format!("p{i}_acc{r}"))).collect();
    let mut pool = 0;
    let mut fresh_reject = |b: &mut SimpleBuilder| {
        pool += 1;
        b.rejecting(&format!("p{i}_rej{}", pool - 1))
    };

    for r in 0..i {
        let next = (r + 1) % i;
        b.maps(ZERO, BOTH, a[r], a[next]);
        b.maps(ONE, BOTH, a[r], bb[r]);
        b.maps(ZERO, BOTH, bb[r], bb[r]);
        b.maps(ONE, BOTH, bb[r], c[r][0]);
        for t in 0..i {
            b.maps(ZERO, BOTH, c[r][t], c[r][(t + 1) % i]);
            b.direction(c[r][t], ZERO, if t == 0 { Stay } else { Right });
        }
        b.direction(a[r], ZERO, if r == 0 { Right } else { Stay });
        b.direction(bb[r], ZERO, Left);
    }

    // rejection of malformed words and of the final verdict
    let mut end_zero = Vec::new();
    let mut end_nonzero = Vec::new();
    for q in a.iter().chain(&bb) {
        end_zero.push(*q);
        end_nonzero.push(*q);
    }
    for (r, row) in c.iter().enumerate() {
        for (t, &q) in row.iter().enumerate() {
            if r == t {
                b.maps(END, &[Zero], q, acc[r]);
            } else {
                end_zero.push(q);
            }
            end_nonzero.push(q);
        }
    }
    let pool_size = end_zero.len().max(end_nonzero.len()).max(i * i);
    let rejects: Vec<usize> = (0..pool_size).map(|_| fresh_reject(b)).collect();
    for (q, r) in end_zero.iter().zip(&rejects) {
        b.maps(END, &[Zero], *q, *r);
    }
    for (q, r) in end_nonzero.iter().zip(&rejects) {
        b.maps(END, &[NonZero], *q, *r);
    }
    for (q, r) in c.iter().flatten().zip(&rejects) {
        b.maps(ONE, BOTH, *q, *r);
    }
    a[0]
}

/// Recogniser of `0^n 1 0^n 1 0^n`: `#` splits uniformly into `big_n`
/// reversible paths, path `i` accepting exactly the block words with
/// `l - n = i (m - n)`. Members are accepted with probability 1 and other
/// block words with probability at most `1/big_n`.
pub fn build_example5(big_n: usize) -> Result<SimpleQf1ca, AutomatonError> {
    if big_n < 2 {
        return Err(AutomatonError::BadParameter(format!("need N >= 2, got {big_n}")));
    }
    let mut b = SimpleBuilder::new(&['0', '1']);
    let q0 = b.state("q0");
    let entries: Vec<usize> = (1..=big_n).map(|i| add_quantum_path(&mut b, i)).collect();
    let w = re(1.0 / (big_n as f64).sqrt());
    let image: Vec<(usize, Amplitude)> = entries.iter().map(|&q| (q, w)).collect();
    b.column(HASH, &[Zero], q0, &image);
    b.build()
}

/// Path `i` of [`build_example5`] on its own, entered with amplitude 1.
pub fn build_example5_path(i: usize) -> Result<SimpleQf1ca, AutomatonError> {
    if i == 0 {
        return Err(AutomatonError::BadParameter("path index must be >= 1".into()));
    }
    let mut b = SimpleBuilder::new(&['0', '1']);
    let q0 = b.state("q0");
    let entry = add_quantum_path(&mut b, i);
    b.maps(HASH, &[Zero], q0, entry);
    b.build()
}

/// Three-block word with exactly one of `l = n`, `m = n`, accepted with
/// probability 4/7 and rejected with probability 4/7 otherwise.
///
/// `#` sends weight 3/7 straight to `q_a` and 2/7 into each of two paths
/// whose counters end at `l - n` and `m - n`. At `$` the two paths
/// interfere on `q_a`: destructively when both counters are 0.
pub fn build_theorem5() -> SimpleQf1ca {
    let mut b = SimpleBuilder::new(&['0', '1']);
    let q0 = b.state("q0");
    let q1 = b.state("q1");
    let q1m = b.state("q1m");
    let q1p = b.state("q1'");
    let q2 = b.state("q2");
    let q2m = b.state("q2m");
    let q2p = b.state("q2'");
    let qa = b.accepting("q_a");
    let qr = b.rejecting("q_r");
    let r: Vec<usize> = (1..=4).map(|k| b.rejecting(&format!("r{k}"))).collect();

    let (w2, w3) = (re((2.0f64 / 7.0).sqrt()), re((3.0f64 / 7.0).sqrt()));
    let h = re(std::f64::consts::FRAC_1_SQRT_2);
    b.column(HASH, &[Zero], q0, &[(q1, w2), (q2, w2), (qa, w3)]);
    for (x, xm, xp, rej_short, rej_mid, rej_long) in
        [(q1, q1m, q1p, r[0], r[1], r[0]), (q2, q2m, q2p, r[2], r[3], r[2])]
    {
        b.maps(ZERO, BOTH, x, x)
            .maps(ZERO, BOTH, xm, xm)
            .maps(ZERO, BOTH, xp, xp)
            .maps(ONE, BOTH, x, xm)
            .maps(ONE, BOTH, xm, xp)
            .maps(ONE, BOTH, xp, rej_long)
            .maps(END, BOTH, x, rej_short)
            .maps(END, BOTH, xm, rej_mid);
    }
    b.column(END, BOTH, q1p, &[(qa, h), (qr, h)]);
    b.column(END, BOTH, q2p, &[(qa, -h), (qr, h)]);
    // path 1 measures l - n, path 2 measures m - n
    b.direction(q1, ZERO, Right).direction(q1m, ZERO, Stay).direction(q1p, ZERO, Left);
    b.direction(q2, ZERO, Stay).direction(q2m, ZERO, Right).direction(q2p, ZERO, Left);
    b.build().expect("columns are orthonormal")
}

/// Three paths ending at counters `l - m`, `l - n`, `m - n`, recognising
/// block words with exactly two equal blocks.
///
/// `#` puts weight 8/17 on `q_a` and 3/17 on each path. At `$` a path
/// whose counter is 0 is spread by a 3-point Fourier transform over
/// `(r0, q_a, r2)`, so `q_a` collects 1/17 when exactly one path is at 0
/// and nothing when all three are. The margin is 9/17.
pub fn build_theorem6_experimental() -> SimpleQf1ca {
    let mut b = SimpleBuilder::new(&['0', '1']);
    let q0 = b.state("q0");
    let moves = [[Right, Left, Stay], [Right, Stay, Left], [Stay, Right, Left]];
    let mut paths = Vec::new();
    for j in 0..3 {
        let x = b.state(&format!("x{j}"));
        let xm = b.state(&format!("x{j}m"));
        let xp = b.state(&format!("x{j}'"));
        paths.push([x, xm, xp]);
    }
    let qa = b.accepting("q_a");
    let r0 = b.rejecting("r0");
    let r2 = b.rejecting("r2");
    let e: Vec<usize> = (0..9).map(|k| b.rejecting(&format!("e{k}"))).collect();

    let alpha = re((8.0f64 / 17.0).sqrt());
    let beta = re((3.0f64 / 17.0).sqrt());
    let mut start = vec![(qa, alpha)];
    start.extend(paths.iter().map(|p| (p[0], beta)));
    b.column(HASH, &[Zero], q0, &start);

    let targets = [r0, qa, r2];
    let norm = 1.0 / 3.0f64.sqrt();
    for (j, &[x, xm, xp]) in paths.iter().enumerate() {
        b.maps(ZERO, BOTH, x, x)
            .maps(ZERO, BOTH, xm, xm)
            .maps(ZERO, BOTH, xp, xp)
            .maps(ONE, BOTH, x, xm)
            .maps(ONE, BOTH, xm, xp)
            .maps(ONE, BOTH, xp, e[j])
            .maps(END, BOTH, x, e[j])
            .maps(END, BOTH, xm, e[3 + j])
            .maps(END, &[NonZero], xp, e[6 + j]);
        let dft: Vec<(usize, Amplitude)> = targets
            .iter()
            .enumerate()
            .map(|(k, &t)| (t, Amplitude::from_polar(norm, 2.0 * PI * (j * k) as f64 / 3.0)))
            .collect();
        b.column(END, &[Zero], xp, &dft);
        for (state, dir) in [x, xm, xp].into_iter().zip(moves[j]) {
            b.direction(state, ZERO, dir);
        }
    }
    b.build().expect("columns are orthonormal")
}

/// One published probability of a zoo automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct Claim {
    pub description: String,
    pub word: String,
    pub p_accept: Option<f64>,
    pub p_reject_total: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ZooEntry {
    pub name: String,
    pub params: BTreeMap<String, String>,
    pub claims: Vec<Claim>,
    pub automaton: SimpleQf1ca,
    pub notes: String,
}

pub const ZOO_NAMES: [&str; 6] = ["example3", "example3-nonneg", "example4", "example5", "theorem5", "theorem6"];

fn claim(description: &str, word: &str, p_accept: Option<f64>, p_reject_total: Option<f64>) -> Claim {
    Claim { description: description.into(), word: word.into(), p_accept, p_reject_total }
}

fn parse_param<T: std::str::FromStr>(params: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, AutomatonError> {
    params
        .get(key)
        .map(|v| v.parse().map_err(|_| AutomatonError::BadParameter(format!("cannot parse {key}={v}"))))
        .transpose()
}

/// Builds the named entry. Recognised parameters: `p` for `example4`, `N`
/// for `example5`, and `observation=mm|mo` everywhere.
pub fn entry(name: &str, params: &BTreeMap<String, String>) -> Result<ZooEntry, AutomatonError> {
    let allowed: &[&str] = match name {
        "example4" => &["p", "observation"],
        "example5" => &["N", "observation"],
        _ => &["observation"],
    };
    if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(AutomatonError::BadParameter(format!("{name} takes no parameter {bad}")));
    }
    let (mut automaton, claims, notes) = match name {
        "example3" | "example3-nonneg" => {
            let variant = if name == "example3" { CounterVariant::IntegerCounter } else { CounterVariant::NonNegative };
            (
                build_example3(variant),
                vec![
                    claim("member accepted with certainty", "00000100000", Some(1.0), None),
                    claim("non-member rejected with certainty", "0000010000", None, Some(1.0)),
                ],
                "q_r2 rejects a nonzero counter at $ and a second 1".to_string(),
            )
        }
        "example4" => {
            let p = parse_param(params, "p")?.unwrap_or_else(critical_p);
            (
                build_example4(p)?,
                vec![claim("member accepted with probability p", "0011", Some(p), None)],
                format!("p = {p}"),
            )
        }
        "example5" => {
            let n: usize = parse_param(params, "N")?.unwrap_or(3);
            (
                build_example5(n)?,
                vec![claim("member accepted with certainty", "00100100", Some(1.0), None)],
                format!("{n} paths; non-members rejected with probability at least 1 - 1/{n}"),
            )
        }
        "theorem5" => (
            build_theorem5(),
            vec![
                claim("all blocks equal", "01010", Some(3.0 / 7.0), Some(4.0 / 7.0)),
                claim("first and last block equal", "0010100", Some(4.0 / 7.0), None),
                claim("all blocks distinct", "01001000", None, Some(4.0 / 7.0)),
            ],
            "minus sign on the q2' -> q_a branch; V($,1) equals V($,0) on q1', q2'".to_string(),
        ),
        "theorem6" => (
            build_theorem6_experimental(),
            vec![
                claim("exactly two blocks equal", "010100", Some(9.0 / 17.0), None),
                claim("all blocks equal", "01010", None, Some(9.0 / 17.0)),
            ],
            "experimental; margin 9/17 measured, not claimed by the source construction".to_string(),
        ),
        _ => return Err(AutomatonError::BadParameter(format!("unknown zoo entry {name}"))),
    };
    if let Some(obs) = params.get("observation") {
        automaton.control.observation = Observation::from_code(obs)
            .ok_or_else(|| AutomatonError::BadParameter(format!("unknown observation {obs}")))?;
    }
    Ok(ZooEntry { name: name.to_string(), params: params.clone(), claims, automaton, notes })
}

/// Every entry with default parameters.
pub fn catalog() -> Vec<ZooEntry> {
    ZOO_NAMES.iter().map(|name| entry(name, &BTreeMap::new()).expect("defaults are valid")).collect()
}

/// Same automaton under another acceptance type.
pub fn with_acceptance(mut a: SimpleQf1ca, acceptance: AcceptanceType) -> SimpleQf1ca {
    a.control.acceptance = acceptance;
    a
}
