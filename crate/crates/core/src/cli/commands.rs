//! Subcommand bodies. Each returns an exit code with the text to print, so
//! they can be tested without spawning the binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dynamics::{run_mm_with, run_mo_with, RunError};
use crate::automaton::{validate_structure, Observation};
use crate::cli::format::{emit, parse, Loaded};
use crate::cli::sweep::{fmt12, sweep_csv, SweepSpec};
use crate::transforms::{eliminate_negative, mo_to_mm};
use crate::wellformed::{check_conditions, check_simple, isometry_oracle, CheckMode};
use crate::zoo;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn usage(msg: impl Into<String>) -> Self {
        Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: msg.into() }
    }
}

fn load(path: &Path) -> Result<Loaded, Outcome> {
    let text = fs::read_to_string(path).map_err(|e| Outcome::usage(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| Outcome::usage(format!("{}: {e}", path.display())))
}

/// Writes `text` to `path`, or returns it for stdout when there is none.
fn deliver(text: String, path: Option<&Path>) -> Outcome {
    match path {
        None => Outcome::ok(text),
        Some(p) => match fs::write(p, text) {
            Ok(()) => Outcome::ok(format!("wrote {}\n", p.display())),
            Err(e) => Outcome { code: EXIT_FAIL, stdout: String::new(), stderr: format!("{}: {e}", p.display()) },
        },
    }
}

pub struct ValidateOptions {
    pub tol: f64,
    pub strict: bool,
    /// Also run the isometry oracle for every word up to this length.
    pub oracle_maxlen: Option<usize>,
}

pub fn cmd_validate(path: &Path, opts: &ValidateOptions) -> Outcome {
    let loaded = match load(path) {
        Ok(a) => a,
        Err(o) => return o,
    };
    let g = match loaded.general() {
        Ok(g) => g,
        Err(e) => return Outcome::usage(e.to_string()),
    };
    let mut out = String::new();
    let mut ok = true;
    let structure = validate_structure(&g);
    for v in &structure {
        ok = false;
        writeln!(out, "structure: {v}").unwrap();
    }
    if let Loaded::Simple(s) = &loaded {
        let report = check_simple(s, opts.tol);
        ok &= report.passed();
        writeln!(out, "unitary matrices: {} (max residual {:.3e})", verdict(report.passed()), report.max_residual)
            .unwrap();
        for v in &report.violations {
            writeln!(out, "  {v}").unwrap();
        }
    }
    let mode = if opts.strict { CheckMode::Strict } else { CheckMode::Literal };
    let report = check_conditions(&g, opts.tol, mode);
    ok &= report.passed();
    writeln!(
        out,
        "conditions ({}): {} (max residual {:.3e})",
        if opts.strict { "strict" } else { "literal" },
        verdict(report.passed()),
        report.max_residual
    )
    .unwrap();
    for v in &report.violations {
        writeln!(out, "  {v}").unwrap();
    }
    if let Some(k) = opts.oracle_maxlen {
        // the oracle only depends on which symbols occur, and a word of
        // length k never moves the counter beyond k + 2
        let letters: String = if k == 0 { String::new() } else { g.control.alphabet.iter().collect() };
        let residual = isometry_oracle(&g, &letters, k as i64 + 2);
        let pass = residual <= opts.tol;
        ok &= pass;
        writeln!(out, "isometry oracle (words up to {k}): {} (residual {residual:.3e})", verdict(pass)).unwrap();
    }
    Outcome { code: if ok { EXIT_OK } else { EXIT_FAIL }, stdout: out, stderr: String::new() }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "ok"
    } else {
        "FAILED"
    }
}

pub fn cmd_run(path: &Path, word: &str, trace: bool) -> Outcome {
    let g = match load(path).and_then(|a| a.general().map_err(|e| Outcome::usage(e.to_string()))) {
        Ok(g) => g,
        Err(o) => return o,
    };
    let result = match g.control.observation {
        Observation::ManyMeasure => run_mm_with(&g, word, false),
        Observation::OnceMeasure => run_mo_with(&g, word, false),
    };
    let r = match result {
        Ok(r) => r,
        Err(e @ RunError::UnknownSymbol(_)) => return Outcome::usage(e.to_string()),
        Err(e) => return Outcome { code: EXIT_FAIL, stdout: String::new(), stderr: e.to_string() },
    };
    let mut out = String::new();
    if trace {
        writeln!(out, "step,symbol,p_accept_inc,p_reject_inc,residual_norm2").unwrap();
        for t in &r.trace {
            writeln!(
                out,
                "{},{},{},{},{}",
                t.step_index,
                t.symbol,
                fmt12(t.p_accept_inc),
                fmt12(t.p_reject_inc),
                fmt12(t.residual_norm2)
            )
            .unwrap();
        }
    }
    for (name, value) in [
        ("p_accept", r.p_accept),
        ("p_reject", r.p_reject),
        ("p_residual", r.p_residual),
        ("p_reject_total", r.p_reject_total),
    ] {
        writeln!(out, "{name} {}", fmt12(value)).unwrap();
    }
    Outcome::ok(out)
}

pub fn cmd_sweep(
    path: &Path,
    pattern: &str,
    ranges: &[String],
    columns: Option<&[String]>,
    out: Option<&Path>,
) -> Outcome {
    let g = match load(path).and_then(|a| a.general().map_err(|e| Outcome::usage(e.to_string()))) {
        Ok(g) => g,
        Err(o) => return o,
    };
    let spec = match SweepSpec::parse(pattern, ranges, columns) {
        Ok(s) => s,
        Err(e) => return Outcome::usage(e.to_string()),
    };
    match sweep_csv(&g, &spec) {
        Ok(csv) => deliver(csv, out),
        Err(e) => Outcome::usage(e.to_string()),
    }
}

/// `key=value` pairs.
pub fn parse_params(items: &[String]) -> Result<BTreeMap<String, String>, String> {
    items
        .iter()
        .map(|kv| match kv.split_once('=') {
            Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
            _ => Err(format!("expected key=value, got {kv:?}")),
        })
        .collect()
}

pub fn cmd_zoo(name: Option<&str>, params: &[String], emit_path: Option<&Path>) -> Outcome {
    let Some(name) = name else {
        let mut out = String::new();
        for n in zoo::ZOO_NAMES {
            writeln!(out, "{n}").unwrap();
        }
        return Outcome::ok(out);
    };
    let params = match parse_params(params) {
        Ok(p) => p,
        Err(e) => return Outcome::usage(e),
    };
    match zoo::entry(name, &params) {
        Ok(e) => deliver(emit(&Loaded::Simple(e.automaton)), emit_path),
        Err(e) => Outcome::usage(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    MoToMm,
    NonNegative,
}

pub fn cmd_transform(path: &Path, transform: Transform, emit_path: Option<&Path>) -> Outcome {
    let g = match load(path).and_then(|a| a.general().map_err(|e| Outcome::usage(e.to_string()))) {
        Ok(g) => g,
        Err(o) => return o,
    };
    let result = match transform {
        Transform::MoToMm => mo_to_mm(&g),
        Transform::NonNegative => eliminate_negative(&g),
    };
    match result {
        Ok(t) => deliver(emit(&Loaded::General(t)), emit_path),
        Err(e) => Outcome::usage(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{build_example4, critical_p};

    fn write_zoo(dir: &Path, name: &str, params: &[&str]) -> std::path::PathBuf {
        let path = dir.join(format!("{name}.json"));
        let params: Vec<String> = params.iter().map(|s| s.to_string()).collect();
        assert_eq!(cmd_zoo(Some(name), &params, Some(&path)).code, 0);
        path
    }

    #[test]
    fn run_prints_twelve_digits() {
        let dir = tempfile::tempdir().unwrap();
        let t5 = write_zoo(dir.path(), "theorem5", &[]);
        assert!(cmd_run(&t5, "010101", false).stdout.contains("p_accept 0.428571428571\n"));
        let e3 = write_zoo(dir.path(), "example3", &[]);
        assert!(cmd_run(&e3, "010", false).stdout.contains("p_accept 1.0\n"));
        let e4 = write_zoo(dir.path(), "example4", &[]);
        assert!(cmd_run(&e4, "0011", false).stdout.contains("p_accept 0.682327803828\n"));
        assert_eq!(cmd_run(&e4, "0021", false).code, EXIT_USAGE);
        let traced = cmd_run(&e4, "01", true).stdout;
        assert_eq!(traced.lines().filter(|l| l.starts_with(char::is_numeric)).count(), 4);
    }

    #[test]
    fn validate_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let opts = ValidateOptions { tol: 1e-9, strict: true, oracle_maxlen: Some(3) };
        let e3 = write_zoo(dir.path(), "example3", &[]);
        assert_eq!(cmd_validate(&e3, &opts).code, EXIT_OK);

        let mut a = build_example4(critical_p()).unwrap();
        let key = (crate::basis::TapeSymbol::Input('0'), crate::basis::CounterSign::Zero);
        a.unitaries.get_mut(&key).unwrap()[(1, 1)] *= 1.01;
        let bad = dir.path().join("bad.json");
        fs::write(&bad, emit(&Loaded::Simple(a))).unwrap();
        let o = cmd_validate(&bad, &opts);
        assert_eq!(o.code, EXIT_FAIL);
        assert!(o.stdout.contains("condition (1)"), "{}", o.stdout);

        let junk = dir.path().join("junk.json");
        fs::write(&junk, "{\"kind\": 3}").unwrap();
        assert_eq!(cmd_validate(&junk, &opts).code, EXIT_USAGE);
        assert_eq!(cmd_validate(&dir.path().join("missing.json"), &opts).code, EXIT_USAGE);
    }

    #[test]
    fn zoo_and_transform() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(cmd_zoo(Some("nope"), &[], None).code, EXIT_USAGE);
        assert_eq!(cmd_zoo(Some("example4"), &["p=2".into()], None).code, EXIT_USAGE);
        assert!(cmd_zoo(None, &[], None).stdout.contains("theorem5"));
        let e3 = write_zoo(dir.path(), "example3", &[]);
        let out = dir.path().join("nn.json");
        assert_eq!(cmd_transform(&e3, Transform::NonNegative, Some(&out)).code, EXIT_OK);
        let opts = ValidateOptions { tol: 1e-9, strict: true, oracle_maxlen: None };
        assert_eq!(cmd_validate(&out, &opts).code, EXIT_OK);
        assert_eq!(cmd_transform(&e3, Transform::MoToMm, None).code, EXIT_USAGE);
        let mo = write_zoo(dir.path(), "example4", &["observation=mo"]);
        assert_eq!(cmd_transform(&mo, Transform::MoToMm, None).code, EXIT_OK);
    }
}
