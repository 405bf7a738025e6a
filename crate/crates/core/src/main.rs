use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

use qf1ca::cli::commands::{
    cmd_run, cmd_sweep, cmd_transform, cmd_validate, cmd_zoo, Outcome, Transform, ValidateOptions,
};
use qf1ca::wellformed::DEFAULT_TOL;

#[derive(Parser)]
#[command(name = "qf1ca", version, about = "Quantum finite one-counter automata toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the well-formedness conditions of an automaton file.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Check every realisable sign pair (default) or only a shared sign.
        #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
        strict: bool,
        /// Also run the isometry oracle for all words up to this length.
        #[arg(long)]
        oracle_maxlen: Option<usize>,
    },
    /// Run one word and print the outcome probabilities.
    Run {
        file: PathBuf,
        word: String,
        #[arg(long)]
        trace: bool,
    },
    /// Tabulate a word family, e.g. --pattern "0^a 1 0^b" --range a=0..4 --range b=0..4.
    Sweep {
        file: PathBuf,
        #[arg(long)]
        pattern: String,
        #[arg(long = "range")]
        ranges: Vec<String>,
        /// Comma-separated subset of p_accept,p_reject,p_residual,p_reject_total.
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a built-in automaton; lists the names when none is given.
    Zoo {
        name: Option<String>,
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Convert measure-once to measure-many, or remove negative counters.
    Transform {
        file: PathBuf,
        #[arg(long, conflicts_with = "nonnegative", required_unless_present = "nonnegative")]
        mo_to_mm: bool,
        #[arg(long)]
        nonnegative: bool,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome: Outcome = match cli.command {
        Command::Validate { file, tol, strict, oracle_maxlen } => {
            cmd_validate(&file, &ValidateOptions { tol, strict, oracle_maxlen })
        }
        Command::Run { file, word, trace } => cmd_run(&file, &word, trace),
        Command::Sweep { file, pattern, ranges, columns, out } => {
            cmd_sweep(&file, &pattern, &ranges, columns.as_deref(), out.as_deref())
        }
        Command::Zoo { name, params, emit } => cmd_zoo(name.as_deref(), &params, emit.as_deref()),
        Command::Transform { file, mo_to_mm, emit, .. } => {
            let t = if mo_to_mm { Transform::MoToMm } else { Transform::NonNegative };
            cmd_transform(&file, t, emit.as_deref())
        }
    };
    print!("{}", outcome.stdout);
    if !outcome.stderr.is_empty() {
        eprintln!("{}", outcome.stderr);
    }
    ExitCode::from(outcome.code as u8)
}
