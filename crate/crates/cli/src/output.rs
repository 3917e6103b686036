use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use serde_json::Value;

/// Everything that can end a command early, tagged with its exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad parameters: exit 2.
    Usage(String),
    /// A check failed or an iteration did not settle: exit 1.
    Failed(String),
    /// Exit 3.
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
        }
    }
}

impl From<nexp_core::Error> for CliError {
    fn from(e: nexp_core::Error) -> Self {
        use nexp_core::Error as E;
        match e {
            E::NonConvergence { .. } | E::TooManyParts { .. } | E::Internal(_) => {
                CliError::Failed(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// `x` rounded to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().expect("formatted float parses")
}

/// Rounds every non-integer number in `v` to 15 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if !n.is_i64() && !n.is_u64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round15(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

pub fn print_json(v: Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(&round_json(v)).expect("JSON values serialize")
    );
}

pub fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes to `path`, or to standard output when there is none.
pub fn write_or_print(path: Option<&Path>, contents: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => io::stdout()
            .write_all(contents)
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}
