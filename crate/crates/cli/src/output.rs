//! Error classification and artifact writers.

use serde::Serialize;
use std::fmt;
use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or arguments (exit 2).
    Config(String),
    /// A solver or I/O step failed (exit 3).
    Solver(String),
    /// `verify` found violated invariants (exit 4).
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Violation(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Violation(m) => write!(f, "invariant violation: {m}"),
        }
    }
}

impl From<pinned_gl::Error> for CliError {
    fn from(e: pinned_gl::Error) -> Self {
        use pinned_gl::Error as E;
        match e {
            E::Config(_) | E::Domain(_) | E::Degenerate(_) | E::TooManySites(_) | E::Singular(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Solver(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Wraps a summary with the schema version.
#[derive(Serialize)]
pub struct Versioned<'a, T: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    #[serde(flatten)]
    pub body: T,
}

/// Writes `<dir>/<name>.json` and echoes it to stdout.
pub fn write_summary<T: Serialize>(dir: &Path, name: &str, body: T) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Solver(format!("{}: {e}", dir.display())))?;
    let doc = Versioned {
        schema_version: SCHEMA_VERSION,
        command: name,
        body,
    };
    let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Solver(e.to_string()))?;
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, format!("{text}\n")).map_err(|e| CliError::Solver(format!("{}: {e}", path.display())))?;
    // A closed stdout (e.g. piped into `head`) must not fail the run.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    Ok(())
}

/// Writes a CSV file with the given header and rows.
pub fn write_csv<R: Serialize>(dir: &Path, name: &str, rows: &[R]) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Solver(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Solver(format!("{}: {e}", path.display())))?;
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Solver(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Solver(e.to_string()))?;
    Ok(())
}
