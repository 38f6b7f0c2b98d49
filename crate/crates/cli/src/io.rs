use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sizebias::levy::LevyMeasure;
use sizebias::estimate::Population;
use sizebias::{Distribution, Error};

/// A failure, tagged with the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit 2.
    Invalid(String),
    /// Everything else: exit 1.
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    /// Attaches the name of the offending flag to a library error.
    pub fn from_core(field: &str, e: Error) -> Self {
        let msg = format!("{field}: {e}");
        match e {
            Error::EmptySample | Error::ZeroWeights(_) | Error::VanishingCharFn => CliError::Internal(msg),
            _ => CliError::Invalid(msg),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Literal text, or the contents of the file named after a leading `@`.
pub fn resolve(field: &str, arg: &str) -> CliResult<String> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{field}: {path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

pub fn distribution(field: &str, arg: &str) -> CliResult<Distribution> {
    Distribution::from_json(&resolve(field, arg)?).map_err(|e| CliError::from_core(field, e))
}

pub fn measure(field: &str, arg: &str) -> CliResult<LevyMeasure> {
    LevyMeasure::from_json(&resolve(field, arg)?).map_err(|e| CliError::from_core(field, e))
}

/// `[[x, y], ...]` as JSON, or two-column CSV (header optional).
pub fn population(field: &str, arg: &str) -> CliResult<Population> {
    let text = resolve(field, arg)?;
    if text.trim_start().starts_with('[') {
        let rows: Vec<(f64, f64)> =
            serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{field}: malformed literal: {e}")))?;
        Population::new(rows)
    } else {
        Population::from_csv(text.as_bytes())
    }
    .map_err(|e| CliError::from_core(field, e))
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let internal = |e: std::io::Error| CliError::Internal(format!("writing {}: {e}", path.display()));
    let name = path
        .file_name()
        .ok_or_else(|| CliError::invalid(format!("--out: {} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp: PathBuf = path.with_file_name(tmp_name);
    let mut f = fs::File::create(&tmp).map_err(internal)?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(internal)?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        internal(e)
    })
}

/// Parses `a,b,c` into numbers.
pub fn number_list(field: &str, s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| CliError::invalid(format!("{field}: `{p}`: {e}")))
        })
        .collect()
}

/// Writes to stdout; a closed pipe on the reading end is not an error.
pub fn print(s: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(s.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Internal(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}
