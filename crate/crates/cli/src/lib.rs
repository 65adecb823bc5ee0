//! Command-line front door: generate instances, run the pipelines, query the
//! exact oracle and sweep success rates over minimum-degree grids.

pub mod args;
pub mod commands;
pub mod sweep;
pub mod witness;

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use thiserror::Error;
use transversal::collection::GraphCollection;
use transversal::error::{Error as CoreError, ParseError};
use transversal::oracle::TransversalViolation;
use transversal::trees::Tree;

pub use args::Cli;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Core(#[from] CoreError),
    /// A freshly produced witness failed re-verification.
    #[error("produced witness fails verification: {0}")]
    InvalidWitness(TransversalViolation),
}

impl CliError {
    /// 1 for search failures, 2 for bad input, 3 for broken invariants.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Parse { .. } => 2,
            CliError::InvalidWitness(_) => 3,
            CliError::Core(e) if e.is_internal() => 3,
            CliError::Core(CoreError::Precondition(_) | CoreError::NoColours | CoreError::Parse(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

/// Whether a command answered positively.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Yes,
    No,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Yes => 0,
            Outcome::No => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Runs a parsed command line and returns the process exit code, reporting
/// errors on stderr.
pub fn run(cli: Cli) -> i32 {
    match commands::dispatch(cli) {
        Ok(o) => o.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub(crate) fn open(path: &Path) -> CliResult<BufReader<fs::File>> {
    fs::File::open(path).map(BufReader::new).map_err(|source| CliError::Io { path: path.into(), source })
}

pub fn read_collection(path: &Path) -> CliResult<GraphCollection> {
    GraphCollection::read_from(open(path)?).map_err(|source| CliError::Parse { path: path.into(), source })
}

pub fn read_tree(path: &Path) -> CliResult<Tree> {
    Tree::read_from(open(path)?).map_err(|source| CliError::Parse { path: path.into(), source })
}

pub(crate) fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.into(), source })
}

/// `out.txt` → `out.txt.<suffix>`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}
