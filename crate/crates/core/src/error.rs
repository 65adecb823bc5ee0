use std::fmt;

use thiserror::Error;

/// Malformed instance, tree or pattern text. Line numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed header: {msg}")]
    Header { line: usize, msg: String },
    #[error("line {line}: malformed line: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("line {line}: duplicate edge {u} {v} in colour {colour}")]
    DuplicateEdge {
        line: usize,
        colour: usize,
        u: usize,
        v: usize,
    },
    #[error("unexpected end of input after line {line}: {msg}")]
    Truncated { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

/// The worst degree shortfall seen by a partitioning attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub part: usize,
    pub colour: usize,
    pub vertex: usize,
    pub have: usize,
    pub need: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "part {} colour {} vertex {}: degree {} < {:.2}",
            self.part, self.colour, self.vertex, self.have, self.need
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("no colours")]
    NoColours,

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("retries exhausted after {attempts} attempts; worst violation: {worst}")]
    PartitionRetriesExhausted {
        attempts: usize,
        best_parts: Vec<Vec<usize>>,
        worst: Violation,
    },

    #[error(
        "absorber retries exhausted after {attempts} attempts \
         (best core: {core_size} slots, connectivity {core_connectivity}; |B1| = {reservoir})"
    )]
    AbsorberRetriesExhausted {
        attempts: usize,
        core_size: usize,
        core_connectivity: usize,
        reservoir: usize,
    },

    #[error("retries exhausted: {0}")]
    RetriesExhausted(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("search budget of {0} nodes exhausted")]
    BudgetExhausted(u64),

    #[error("only {found} of {needed} disjoint paths exist")]
    NoRouting { found: usize, needed: usize },

    #[error("embedding failed: {0}")]
    EmbedFailed(String),

    #[error("greedy cover stuck at step {step}: no unused neighbour of vertex {vertex} in colour {colour}")]
    GreedyStuck {
        step: usize,
        vertex: usize,
        colour: usize,
    },

    #[error("step {stage} failed: {source}\n{state}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
        state: String,
    },

    #[error("property R unattainable after {attempts} samples (floor {floor})")]
    PropertyRUnattainable { attempts: usize, floor: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn stage(stage: impl Into<String>, source: Error, state: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(source),
            state: state.into(),
        }
    }

    /// True when the error (or the innermost staged cause) is an internal
    /// invariant violation rather than a search failure.
    pub fn is_internal(&self) -> bool {
        match self {
            Error::Internal(_) => true,
            Error::Stage { source, .. } => source.is_internal(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
