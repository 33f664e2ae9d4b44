//! Error types shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while validating data or running a kernel.
#[derive(Debug, Error)]
pub enum Error {
    // ---- container / file validation ----
    #[error("{path}: empty input file")]
    EmptyFile { path: String },
    #[error("{path}: row {row}, column {col}: malformed cell {content:?}: {reason}")]
    MalformedCell {
        path: String,
        row: usize,
        col: usize,
        content: String,
        reason: String,
    },
    #[error("duplicate identifier {id:?}")]
    DuplicateId { id: String },
    #[error("genotype value {value} at subject {subject}, locus {locus} outside {{0,1,2}}")]
    GenotypeOutOfRange {
        subject: usize,
        locus: usize,
        value: i64,
    },
    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    DimensionMismatch {
        context: String,
        expected: usize,
        actual: usize,
    },
    #[error("{context}: input must not be empty")]
    EmptyInput { context: String },
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    // ---- distance-matrix axioms ----
    #[error("negative distance {value} at ({i}, {j})")]
    NegativeDistance { i: usize, j: usize, value: f64 },
    #[error("nonzero diagonal entry {value} at index {i}")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("asymmetry above tolerance at ({i}, {j}): {forward} vs {backward}")]
    AsymmetryAboveTolerance {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },
    #[error("triangle inequality violated at ({i}, {j}, {k}): {d_ij} + {d_jk} < {d_ik}")]
    TriangleViolation {
        i: usize,
        j: usize,
        k: usize,
        d_ij: f64,
        d_jk: f64,
        d_ik: f64,
    },

    // ---- metric inputs ----
    #[error("matrix {index} is not symmetric positive definite: {reason}")]
    NotSpd { index: usize, reason: String },
    #[error("graph {index} has {actual} vertices, expected {expected}")]
    VertexSetMismatch {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("graph {index} contains self-loop at vertex {vertex}")]
    SelfLoop { index: usize, vertex: usize },
    #[error("invalid fusion weights: {reason}")]
    InvalidWeights { reason: String },

    // ---- forest ----
    #[error("split produced an empty {side} child")]
    EmptySplitChild { side: &'static str },
    #[error("child index sets do not partition the parent")]
    BadPartition,
    #[error("invalid forest parameters: {reason}")]
    InvalidParams { reason: String },
    #[error("forest file {path}: {reason}")]
    BadForestFile { path: String, reason: String },

    // ---- spectral / manifold ----
    #[error("similarity graph is disconnected: components {components:?}")]
    DisconnectedGraph { components: Vec<Vec<usize>> },
    #[error("zero-degree row {i} in similarity matrix")]
    ZeroDegreeRow { i: usize },
    #[error(
        "degenerate spectrum: eigenvalue {index} ({value}) is not separated from the next ({next})"
    )]
    DegenerateSpectrum { index: usize, value: f64, next: f64 },

    // ---- penalized estimation ----
    #[error("coordinate descent did not converge after {iterations} iterations (duality gap {gap})")]
    NonConvergence { iterations: usize, gap: f64 },

    // ---- evaluation ----
    #[error("truth set is empty")]
    EmptyTruthSet,
    #[error("ranked universe has no negatives: every item is in the truth set")]
    NoNegatives,
    #[error("truth item {id} is not part of the ranked universe")]
    TruthOutsideUniverse { id: String },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the failure stems from input data (as opposed to a numerical
    /// routine failing to converge or producing a degenerate spectrum).
    /// Used by callers to pick process exit codes.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::DegenerateSpectrum { .. }
                | Error::DisconnectedGraph { .. }
                | Error::ZeroDegreeRow { .. }
        )
    }
}
