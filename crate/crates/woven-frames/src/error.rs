use thiserror::Error;

/// Errors produced by the frame, weaving, and persistence layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of the inputs do not line up (non-square operator, wrong
    /// vector length, mismatched bank dimensions, ...).
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An input carries a NaN or infinite entry.
    #[error("non-finite entry {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    /// The symmetry defect of a matrix exceeds the accepted band.
    #[error("asymmetry defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    Asymmetric { defect: f64, tolerance: f64 },

    /// The Jacobi iteration hit its sweep cap without converging.
    #[error("eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),

    /// A spectral function was requested on a numerically singular matrix.
    #[error("matrix is numerically singular (smallest eigenvalue {lambda_min:.6e})")]
    Singular { lambda_min: f64 },

    /// The family does not span: its frame operator is numerically singular.
    #[error("family is not a frame (smallest frame-operator eigenvalue {lambda_min:.6e})")]
    NotAFrame { lambda_min: f64 },

    /// A partition's assignment length does not match the bank's index count.
    #[error("partition length {got} does not match index count {expected}")]
    PartitionLength { expected: usize, got: usize },

    /// A partition assigns an index to a block that does not exist.
    #[error("partition label {label} at index {index} exceeds frame count {frame_count}")]
    PartitionLabel {
        index: usize,
        label: usize,
        frame_count: usize,
    },

    /// Exhaustive enumeration would exceed the configured cap.
    #[error("enumerating {required} partitions exceeds the cap of {cap}; use sampled bounds instead")]
    EnumerationCap { required: u128, cap: u64 },

    /// A coefficient bundle does not match the bank's block structure.
    #[error("coefficient bundle shape mismatch: {0}")]
    BundleShape(String),

    /// An operator that must be invertible is numerically rank-deficient.
    #[error("operator is not invertible (smallest singular value {sigma_min:.6e})")]
    NotInvertible { sigma_min: f64 },

    /// A subspace basis is too far from orthonormal to accept.
    #[error("subspace basis is not orthonormal (defect {defect:.3e} exceeds {tolerance:.3e})")]
    NotOrthonormal { defect: f64, tolerance: f64 },

    /// Two subspaces meet only in the zero vector.
    #[error("subspaces intersect only trivially")]
    EmptyIntersection,

    /// A scalar argument is outside its allowed range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// File system failure while reading or writing a document.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed JSON; the source error carries line and column.
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    /// Well-formed JSON that violates the document schema.
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
