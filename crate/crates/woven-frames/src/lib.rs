//! Finite-dimensional toolkit for woven frames.
//!
//! A frame is a spanning family of vectors with energy bounds; a bank is a
//! collection of frames over one shared index set; a weaving picks one vector
//! per index from the bank. This crate computes the classical frame operators
//! (analysis, synthesis, frame, Gram), optimal spectral bounds, canonical
//! dual and tight frames, and certifies universal woven bounds by exhaustive
//! partition enumeration or seeded sampling. On top of that sit the woven
//! constructions: tightification through the inverse square root of the woven
//! frame operator, operator push-forwards with certified bound intervals,
//! weighted sums of banks with an injectivity test, and orthogonal
//! projections onto subspaces and their intersections.
//!
//! Everything is dense `f64` with explicit tolerances; all values are
//! immutable after construction and every operation is pure, so the types can
//! be shared freely across threads.

pub mod error;
pub mod frame;
pub mod io;
pub mod linalg;
pub mod subspace;
pub mod weaving;

pub use error::{Error, Result};
pub use frame::{Bounds, Frame};
pub use linalg::{
    operator_norms, rank_tol, spectral_apply, sym_eigen, Matrix, OperatorNorms,
    SpectralDecomposition, SpectralFn, Vector,
};
pub use subspace::{project_bank, Subspace};
pub use weaving::{
    enumerate_partitions, partition_count, sum_operator, sum_woven_check, CertificateMode,
    CoefficientBundle, FrameBank, Partition, WovenCertificate, DEFAULT_ENUM_CAP,
    DEFAULT_SAMPLE_TRIALS,
};
