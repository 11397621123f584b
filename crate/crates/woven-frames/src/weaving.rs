//! Weavings and woven frames: banks of frames over a shared index set,
//! partition enumeration, universal bound certificates (exhaustive and
//! sampled), the concatenated-family operators, tightification, operator
//! transforms, and sums of banks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{Bounds, Frame};
use crate::linalg::{rank_tol, singular_extremes, sym_eigen, Matrix, SpectralFn, Vector};

/// Default cap on exhaustively enumerated partitions; beyond it callers are
/// directed to sampled certificates.
pub const DEFAULT_ENUM_CAP: u64 = 1 << 24;

/// Trial count used when a caller falls back from exhaustive to sampled mode
/// without choosing one.
pub const DEFAULT_SAMPLE_TRIALS: u64 = 10_000;

// ---------------------------------------------------------------------------
// FrameBank
// ---------------------------------------------------------------------------

/// `m` frames over one shared index set `{0..n-1}` in a common ambient
/// dimension. Vector `i` of frame `j` plays the role of the doubly indexed
/// family member.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBank {
    dim: usize,
    n: usize,
    frames: Vec<Frame>,
}

impl FrameBank {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Dimension("bank must contain at least one frame".into()))?;
        let dim = first.dim();
        let n = first.len();
        for (j, frame) in frames.iter().enumerate() {
            if frame.dim() != dim {
                return Err(Error::Dimension(format!(
                    "frame {j} has dimension {}, expected {dim}",
                    frame.dim()
                )));
            }
            if frame.len() != n {
                return Err(Error::Dimension(format!(
                    "frame {j} has {} vectors, expected {n}",
                    frame.len()
                )));
            }
        }
        Ok(Self { dim, n, frames })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Shared index count `n`.
    pub fn index_count(&self) -> usize {
        self.n
    }

    /// Number of frames `m`.
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, j: usize) -> &Frame {
        &self.frames[j]
    }

    /// Vector `i` of frame `j`.
    pub fn vector(&self, i: usize, j: usize) -> &Vector {
        self.frames[j].vector(i)
    }

    /// Build the weaving selected by a partition: vector `i` comes from the
    /// frame the partition assigns index `i` to.
    pub fn weave(&self, partition: &Partition) -> Result<Frame> {
        let assignment = partition.assignment();
        if assignment.len() != self.n {
            return Err(Error::PartitionLength {
                expected: self.n,
                got: assignment.len(),
            });
        }
        let m = self.frame_count();
        let mut vectors = Vec::with_capacity(self.n);
        for (index, &label) in assignment.iter().enumerate() {
            if label >= m {
                return Err(Error::PartitionLabel {
                    index,
                    label,
                    frame_count: m,
                });
            }
            vectors.push(self.frames[label].vector(index).clone());
        }
        Frame::new(self.dim, vectors)
    }

    /// The single frame listing all `n * m` bank vectors, frame-major with
    /// ascending index inside each frame. Its analysis matrix realizes the
    /// woven analysis operator and its frame operator is the woven frame
    /// operator, the sum of the per-frame operators.
    pub fn concatenated_family(&self) -> Frame {
        let mut vectors = Vec::with_capacity(self.n * self.frame_count());
        for frame in &self.frames {
            vectors.extend(frame.vectors().iter().cloned());
        }
        Frame::new(self.dim, vectors).expect("bank invariants give a valid frame")
    }

    /// Frame operator of the concatenated family.
    pub fn woven_frame_operator(&self) -> Matrix {
        self.concatenated_family().frame_operator()
    }

    /// Synthesize a vector from a full coefficient bundle: the double sum of
    /// coefficients times bank vectors.
    pub fn woven_synthesis(&self, bundle: &CoefficientBundle) -> Result<Vector> {
        let m = self.frame_count();
        if bundle.blocks().len() != m {
            return Err(Error::BundleShape(format!(
                "bundle has {} blocks, bank has {m} frames",
                bundle.blocks().len()
            )));
        }
        for (j, block) in bundle.blocks().iter().enumerate() {
            if block.len() != self.n {
                return Err(Error::BundleShape(format!(
                    "block {j} has length {}, expected index count {}",
                    block.len(),
                    self.n
                )));
            }
        }
        let mut out = vec![0.0; self.dim];
        for (j, block) in bundle.blocks().iter().enumerate() {
            for (i, &c) in block.iter().enumerate() {
                let v = self.frames[j].vector(i);
                for (axis, slot) in out.iter_mut().enumerate() {
                    *slot += c * v[axis];
                }
            }
        }
        Vector::new(out)
    }

    /// Map every vector of every frame through an operator. The operator may
    /// be rectangular, in which case the bank moves to the operator's row
    /// dimension (used for subspace coordinates).
    pub fn transformed(&self, op: &Matrix) -> Result<FrameBank> {
        if op.cols() != self.dim {
            return Err(Error::Dimension(format!(
                "operator has {} columns, bank dimension is {}",
                op.cols(),
                self.dim
            )));
        }
        let frames = self
            .frames
            .iter()
            .map(|frame| {
                let vectors = frame
                    .vectors()
                    .iter()
                    .map(|v| Vector::new(op.mul_vec(v.as_slice())))
                    .collect::<Result<Vec<_>>>()?;
                Frame::new(op.rows(), vectors)
            })
            .collect::<Result<Vec<_>>>()?;
        FrameBank::new(frames)
    }

    /// The standard dual woven bank: every vector mapped through the inverse
    /// of the woven frame operator.
    pub fn standard_dual_woven(&self) -> Result<FrameBank> {
        self.transformed(&self.checked_woven_spectral(SpectralFn::Inverse)?)
    }

    /// The tight woven bank: every vector mapped through the inverse square
    /// root of the woven frame operator. The result's concatenated family is
    /// Parseval.
    pub fn tighten_woven(&self) -> Result<FrameBank> {
        self.transformed(&self.checked_woven_spectral(SpectralFn::InvSqrt)?)
    }

    fn checked_woven_spectral(&self, f: SpectralFn) -> Result<Matrix> {
        let decomposition = sym_eigen(&self.woven_frame_operator())?;
        let lambda_min = decomposition.lambda_min();
        if lambda_min <= rank_tol(decomposition.lambda_max()) {
            return Err(Error::NotAFrame { lambda_min });
        }
        crate::linalg::spectral_apply_decomposed(&decomposition, f)
    }

    /// Universal woven bounds over every partition: the minimum weaving lower
    /// bound and maximum weaving upper bound, with witness partitions.
    pub fn universal_bounds_exhaustive(&self, cap: u64) -> Result<WovenCertificate> {
        let count = checked_partition_count(self.n, self.frame_count(), cap)?;
        let extremes = (0..count)
            .into_par_iter()
            .map(|k| {
                let partition = Partition::from_index(k, self.n, self.frame_count());
                self.evaluate_partition(partition)
            })
            .try_reduce_with(|a, b| Ok(a.merge(b)))
            .expect("at least one partition")?;
        Ok(extremes.into_certificate(CertificateMode::Exhaustive, count))
    }

    /// One-sided universal bound estimates from uniformly sampled partitions.
    /// The estimate can only shrink the true interval: the sampled lower
    /// bound is at least the true one and the sampled upper bound at most.
    /// Identical seed and trial count give an identical certificate.
    pub fn universal_bounds_sampled(&self, trials: u64, seed: u64) -> Result<WovenCertificate> {
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        let m = self.frame_count();
        let extremes = (0..trials)
            .into_par_iter()
            .map(|trial| {
                // One independent counter-based stream per trial keeps the
                // result identical regardless of evaluation order.
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial);
                let assignment = (0..self.n).map(|_| rng.random_range(0..m)).collect();
                let partition = Partition::new(assignment, m).expect("labels drawn below m");
                self.evaluate_partition(partition)
            })
            .try_reduce_with(|a, b| Ok(a.merge(b)))
            .expect("at least one trial")?;
        Ok(extremes.into_certificate(CertificateMode::Sampled, trials))
    }

    fn evaluate_partition(&self, partition: Partition) -> Result<Extremes> {
        let weaving = self.weave(&partition)?;
        let decomposition = sym_eigen(&weaving.frame_operator())?;
        Ok(Extremes::seed(
            decomposition.lambda_min(),
            decomposition.lambda_max(),
            partition,
        ))
    }

    /// Push the bank through an invertible operator. Returns the transformed
    /// bank plus certified bounds derived from the input bank's exhaustive
    /// certificate: lower scaled by the squared inverse norm, upper by the
    /// squared norm. The transformed bank's own exhaustive bounds always lie
    /// inside this interval.
    pub fn transform_woven(&self, e: &Matrix, cap: u64) -> Result<(FrameBank, Bounds)> {
        if !e.is_square() || e.rows() != self.dim {
            return Err(Error::Dimension(format!(
                "operator is {}x{}, bank dimension is {}",
                e.rows(),
                e.cols(),
                self.dim
            )));
        }
        let (sigma_min, sigma_max) = singular_extremes(e)?;
        if sigma_min * sigma_min <= rank_tol(sigma_max * sigma_max) {
            return Err(Error::NotInvertible { sigma_min });
        }
        let base = self.universal_bounds_exhaustive(cap)?;
        let certificate = Bounds::from_spectrum(
            base.universal_lower() * sigma_min * sigma_min,
            base.universal_upper() * sigma_max * sigma_max,
        );
        Ok((self.transformed(e)?, certificate))
    }
}

// ---------------------------------------------------------------------------
// Partition
// ---------------------------------------------------------------------------

/// An assignment of every shared index to exactly one frame of a bank. Block
/// `j` is the set of indices labelled `j`; empty blocks are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, frame_count: usize) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::Dimension(
                "partition must cover at least one index".into(),
            ));
        }
        for (index, &label) in assignment.iter().enumerate() {
            if label >= frame_count {
                return Err(Error::PartitionLabel {
                    index,
                    label,
                    frame_count,
                });
            }
        }
        Ok(Self { assignment })
    }

    /// Partition number `k` of the base-`m` counter over `n` digits, index 0
    /// least significant. Enumeration visits these for `k = 0..m^n`.
    pub fn from_index(k: u64, n: usize, m: usize) -> Self {
        debug_assert!(n >= 1 && m >= 1, "partition shape must be at least 1x1");
        let m = m as u64;
        let mut assignment = Vec::with_capacity(n);
        let mut rest = k;
        for _ in 0..n {
            assignment.push((rest % m) as usize);
            rest /= m;
        }
        Self { assignment }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least one index by construction
    }

    /// The blocks as index lists, one per frame label.
    pub fn blocks(&self, frame_count: usize) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); frame_count];
        for (index, &label) in self.assignment.iter().enumerate() {
            blocks[label].push(index);
        }
        blocks
    }
}

fn checked_partition_count(n: usize, m: usize, cap: u64) -> Result<u64> {
    let required = (m as u128).saturating_pow(n as u32);
    if required > cap as u128 {
        return Err(Error::EnumerationCap { required, cap });
    }
    Ok(required as u64)
}

/// All `m^n` partitions of `n` indices into `m` blocks, in base-`m` counter
/// order (index 0 least significant). Errors out when the count exceeds the
/// cap, directing the caller to sampled certificates.
pub fn enumerate_partitions(
    n: usize,
    m: usize,
    cap: u64,
) -> Result<impl Iterator<Item = Partition>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "partitions need at least one index".into(),
        ));
    }
    if m == 0 {
        return Err(Error::InvalidArgument(
            "partitions need at least one block".into(),
        ));
    }
    let count = checked_partition_count(n, m, cap)?;
    Ok((0..count).map(move |k| Partition::from_index(k, n, m)))
}

/// Number of partitions exhaustive certification would visit.
pub fn partition_count(n: usize, m: usize) -> u128 {
    (m as u128).saturating_pow(n as u32)
}

// ---------------------------------------------------------------------------
// CoefficientBundle
// ---------------------------------------------------------------------------

/// Coefficients for the woven coefficient space: one block per frame, flat
/// order frame-major with ascending index inside each block.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBundle {
    blocks: Vec<Vec<f64>>,
}

impl CoefficientBundle {
    pub fn new(blocks: Vec<Vec<f64>>) -> Result<Self> {
        for block in &blocks {
            for (index, &value) in block.iter().enumerate() {
                if !value.is_finite() {
                    return Err(Error::NonFinite { index, value });
                }
            }
        }
        Ok(Self { blocks })
    }

    /// Split a flat coefficient list into `m` blocks of length `n`.
    pub fn from_flat(flat: &[f64], m: usize, n: usize) -> Result<Self> {
        if flat.len() != m * n {
            return Err(Error::BundleShape(format!(
                "flat length {} does not split into {m} blocks of {n}",
                flat.len()
            )));
        }
        Self::new(flat.chunks(n).map(|c| c.to_vec()).collect())
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            blocks: vec![vec![0.0; n]; m],
        }
    }

    /// All-zero bundle with a single 1 at block `j`, index `i`.
    pub fn one_hot(m: usize, n: usize, j: usize, i: usize) -> Self {
        let mut bundle = Self::zeros(m, n);
        bundle.blocks[j][i] = 1.0;
        bundle
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn flat_len(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn iter_flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flatten().copied()
    }
}

// ---------------------------------------------------------------------------
// WovenCertificate
// ---------------------------------------------------------------------------

/// How a certificate's partitions were visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateMode {
    Exhaustive,
    Sampled,
}

impl CertificateMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertificateMode::Exhaustive => "exhaustive",
            CertificateMode::Sampled => "sampled",
        }
    }
}

/// Universal woven bounds with the partitions that attain them.
#[derive(Debug, Clone, PartialEq)]
pub struct WovenCertificate {
    universal_lower: f64,
    universal_upper: f64,
    partitions_checked: u64,
    mode: CertificateMode,
    witness_lower: Partition,
    witness_upper: Partition,
    is_woven: bool,
}

impl WovenCertificate {
    pub fn universal_lower(&self) -> f64 {
        self.universal_lower
    }

    pub fn universal_upper(&self) -> f64 {
        self.universal_upper
    }

    pub fn partitions_checked(&self) -> u64 {
        self.partitions_checked
    }

    pub fn mode(&self) -> CertificateMode {
        self.mode
    }

    /// Partition attaining the universal lower bound.
    pub fn witness_lower(&self) -> &Partition {
        &self.witness_lower
    }

    /// Partition attaining the universal upper bound.
    pub fn witness_upper(&self) -> &Partition {
        &self.witness_upper
    }

    pub fn is_woven(&self) -> bool {
        self.is_woven
    }
}

/// Running min/max of weaving bounds with witnesses. Ties break toward the
/// lexicographically smallest assignment so parallel reduction stays
/// deterministic.
struct Extremes {
    lower: f64,
    lower_witness: Partition,
    upper: f64,
    upper_witness: Partition,
}

impl Extremes {
    fn seed(lower: f64, upper: f64, partition: Partition) -> Self {
        Self {
            lower,
            lower_witness: partition.clone(),
            upper,
            upper_witness: partition,
        }
    }

    fn merge(self, other: Extremes) -> Extremes {
        let (lower, lower_witness) = pick(
            self.lower,
            self.lower_witness,
            other.lower,
            other.lower_witness,
            true,
        );
        let (upper, upper_witness) = pick(
            self.upper,
            self.upper_witness,
            other.upper,
            other.upper_witness,
            false,
        );
        Extremes {
            lower,
            lower_witness,
            upper,
            upper_witness,
        }
    }

    fn into_certificate(self, mode: CertificateMode, partitions_checked: u64) -> WovenCertificate {
        let universal_upper = self.upper.max(0.0);
        let universal_lower = self.lower.clamp(0.0, universal_upper);
        let is_woven = universal_lower > rank_tol(universal_upper);
        WovenCertificate {
            universal_lower,
            universal_upper,
            partitions_checked,
            mode,
            witness_lower: self.lower_witness,
            witness_upper: self.upper_witness,
            is_woven,
        }
    }
}

fn pick(
    a_value: f64,
    a_witness: Partition,
    b_value: f64,
    b_witness: Partition,
    want_min: bool,
) -> (f64, Partition) {
    let ordering = if want_min {
        b_value.total_cmp(&a_value)
    } else {
        a_value.total_cmp(&b_value)
    };
    match ordering {
        std::cmp::Ordering::Less => (b_value, b_witness),
        std::cmp::Ordering::Greater => (a_value, a_witness),
        std::cmp::Ordering::Equal => {
            if b_witness.assignment() < a_witness.assignment() {
                (b_value, b_witness)
            } else {
                (a_value, a_witness)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Sums of banks
// ---------------------------------------------------------------------------

fn check_sum_shapes(
    e1: &Matrix,
    bank_f: &FrameBank,
    e2: &Matrix,
    bank_g: &FrameBank,
) -> Result<()> {
    if bank_f.dim() != bank_g.dim()
        || bank_f.index_count() != bank_g.index_count()
        || bank_f.frame_count() != bank_g.frame_count()
    {
        return Err(Error::Dimension(format!(
            "banks do not match: {}x{}x{} vs {}x{}x{} (dim x indices x frames)",
            bank_f.dim(),
            bank_f.index_count(),
            bank_f.frame_count(),
            bank_g.dim(),
            bank_g.index_count(),
            bank_g.frame_count()
        )));
    }
    for (name, e) in [("first", e1), ("second", e2)] {
        if !e.is_square() || e.rows() != bank_f.dim() {
            return Err(Error::Dimension(format!(
                "{name} operator is {}x{}, bank dimension is {}",
                e.rows(),
                e.cols(),
                bank_f.dim()
            )));
        }
    }
    Ok(())
}

/// The combined analysis matrix of the weighted sum family: analysis of the
/// first bank times the first operator transposed, plus the same for the
/// second. Equals the concatenated analysis matrix of the sum bank.
fn combined_analysis(
    e1: &Matrix,
    bank_f: &FrameBank,
    e2: &Matrix,
    bank_g: &FrameBank,
) -> Matrix {
    let u_f = bank_f.concatenated_family().analysis_matrix();
    let u_g = bank_g.concatenated_family().analysis_matrix();
    u_f.matmul(&e1.transpose()).add(&u_g.matmul(&e2.transpose()))
}

fn sum_bank(e1: &Matrix, bank_f: &FrameBank, e2: &Matrix, bank_g: &FrameBank) -> Result<FrameBank> {
    let mut frames = Vec::with_capacity(bank_f.frame_count());
    for j in 0..bank_f.frame_count() {
        let mut vectors = Vec::with_capacity(bank_f.index_count());
        for i in 0..bank_f.index_count() {
            let left = e1.mul_vec(bank_f.vector(i, j).as_slice());
            let right = e2.mul_vec(bank_g.vector(i, j).as_slice());
            let sum: Vec<f64> = left.iter().zip(&right).map(|(a, b)| a + b).collect();
            vectors.push(Vector::new(sum)?);
        }
        frames.push(Frame::new(bank_f.dim(), vectors)?);
    }
    FrameBank::new(frames)
}

/// Build the weighted sum bank and decide whether it is woven: the sum bank
/// itself, an injectivity flag for the combined analysis operator (its
/// smallest singular value must clear the rank threshold), and the sum
/// bank's exhaustive certificate.
pub fn sum_woven_check(
    e1: &Matrix,
    bank_f: &FrameBank,
    e2: &Matrix,
    bank_g: &FrameBank,
    cap: u64,
) -> Result<(FrameBank, bool, WovenCertificate)> {
    check_sum_shapes(e1, bank_f, e2, bank_g)?;
    let combined = combined_analysis(e1, bank_f, e2, bank_g);
    let gram = combined.transpose().matmul(&combined);
    let decomposition = sym_eigen(&gram)?;
    let sigma_min = decomposition.lambda_min().max(0.0).sqrt();
    let sigma_max = decomposition.lambda_max().max(0.0).sqrt();
    let combined_rank_ok = sigma_min > rank_tol(sigma_max);
    let summed = sum_bank(e1, bank_f, e2, bank_g)?;
    let certificate = summed.universal_bounds_exhaustive(cap)?;
    Ok((summed, combined_rank_ok, certificate))
}

/// The frame operator of the weighted sum family, computed from its Gram
/// factorization: the combined analysis matrix transposed times itself.
/// Always symmetric positive semidefinite, and equal to the sum bank's woven
/// frame operator.
pub fn sum_operator(
    e1: &Matrix,
    bank_f: &FrameBank,
    e2: &Matrix,
    bank_g: &FrameBank,
) -> Result<Matrix> {
    check_sum_shapes(e1, bank_f, e2, bank_g)?;
    let combined = combined_analysis(e1, bank_f, e2, bank_g);
    Ok(combined.transpose().matmul(&combined))
}
