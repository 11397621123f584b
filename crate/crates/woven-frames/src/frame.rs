//! Frames in d-dimensional real space and their operator suite: analysis,
//! synthesis, frame, and Gram operators, optimal bounds, canonical dual and
//! canonical tight frames, and operator push-forwards.

use crate::error::{Error, Result};
use crate::linalg::{rank_tol, sym_eigen, Matrix, SpectralFn, Vector};

/// Tolerance for calling computed bounds Parseval, i.e. both within this
/// distance of 1.
pub const PARSEVAL_TOL: f64 = 1e-9;

/// Relative tolerance for calling computed bounds tight (equal).
pub const TIGHT_TOL: f64 = 1e-9;

/// An ordered finite family of vectors sharing one ambient dimension.
///
/// Zero vectors are legal members: they contribute nothing to the frame
/// operator. An all-zero family is a valid Bessel family that fails
/// [`Bounds::is_frame`].
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    dim: usize,
    vectors: Vec<Vector>,
}

impl Frame {
    pub fn new(dim: usize, vectors: Vec<Vector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Dimension(
                "frame must contain at least one vector".into(),
            ));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::Dimension(format!(
                    "vector {i} has length {}, expected ambient dimension {dim}",
                    v.len()
                )));
            }
        }
        Ok(Self { dim, vectors })
    }

    /// Build a frame from plain coordinate rows.
    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let vectors = rows
            .iter()
            .map(|r| Vector::new(r.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, vectors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vectors in the family.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least one vector by construction
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &Vector {
        &self.vectors[i]
    }

    /// The n x d analysis matrix: row i is the i-th frame vector, so applying
    /// it to f yields the coefficient sequence of inner products with f. Its
    /// transpose is the synthesis operator.
    pub fn analysis_matrix(&self) -> Matrix {
        let mut rows = Vec::with_capacity(self.len() * self.dim);
        for v in &self.vectors {
            rows.extend_from_slice(v.as_slice());
        }
        Matrix::new(self.len(), self.dim, rows).expect("frame invariants give a valid matrix")
    }

    /// The d x n synthesis matrix, mapping coefficients to their weighted sum
    /// of frame vectors.
    pub fn synthesis_matrix(&self) -> Matrix {
        self.analysis_matrix().transpose()
    }

    /// The d x d frame operator: the sum of the outer products of the frame
    /// vectors, equivalently analysis transposed times analysis. Symmetric
    /// positive semidefinite.
    pub fn frame_operator(&self) -> Matrix {
        let u = self.analysis_matrix();
        u.transpose().matmul(&u)
    }

    /// The n x n Gram matrix of pairwise inner products. Shares its nonzero
    /// spectrum with the frame operator.
    pub fn gram_matrix(&self) -> Matrix {
        let u = self.analysis_matrix();
        u.matmul(&u.transpose())
    }

    /// Optimal (spectral) frame bounds: the extreme eigenvalues of the frame
    /// operator. These are the tightest constants sandwiching the coefficient
    /// energy of every vector.
    pub fn optimal_bounds(&self) -> Result<Bounds> {
        let decomposition = sym_eigen(&self.frame_operator())?;
        Ok(Bounds::from_spectrum(
            decomposition.lambda_min(),
            decomposition.lambda_max(),
        ))
    }

    /// The canonical dual frame: every vector mapped through the inverse
    /// frame operator. Reconstruction holds: pairing any f against the dual
    /// coefficients resynthesizes f.
    pub fn canonical_dual(&self) -> Result<Frame> {
        let inverse = self.checked_spectral(SpectralFn::Inverse)?;
        self.transformed(&inverse)
    }

    /// The canonical tight frame: every vector mapped through the inverse
    /// square root of the frame operator. The result is Parseval.
    pub fn canonical_tight(&self) -> Result<Frame> {
        let root = self.checked_spectral(SpectralFn::InvSqrt)?;
        self.transformed(&root)
    }

    fn checked_spectral(&self, f: SpectralFn) -> Result<Matrix> {
        let decomposition = sym_eigen(&self.frame_operator())?;
        let lambda_min = decomposition.lambda_min();
        if lambda_min <= rank_tol(decomposition.lambda_max()) {
            return Err(Error::NotAFrame { lambda_min });
        }
        crate::linalg::spectral_apply_decomposed(&decomposition, f)
    }

    /// The frame `{E f_i}`. The frame operator of the result equals
    /// `E S E^T`.
    pub fn transformed(&self, e: &Matrix) -> Result<Frame> {
        if !e.is_square() || e.rows() != self.dim {
            return Err(Error::Dimension(format!(
                "operator is {}x{}, frame dimension is {}",
                e.rows(),
                e.cols(),
                self.dim
            )));
        }
        let vectors = self
            .vectors
            .iter()
            .map(|v| Vector::new(e.mul_vec(v.as_slice())))
            .collect::<Result<Vec<_>>>()?;
        Frame::new(self.dim, vectors)
    }
}

/// Lower and upper frame bounds, `0 <= lower <= upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    lower: f64,
    upper: f64,
}

impl Bounds {
    /// Clamp a computed eigenvalue pair into a valid bounds value. Tiny
    /// negative eigenvalues of positive semidefinite operators round up to 0.
    pub(crate) fn from_spectrum(lambda_min: f64, lambda_max: f64) -> Self {
        let upper = lambda_max.max(0.0);
        let lower = lambda_min.clamp(0.0, upper);
        Self { lower, upper }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Whether the family spans: the lower bound clears the relative rank
    /// threshold.
    pub fn is_frame(&self) -> bool {
        self.lower > rank_tol(self.upper)
    }

    pub fn is_parseval(&self) -> bool {
        (self.lower - 1.0).abs().max((self.upper - 1.0).abs()) <= PARSEVAL_TOL
    }

    pub fn is_tight(&self) -> bool {
        (self.upper - self.lower) <= TIGHT_TOL * (1.0 + self.upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    /// F = {2e1, 2e2 - e1, 3e2} in the plane.
    fn frame_f() -> Frame {
        Frame::from_rows(2, &[vec![2.0, 0.0], vec![-1.0, 2.0], vec![0.0, 3.0]]).unwrap()
    }

    /// G = {2e1, 2e1 + e2, 2e2} in the plane.
    fn frame_g() -> Frame {
        Frame::from_rows(2, &[vec![2.0, 0.0], vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap()
    }

    fn basis_2d() -> Frame {
        Frame::from_rows(2, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn analysis_matrix_rows_are_vectors() {
        let u = basis_2d().analysis_matrix();
        assert_eq!(u, Matrix::identity(2));

        let u = frame_f().analysis_matrix();
        assert_eq!(u.row(0), &[2.0, 0.0]);
        assert_eq!(u.row(1), &[-1.0, 2.0]);
        assert_eq!(u.row(2), &[0.0, 3.0]);

        let zero = Frame::from_rows(2, &[vec![0.0, 0.0]]).unwrap();
        assert_eq!(zero.analysis_matrix().row(0), &[0.0, 0.0]);
    }

    #[test]
    fn synthesis_is_transpose() {
        let t = frame_g().synthesis_matrix();
        assert_eq!(t, frame_g().analysis_matrix().transpose());
    }

    #[test]
    fn frame_operator_examples() {
        assert_eq!(basis_2d().frame_operator(), Matrix::identity(2));

        let s_f = frame_f().frame_operator();
        assert_eq!(
            s_f,
            Matrix::from_rows(&[vec![5.0, -2.0], vec![-2.0, 13.0]]).unwrap()
        );

        let s_g = frame_g().frame_operator();
        assert_eq!(
            s_g,
            Matrix::from_rows(&[vec![8.0, 2.0], vec![2.0, 5.0]]).unwrap()
        );
    }

    #[test]
    fn gram_matrix_examples() {
        assert_eq!(basis_2d().gram_matrix(), Matrix::identity(2));

        let repeated = Frame::from_rows(2, &[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(
            repeated.gram_matrix(),
            Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap()
        );

        assert_eq!(
            frame_g().gram_matrix(),
            Matrix::from_rows(&[
                vec![4.0, 4.0, 0.0],
                vec![4.0, 5.0, 2.0],
                vec![0.0, 2.0, 4.0]
            ])
            .unwrap()
        );
    }

    #[test]
    fn optimal_bounds_examples() {
        let g = frame_g().optimal_bounds().unwrap();
        approx(g.lower(), 4.0, 1e-9);
        approx(g.upper(), 9.0, 1e-9);
        assert!(g.is_frame());
        assert!(!g.is_tight());

        let f = frame_f().optimal_bounds().unwrap();
        let root5 = 5.0_f64.sqrt();
        approx(f.lower(), 9.0 - 2.0 * root5, 1e-9);
        approx(f.upper(), 9.0 + 2.0 * root5, 1e-9);
        // the coarser containment pair (4, 17) is valid but not optimal
        assert!(f.lower() >= 4.0 && f.upper() <= 17.0);

        let b = basis_2d().optimal_bounds().unwrap();
        approx(b.lower(), 1.0, 1e-12);
        approx(b.upper(), 1.0, 1e-12);
        assert!(b.is_parseval() && b.is_tight());
    }

    #[test]
    fn canonical_dual_examples() {
        let dual = basis_2d().canonical_dual().unwrap();
        for (v, w) in basis_2d().vectors().iter().zip(dual.vectors()) {
            approx(v[0], w[0], 1e-12);
            approx(v[1], w[1], 1e-12);
        }

        // tight frame with bound 2: {e1, e2, e1, e2} scaled by 1
        let tight = Frame::from_rows(
            2,
            &[
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
            ],
        )
        .unwrap();
        let dual = tight.canonical_dual().unwrap();
        approx(dual.vector(0)[0], 0.5, 1e-12);
        approx(dual.vector(1)[1], 0.5, 1e-12);

        let dual_g = frame_g().canonical_dual().unwrap();
        approx(dual_g.vector(0)[0], 10.0 / 36.0, 1e-12);
        approx(dual_g.vector(0)[1], -4.0 / 36.0, 1e-12);
    }

    #[test]
    fn canonical_dual_rejects_deficient_family() {
        let flat = Frame::from_rows(2, &[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert!(matches!(
            flat.canonical_dual(),
            Err(Error::NotAFrame { .. })
        ));
    }

    #[test]
    fn canonical_tight_examples() {
        let parseval = basis_2d();
        let tightened = parseval.canonical_tight().unwrap();
        for (v, w) in parseval.vectors().iter().zip(tightened.vectors()) {
            approx(v[0], w[0], 1e-9);
            approx(v[1], w[1], 1e-9);
        }

        let doubled = Frame::from_rows(2, &[vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let tightened = doubled.canonical_tight().unwrap();
        approx(tightened.vector(0)[0], 1.0, 1e-9);

        let bounds = frame_g().canonical_tight().unwrap().optimal_bounds().unwrap();
        approx(bounds.lower(), 1.0, 1e-8);
        approx(bounds.upper(), 1.0, 1e-8);
    }

    #[test]
    fn transformed_examples() {
        let same = frame_g().transformed(&Matrix::identity(2)).unwrap();
        assert_eq!(same, frame_g());

        let doubled = basis_2d()
            .transformed(&Matrix::identity(2).scaled(2.0))
            .unwrap();
        let bounds = doubled.optimal_bounds().unwrap();
        approx(bounds.lower(), 4.0, 1e-9);
        approx(bounds.upper(), 4.0, 1e-9);

        let swap = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let swapped = frame_g().transformed(&swap).unwrap();
        assert_eq!(
            swapped.frame_operator(),
            Matrix::from_rows(&[vec![5.0, 2.0], vec![2.0, 8.0]]).unwrap()
        );

        assert!(frame_g().transformed(&Matrix::identity(3)).is_err());
    }

    #[test]
    fn transformed_frame_operator_is_conjugation() {
        let e = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.5, -1.0]]).unwrap();
        let transformed = frame_f().transformed(&e).unwrap();
        let direct = transformed.frame_operator();
        let conjugated = e.matmul(&frame_f().frame_operator()).matmul(&e.transpose());
        let scale = 1.0 + direct.max_norm();
        assert!(direct.sub(&conjugated).max_norm() <= 1e-9 * scale);
    }

    #[test]
    fn zero_family_is_bessel_but_not_frame() {
        let zero = Frame::from_rows(2, &[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let bounds = zero.optimal_bounds().unwrap();
        assert_eq!(bounds.lower(), 0.0);
        assert_eq!(bounds.upper(), 0.0);
        assert!(!bounds.is_frame());
        assert!(matches!(
            zero.canonical_dual(),
            Err(Error::NotAFrame { .. })
        ));
    }
}
