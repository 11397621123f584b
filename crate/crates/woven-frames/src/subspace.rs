//! Subspaces with orthonormal bases, orthogonal projection of banks, and
//! principal-angle intersections.

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Matrix, Vector};
use crate::weaving::{FrameBank, WovenCertificate};

/// Orthonormality defect accepted by [`Subspace::new`].
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Principal-angle criterion for the intersection: directions whose cosine
/// is at least `1 - INTERSECTION_SV_TOL` count as shared.
pub const INTERSECTION_SV_TOL: f64 = 1e-8;

/// A subspace of d-space carried by a `d x k` matrix with orthonormal
/// columns. The orthogonal projector onto it is basis times basis transposed.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Matrix,
}

impl Subspace {
    /// Accept a basis whose orthonormality defect is within
    /// [`ORTHONORMALITY_TOL`].
    pub fn new(basis: Matrix) -> Result<Self> {
        let defect = orthonormality_defect(&basis);
        if defect > ORTHONORMALITY_TOL {
            return Err(Error::NotOrthonormal {
                defect,
                tolerance: ORTHONORMALITY_TOL,
            });
        }
        Ok(Self {
            ambient_dim: basis.rows(),
            basis,
        })
    }

    /// Accept nearly orthonormal columns: anything within `max_defect` is
    /// re-orthonormalized by modified Gram-Schmidt, anything worse rejected.
    pub fn orthonormalized(columns: Matrix, max_defect: f64) -> Result<Self> {
        let defect = orthonormality_defect(&columns);
        if defect > max_defect {
            return Err(Error::NotOrthonormal {
                defect,
                tolerance: max_defect,
            });
        }
        Self::new(gram_schmidt(&columns)?)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension k of the subspace.
    pub fn subspace_dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// The d x d orthogonal projector onto the subspace.
    pub fn projector(&self) -> Matrix {
        self.basis.matmul(&self.basis.transpose())
    }

    /// Coordinates of a vector in the subspace basis (basis transposed
    /// applied to it).
    pub fn coordinates_of(&self, v: &Vector) -> Result<Vector> {
        if v.len() != self.ambient_dim {
            return Err(Error::Dimension(format!(
                "vector has length {}, ambient dimension is {}",
                v.len(),
                self.ambient_dim
            )));
        }
        Vector::new(self.basis.transpose().mul_vec(v.as_slice()))
    }

    /// Orthonormal basis of the intersection with another subspace, found by
    /// the principal-angle criterion: directions of the first basis whose
    /// singular value against the second basis reaches 1 within
    /// [`INTERSECTION_SV_TOL`]. Errors out when the intersection is trivial.
    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::Dimension(format!(
                "ambient dimensions differ: {} vs {}",
                self.ambient_dim, other.ambient_dim
            )));
        }
        let cross = self.basis.transpose().matmul(&other.basis);
        let gram = cross.matmul(&cross.transpose());
        let decomposition = sym_eigen(&gram)?;

        let threshold = (1.0 - INTERSECTION_SV_TOL) * (1.0 - INTERSECTION_SV_TOL);
        // eigenvalues ascend: walk from the top down
        let k = self.basis.cols();
        let selected: Vec<usize> = (0..k)
            .rev()
            .take_while(|&idx| decomposition.eigenvalues()[idx] >= threshold)
            .collect();
        if selected.is_empty() {
            return Err(Error::EmptyIntersection);
        }

        let q = decomposition.eigenvectors();
        let mut columns = Matrix::zeros(self.ambient_dim, selected.len());
        for (col, &idx) in selected.iter().enumerate() {
            for row in 0..self.ambient_dim {
                let mut sum = 0.0;
                for inner in 0..k {
                    sum += self.basis.get(row, inner) * q.get(inner, idx);
                }
                columns.set(row, col, sum);
            }
        }
        Subspace::new(gram_schmidt(&columns)?)
    }
}

/// Largest deviation of basis-transposed-times-basis from the identity.
pub fn orthonormality_defect(basis: &Matrix) -> f64 {
    let gram = basis.transpose().matmul(basis);
    let mut defect: f64 = 0.0;
    for r in 0..gram.rows() {
        for c in 0..gram.cols() {
            let target = if r == c { 1.0 } else { 0.0 };
            defect = defect.max((gram.get(r, c) - target).abs());
        }
    }
    defect
}

/// Modified Gram-Schmidt on the columns. Rejects dependent columns.
fn gram_schmidt(columns: &Matrix) -> Result<Matrix> {
    let rows = columns.rows();
    let k = columns.cols();
    let mut cols: Vec<Vec<f64>> = (0..k)
        .map(|c| (0..rows).map(|r| columns.get(r, c)).collect())
        .collect();
    for j in 0..k {
        let (done, rest) = cols.split_at_mut(j);
        let current = &mut rest[0];
        for prev in done.iter() {
            let coefficient: f64 = current.iter().zip(prev).map(|(a, b)| a * b).sum();
            for (entry, base) in current.iter_mut().zip(prev) {
                *entry -= coefficient * base;
            }
        }
        let norm: f64 = current.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-8 {
            return Err(Error::NotOrthonormal {
                defect: 1.0 - norm,
                tolerance: 1e-8,
            });
        }
        for entry in current.iter_mut() {
            *entry /= norm;
        }
    }
    let mut out = Matrix::zeros(rows, k);
    for (c, col) in cols.iter().enumerate() {
        for (r, &value) in col.iter().enumerate() {
            out.set(r, c, value);
        }
    }
    Ok(out)
}

/// Express every bank vector in subspace coordinates and certify the
/// projected bank exhaustively. For a woven input bank the restricted
/// certificate interval sits inside the ambient one.
pub fn project_bank(
    subspace: &Subspace,
    bank: &FrameBank,
    cap: u64,
) -> Result<(FrameBank, WovenCertificate)> {
    if subspace.ambient_dim() != bank.dim() {
        return Err(Error::Dimension(format!(
            "subspace lives in dimension {}, bank in {}",
            subspace.ambient_dim(),
            bank.dim()
        )));
    }
    let projected = bank.transformed(&subspace.basis().transpose())?;
    let certificate = projected.universal_bounds_exhaustive(cap)?;
    Ok((projected, certificate))
}
