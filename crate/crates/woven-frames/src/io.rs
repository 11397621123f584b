//! JSON documents for banks, operators, and subspaces, plus loading with
//! schema validation. Loading is forgiving where it can be (near-orthonormal
//! subspace bases are repaired); the math stays strict.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::linalg::Matrix;
use crate::subspace::Subspace;
use crate::weaving::FrameBank;

/// Defect up to which a loaded subspace basis is re-orthonormalized rather
/// than rejected.
pub const SUBSPACE_LOAD_TOL: f64 = 1e-6;

/// On-disk form of a frame bank:
/// `{"dim": d, "frames": [{"name": "F", "vectors": [[..], ..]}, ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankDocument {
    pub dim: usize,
    pub frames: Vec<FrameEntry>,
    #[serde(default, skip_serializing_if = "Metadata::is_empty")]
    pub metadata: Metadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub name: String,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl Metadata {
    pub fn is_empty(&self) -> bool {
        self.title.is_none() && self.source.is_none()
    }
}

impl BankDocument {
    /// Validate the document and build the bank: unique names, every vector
    /// of the stated dimension, every frame over the same index set.
    pub fn to_bank(&self) -> Result<FrameBank> {
        self.validate("bank document")
    }

    fn validate(&self, path: &str) -> Result<FrameBank> {
        let schema = |message: String| Error::Schema {
            path: path.to_string(),
            message,
        };
        if self.frames.is_empty() {
            return Err(schema("bank must contain at least one frame".into()));
        }
        for (a, entry) in self.frames.iter().enumerate() {
            for other in &self.frames[a + 1..] {
                if entry.name == other.name {
                    return Err(schema(format!("duplicate frame name \"{}\"", entry.name)));
                }
            }
        }
        let n = self.frames[0].vectors.len();
        let mut frames = Vec::with_capacity(self.frames.len());
        for entry in &self.frames {
            if entry.vectors.len() != n {
                return Err(schema(format!(
                    "frame \"{}\" has {} vectors but frame \"{}\" has {n}",
                    entry.name,
                    entry.vectors.len(),
                    self.frames[0].name
                )));
            }
            for (i, vector) in entry.vectors.iter().enumerate() {
                if vector.len() != self.dim {
                    return Err(schema(format!(
                        "frame \"{}\" vector {i} has length {}, expected dimension {}",
                        entry.name,
                        vector.len(),
                        self.dim
                    )));
                }
            }
            frames.push(
                Frame::from_rows(self.dim, &entry.vectors).map_err(|e| schema(e.to_string()))?,
            );
        }
        FrameBank::new(frames)
    }

    /// Index of a named frame.
    pub fn frame_index(&self, name: &str) -> Option<usize> {
        self.frames.iter().position(|entry| entry.name == name)
    }

    pub fn frame_names(&self) -> Vec<&str> {
        self.frames.iter().map(|entry| entry.name.as_str()).collect()
    }

    /// Rebuild a document from a bank, keeping the given names.
    pub fn from_bank(bank: &FrameBank, names: &[String], metadata: Metadata) -> Self {
        let frames = bank
            .frames()
            .iter()
            .zip(names)
            .map(|(frame, name)| FrameEntry {
                name: name.clone(),
                vectors: frame
                    .vectors()
                    .iter()
                    .map(|v| v.as_slice().to_vec())
                    .collect(),
            })
            .collect();
        Self {
            dim: bank.dim(),
            frames,
            metadata,
        }
    }
}

/// On-disk form of a square operator: `{"dim": d, "matrix": [[..], ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorDocument {
    pub dim: usize,
    pub matrix: Vec<Vec<f64>>,
}

impl OperatorDocument {
    pub fn to_matrix(&self) -> Result<Matrix> {
        let schema = |message: String| Error::Schema {
            path: "operator document".to_string(),
            message,
        };
        if self.matrix.len() != self.dim {
            return Err(schema(format!(
                "matrix has {} rows, expected dimension {}",
                self.matrix.len(),
                self.dim
            )));
        }
        for (r, row) in self.matrix.iter().enumerate() {
            if row.len() != self.dim {
                return Err(schema(format!(
                    "matrix row {r} has length {}, expected {}",
                    row.len(),
                    self.dim
                )));
            }
        }
        Matrix::from_rows(&self.matrix)
    }
}

/// On-disk form of a subspace: `{"ambient_dim": d, "basis_columns": [[..], ..]}`
/// where each inner list is one basis column of length `ambient_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceDocument {
    pub ambient_dim: usize,
    pub basis_columns: Vec<Vec<f64>>,
}

impl SubspaceDocument {
    pub fn to_subspace(&self) -> Result<Subspace> {
        let schema = |message: String| Error::Schema {
            path: "subspace document".to_string(),
            message,
        };
        if self.basis_columns.is_empty() {
            return Err(schema("subspace needs at least one basis column".into()));
        }
        for (c, column) in self.basis_columns.iter().enumerate() {
            if column.len() != self.ambient_dim {
                return Err(schema(format!(
                    "basis column {c} has length {}, expected ambient dimension {}",
                    column.len(),
                    self.ambient_dim
                )));
            }
        }
        let mut columns = Matrix::zeros(self.ambient_dim, self.basis_columns.len());
        for (c, column) in self.basis_columns.iter().enumerate() {
            for (r, &value) in column.iter().enumerate() {
                columns.set(r, c, value);
            }
        }
        Subspace::orthonormalized(columns, SUBSPACE_LOAD_TOL)
    }

    pub fn from_subspace(subspace: &Subspace) -> Self {
        let basis = subspace.basis();
        let basis_columns = (0..basis.cols())
            .map(|c| (0..basis.rows()).map(|r| basis.get(r, c)).collect())
            .collect();
        Self {
            ambient_dim: subspace.ambient_dim(),
            basis_columns,
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn reanchor_schema(error: Error, path: &Path) -> Error {
    match error {
        Error::Schema { message, .. } => Error::Schema {
            path: path.display().to_string(),
            message,
        },
        other => other,
    }
}

pub fn load_bank_document(path: &Path) -> Result<BankDocument> {
    let document: BankDocument = read_json(path)?;
    // validate eagerly so load errors name the file
    document.validate(&path.display().to_string())?;
    Ok(document)
}

/// Load and validate a bank file.
pub fn load_bank(path: &Path) -> Result<FrameBank> {
    let document = load_bank_document(path)?;
    document.to_bank()
}

pub fn load_operator(path: &Path) -> Result<Matrix> {
    let document: OperatorDocument = read_json(path)?;
    document.to_matrix().map_err(|e| reanchor_schema(e, path))
}

pub fn load_subspace(path: &Path) -> Result<Subspace> {
    let document: SubspaceDocument = read_json(path)?;
    document.to_subspace().map_err(|e| reanchor_schema(e, path))
}

/// Serialize a document as pretty JSON with a trailing newline. Numbers use
/// the shortest representation that parses back to the identical 64-bit
/// value, so round trips are entry-exact.
pub fn to_json_string<T: Serialize>(document: &T) -> String {
    let mut text = serde_json::to_string_pretty(document).expect("documents serialize");
    text.push('\n');
    text
}

pub fn save_json<T: Serialize>(path: &Path, document: &T) -> Result<()> {
    std::fs::write(path, to_json_string(document)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
    }

    #[test]
    fn loads_the_two_frame_plane_bank() {
        let document = load_bank_document(&fixture("example_2_3.json")).unwrap();
        assert_eq!(document.dim, 2);
        assert_eq!(document.frame_names(), vec!["F", "G"]);
        let bank = document.to_bank().unwrap();
        assert_eq!(bank.dim(), 2);
        assert_eq!(bank.index_count(), 3);
        assert_eq!(bank.frame_count(), 2);
        assert_eq!(bank.vector(1, 0).as_slice(), &[-1.0, 2.0]);
    }

    #[test]
    fn loads_the_application_bank() {
        let bank = load_bank(&fixture("application_alpha_1.json")).unwrap();
        assert_eq!(bank.dim(), 3);
        assert_eq!(bank.index_count(), 6);
        assert_eq!(bank.frame_count(), 2);
    }

    #[test]
    fn dimension_mismatch_names_frame_and_index() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(
            &path,
            r#"{"dim": 3, "frames": [{"name": "F", "vectors": [[1.0, 0.0, 0.0], [1.0, 0.0]]}]}"#,
        )
        .unwrap();
        let error = load_bank(&path).unwrap_err();
        let message = error.to_string();
        assert!(message.contains("\"F\""), "got: {message}");
        assert!(message.contains("vector 1"), "got: {message}");
    }

    #[test]
    fn uneven_frame_lengths_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(
            &path,
            r#"{"dim": 2, "frames": [
                {"name": "A", "vectors": [[1.0, 0.0], [0.0, 1.0]]},
                {"name": "B", "vectors": [[1.0, 0.0]]}
            ]}"#,
        )
        .unwrap();
        let message = load_bank(&path).unwrap_err().to_string();
        assert!(message.contains("\"B\""), "got: {message}");
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(
            &path,
            r#"{"dim": 2, "frames": [
                {"name": "A", "vectors": [[1.0, 0.0]]},
                {"name": "A", "vectors": [[0.0, 1.0]]}
            ]}"#,
        )
        .unwrap();
        let message = load_bank(&path).unwrap_err().to_string();
        assert!(message.contains("duplicate"), "got: {message}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.json");
        std::fs::write(&path, "{\n  \"dim\": 2,\n  oops\n}").unwrap();
        let message = load_bank(&path).unwrap_err().to_string();
        assert!(message.contains("line 3"), "got: {message}");
    }

    #[test]
    fn bank_round_trip_is_entry_exact() {
        let document = load_bank_document(&fixture("example_2_3.json")).unwrap();
        let text = to_json_string(&document);
        let reparsed: BankDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(document, reparsed);

        // irrational entries survive the round trip bit for bit
        let bank = document.to_bank().unwrap();
        let scaled = bank
            .transformed(&Matrix::identity(2).scaled(1.0 / 3.0_f64.sqrt()))
            .unwrap();
        let names = vec!["F".to_string(), "G".to_string()];
        let doc = BankDocument::from_bank(&scaled, &names, Metadata::default());
        let reparsed: BankDocument = serde_json::from_str(&to_json_string(&doc)).unwrap();
        assert_eq!(doc, reparsed);
    }

    #[test]
    fn operator_and_subspace_documents_load() {
        let swap = load_operator(&fixture("operator_swap_2d.json")).unwrap();
        assert_eq!(swap, Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap());

        let plane = load_subspace(&fixture("subspace_e1e2_3d.json")).unwrap();
        assert_eq!(plane.ambient_dim(), 3);
        assert_eq!(plane.subspace_dim(), 2);
    }

    #[test]
    fn skewed_subspace_documents_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("skew.json");
        std::fs::write(
            &path,
            r#"{"ambient_dim": 2, "basis_columns": [[1.0, 0.0], [0.7, 0.7]]}"#,
        )
        .unwrap();
        assert!(matches!(
            load_subspace(&path),
            Err(Error::NotOrthonormal { .. })
        ));
    }
}
