//! Report structure shared by every subcommand. The body is deterministic
//! for fixed inputs and seed; only the trailing wall-clock differs between
//! runs, so it is the one field excluded from byte comparisons.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use woven_frames::io::BankDocument;
use woven_frames::{CertificateMode, Partition, WovenCertificate};

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub tolerances: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(flatten)]
    pub payload: Payload,
    pub verdict: &'static str,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct FrameBoundsRow {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub is_frame: bool,
    pub tight: bool,
    pub parseval: bool,
}

#[derive(Debug, Serialize)]
pub struct CertificateSummary {
    pub mode: &'static str,
    pub partitions_checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub universal_lower: f64,
    pub universal_upper: f64,
    pub witness_lower: String,
    pub witness_upper: String,
    pub is_woven: bool,
}

impl CertificateSummary {
    pub fn new(certificate: &WovenCertificate, seed: Option<u64>) -> Self {
        Self {
            mode: certificate.mode().as_str(),
            partitions_checked: certificate.partitions_checked(),
            seed: match certificate.mode() {
                CertificateMode::Sampled => seed,
                CertificateMode::Exhaustive => None,
            },
            universal_lower: certificate.universal_lower(),
            universal_upper: certificate.universal_upper(),
            witness_lower: partition_string(certificate.witness_lower()),
            witness_upper: partition_string(certificate.witness_upper()),
            is_woven: certificate.is_woven(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PartitionRow {
    pub partition: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    Bounds {
        frames: Vec<FrameBoundsRow>,
    },
    Weave {
        partition: String,
        lower: f64,
        upper: f64,
        is_frame: bool,
        tight: bool,
        parseval: bool,
    },
    VerifyWoven {
        certificate: CertificateSummary,
        concatenated_lambda_min: f64,
        concatenated_lambda_max: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        table: Option<Vec<PartitionRow>>,
    },
    Dual {
        bank: BankDocument,
        reconstruction_residual: f64,
    },
    Tighten {
        bank: BankDocument,
        concatenated_lower: f64,
        concatenated_upper: f64,
    },
    Transform {
        certificate_lower: f64,
        certificate_upper: f64,
        transformed: CertificateSummary,
        contained: bool,
    },
    SumCheck {
        combined_rank_ok: bool,
        certificate: CertificateSummary,
        consistent: bool,
    },
    Project {
        ambient: CertificateSummary,
        restricted: CertificateSummary,
        contained: bool,
    },
    Intersect {
        intersection_dim: usize,
        basis_columns: Vec<Vec<f64>>,
        ambient: CertificateSummary,
        restricted: CertificateSummary,
        contained: bool,
    },
    Failure {
        message: String,
    },
}

pub fn partition_string(partition: &Partition) -> String {
    partition
        .assignment()
        .iter()
        .map(|label| label.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Plain-text rendering: one `key: value` line per fact, certificates
    /// and tables expanded, wall clock last.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        for input in &self.inputs {
            let _ = writeln!(out, "input: {} sha256={}", input.path, input.sha256);
        }
        for (name, value) in &self.tolerances {
            let _ = writeln!(out, "tolerance {name}: {value:e}");
        }
        for warning in &self.warnings {
            let _ = writeln!(out, "warning: {warning}");
        }
        self.payload.render(&mut out);
        let _ = writeln!(out, "verdict: {}", self.verdict);
        let _ = writeln!(out, "wall_clock_seconds: {}", self.wall_clock_seconds);
        out
    }
}

impl Payload {
    fn render(&self, out: &mut String) {
        match self {
            Payload::Bounds { frames } => {
                for row in frames {
                    let _ = writeln!(
                        out,
                        "frame {}: lower {} upper {} is_frame {} tight {} parseval {}",
                        row.name, row.lower, row.upper, row.is_frame, row.tight, row.parseval
                    );
                }
            }
            Payload::Weave {
                partition,
                lower,
                upper,
                is_frame,
                tight,
                parseval,
            } => {
                let _ = writeln!(out, "partition: {partition}");
                let _ = writeln!(out, "lower: {lower}");
                let _ = writeln!(out, "upper: {upper}");
                let _ = writeln!(out, "is_frame: {is_frame}");
                let _ = writeln!(out, "tight: {tight}");
                let _ = writeln!(out, "parseval: {parseval}");
            }
            Payload::VerifyWoven {
                certificate,
                concatenated_lambda_min,
                concatenated_lambda_max,
                table,
            } => {
                certificate.render(out, "");
                let _ = writeln!(out, "concatenated_lambda_min: {concatenated_lambda_min}");
                let _ = writeln!(out, "concatenated_lambda_max: {concatenated_lambda_max}");
                if let Some(rows) = table {
                    for row in rows {
                        let _ = writeln!(
                            out,
                            "partition {}: lower {} upper {}",
                            row.partition, row.lower, row.upper
                        );
                    }
                }
            }
            Payload::Dual {
                bank,
                reconstruction_residual,
            } => {
                render_bank(out, bank);
                let _ = writeln!(out, "reconstruction_residual: {reconstruction_residual}");
            }
            Payload::Tighten {
                bank,
                concatenated_lower,
                concatenated_upper,
            } => {
                render_bank(out, bank);
                let _ = writeln!(out, "concatenated_lower: {concatenated_lower}");
                let _ = writeln!(out, "concatenated_upper: {concatenated_upper}");
            }
            Payload::Transform {
                certificate_lower,
                certificate_upper,
                transformed,
                contained,
            } => {
                let _ = writeln!(out, "certificate_lower: {certificate_lower}");
                let _ = writeln!(out, "certificate_upper: {certificate_upper}");
                transformed.render(out, "transformed_");
                let _ = writeln!(out, "contained: {contained}");
            }
            Payload::SumCheck {
                combined_rank_ok,
                certificate,
                consistent,
            } => {
                let _ = writeln!(out, "combined_rank_ok: {combined_rank_ok}");
                certificate.render(out, "");
                let _ = writeln!(out, "consistent: {consistent}");
            }
            Payload::Project {
                ambient,
                restricted,
                contained,
            } => {
                ambient.render(out, "ambient_");
                restricted.render(out, "restricted_");
                let _ = writeln!(out, "contained: {contained}");
            }
            Payload::Intersect {
                intersection_dim,
                basis_columns,
                ambient,
                restricted,
                contained,
            } => {
                let _ = writeln!(out, "intersection_dim: {intersection_dim}");
                for (c, column) in basis_columns.iter().enumerate() {
                    let rendered: Vec<String> = column.iter().map(|x| x.to_string()).collect();
                    let _ = writeln!(out, "basis_column {c}: {}", rendered.join(","));
                }
                ambient.render(out, "ambient_");
                restricted.render(out, "restricted_");
                let _ = writeln!(out, "contained: {contained}");
            }
            Payload::Failure { message } => {
                let _ = writeln!(out, "failure: {message}");
            }
        }
    }
}

impl CertificateSummary {
    fn render(&self, out: &mut String, prefix: &str) {
        let _ = writeln!(out, "{prefix}mode: {}", self.mode);
        let _ = writeln!(out, "{prefix}partitions_checked: {}", self.partitions_checked);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "{prefix}seed: {seed}");
        }
        let _ = writeln!(out, "{prefix}universal_lower: {}", self.universal_lower);
        let _ = writeln!(out, "{prefix}universal_upper: {}", self.universal_upper);
        let _ = writeln!(out, "{prefix}witness_lower: {}", self.witness_lower);
        let _ = writeln!(out, "{prefix}witness_upper: {}", self.witness_upper);
        let _ = writeln!(out, "{prefix}is_woven: {}", self.is_woven);
    }
}

fn render_bank(out: &mut String, bank: &BankDocument) {
    let _ = writeln!(out, "dim: {}", bank.dim);
    for entry in &bank.frames {
        for (i, vector) in entry.vectors.iter().enumerate() {
            let rendered: Vec<String> = vector.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "frame {} vector {i}: {}", entry.name, rendered.join(","));
        }
    }
}
