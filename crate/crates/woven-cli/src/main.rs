//! `woven` — command-line verifier for frame banks.
//!
//! Subcommands load JSON documents, run the corresponding certification, and
//! print a deterministic report (text or JSON) to standard out. Exit code 0
//! means the property verified, 1 means the verification ran and failed
//! (for example the bank is not woven), 2 means the inputs were unusable.

mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use woven_frames::io::{self, BankDocument, Metadata};
use woven_frames::{
    sum_woven_check, sym_eigen, CertificateMode, Error, FrameBank, Partition, Subspace,
    DEFAULT_ENUM_CAP, DEFAULT_SAMPLE_TRIALS,
};

use report::{
    partition_string, CertificateSummary, FrameBoundsRow, InputDigest, PartitionRow, Payload,
    Report,
};

/// Relative slack used when checking that one certified interval sits inside
/// another; covers rounding in the two independent computations.
const CONTAINMENT_SLACK: f64 = 1e-9;

/// Residual accepted when verifying the dual-expansion identity and the
/// Parseval property of tightened banks.
const RECONSTRUCTION_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "woven")]
#[command(about = "Verify frame banks: bounds, weavings, woven certificates, and transforms")]
#[command(version)]
struct Cli {
    /// Output format: text | json
    #[arg(long, global = true, default_value = "text")]
    format: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal frame bounds for every frame in a bank
    Bounds {
        /// Bank JSON file
        bank: PathBuf,

        /// Restrict the report to one named frame
        #[arg(long)]
        frame: Option<String>,
    },

    /// Build one weaving and report its bounds
    Weave {
        /// Bank JSON file
        bank: PathBuf,

        /// Comma-separated frame labels, one per index (e.g. 0,0,1)
        #[arg(long)]
        partition: String,
    },

    /// Certify universal woven bounds over partitions
    VerifyWoven {
        /// Bank JSON file
        bank: PathBuf,

        /// Force exhaustive enumeration (error if over the cap)
        #[arg(long, conflicts_with = "samples")]
        exhaustive: bool,

        /// Sample this many partitions instead of enumerating
        #[arg(long)]
        samples: Option<u64>,

        /// Seed for sampled mode
        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Include a per-partition bounds table (exhaustive mode only)
        #[arg(long)]
        table: bool,
    },

    /// Standard dual woven bank (inverse woven frame operator applied)
    Dual {
        /// Bank JSON file
        bank: PathBuf,

        /// Write the resulting bank to this file
        #[arg(long)]
        output: Option<PathBuf>,
    },

    /// Tighten the bank: inverse square root of the woven frame operator
    Tighten {
        /// Bank JSON file
        bank: PathBuf,

        /// Write the resulting bank to this file
        #[arg(long)]
        output: Option<PathBuf>,
    },

    /// Push the bank through an invertible operator and certify the bounds
    Transform {
        /// Bank JSON file
        bank: PathBuf,

        /// Operator JSON file
        #[arg(long)]
        operator: PathBuf,
    },

    /// Check whether a weighted sum of two banks is woven
    SumCheck {
        /// First bank JSON file
        bank: PathBuf,

        /// Operator applied to the first bank
        #[arg(long)]
        operator1: PathBuf,

        /// Operator applied to the second bank
        #[arg(long)]
        operator2: PathBuf,

        /// Second bank JSON file
        #[arg(long)]
        bank2: PathBuf,
    },

    /// Project the bank onto a subspace and certify the restriction
    Project {
        /// Bank JSON file
        bank: PathBuf,

        /// Subspace JSON file
        #[arg(long)]
        subspace: PathBuf,
    },

    /// Project onto the intersection of two subspaces
    Intersect {
        /// Bank JSON file
        bank: PathBuf,

        /// First subspace JSON file
        #[arg(long)]
        subspace: PathBuf,

        /// Second subspace JSON file
        #[arg(long)]
        subspace2: PathBuf,
    },
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(run(&args));
}

fn run(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(std::iter::once("woven".to_string()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(error) => {
            use clap::error::ErrorKind;
            if matches!(
                error.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{error}");
                return 0;
            }
            eprint!("{error}");
            return 2;
        }
    };

    if cli.format != "text" && cli.format != "json" {
        eprintln!("error: unknown format \"{}\", expected text or json", cli.format);
        return 2;
    }

    let cap = match enumeration_cap() {
        Ok(cap) => cap,
        Err(message) => {
            eprintln!("error: {message}");
            return 2;
        }
    };

    let started = Instant::now();
    let outcome = execute(&cli.command, cap);
    let (payload, verified, tolerances, inputs, warnings) = match outcome {
        Ok(parts) => parts,
        Err(error) if is_verification_failure(&error) => (
            Payload::Failure {
                message: error.to_string(),
            },
            false,
            base_tolerances(),
            Vec::new(),
            Vec::new(),
        ),
        Err(error) => {
            eprintln!("error: {error}");
            return 2;
        }
    };

    let report = Report {
        command: args.join(" "),
        inputs,
        tolerances,
        warnings,
        payload,
        verdict: if verified { "verified" } else { "failed" },
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    match cli.format.as_str() {
        "json" => print!("{}", report.to_json()),
        _ => print!("{}", report.to_text()),
    }
    if verified {
        0
    } else {
        1
    }
}

/// Math outcomes that mean "the verification failed" rather than "the input
/// was unusable".
fn is_verification_failure(error: &Error) -> bool {
    matches!(
        error,
        Error::NotAFrame { .. }
            | Error::Singular { .. }
            | Error::NotInvertible { .. }
            | Error::EmptyIntersection
    )
}

fn enumeration_cap() -> Result<u64, String> {
    match std::env::var("WOVEN_ENUM_CAP") {
        Ok(value) => value
            .trim()
            .parse::<u64>()
            .map_err(|_| format!("WOVEN_ENUM_CAP must be a positive integer, got \"{value}\"")),
        Err(_) => Ok(DEFAULT_ENUM_CAP),
    }
}

fn base_tolerances() -> BTreeMap<&'static str, f64> {
    let mut map = BTreeMap::new();
    map.insert("rank_tol_factor", woven_frames::linalg::RANK_TOL_FACTOR);
    map
}

fn bound_tolerances() -> BTreeMap<&'static str, f64> {
    let mut map = base_tolerances();
    map.insert("parseval_tol", woven_frames::frame::PARSEVAL_TOL);
    map.insert("tight_tol", woven_frames::frame::TIGHT_TOL);
    map
}

fn subspace_tolerances(with_intersection: bool) -> BTreeMap<&'static str, f64> {
    let mut map = base_tolerances();
    map.insert(
        "orthonormality_tol",
        woven_frames::subspace::ORTHONORMALITY_TOL,
    );
    map.insert("subspace_load_tol", woven_frames::io::SUBSPACE_LOAD_TOL);
    map.insert("containment_slack", CONTAINMENT_SLACK);
    if with_intersection {
        map.insert(
            "intersection_sv_tol",
            woven_frames::subspace::INTERSECTION_SV_TOL,
        );
    }
    map
}

fn digest(path: &Path) -> Result<InputDigest, Error> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let sha256 = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>();
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256,
    })
}

type CommandOutcome = (
    Payload,
    bool,
    BTreeMap<&'static str, f64>,
    Vec<InputDigest>,
    Vec<String>,
);

fn execute(command: &Command, cap: u64) -> Result<CommandOutcome, Error> {
    match command {
        Command::Bounds { bank, frame } => cmd_bounds(bank, frame.as_deref()),
        Command::Weave { bank, partition } => cmd_weave(bank, partition),
        Command::VerifyWoven {
            bank,
            exhaustive,
            samples,
            seed,
            table,
        } => cmd_verify_woven(bank, *exhaustive, *samples, *seed, *table, cap),
        Command::Dual { bank, output } => cmd_dual(bank, output.as_deref()),
        Command::Tighten { bank, output } => cmd_tighten(bank, output.as_deref()),
        Command::Transform { bank, operator } => cmd_transform(bank, operator, cap),
        Command::SumCheck {
            bank,
            operator1,
            operator2,
            bank2,
        } => cmd_sum_check(bank, operator1, operator2, bank2, cap),
        Command::Project { bank, subspace } => cmd_project(bank, subspace, cap),
        Command::Intersect {
            bank,
            subspace,
            subspace2,
        } => cmd_intersect(bank, subspace, subspace2, cap),
    }
}

fn load_bank_pair(path: &Path) -> Result<(BankDocument, FrameBank, InputDigest), Error> {
    let input = digest(path)?;
    let document = io::load_bank_document(path)?;
    let bank = document.to_bank()?;
    Ok((document, bank, input))
}

fn cmd_bounds(path: &Path, only: Option<&str>) -> Result<CommandOutcome, Error> {
    let (document, bank, input) = load_bank_pair(path)?;
    let selected: Vec<usize> = match only {
        Some(name) => vec![document.frame_index(name).ok_or_else(|| Error::Schema {
            path: path.display().to_string(),
            message: format!("no frame named \"{name}\""),
        })?],
        None => (0..bank.frame_count()).collect(),
    };

    let mut rows = Vec::with_capacity(selected.len());
    let mut all_frames = true;
    for j in selected {
        let bounds = bank.frame(j).optimal_bounds()?;
        all_frames &= bounds.is_frame();
        rows.push(FrameBoundsRow {
            name: document.frames[j].name.clone(),
            lower: bounds.lower(),
            upper: bounds.upper(),
            is_frame: bounds.is_frame(),
            tight: bounds.is_tight(),
            parseval: bounds.is_parseval(),
        });
    }
    Ok((
        Payload::Bounds { frames: rows },
        all_frames,
        bound_tolerances(),
        vec![input],
        Vec::new(),
    ))
}

fn parse_partition(text: &str, frame_count: usize) -> Result<Partition, Error> {
    let labels = text
        .split(',')
        .map(|token| {
            token.trim().parse::<usize>().map_err(|_| {
                Error::InvalidArgument(format!("partition label \"{token}\" is not an integer"))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Partition::new(labels, frame_count)
}

fn cmd_weave(path: &Path, partition_text: &str) -> Result<CommandOutcome, Error> {
    let (_, bank, input) = load_bank_pair(path)?;
    let partition = parse_partition(partition_text, bank.frame_count())?;
    let weaving = bank.weave(&partition)?;
    let bounds = weaving.optimal_bounds()?;
    Ok((
        Payload::Weave {
            partition: partition_string(&partition),
            lower: bounds.lower(),
            upper: bounds.upper(),
            is_frame: bounds.is_frame(),
            tight: bounds.is_tight(),
            parseval: bounds.is_parseval(),
        },
        bounds.is_frame(),
        bound_tolerances(),
        vec![input],
        Vec::new(),
    ))
}

fn cmd_verify_woven(
    path: &Path,
    exhaustive: bool,
    samples: Option<u64>,
    seed: u64,
    table: bool,
    cap: u64,
) -> Result<CommandOutcome, Error> {
    let (_, bank, input) = load_bank_pair(path)?;
    let mut warnings = Vec::new();

    let certificate = if let Some(trials) = samples {
        bank.universal_bounds_sampled(trials, seed)?
    } else if exhaustive {
        bank.universal_bounds_exhaustive(cap)?
    } else {
        let required = woven_frames::partition_count(bank.index_count(), bank.frame_count());
        if required <= cap as u128 {
            bank.universal_bounds_exhaustive(cap)?
        } else {
            warnings.push(format!(
                "{required} partitions exceed the enumeration cap of {cap}; \
                 falling back to {DEFAULT_SAMPLE_TRIALS} sampled partitions (seed {seed})"
            ));
            bank.universal_bounds_sampled(DEFAULT_SAMPLE_TRIALS, seed)?
        }
    };

    let full_spectrum = sym_eigen(&bank.woven_frame_operator())?;

    let table_rows = if table {
        if certificate.mode() == CertificateMode::Exhaustive {
            let rows = woven_frames::enumerate_partitions(
                bank.index_count(),
                bank.frame_count(),
                cap,
            )?
            .map(|partition| {
                let bounds = bank.weave(&partition)?.optimal_bounds()?;
                Ok(PartitionRow {
                    partition: partition_string(&partition),
                    lower: bounds.lower(),
                    upper: bounds.upper(),
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
            Some(rows)
        } else {
            warnings.push("per-partition table is only available in exhaustive mode".into());
            None
        }
    } else {
        None
    };

    let verified = certificate.is_woven();
    Ok((
        Payload::VerifyWoven {
            certificate: CertificateSummary::new(&certificate, Some(seed)),
            concatenated_lambda_min: full_spectrum.lambda_min(),
            concatenated_lambda_max: full_spectrum.lambda_max(),
            table: table_rows,
        },
        verified,
        bound_tolerances(),
        vec![input],
        warnings,
    ))
}

fn save_result_bank(
    output: Option<&Path>,
    document: &BankDocument,
) -> Result<Vec<String>, Error> {
    if let Some(path) = output {
        io::save_json(path, document)?;
        Ok(vec![format!("result bank written to {}", path.display())])
    } else {
        Ok(Vec::new())
    }
}

fn cmd_dual(path: &Path, output: Option<&Path>) -> Result<CommandOutcome, Error> {
    let (document, bank, input) = load_bank_pair(path)?;
    let dual = bank.standard_dual_woven()?;

    // expansion identity: pairing any vector against the dual coefficients
    // resynthesizes it; probe with every standard basis vector
    let dim = bank.dim();
    let mut residual: f64 = 0.0;
    for axis in 0..dim {
        let mut rebuilt = vec![0.0; dim];
        for j in 0..bank.frame_count() {
            for i in 0..bank.index_count() {
                let coefficient = dual.vector(i, j)[axis];
                for (slot, value) in rebuilt.iter_mut().zip(bank.vector(i, j).as_slice()) {
                    *slot += coefficient * value;
                }
            }
        }
        for (k, value) in rebuilt.iter().enumerate() {
            let target = if k == axis { 1.0 } else { 0.0 };
            residual = residual.max((value - target).abs());
        }
    }

    let names: Vec<String> = document.frames.iter().map(|f| f.name.clone()).collect();
    let result = BankDocument::from_bank(&dual, &names, Metadata::default());
    let warnings = save_result_bank(output, &result)?;
    let verified = residual <= RECONSTRUCTION_TOL;
    let mut tolerances = base_tolerances();
    tolerances.insert("reconstruction_tol", RECONSTRUCTION_TOL);
    Ok((
        Payload::Dual {
            bank: result,
            reconstruction_residual: residual,
        },
        verified,
        tolerances,
        vec![input],
        warnings,
    ))
}

fn cmd_tighten(path: &Path, output: Option<&Path>) -> Result<CommandOutcome, Error> {
    let (document, bank, input) = load_bank_pair(path)?;
    let tightened = bank.tighten_woven()?;
    let bounds = tightened.concatenated_family().optimal_bounds()?;

    let names: Vec<String> = document.frames.iter().map(|f| f.name.clone()).collect();
    let result = BankDocument::from_bank(&tightened, &names, Metadata::default());
    let warnings = save_result_bank(output, &result)?;
    let verified = (bounds.lower() - 1.0).abs() <= RECONSTRUCTION_TOL
        && (bounds.upper() - 1.0).abs() <= RECONSTRUCTION_TOL;
    let mut tolerances = bound_tolerances();
    tolerances.insert("reconstruction_tol", RECONSTRUCTION_TOL);
    Ok((
        Payload::Tighten {
            bank: result,
            concatenated_lower: bounds.lower(),
            concatenated_upper: bounds.upper(),
        },
        verified,
        tolerances,
        vec![input],
        warnings,
    ))
}

fn contained_in(
    inner_lower: f64,
    inner_upper: f64,
    outer_lower: f64,
    outer_upper: f64,
) -> bool {
    inner_lower >= outer_lower - CONTAINMENT_SLACK * (1.0 + outer_lower.abs())
        && inner_upper <= outer_upper + CONTAINMENT_SLACK * (1.0 + outer_upper.abs())
}

fn cmd_transform(path: &Path, operator_path: &Path, cap: u64) -> Result<CommandOutcome, Error> {
    let (_, bank, input) = load_bank_pair(path)?;
    let operator_input = digest(operator_path)?;
    let operator = io::load_operator(operator_path)?;

    let (transformed_bank, certificate) = bank.transform_woven(&operator, cap)?;
    let transformed = transformed_bank.universal_bounds_exhaustive(cap)?;
    let contained = contained_in(
        transformed.universal_lower(),
        transformed.universal_upper(),
        certificate.lower(),
        certificate.upper(),
    );
    let verified = transformed.is_woven() && contained;
    let mut tolerances = bound_tolerances();
    tolerances.insert("containment_slack", CONTAINMENT_SLACK);
    Ok((
        Payload::Transform {
            certificate_lower: certificate.lower(),
            certificate_upper: certificate.upper(),
            transformed: CertificateSummary::new(&transformed, None),
            contained,
        },
        verified,
        tolerances,
        vec![input, operator_input],
        Vec::new(),
    ))
}

fn cmd_sum_check(
    path: &Path,
    operator1_path: &Path,
    operator2_path: &Path,
    bank2_path: &Path,
    cap: u64,
) -> Result<CommandOutcome, Error> {
    let (_, bank_f, input_f) = load_bank_pair(path)?;
    let input_e1 = digest(operator1_path)?;
    let e1 = io::load_operator(operator1_path)?;
    let input_e2 = digest(operator2_path)?;
    let e2 = io::load_operator(operator2_path)?;
    let (_, bank_g, input_g) = load_bank_pair(bank2_path)?;

    let (_, rank_ok, certificate) = sum_woven_check(&e1, &bank_f, &e2, &bank_g, cap)?;
    let consistent = rank_ok == certificate.is_woven();
    let mut warnings = Vec::new();
    if !consistent {
        warnings.push(
            "rank check and exhaustive certificate disagree near the rank threshold".into(),
        );
    }
    let verified = certificate.is_woven();
    Ok((
        Payload::SumCheck {
            combined_rank_ok: rank_ok,
            certificate: CertificateSummary::new(&certificate, None),
            consistent,
        },
        verified,
        bound_tolerances(),
        vec![input_f, input_e1, input_e2, input_g],
        warnings,
    ))
}

fn load_subspace_pair(path: &Path) -> Result<(Subspace, InputDigest), Error> {
    let input = digest(path)?;
    let subspace = io::load_subspace(path)?;
    Ok((subspace, input))
}

fn cmd_project(path: &Path, subspace_path: &Path, cap: u64) -> Result<CommandOutcome, Error> {
    let (_, bank, input) = load_bank_pair(path)?;
    let (subspace, subspace_input) = load_subspace_pair(subspace_path)?;

    let ambient = bank.universal_bounds_exhaustive(cap)?;
    let (_, restricted) = woven_frames::project_bank(&subspace, &bank, cap)?;
    let contained = contained_in(
        restricted.universal_lower(),
        restricted.universal_upper(),
        ambient.universal_lower(),
        ambient.universal_upper(),
    );
    let verified = restricted.is_woven() && (contained || !ambient.is_woven());
    Ok((
        Payload::Project {
            ambient: CertificateSummary::new(&ambient, None),
            restricted: CertificateSummary::new(&restricted, None),
            contained,
        },
        verified,
        subspace_tolerances(false),
        vec![input, subspace_input],
        Vec::new(),
    ))
}

fn cmd_intersect(
    path: &Path,
    subspace_path: &Path,
    subspace2_path: &Path,
    cap: u64,
) -> Result<CommandOutcome, Error> {
    let (_, bank, input) = load_bank_pair(path)?;
    let (first, first_input) = load_subspace_pair(subspace_path)?;
    let (second, second_input) = load_subspace_pair(subspace2_path)?;

    let meet = first.intersection(&second)?;
    let ambient = bank.universal_bounds_exhaustive(cap)?;
    let (_, restricted) = woven_frames::project_bank(&meet, &bank, cap)?;
    let contained = contained_in(
        restricted.universal_lower(),
        restricted.universal_upper(),
        ambient.universal_lower(),
        ambient.universal_upper(),
    );
    let verified = restricted.is_woven() && (contained || !ambient.is_woven());

    let basis = meet.basis();
    let basis_columns: Vec<Vec<f64>> = (0..basis.cols())
        .map(|c| (0..basis.rows()).map(|r| basis.get(r, c)).collect())
        .collect();
    Ok((
        Payload::Intersect {
            intersection_dim: meet.subspace_dim(),
            basis_columns,
            ambient: CertificateSummary::new(&ambient, None),
            restricted: CertificateSummary::new(&restricted, None),
            contained,
        },
        verified,
        subspace_tolerances(true),
        vec![input, first_input, second_input],
        Vec::new(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_parsing() {
        let partition = parse_partition("0, 1,0", 2).unwrap();
        assert_eq!(partition.assignment(), &[0, 1, 0]);
        assert!(parse_partition("0,x", 2).is_err());
        assert!(parse_partition("0,2", 2).is_err());
    }

    #[test]
    fn containment_allows_rounding_slack() {
        assert!(contained_in(1.0 - 1e-12, 2.0 + 1e-12, 1.0, 2.0));
        assert!(!contained_in(0.5, 2.0, 1.0, 2.0));
    }
}
