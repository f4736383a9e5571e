//! File formats: the g2o 2D subset, the scenario descriptor and CSV reports.
//!
//! All files use radians for angles and meters for lengths; entropies and
//! signatures in reports are in nats.

pub mod g2o;
pub mod report;
pub mod scenario;

use std::path::PathBuf;

pub use g2o::{parse_g2o_2d, write_g2o, G2oGraph};
pub use scenario::{load_scenario, parse_scenario, Scenario, SCENARIO_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: edge information must be diagonal")]
    NonDiagonalInformation { line: usize },
    #[error("line {line}: position information must be isotropic (i11 = i22)")]
    AnisotropicPosition { line: usize },
    #[error("line {line}: edge noise differs from the first edge's")]
    HeterogeneousNoise { line: usize },
    #[error("line {line}: edge references missing vertex {id}")]
    MissingVertex { line: usize, id: i64 },
    #[error("line {line}: duplicate vertex {id}")]
    DuplicateVertex { line: usize, id: i64 },
    #[error("unsupported scenario version `{0}`")]
    UnsupportedVersion(String),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
