//! Topological belief-space planning for planar pose graphs.
//!
//! Candidate actions are compared through cheap signatures of the topology of
//! the posterior factor graph they would produce, instead of through the
//! log-determinant of its information matrix. The spanning-tree signature
//! additionally yields entropy bounds and a certificate on how far the chosen
//! action can be from the information-theoretic optimum.
//!
//! ```
//! use tbsp::geometry::{EmbeddedPoseGraph, NoiseModel, Pose2};
//! use tbsp::graph::Topology;
//! use tbsp::{bounds, fim, signatures};
//!
//! let square = EmbeddedPoseGraph::new(
//!     Topology::cycle(4)?,
//!     vec![
//!         Pose2::new(0.0, 0.0, 0.0),
//!         Pose2::new(1.0, 0.0, 0.0),
//!         Pose2::new(1.0, 1.0, 0.0),
//!         Pose2::new(0.0, 1.0, 0.0),
//!     ],
//!     NoiseModel::new(0.1, 0.01)?,
//! )?;
//! let s = signatures::s_st(square.topology(), square.noise())?;
//! let b = bounds::evaluate_bounds("square", &square, true)?;
//! let j = fim::fim(&square)?.entropy_j;
//! assert_eq!(b.upper, -s.value);
//! assert!(b.lower_hadamard <= b.lower_exact.unwrap());
//! assert!(b.lower_exact.unwrap() <= j && j <= b.upper);
//! # Ok::<(), tbsp::Error>(())
//! ```

pub mod bench;
pub mod bounds;
pub mod fim;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod planner;
pub mod signatures;
pub mod spectral;
pub mod synth;

use geometry::GeometryError;
use graph::GraphError;
use io::FormatError;
use signatures::SignatureKind;
use spectral::SpectralError;
use synth::SynthError;

pub use bounds::{BoundsReport, GapCertificate, LowerBoundKind};
pub use geometry::{EmbeddedPoseGraph, NoiseModel, Pose2};
pub use graph::Topology;
pub use planner::{CandidateAction, PlanRequest, PlanResult};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("unknown signature `{0}` (expected st, vn or vn-approx)")]
    UnknownSignature(String),
    #[error("no candidate actions")]
    EmptyActionSet,
    #[error("duplicate action id `{0}`")]
    DuplicateActionId(String),
    #[error("action `{0}` uses a different noise model than the first action")]
    MixedNoise(String),
    #[error("margin must not be NaN")]
    InvalidMargin,
    #[error("margin mode requires a margin")]
    MissingMargin,
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("exact lower bound was not computed for action `{0}`")]
    MissingExactBound(String),
    #[error("a performance certificate is only defined for the st signature, not {0}")]
    CertificateNeedsSt(SignatureKind),
    #[error("oracle entropies do not cover exactly the candidate actions")]
    OracleMismatch,
    #[error("action `{id}`: {source}")]
    Action { id: String, source: Box<Error> },
}

impl Error {
    /// Whether the failure is an internal numerical one (as opposed to bad
    /// input). Factorization failures on validated graphs are numerical.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Spectral(_) => true,
            Error::Action { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
