//! The scenario descriptor: a versioned JSON document listing candidate
//! actions under one noise model.
//!
//! ```json
//! {
//!   "version": "tbsp-scenario/1",
//!   "noise": { "sigma_p": 0.1, "sigma_theta": 0.01 },
//!   "signature": "st",
//!   "margin": 50.0,
//!   "actions": [
//!     { "id": "left", "poses": [[0, 0, 0], [1, 0, 0]], "edges": [[0, 1]] },
//!     { "id": "right", "g2o": "right.g2o" }
//!   ]
//! }
//! ```
//!
//! `signature` defaults to `st`; `margin` and `generator` are optional. A
//! `g2o` path is resolved against the scenario file's directory and its
//! noise must agree with the scenario's.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geometry::{EmbeddedPoseGraph, NoiseModel, Pose2};
use crate::graph::Topology;
use crate::planner::{CandidateAction, PlanRequest};
use crate::signatures::SignatureKind;
use crate::Error;

use super::g2o::parse_g2o_2d;
use super::FormatError;

pub const SCENARIO_VERSION: &str = "tbsp-scenario/1";

const NOISE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub sigma_p: f64,
    pub sigma_theta: f64,
}

/// How a generated scenario was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorInfo {
    pub name: String,
    pub kind: String,
    pub seed: u64,
    pub n: usize,
    pub mean_degree_increment: f64,
    pub step_length: f64,
    pub loop_radius: f64,
    pub future_len: [usize; 2],
    pub count: usize,
    pub loop_closure_sampling: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionSpec {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    poses: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g2o: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    version: String,
    noise: NoiseSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    signature: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<GeneratorInfo>,
    actions: Vec<ActionSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub noise: NoiseModel,
    pub signature: SignatureKind,
    pub margin: Option<f64>,
    pub generator: Option<GeneratorInfo>,
    pub actions: Vec<CandidateAction>,
}

impl Scenario {
    pub fn plan_request(&self) -> Result<PlanRequest, Error> {
        PlanRequest::new(self.actions.clone(), self.signature, self.margin)
    }

    /// Pretty-printed JSON with every action inline. Floats are written in
    /// shortest round-trip form, so parsing gives back identical values.
    pub fn to_json(&self) -> Result<String, Error> {
        let file = ScenarioFile {
            version: SCENARIO_VERSION.to_string(),
            noise: NoiseSpec {
                sigma_p: self.noise.sigma_p(),
                sigma_theta: self.noise.sigma_theta(),
            },
            signature: Some(self.signature.as_str().to_string()),
            margin: self.margin,
            generator: self.generator.clone(),
            actions: self
                .actions
                .iter()
                .map(|a| ActionSpec {
                    id: a.id.clone(),
                    poses: Some(
                        a.graph
                            .poses()
                            .iter()
                            .map(|p| [p.x, p.y, p.theta])
                            .collect(),
                    ),
                    edges: Some(
                        a.graph
                            .topology()
                            .edges()
                            .iter()
                            .map(|&(i, j)| [i, j])
                            .collect(),
                    ),
                    g2o: None,
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&file).map_err(FormatError::from)?;
        text.push('\n');
        Ok(text)
    }
}

fn schema(message: impl Into<String>) -> Error {
    FormatError::Scenario(message.into()).into()
}

fn noise_agrees(a: &NoiseModel, b: &NoiseModel) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= NOISE_RTOL * x.abs().max(y.abs());
    close(a.sigma_p(), b.sigma_p()) && close(a.sigma_theta(), b.sigma_theta())
}

fn read_g2o(path: &Path) -> Result<EmbeddedPoseGraph, Error> {
    let file = File::open(path).map_err(|source| FormatError::File {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_g2o_2d(BufReader::new(file))?.graph)
}

/// Parses a scenario document; relative g2o paths resolve against `base_dir`.
pub fn parse_scenario(text: &str, base_dir: &Path) -> Result<Scenario, Error> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(FormatError::from)?;
    if file.version != SCENARIO_VERSION {
        return Err(FormatError::UnsupportedVersion(file.version).into());
    }
    let noise = NoiseModel::new(file.noise.sigma_p, file.noise.sigma_theta)?;
    let signature = match &file.signature {
        Some(s) => s.parse()?,
        None => SignatureKind::St,
    };
    if file.actions.is_empty() {
        return Err(Error::EmptyActionSet);
    }
    let mut actions = Vec::with_capacity(file.actions.len());
    for spec in file.actions {
        let graph = match (spec.poses, spec.edges, spec.g2o) {
            (Some(poses), Some(edges), None) => {
                let topology = Topology::new(poses.len(), edges.iter().map(|e| (e[0], e[1])));
                let topology = topology.map_err(|e| action_error(&spec.id, e.into()))?;
                let poses = poses.iter().map(|p| Pose2::new(p[0], p[1], p[2])).collect();
                EmbeddedPoseGraph::new(topology, poses, noise)
                    .map_err(|e| action_error(&spec.id, e.into()))?
            }
            (None, None, Some(path)) => {
                let g = read_g2o(&base_dir.join(path)).map_err(|e| action_error(&spec.id, e))?;
                if !noise_agrees(g.noise(), &noise) {
                    return Err(schema(format!(
                        "action `{}`: g2o noise differs from the scenario noise",
                        spec.id
                    )));
                }
                g.with_noise(noise)
            }
            _ => {
                return Err(schema(format!(
                    "action `{}` needs either `poses` and `edges`, or `g2o`",
                    spec.id
                )))
            }
        };
        actions.push(CandidateAction::new(spec.id, graph));
    }
    let scenario = Scenario {
        noise,
        signature,
        margin: file.margin,
        generator: file.generator,
        actions,
    };
    // Id uniqueness and margin sanity.
    scenario.plan_request()?;
    Ok(scenario)
}

fn action_error(id: &str, e: Error) -> Error {
    Error::Action {
        id: id.to_string(),
        source: Box::new(e),
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::File {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, path.parent().unwrap_or(Path::new(".")))
}
