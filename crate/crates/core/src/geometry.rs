//! SE(2) poses, the isotropic noise model and embedded pose graphs.

use std::f64::consts::PI;

use thiserror::Error;

use crate::graph::Topology;

/// Degrees of freedom of one pose (κ). Planar SLAM only.
pub const POSE_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("noise standard deviations must be positive and finite (sigma_p = {sigma_p}, sigma_theta = {sigma_theta})")]
    InvalidNoise { sigma_p: f64, sigma_theta: f64 },
    #[error("{poses} poses given for a topology with {nodes} nodes")]
    PoseCountMismatch { poses: usize, nodes: usize },
    #[error("pose {0} has a non-finite component")]
    NonFinitePose(usize),
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(t: f64) -> Result<f64, GeometryError> {
    if !t.is_finite() {
        return Err(GeometryError::NonFinite(t));
    }
    Ok(wrap(t))
}

pub(crate) fn wrap(t: f64) -> f64 {
    if t > -PI && t <= PI {
        return t;
    }
    let r = t.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Planar pose: position in meters, heading in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    /// Heading is wrapped into `(-π, π]`; angles already in range are kept
    /// bit for bit.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        let theta = if theta.is_finite() {
            wrap(theta)
        } else {
            theta
        };
        Self { x, y, theta }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    /// `self ⊕ delta`.
    pub fn compose(&self, delta: &Pose2) -> Pose2 {
        let (s, c) = self.theta.sin_cos();
        Pose2::new(
            self.x + c * delta.x - s * delta.y,
            self.y + s * delta.x + c * delta.y,
            self.theta + delta.theta,
        )
    }

    pub fn squared_distance(&self, other: &Pose2) -> f64 {
        let (dx, dy) = (other.x - self.x, other.y - self.y);
        dx * dx + dy * dy
    }
}

/// Relative pose of `b` in the frame of `a` (`⊖a ⊕ b`).
pub fn pose_between(a: &Pose2, b: &Pose2) -> Pose2 {
    let (s, c) = a.theta.sin_cos();
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    Pose2::new(c * dx + s * dy, -s * dx + c * dy, wrap(b.theta - a.theta))
}

/// Isotropic relative-pose noise shared by every edge:
/// `Ω = diag(σp⁻², σp⁻², σθ⁻²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma_p: f64,
    sigma_theta: f64,
}

impl NoiseModel {
    pub fn new(sigma_p: f64, sigma_theta: f64) -> Result<Self, GeometryError> {
        let ok = |s: f64| s.is_finite() && s > 0.0;
        if !ok(sigma_p) || !ok(sigma_theta) {
            return Err(GeometryError::InvalidNoise {
                sigma_p,
                sigma_theta,
            });
        }
        Ok(Self {
            sigma_p,
            sigma_theta,
        })
    }

    /// Noise with `σθ = ξ σp`.
    pub fn from_xi(sigma_p: f64, xi: f64) -> Result<Self, GeometryError> {
        Self::new(sigma_p, xi * sigma_p)
    }

    pub fn sigma_p(&self) -> f64 {
        self.sigma_p
    }

    pub fn sigma_theta(&self) -> f64 {
        self.sigma_theta
    }

    /// ξ = σθ / σp.
    pub fn xi(&self) -> f64 {
        self.sigma_theta / self.sigma_p
    }

    /// Diagonal of the per-edge information matrix.
    pub fn information_diagonal(&self) -> [f64; POSE_DIM] {
        let p = 1.0 / (self.sigma_p * self.sigma_p);
        [p, p, 1.0 / (self.sigma_theta * self.sigma_theta)]
    }

    /// `ln|Ω| = -4 ln σp - 2 ln σθ`.
    pub fn ln_det_information(&self) -> f64 {
        -4.0 * self.sigma_p.ln() - 2.0 * self.sigma_theta.ln()
    }
}

/// A topology together with one pose per node and the shared noise model.
///
/// The poses are the linearization point: prior estimates for past poses
/// and predicted samples for future ones.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPoseGraph {
    topology: Topology,
    poses: Vec<Pose2>,
    noise: NoiseModel,
}

impl EmbeddedPoseGraph {
    pub fn new(
        topology: Topology,
        poses: Vec<Pose2>,
        noise: NoiseModel,
    ) -> Result<Self, GeometryError> {
        if poses.len() != topology.node_count() {
            return Err(GeometryError::PoseCountMismatch {
                poses: poses.len(),
                nodes: topology.node_count(),
            });
        }
        if let Some(i) = poses.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinitePose(i));
        }
        Ok(Self {
            topology,
            poses,
            noise,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn poses(&self) -> &[Pose2] {
        &self.poses
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn node_count(&self) -> usize {
        self.topology.node_count()
    }

    pub fn with_noise(&self, noise: NoiseModel) -> Self {
        Self {
            noise,
            ..self.clone()
        }
    }

    /// `max_i Σ_{(i,j)∈E} ‖p_i - p_j‖²` over all nodes, translation only.
    pub fn max_incident_squared_distance(&self) -> f64 {
        let mut sums = vec![0.0; self.node_count()];
        for &(i, j) in self.topology.edges() {
            let d2 = self.poses[i].squared_distance(&self.poses[j]);
            sums[i] += d2;
            sums[j] += d2;
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Ψ = ξ² · dist²_max.
    pub fn psi(&self) -> f64 {
        let xi = self.noise.xi();
        xi * xi * self.max_incident_squared_distance()
    }
}

/// Free-function form of [`EmbeddedPoseGraph::psi`].
pub fn psi(g: &EmbeddedPoseGraph) -> f64 {
    g.psi()
}
