//! Seeded generators for embedded pose graphs and candidate-action ensembles.
//!
//! The generator is ChaCha8 seeded from a `u64`. The base graph draws from
//! stream 0 and action `k` of an ensemble from stream `k + 1`, so adding
//! actions never changes the earlier ones. The generator identity is part of
//! [`GENERATOR`], which the scenario format records.
//!
//! Trajectories are random walks: each step turns by an angle uniform in
//! `[-π/4, π/4]` and moves `step_length` forward along the new heading.
//! Loop closures join non-adjacent poses closer than `loop_radius`, sampled
//! uniformly without replacement among all eligible pairs.

use std::f64::consts::FRAC_PI_4;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{EmbeddedPoseGraph, NoiseModel, Pose2};
use crate::graph::Topology;
use crate::planner::CandidateAction;
use crate::Error;

/// Generator identity recorded in emitted scenarios.
pub const GENERATOR: &str = "chacha8-random-walk/1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("need {needed} loop closures but only {available} eligible pose pairs exist (shortfall {})", needed - available)]
    NotEnoughLoopCandidates { needed: usize, available: usize },
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    /// Δd̄: the number of loop closures is `round(Δd̄ n / 2)`.
    pub mean_degree_increment: f64,
    pub noise: NoiseModel,
    pub seed: u64,
    /// Odometry spacing in meters.
    pub step_length: f64,
    /// Maximum distance (meters) for loop-closure eligibility.
    pub loop_radius: f64,
    /// Inclusive range of future-segment lengths for ensembles.
    pub future_len: (usize, usize),
}

impl SynthConfig {
    /// Unit steps, loop radius of three steps, futures of 10 to 30 poses.
    pub fn new(n: usize, mean_degree_increment: f64, noise: NoiseModel, seed: u64) -> Self {
        Self {
            n,
            mean_degree_increment,
            noise,
            seed,
            step_length: 1.0,
            loop_radius: 3.0,
            future_len: (10, 30),
        }
    }

    /// Loop closures for a trajectory of `len` poses.
    pub fn loop_closures_for(&self, len: usize) -> usize {
        (self.mean_degree_increment * len as f64 / 2.0).round() as usize
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.n < 2 {
            return Err(SynthError::InvalidConfig("n must be at least 2"));
        }
        if !(self.mean_degree_increment.is_finite() && self.mean_degree_increment >= 0.0) {
            return Err(SynthError::InvalidConfig(
                "mean degree increment must be finite and non-negative",
            ));
        }
        if !(self.step_length.is_finite() && self.step_length > 0.0) {
            return Err(SynthError::InvalidConfig("step length must be positive"));
        }
        if !(self.loop_radius.is_finite() && self.loop_radius >= 0.0) {
            return Err(SynthError::InvalidConfig(
                "loop radius must be finite and non-negative",
            ));
        }
        if self.future_len.0 > self.future_len.1 {
            return Err(SynthError::InvalidConfig("future length range is empty"));
        }
        Ok(())
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Appends `steps` poses to `poses`, walking on from its last pose.
fn extend_walk(poses: &mut Vec<Pose2>, steps: usize, step_length: f64, rng: &mut ChaCha8Rng) {
    let mut cur = *poses.last().expect("walk needs a starting pose");
    for _ in 0..steps {
        let heading = cur.theta + rng.random_range(-FRAC_PI_4..=FRAC_PI_4);
        let (s, c) = heading.sin_cos();
        cur = Pose2::new(cur.x + step_length * c, cur.y + step_length * s, heading);
        poses.push(cur);
    }
}

/// Samples `count` loop closures `(i, k)` with `k ≥ first_new`, `i < k - 1`
/// and the poses within `radius`.
fn sample_loop_closures(
    poses: &[Pose2],
    first_new: usize,
    count: usize,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, usize)>, SynthError> {
    let r2 = radius * radius;
    let mut eligible = Vec::new();
    for k in first_new.max(2)..poses.len() {
        for i in 0..k - 1 {
            if poses[i].squared_distance(&poses[k]) <= r2 {
                eligible.push((i, k));
            }
        }
    }
    if eligible.len() < count {
        return Err(SynthError::NotEnoughLoopCandidates {
            needed: count,
            available: eligible.len(),
        });
    }
    let mut picked: Vec<usize> = index::sample(rng, eligible.len(), count).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|p| eligible[p]).collect())
}

/// A random-walk trajectory of `cfg.n` poses with chain odometry and
/// `round(Δd̄ n / 2)` loop closures.
pub fn generate_pose_graph(cfg: &SynthConfig) -> Result<EmbeddedPoseGraph, Error> {
    cfg.validate()?;
    let mut rng = rng_for(cfg.seed, 0);
    let mut poses = Vec::with_capacity(cfg.n);
    poses.push(Pose2::identity());
    extend_walk(&mut poses, cfg.n - 1, cfg.step_length, &mut rng);
    let closures = sample_loop_closures(
        &poses,
        0,
        cfg.loop_closures_for(cfg.n),
        cfg.loop_radius,
        &mut rng,
    )?;
    let edges = (1..cfg.n).map(|i| (i - 1, i)).chain(closures);
    let topology = Topology::new(cfg.n, edges)?;
    Ok(EmbeddedPoseGraph::new(topology, poses, cfg.noise)?)
}

/// `count` actions extending `base` by independent future segments.
///
/// Action `k` walks on from the last pose of `base` for a length drawn
/// uniformly from `cfg.future_len`, then adds `round(Δd̄ L / 2)` loop closures
/// from the new poses back to any earlier non-adjacent pose within
/// `cfg.loop_radius`, capped at the number of eligible pairs. Ids are `a000`,
/// `a001`, ...
pub fn generate_action_ensemble(
    base: &EmbeddedPoseGraph,
    count: usize,
    cfg: &SynthConfig,
) -> Result<Vec<CandidateAction>, Error> {
    cfg.validate()?;
    if count == 0 {
        return Err(SynthError::InvalidConfig("ensemble needs at least one action").into());
    }
    let n0 = base.node_count();
    (0..count)
        .map(|k| {
            let mut rng = rng_for(cfg.seed, k as u64 + 1);
            let len = rng.random_range(cfg.future_len.0..=cfg.future_len.1);
            let mut poses = base.poses().to_vec();
            extend_walk(&mut poses, len, cfg.step_length, &mut rng);
            let wanted = cfg.loop_closures_for(len);
            let closures = match sample_loop_closures(&poses, n0, wanted, cfg.loop_radius, &mut rng)
            {
                Ok(c) => c,
                Err(SynthError::NotEnoughLoopCandidates { available, .. }) => {
                    sample_loop_closures(&poses, n0, available, cfg.loop_radius, &mut rng)?
                }
                Err(e) => return Err(e.into()),
            };
            let edges = base
                .topology()
                .edges()
                .iter()
                .copied()
                .chain((n0..n0 + len).map(|i| (i - 1, i)))
                .chain(closures);
            let topology = Topology::new(n0 + len, edges)?;
            let graph = EmbeddedPoseGraph::new(topology, poses, *base.noise())?;
            Ok(CandidateAction::new(format!("a{k:03}"), graph))
        })
        .collect()
}

/// Base graph from `cfg` followed by an ensemble of `count` actions on it.
pub fn generate_ensemble(cfg: &SynthConfig, count: usize) -> Result<Vec<CandidateAction>, Error> {
    generate_action_ensemble(&generate_pose_graph(cfg)?, count, cfg)
}
