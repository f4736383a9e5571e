//! Fisher information of the planar pose-graph MLE and the exact posterior
//! entropy.
//!
//! This is the "standard BSP" side that the topological bounds are checked
//! against. The information matrix `I = Hᵀ Σ⁻¹ H` is linearized at the stored
//! poses (zero residuals), anchored at node 0, ordered pose-major with
//! `(x, y, θ)` inside each pose, and assembled sparse.

use nalgebra::Matrix3;

use crate::geometry::{EmbeddedPoseGraph, NoiseModel, Pose2, POSE_DIM};
use crate::signatures::LN_2PI_E;
use crate::spectral::{
    expand_ordering, logdet_spd, minimum_degree_ordering, plan_with_ordering, SparseSymmetric,
    SparsityPattern,
};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FimResult {
    /// `ln det I` of the `(n-1)κ`-square information matrix.
    pub logdet_i: f64,
    /// Posterior entropy in nats.
    pub entropy_j: f64,
    pub dimension: usize,
}

impl FimResult {
    pub fn from_logdet(logdet_i: f64, dimension: usize) -> Self {
        Self {
            logdet_i,
            entropy_j: entropy_from_logdet(logdet_i, dimension),
            dimension,
        }
    }
}

/// Gaussian entropy `N/2 ln(2πe) - ln|I|/2`.
pub fn entropy_from_logdet(logdet_i: f64, dimension: usize) -> f64 {
    dimension as f64 / 2.0 * LN_2PI_E - logdet_i / 2.0
}

/// Jacobians of `h(x_i, x_j) = ⊖x_i ⊕ x_j` with respect to `x_i` and `x_j`.
pub fn relative_pose_jacobians(xi: &Pose2, xj: &Pose2) -> (Matrix3<f64>, Matrix3<f64>) {
    let (s, c) = xi.theta.sin_cos();
    let (dx, dy) = (xj.x - xi.x, xj.y - xi.y);
    // d(Rᵀ)/dθ · (p_j - p_i)
    let (tx, ty) = (-s * dx + c * dy, -c * dx - s * dy);
    let d_xi = Matrix3::new(
        -c, -s, tx, //
        s, -c, ty, //
        0.0, 0.0, -1.0,
    );
    let d_xj = Matrix3::new(
        c, s, 0.0, //
        -s, c, 0.0, //
        0.0, 0.0, 1.0,
    );
    (d_xi, d_xj)
}

/// Assembles `I = Hᵀ Σ⁻¹ H` with node 0's columns removed.
///
/// Variable `k` of node `i ≥ 1` sits at index `3(i-1) + k`.
pub fn information_matrix(g: &EmbeddedPoseGraph) -> Result<SparseSymmetric, Error> {
    let n = g.node_count();
    let w = Matrix3::from_diagonal(&g.noise().information_diagonal().into());
    let poses = g.poses();
    let edges = g.topology().edges();
    let mut diag = vec![Matrix3::zeros(); n];
    // Lower block (j, i) of each edge (i, j), i < j: Jjᵀ W Ji.
    let mut off = Vec::with_capacity(edges.len());
    for &(i, j) in edges {
        let (ji, jj) = relative_pose_jacobians(&poses[i], &poses[j]);
        let wji = w * ji;
        diag[i] += ji.transpose() * wji;
        diag[j] += jj.transpose() * w * jj;
        off.push(jj.transpose() * wji);
    }

    let dim = POSE_DIM * (n - 1);
    let mut col_ptr = Vec::with_capacity(dim + 1);
    let mut row_idx = Vec::with_capacity(6 * (n - 1) + 9 * edges.len());
    let mut values = Vec::with_capacity(row_idx.capacity());
    col_ptr.push(0);
    let mut e = edges.partition_point(|&(i, _)| i == 0);
    for (i, block) in diag.iter().enumerate().skip(1) {
        let start = e;
        while e < edges.len() && edges[e].0 == i {
            e += 1;
        }
        for b in 0..POSE_DIM {
            for a in b..POSE_DIM {
                row_idx.push(POSE_DIM * (i - 1) + a);
                values.push(block[(a, b)]);
            }
            for k in start..e {
                let j = edges[k].1;
                for a in 0..POSE_DIM {
                    row_idx.push(POSE_DIM * (j - 1) + a);
                    values.push(off[k][(a, b)]);
                }
            }
            col_ptr.push(row_idx.len());
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(crate::spectral::SpectralError::NonFinite.into());
    }
    Ok(SparseSymmetric::from_sorted_csc(
        dim, col_ptr, row_idx, values,
    ))
}

/// Log-determinant of the information matrix and the entropy it implies.
///
/// The elimination order comes from minimum degree on the pose-level graph
/// (anchor removed), expanded to the 3x3 blocks.
pub fn fim(g: &EmbeddedPoseGraph) -> Result<FimResult, Error> {
    let info = information_matrix(g)?;
    let n = g.node_count();
    let node_pattern = SparsityPattern::from_entries(
        n - 1,
        (0..n - 1).map(|i| (i, i)).chain(
            g.topology()
                .edges()
                .iter()
                .filter(|&&(i, _)| i != 0)
                .map(|&(i, j)| (j - 1, i - 1)),
        ),
    )?;
    let order = expand_ordering(&minimum_degree_ordering(&node_pattern), POSE_DIM);
    let plan = plan_with_ordering(&node_pattern.expand_blocks(POSE_DIM), order)?;
    let logdet_i = logdet_spd(&info, &plan)?;
    Ok(FimResult::from_logdet(logdet_i, POSE_DIM * (n - 1)))
}

/// `ln det I` of a pure odometry chain: `(n-1) ln|Ω|`, for any geometry.
pub fn odometry_logdet_closed_form(node_count: usize, noise: &NoiseModel) -> Result<f64, Error> {
    if node_count < 2 {
        return Err(crate::graph::GraphError::TooFewNodes(node_count).into());
    }
    Ok((node_count - 1) as f64 * noise.ln_det_information())
}
