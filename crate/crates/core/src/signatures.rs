//! Topological signatures of a posterior factor graph.
//!
//! * `s_ST`: spanning-tree signature, `(3/2) τ(G) + ((n-1)/2)(ln|Ω| - κ ln 2πe)`.
//!   Its negation is an upper bound on the posterior entropy.
//! * `s_VN`: von Neumann entropy of the halved normalized-Laplacian spectrum.
//! * `ŝ_VN`: the `O(m)` degree-based approximation of `s_VN`.
//!
//! Higher is better for all three: the planner picks the argmax.

use std::fmt;
use std::str::FromStr;

use crate::geometry::{NoiseModel, POSE_DIM};
use crate::graph::Topology;
use crate::spectral::{
    eigenvalues_symmetric, logdet_spd, plan_factorization, FactorizationPlan, SparseSymmetric,
};
use crate::Error;

/// `ln(2πe)`, the per-dimension constant of the Gaussian entropy.
pub const LN_2PI_E: f64 = 2.837_877_066_409_345_5;

/// Default reduction index: the anchored pose `x₀`.
pub const DEFAULT_ROOT: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignatureKind {
    /// Spanning-tree signature `s_ST`.
    St,
    /// Exact von Neumann entropy `s_VN`.
    Vn,
    /// Degree-based approximation `ŝ_VN`.
    VnApprox,
}

impl SignatureKind {
    pub const ALL: [SignatureKind; 3] = [
        SignatureKind::St,
        SignatureKind::Vn,
        SignatureKind::VnApprox,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SignatureKind::St => "st",
            SignatureKind::Vn => "vn",
            SignatureKind::VnApprox => "vn-approx",
        }
    }
}

impl fmt::Display for SignatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "st" => Ok(SignatureKind::St),
            "vn" => Ok(SignatureKind::Vn),
            "vn-approx" | "vn_approx" => Ok(SignatureKind::VnApprox),
            other => Err(Error::UnknownSignature(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignatureValue {
    pub kind: SignatureKind,
    pub value: f64,
    /// `τ(G)`, set for [`SignatureKind::St`].
    pub tau: Option<f64>,
}

/// `τ(G) = ln t(G)` together with the factorization that produced it, so the
/// permutation can be reused for `L̃ + ΨI`.
#[derive(Debug, Clone)]
pub struct TreeConnectivity {
    pub tau: f64,
    pub root: usize,
    pub reduced_laplacian: SparseSymmetric,
    pub plan: FactorizationPlan,
}

impl TreeConnectivity {
    pub fn new(g: &Topology, root: usize) -> Result<Self, Error> {
        let reduced_laplacian = g.reduced_laplacian_sparse(root, 0.0)?;
        let plan = plan_factorization(&reduced_laplacian.pattern())?;
        let tau = logdet_spd(&reduced_laplacian, &plan)?;
        Ok(Self {
            tau,
            root,
            reduced_laplacian,
            plan,
        })
    }

    /// `ln|L̃ + shift·I|` with the stored plan.
    pub fn shifted_logdet(&self, shift: f64) -> Result<f64, Error> {
        if shift == 0.0 {
            return Ok(self.tau);
        }
        let shifted = self.reduced_laplacian.with_diagonal_shift(shift)?;
        Ok(logdet_spd(&shifted, &self.plan)?)
    }
}

/// `τ(G)` via the reduced Laplacian at the anchored pose.
pub fn tau(g: &Topology) -> Result<f64, Error> {
    tau_with_root(g, DEFAULT_ROOT)
}

/// `τ(G)` removing row/column `root`; the value does not depend on `root`.
pub fn tau_with_root(g: &Topology, root: usize) -> Result<f64, Error> {
    Ok(TreeConnectivity::new(g, root)?.tau)
}

/// Path-length normalization of `s_ST`: `((n-1)/2)(ln|Ω| - κ ln 2πe)`.
pub fn noise_term(node_count: usize, noise: &NoiseModel) -> f64 {
    (node_count as f64 - 1.0) / 2.0 * (noise.ln_det_information() - POSE_DIM as f64 * LN_2PI_E)
}

/// `s_ST` from a precomputed `τ`.
pub fn s_st_from_tau(tau: f64, node_count: usize, noise: &NoiseModel) -> f64 {
    1.5 * tau + noise_term(node_count, noise)
}

pub fn s_st(g: &Topology, noise: &NoiseModel) -> Result<SignatureValue, Error> {
    let tau = tau(g)?;
    Ok(SignatureValue {
        kind: SignatureKind::St,
        value: s_st_from_tau(tau, g.node_count(), noise),
        tau: Some(tau),
    })
}

/// Von Neumann entropy `-Σ (λ̂/2) ln(λ̂/2)` of the normalized Laplacian.
pub fn s_vn(g: &Topology) -> Result<SignatureValue, Error> {
    let spectrum = eigenvalues_symmetric(&g.normalized_laplacian())?;
    let value = -spectrum
        .iter()
        .map(|&l| {
            let p = l / 2.0;
            // 0 ln 0 = 0; the zero eigenvalue may come back as a tiny negative.
            if p <= 0.0 {
                0.0
            } else {
                p * p.ln()
            }
        })
        .sum::<f64>();
    Ok(SignatureValue {
        kind: SignatureKind::Vn,
        value,
        tau: None,
    })
}

/// `ŝ_VN = (n/2) ln 2 - (1/2) Σ_{(i,j)∈E} 1/(d(i) d(j))`.
pub fn s_vn_approx(g: &Topology) -> SignatureValue {
    let d = g.degree_slice();
    let sum: f64 = g
        .edges()
        .iter()
        .map(|&(i, j)| 1.0 / (d[i] * d[j]) as f64)
        .sum();
    SignatureValue {
        kind: SignatureKind::VnApprox,
        value: g.node_count() as f64 / 2.0 * std::f64::consts::LN_2 - 0.5 * sum,
        tau: None,
    }
}

/// Evaluates one signature kind.
pub fn evaluate(
    kind: SignatureKind,
    g: &Topology,
    noise: &NoiseModel,
) -> Result<SignatureValue, Error> {
    match kind {
        SignatureKind::St => s_st(g, noise),
        SignatureKind::Vn => s_vn(g),
        SignatureKind::VnApprox => Ok(s_vn_approx(g)),
    }
}
