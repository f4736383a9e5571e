//! Entropy bounds per candidate action and the optimality-gap certificate.
//!
//! For an action whose posterior has topology `G` and embedding with scalar
//! `Ψ`, the posterior entropy `J` satisfies
//!
//! ```text
//! UB = -s_ST
//! LB = -s_ST - ½ ln|L̃ + ΨI| + ½ τ(G)
//! LB_H = -s_ST - ½ Σ_{i ≠ r} ln(d(i) + Ψ) + ½ τ(G)   (Hadamard, LB_H ≤ LB)
//! ```
//!
//! and with `Û` the `s_ST`-maximizer, `|J(U*) - J(Û)| ≤ UB(Û) - min_U LB(U)`.

use crate::geometry::{EmbeddedPoseGraph, NoiseModel};
use crate::graph::Topology;
use crate::signatures::{s_st, s_st_from_tau, TreeConnectivity, DEFAULT_ROOT};
use crate::Error;

/// Which lower bound a certificate was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LowerBoundKind {
    Hadamard,
    Exact,
}

impl LowerBoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LowerBoundKind::Hadamard => "hadamard",
            LowerBoundKind::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub action_id: String,
    pub upper: f64,
    /// Absent when only the cheap bounds were requested.
    pub lower_exact: Option<f64>,
    pub lower_hadamard: f64,
    pub psi: f64,
    pub s_st: f64,
    pub tau: f64,
}

impl BoundsReport {
    pub fn lower(&self, kind: LowerBoundKind) -> Option<f64> {
        match kind {
            LowerBoundKind::Hadamard => Some(self.lower_hadamard),
            LowerBoundKind::Exact => self.lower_exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapCertificate {
    pub selected_action: String,
    /// Bound on `|J(U*) - J(Û)|`.
    pub delta_j_max: f64,
    /// Actions that may still be optimal, in input order.
    pub surviving: Vec<String>,
    pub lower_bound: LowerBoundKind,
}

/// `UB[J] = -s_ST`.
pub fn upper_bound(g: &Topology, noise: &NoiseModel) -> Result<f64, Error> {
    Ok(-s_st(g, noise)?.value)
}

/// Exact lower bound; `ln|L̃ + ΨI|` reuses the ordering of `L̃`.
pub fn lower_bound_exact(g: &EmbeddedPoseGraph) -> Result<f64, Error> {
    let tc = TreeConnectivity::new(g.topology(), DEFAULT_ROOT)?;
    let upper = -s_st_from_tau(tc.tau, g.node_count(), g.noise());
    exact_from_parts(&tc, upper, g.psi())
}

/// Hadamard lower bound, never above [`lower_bound_exact`].
pub fn lower_bound_hadamard(g: &EmbeddedPoseGraph) -> Result<f64, Error> {
    let tc = TreeConnectivity::new(g.topology(), DEFAULT_ROOT)?;
    let upper = -s_st_from_tau(tc.tau, g.node_count(), g.noise());
    Ok(hadamard_from_parts(
        g.topology(),
        tc.tau,
        tc.root,
        upper,
        g.psi(),
    ))
}

fn exact_from_parts(tc: &TreeConnectivity, upper: f64, psi: f64) -> Result<f64, Error> {
    // ln|L̃ + ΨI| is nondecreasing in Ψ; clamp rounding below τ.
    let gap = 0.5 * (tc.shifted_logdet(psi)? - tc.tau).max(0.0);
    Ok(upper - gap)
}

/// Log of the Hadamard product over the diagonal of `L̃ + ΨI`.
pub fn hadamard_log_product(g: &Topology, root: usize, psi: f64) -> f64 {
    g.degree_slice()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != root)
        .map(|(_, &d)| (d as f64 + psi).ln())
        .sum()
}

fn hadamard_from_parts(g: &Topology, tau: f64, root: usize, upper: f64, psi: f64) -> f64 {
    let gap = 0.5 * (hadamard_log_product(g, root, psi) - tau).max(0.0);
    upper - gap
}

/// All bounds of one action, sharing one factorization of `L̃`.
pub fn evaluate_bounds(
    action_id: &str,
    g: &EmbeddedPoseGraph,
    with_exact: bool,
) -> Result<BoundsReport, Error> {
    let tc = TreeConnectivity::new(g.topology(), DEFAULT_ROOT)?;
    let s_st = s_st_from_tau(tc.tau, g.node_count(), g.noise());
    let upper = -s_st;
    let psi = g.psi();
    let lower_exact = if with_exact {
        Some(exact_from_parts(&tc, upper, psi)?)
    } else {
        None
    };
    Ok(BoundsReport {
        action_id: action_id.to_string(),
        upper,
        lower_exact,
        lower_hadamard: hadamard_from_parts(g.topology(), tc.tau, tc.root, upper, psi),
        psi,
        s_st,
        tau: tc.tau,
    })
}

/// ΔJ_max and the surviving set for a chosen action.
///
/// An action survives when its lower bound does not exceed the selected
/// action's upper bound; the selected action always survives.
pub fn gap_certificate<S: AsRef<str>>(
    actions: &[(S, EmbeddedPoseGraph)],
    selected: &str,
    use_exact: bool,
) -> Result<GapCertificate, Error> {
    let reports = actions
        .iter()
        .map(|(id, g)| evaluate_bounds(id.as_ref(), g, use_exact))
        .collect::<Result<Vec<_>, _>>()?;
    let kind = if use_exact {
        LowerBoundKind::Exact
    } else {
        LowerBoundKind::Hadamard
    };
    certificate_from_reports(&reports, selected, kind)
}

/// [`gap_certificate`] over precomputed reports.
pub fn certificate_from_reports(
    reports: &[BoundsReport],
    selected: &str,
    kind: LowerBoundKind,
) -> Result<GapCertificate, Error> {
    if reports.is_empty() {
        return Err(Error::EmptyActionSet);
    }
    let chosen = reports
        .iter()
        .find(|r| r.action_id == selected)
        .ok_or_else(|| Error::UnknownAction(selected.to_string()))?;
    let lower = |r: &BoundsReport| {
        r.lower(kind)
            .ok_or(Error::MissingExactBound(r.action_id.clone()))
    };

    let mut min_lower = f64::INFINITY;
    let mut surviving = Vec::new();
    for r in reports {
        let lb = lower(r)?;
        min_lower = min_lower.min(lb);
        if r.action_id == selected || lb <= chosen.upper {
            surviving.push(r.action_id.clone());
        }
    }
    Ok(GapCertificate {
        selected_action: selected.to_string(),
        delta_j_max: (chosen.upper - min_lower).max(0.0),
        surviving,
        lower_bound: kind,
    })
}
