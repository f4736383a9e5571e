//! Topological planning with performance guarantees.
//!
//! Candidate actions are ranked by a signature and the best one is returned
//! together with either a margin check (`UB[J(Û)] < γ`) or a certificate
//! bounding its distance from the true optimum.

pub mod stats;

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;

use crate::bounds::{
    certificate_from_reports, evaluate_bounds, BoundsReport, GapCertificate, LowerBoundKind,
};
use crate::geometry::{EmbeddedPoseGraph, NoiseModel};
use crate::signatures::{self, SignatureKind};
use crate::Error;

/// One control sequence, represented by the posterior pose graph it leads to.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateAction {
    pub id: String,
    pub graph: EmbeddedPoseGraph,
}

impl CandidateAction {
    pub fn new(id: impl Into<String>, graph: EmbeddedPoseGraph) -> Self {
        Self {
            id: id.into(),
            graph,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlanRequest {
    actions: Vec<CandidateAction>,
    signature: SignatureKind,
    margin: Option<f64>,
}

impl PlanRequest {
    /// Requires at least one action, unique ids and one shared noise model.
    pub fn new(
        actions: Vec<CandidateAction>,
        signature: SignatureKind,
        margin: Option<f64>,
    ) -> Result<Self, Error> {
        let first = actions.first().ok_or(Error::EmptyActionSet)?;
        let noise = *first.graph.noise();
        let mut seen = HashSet::new();
        for a in &actions {
            if !seen.insert(a.id.as_str()) {
                return Err(Error::DuplicateActionId(a.id.clone()));
            }
            if *a.graph.noise() != noise {
                return Err(Error::MixedNoise(a.id.clone()));
            }
        }
        if margin.is_some_and(f64::is_nan) {
            return Err(Error::InvalidMargin);
        }
        Ok(Self {
            actions,
            signature,
            margin,
        })
    }

    pub fn actions(&self) -> &[CandidateAction] {
        &self.actions
    }

    pub fn signature(&self) -> SignatureKind {
        self.signature
    }

    pub fn margin(&self) -> Option<f64> {
        self.margin
    }

    pub fn noise(&self) -> &NoiseModel {
        self.actions[0].graph.noise()
    }

    pub fn is_margin_mode(&self) -> bool {
        self.margin.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedAction {
    pub id: String,
    pub signature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    /// Û, always `ranking[0]`.
    pub selected: String,
    /// Signature-descending; in margin mode with the margin met, only Û.
    pub ranking: Vec<RankedAction>,
    /// `UB[J(Û)]`, computed in margin and certificate modes.
    pub selected_upper_bound: Option<f64>,
    pub certificate: Option<GapCertificate>,
    /// `γ` in margin mode.
    pub margin: Option<f64>,
    pub margin_met: Option<bool>,
    /// Per-action bounds in input order (certificate mode only).
    pub bounds: Vec<BoundsReport>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    /// `|J(U*) - J(Û)|`.
    pub epsilon: f64,
    /// L∞ deviation of the best monotone-decreasing fit of `J` against `s`.
    pub gamma_f: f64,
    /// Rank correlation between `s` and `-J`.
    pub spearman: f64,
    /// `Û` attains the minimum entropy.
    pub action_consistent: bool,
}

/// Signature of every action, in input order.
pub fn evaluate_signatures(req: &PlanRequest) -> Result<Vec<f64>, Error> {
    let kind = req.signature;
    req.actions
        .par_iter()
        .map(|a| {
            signatures::evaluate(kind, a.graph.topology(), a.graph.noise())
                .map(|s| s.value)
                .map_err(|e| Error::Action {
                    id: a.id.clone(),
                    source: Box::new(e),
                })
        })
        .collect()
}

/// Descending by value, ties to the lexicographically smaller id.
pub fn rank_by_values(ids: &[&str], values: &[f64]) -> Vec<RankedAction> {
    let mut ranking: Vec<RankedAction> = ids
        .iter()
        .zip(values)
        .map(|(id, &v)| RankedAction {
            id: id.to_string(),
            signature: v,
        })
        .collect();
    ranking.sort_by(|a, b| {
        b.signature
            .total_cmp(&a.signature)
            .then_with(|| a.id.cmp(&b.id))
    });
    ranking
}

/// Ranks actions by signature; Û is the first entry.
pub fn rank_actions(req: &PlanRequest) -> Result<PlanResult, Error> {
    rank_actions_with(req, |s| s)
}

/// [`rank_actions`] with a transform applied to every signature value before
/// sorting.
pub fn rank_actions_with<F>(req: &PlanRequest, transform: F) -> Result<PlanResult, Error>
where
    F: Fn(f64) -> f64,
{
    let values: Vec<f64> = evaluate_signatures(req)?
        .into_iter()
        .map(transform)
        .collect();
    let ids: Vec<&str> = req.actions.iter().map(|a| a.id.as_str()).collect();
    let ranking = rank_by_values(&ids, &values);
    Ok(PlanResult {
        selected: ranking[0].id.clone(),
        ranking,
        selected_upper_bound: None,
        certificate: None,
        margin: None,
        margin_met: None,
        bounds: Vec::new(),
    })
}

fn action<'a>(req: &'a PlanRequest, id: &str) -> &'a CandidateAction {
    req.actions
        .iter()
        .find(|a| a.id == id)
        .expect("ranked ids come from the request")
}

/// Margin mode: accept Û when its entropy upper bound is below `γ`,
/// otherwise hand back the full ranking for anytime refinement.
pub fn plan_with_margin(req: &PlanRequest) -> Result<PlanResult, Error> {
    let margin = req.margin.ok_or(Error::MissingMargin)?;
    let mut result = rank_actions(req)?;
    let chosen = action(req, &result.selected);
    let upper = crate::bounds::upper_bound(chosen.graph.topology(), chosen.graph.noise())?;
    let met = upper < margin;
    if met {
        result.ranking.truncate(1);
    }
    result.selected_upper_bound = Some(upper);
    result.margin = Some(margin);
    result.margin_met = Some(met);
    Ok(result)
}

/// Certificate mode: Û plus ΔJ_max and the surviving set. Only defined for
/// the spanning-tree signature.
pub fn plan_with_certificate(req: &PlanRequest, use_exact: bool) -> Result<PlanResult, Error> {
    if req.signature != SignatureKind::St {
        return Err(Error::CertificateNeedsSt(req.signature));
    }
    let bounds: Vec<BoundsReport> = req
        .actions
        .par_iter()
        .map(|a| {
            evaluate_bounds(&a.id, &a.graph, use_exact).map_err(|e| Error::Action {
                id: a.id.clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<_, _>>()?;
    let ids: Vec<&str> = req.actions.iter().map(|a| a.id.as_str()).collect();
    let values: Vec<f64> = bounds.iter().map(|b| b.s_st).collect();
    let ranking = rank_by_values(&ids, &values);
    let selected = ranking[0].id.clone();
    let kind = if use_exact {
        LowerBoundKind::Exact
    } else {
        LowerBoundKind::Hadamard
    };
    let certificate = certificate_from_reports(&bounds, &selected, kind)?;
    let upper = bounds
        .iter()
        .find(|b| b.action_id == selected)
        .map(|b| b.upper);
    Ok(PlanResult {
        selected,
        ranking,
        selected_upper_bound: upper,
        certificate: Some(certificate),
        margin: None,
        margin_met: None,
        bounds,
    })
}

/// Dispatches on the request mode.
pub fn plan(req: &PlanRequest, use_exact: bool) -> Result<PlanResult, Error> {
    if req.is_margin_mode() {
        plan_with_margin(req)
    } else {
        plan_with_certificate(req, use_exact)
    }
}

/// Consistency diagnostics of the request's signature against oracle
/// entropies keyed by action id.
pub fn consistency_report(
    req: &PlanRequest,
    oracle: &BTreeMap<String, f64>,
) -> Result<ConsistencyReport, Error> {
    if oracle.len() != req.actions.len() {
        return Err(Error::OracleMismatch);
    }
    let entropies = req
        .actions
        .iter()
        .map(|a| oracle.get(&a.id).copied().ok_or(Error::OracleMismatch))
        .collect::<Result<Vec<_>, _>>()?;
    let values = evaluate_signatures(req)?;
    let ids: Vec<&str> = req.actions.iter().map(|a| a.id.as_str()).collect();
    Ok(consistency_from_values(&ids, &values, &entropies))
}

/// [`consistency_report`] on raw per-action signature and entropy values.
pub fn consistency_from_values(
    ids: &[&str],
    signatures: &[f64],
    entropies: &[f64],
) -> ConsistencyReport {
    assert!(!ids.is_empty(), "consistency needs at least one action");
    assert_eq!(ids.len(), signatures.len());
    assert_eq!(ids.len(), entropies.len());
    let ranking = rank_by_values(ids, signatures);
    let selected = ids
        .iter()
        .position(|&id| id == ranking[0].id)
        .expect("selected id is one of ids");
    let best = entropies.iter().copied().fold(f64::INFINITY, f64::min);
    let epsilon = (entropies[selected] - best).abs();
    let (_, gamma_f) = stats::minimax_decreasing_fit(signatures, entropies);
    let neg_j: Vec<f64> = entropies.iter().map(|j| -j).collect();
    // No spread on one side: call it perfect only if the fit is exact.
    let spearman =
        stats::spearman(signatures, &neg_j).unwrap_or(if gamma_f == 0.0 { 1.0 } else { 0.0 });
    ConsistencyReport {
        epsilon,
        gamma_f,
        spearman,
        action_consistent: entropies[selected] <= best,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose2;
    use crate::graph::Topology;

    fn noise() -> NoiseModel {
        NoiseModel::new(0.1, 0.01).unwrap()
    }

    fn ring(n: usize, extra: &[(usize, usize)]) -> EmbeddedPoseGraph {
        let t = Topology::new(n, (1..n).map(|i| (i - 1, i)).chain(extra.iter().copied())).unwrap();
        let poses = (0..n)
            .map(|i| {
                let a = i as f64 * 2.0 * std::f64::consts::PI / n as f64;
                Pose2::new(a.cos(), a.sin(), a + std::f64::consts::FRAC_PI_2)
            })
            .collect();
        EmbeddedPoseGraph::new(t, poses, noise()).unwrap()
    }

    #[test]
    fn request_validation() {
        assert!(matches!(
            PlanRequest::new(vec![], SignatureKind::St, None),
            Err(Error::EmptyActionSet)
        ));
        let a = CandidateAction::new("a", ring(5, &[]));
        assert!(matches!(
            PlanRequest::new(vec![a.clone(), a.clone()], SignatureKind::St, None),
            Err(Error::DuplicateActionId(_))
        ));
        let other = CandidateAction::new(
            "b",
            ring(5, &[]).with_noise(NoiseModel::new(0.2, 0.01).unwrap()),
        );
        assert!(matches!(
            PlanRequest::new(vec![a, other], SignatureKind::St, None),
            Err(Error::MixedNoise(_))
        ));
    }

    #[test]
    fn loop_closure_wins_under_every_signature() {
        let actions = vec![
            CandidateAction::new("open", ring(8, &[])),
            CandidateAction::new("closed", ring(8, &[(0, 7)])),
        ];
        for kind in SignatureKind::ALL {
            let req = PlanRequest::new(actions.clone(), kind, None).unwrap();
            assert_eq!(rank_actions(&req).unwrap().selected, "closed", "{kind}");
        }
    }

    #[test]
    fn ties_go_to_smaller_id() {
        let g = ring(6, &[(0, 5)]);
        let req = PlanRequest::new(
            vec![
                CandidateAction::new("b", g.clone()),
                CandidateAction::new("a", g),
            ],
            SignatureKind::VnApprox,
            None,
        )
        .unwrap();
        let r = rank_actions(&req).unwrap();
        assert_eq!(r.selected, "a");
        assert_eq!(r.ranking.len(), 2);
    }

    #[test]
    fn margin_mode() {
        let req = PlanRequest::new(
            vec![
                CandidateAction::new("x", ring(5, &[])),
                CandidateAction::new("y", ring(6, &[])),
            ],
            SignatureKind::St,
            Some(f64::NEG_INFINITY),
        )
        .unwrap();
        let r = plan_with_margin(&req).unwrap();
        assert_eq!(r.margin_met, Some(false));
        assert_eq!(r.ranking.len(), 2);

        let ub = r.selected_upper_bound.unwrap();
        let loose =
            PlanRequest::new(req.actions().to_vec(), SignatureKind::St, Some(ub + 1e-9)).unwrap();
        let r = plan_with_margin(&loose).unwrap();
        assert_eq!(r.margin_met, Some(true));
        assert_eq!(r.ranking.len(), 1);
        let tight = PlanRequest::new(req.actions().to_vec(), SignatureKind::St, Some(ub)).unwrap();
        assert_eq!(plan_with_margin(&tight).unwrap().margin_met, Some(false));
    }

    #[test]
    fn certificate_requires_st() {
        let req = PlanRequest::new(
            vec![CandidateAction::new("x", ring(5, &[]))],
            SignatureKind::Vn,
            None,
        )
        .unwrap();
        assert!(matches!(
            plan(&req, false),
            Err(Error::CertificateNeedsSt(SignatureKind::Vn))
        ));
    }

    #[test]
    fn identical_actions_all_survive() {
        let g = ring(7, &[(0, 6), (2, 5)]);
        let req = PlanRequest::new(
            (0..3)
                .map(|i| CandidateAction::new(format!("a{i}"), g.clone()))
                .collect(),
            SignatureKind::St,
            None,
        )
        .unwrap();
        let r = plan(&req, true).unwrap();
        let cert = r.certificate.unwrap();
        let b = &r.bounds[0];
        assert!((cert.delta_j_max - (b.upper - b.lower_exact.unwrap())).abs() < 1e-12);
        assert_eq!(cert.surviving.len(), 3);
        assert_eq!(cert.selected_action, "a0");
    }

    #[test]
    fn consistency_examples() {
        let ids = ["a", "b", "c", "d"];
        // Perfect inverse order, J = -s + 3.
        let s = [4.0, 3.0, 2.0, 1.0];
        let j: Vec<f64> = s.iter().map(|v| -v + 3.0).collect();
        let r = consistency_from_values(&ids, &s, &j);
        assert!(r.action_consistent);
        assert_eq!(r.epsilon, 0.0);
        assert_eq!(r.gamma_f, 0.0);
        assert_eq!(r.spearman, 1.0);

        // Middle ranks swapped, extremes intact.
        let j = [-1.0, 1.0, 0.0, 2.0];
        let r = consistency_from_values(&ids, &s, &j);
        assert!(r.action_consistent);
        assert_eq!(r.epsilon, 0.0);
        assert_eq!(r.gamma_f, 0.5);
        assert!(r.spearman < 1.0);

        // Wrong winner.
        let j = [0.5, 0.0, 1.0, 2.0];
        let r = consistency_from_values(&ids, &s, &j);
        assert!(!r.action_consistent);
        assert_eq!(r.epsilon, 0.5);
    }

    #[test]
    fn oracle_set_must_match() {
        let req = PlanRequest::new(
            vec![CandidateAction::new("x", ring(5, &[]))],
            SignatureKind::St,
            None,
        )
        .unwrap();
        let mut oracle = BTreeMap::new();
        oracle.insert("y".to_string(), 1.0);
        assert!(matches!(
            consistency_report(&req, &oracle),
            Err(Error::OracleMismatch)
        ));
    }
}
