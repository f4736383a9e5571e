mod common;

use common::random_embedded;
use proptest::prelude::*;

use tbsp::bounds::{evaluate_bounds, gap_certificate, upper_bound};
use tbsp::fim::fim;
use tbsp::geometry::{EmbeddedPoseGraph, NoiseModel, Pose2};
use tbsp::graph::Topology;
use tbsp::synth::{generate_ensemble, generate_pose_graph, SynthConfig};

const SLACK: f64 = 1e-6;

fn sandwich_holds(g: &EmbeddedPoseGraph) -> Result<(), String> {
    let b = evaluate_bounds("g", g, true).map_err(|e| e.to_string())?;
    let j = fim(g).map_err(|e| e.to_string())?.entropy_j;
    let lbe = b.lower_exact.unwrap();
    let chain = [b.lower_hadamard, lbe, j, b.upper];
    if chain.windows(2).all(|w| w[0] <= w[1] + SLACK) {
        Ok(())
    } else {
        Err(format!(
            "LB_H {} LB_e {} J {} UB {}",
            chain[0], chain[1], chain[2], chain[3]
        ))
    }
}

#[test]
fn trees_have_exact_upper_bound() {
    for n in [2, 5, 17] {
        let poses = (0..n)
            .map(|i| Pose2::new(i as f64, 0.5 * i as f64, 0.1 * i as f64))
            .collect();
        let g = EmbeddedPoseGraph::new(
            Topology::chain(n).unwrap(),
            poses,
            NoiseModel::new(0.1, 0.01).unwrap(),
        )
        .unwrap();
        let ub = upper_bound(g.topology(), g.noise()).unwrap();
        assert!((fim(&g).unwrap().entropy_j - ub).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sandwich_on_random_geometry(seed in any::<u64>(), n in 2usize..30, extra in 0usize..40, xi in 0.01f64..1.0) {
        let g = random_embedded(n, extra, NoiseModel::from_xi(0.1, xi).unwrap(), seed);
        prop_assert!(sandwich_holds(&g).is_ok(), "{:?}", sandwich_holds(&g));
    }

    #[test]
    fn sandwich_on_random_walks(seed in any::<u64>(), n in 10usize..80, dd in prop::sample::select(vec![0.1, 0.5, 0.75, 1.0, 2.0]), xi in prop::sample::select(vec![0.1, 0.35, 0.85])) {
        let cfg = SynthConfig::new(n, dd, NoiseModel::from_xi(0.1, xi).unwrap(), seed);
        let g = match generate_pose_graph(&cfg) {
            Ok(g) => g,
            Err(_) => return Ok(()),
        };
        prop_assert!(sandwich_holds(&g).is_ok(), "{:?}", sandwich_holds(&g));
    }

    #[test]
    fn gap_shrinks_as_xi_falls(seed in any::<u64>(), n in 3usize..40) {
        let g = random_embedded(n, n, NoiseModel::from_xi(0.1, 0.85).unwrap(), seed);
        let mut last = f64::INFINITY;
        for xi in [0.85, 0.35, 0.1, 1e-2, 1e-4] {
            let b = evaluate_bounds("g", &g.with_noise(NoiseModel::from_xi(0.1, xi).unwrap()), true).unwrap();
            let gap = b.upper - b.lower_exact.unwrap();
            prop_assert!(gap <= last);
            prop_assert!(b.upper - b.lower_hadamard >= gap - 1e-12);
            last = gap;
        }
    }

    #[test]
    fn certificate_covers_the_true_gap(seed in any::<u64>(), count in 2usize..8, exact in any::<bool>()) {
        let mut c = SynthConfig::new(25, 1.0, NoiseModel::from_xi(0.1, 0.35).unwrap(), seed);
        c.future_len = (5, 15);
        let actions = generate_ensemble(&c, count).unwrap();
        let pairs: Vec<(String, EmbeddedPoseGraph)> = actions.iter().map(|a| (a.id.clone(), a.graph.clone())).collect();
        let j: Vec<f64> = actions.iter().map(|a| fim(&a.graph).unwrap().entropy_j).collect();
        let ub: Vec<f64> = actions.iter().map(|a| upper_bound(a.graph.topology(), a.graph.noise()).unwrap()).collect();
        let sel = (0..count).min_by(|&a, &b| ub[a].total_cmp(&ub[b])).unwrap();
        let best = (0..count).min_by(|&a, &b| j[a].total_cmp(&j[b])).unwrap();
        let cert = gap_certificate(&pairs, &actions[sel].id, exact).unwrap();
        prop_assert!(j[sel] - j[best] <= cert.delta_j_max + SLACK);
        prop_assert!(cert.surviving.contains(&actions[best].id));
        prop_assert!(cert.surviving.contains(&actions[sel].id));
    }
}

#[test]
fn exact_certificate_is_never_looser() {
    for seed in 0..10 {
        let c = SynthConfig::new(30, 0.75, NoiseModel::from_xi(0.1, 0.85).unwrap(), seed);
        let actions = generate_ensemble(&c, 6).unwrap();
        let pairs: Vec<_> = actions
            .iter()
            .map(|a| (a.id.as_str(), a.graph.clone()))
            .collect();
        let h = gap_certificate(&pairs, "a000", false).unwrap();
        let e = gap_certificate(&pairs, "a000", true).unwrap();
        assert!(e.delta_j_max <= h.delta_j_max + 1e-12);
        assert!(e.surviving.len() <= h.surviving.len());
    }
}
