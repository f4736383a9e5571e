//! Test-only helpers: seeded random graphs and oracles that share no code
//! with the library's factorization.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tbsp::geometry::{EmbeddedPoseGraph, NoiseModel, Pose2};
use tbsp::graph::Topology;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree (each node attaches to an earlier one) plus up to
/// `extra` further edges.
pub fn random_connected(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> Topology {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|k| (rng.random_range(0..k), k)).collect();
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b
            && !edges.contains(&(a.min(b), a.max(b)))
            && !edges.contains(&(a.max(b), a.min(b)))
        {
            edges.push((a.min(b), a.max(b)));
        }
    }
    Topology::new(n, edges).unwrap()
}

pub fn random_poses(n: usize, spread: f64, rng: &mut ChaCha8Rng) -> Vec<Pose2> {
    (0..n)
        .map(|_| {
            Pose2::new(
                rng.random_range(-spread..spread),
                rng.random_range(-spread..spread),
                rng.random_range(-3.0..3.0),
            )
        })
        .collect()
}

pub fn random_embedded(n: usize, extra: usize, noise: NoiseModel, seed: u64) -> EmbeddedPoseGraph {
    let mut r = rng(seed);
    let topology = random_connected(n, extra, &mut r);
    let poses = random_poses(n, 3.0, &mut r);
    EmbeddedPoseGraph::new(topology, poses, noise).unwrap()
}

/// Determinant by Laplace expansion along the first row. Exponential; keep
/// dimensions small.
pub fn cofactor_det(m: &DMatrix<f64>) -> f64 {
    let d = m.nrows();
    match d {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => {
            let mut total = 0.0;
            for c in 0..d {
                if m[(0, c)] == 0.0 {
                    continue;
                }
                let minor = m.clone().remove_row(0).remove_column(c);
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                total += sign * m[(0, c)] * cofactor_det(&minor);
            }
            total
        }
    }
}

/// Spanning trees by plain enumeration of every `(n-1)`-edge subset with a
/// union-find acyclicity check. Only for small edge counts.
pub fn count_spanning_trees_naive(g: &Topology) -> u64 {
    let n = g.node_count();
    let edges = g.edges();
    let m = edges.len();
    assert!(m <= 20, "naive enumeration is limited to 20 edges");
    let mut count = 0;
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                x = p[x];
            }
            x
        }
        let mut acyclic = true;
        for (k, &(a, b)) in edges.iter().enumerate() {
            if mask & (1 << k) != 0 {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                if ra == rb {
                    acyclic = false;
                    break;
                }
                parent[ra] = rb;
            }
        }
        if acyclic {
            count += 1;
        }
    }
    count
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
