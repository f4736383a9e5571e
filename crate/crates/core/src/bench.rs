//! Timing comparison between the signatures, the bound increments and the
//! full information-matrix entropy.
//!
//! Each stage is timed on its own `repetitions` times and the median kept.
//! The lower-bound stages time only their increment over `τ`: the diagonal
//! sum for the Hadamard bound and the shifted factorization (reusing the
//! ordering) for the exact one.

use std::hint::black_box;
use std::time::Instant;

use rayon::prelude::*;

use crate::bounds::hadamard_log_product;
use crate::fim::fim;
use crate::planner::CandidateAction;
use crate::signatures::{s_st, s_vn, s_vn_approx, TreeConnectivity, DEFAULT_ROOT};
use crate::Error;

pub const MIN_REPETITIONS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub action_id: String,
    pub n: usize,
    pub m: usize,
    pub repetitions: usize,
    /// Median wall-clock times in microseconds.
    pub s_st_us: f64,
    pub s_vn_us: f64,
    pub s_vn_approx_us: f64,
    pub lb_hadamard_us: f64,
    pub lb_exact_us: f64,
    pub oracle_us: f64,
}

impl BenchRow {
    pub fn oracle_over_s_st(&self) -> f64 {
        self.oracle_us / self.s_st_us
    }

    pub fn s_st_over_s_vn(&self) -> f64 {
        self.s_st_us / self.s_vn_us
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    values.sort_by(f64::total_cmp);
    let k = values.len() / 2;
    if values.len() % 2 == 1 {
        values[k]
    } else {
        0.5 * (values[k - 1] + values[k])
    }
}

/// Median time of `f` over `reps` runs, in microseconds.
pub fn median_micros<T>(
    reps: usize,
    mut f: impl FnMut() -> Result<T, Error>,
) -> Result<f64, Error> {
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        black_box(f()?);
        times.push(start.elapsed().as_secs_f64() * 1e6);
    }
    Ok(median(&mut times))
}

pub fn bench_action(action: &CandidateAction, repetitions: usize) -> Result<BenchRow, Error> {
    let reps = repetitions.max(MIN_REPETITIONS);
    let g = &action.graph;
    let topo = g.topology();
    let psi = g.psi();
    let tc = TreeConnectivity::new(topo, DEFAULT_ROOT)?;
    Ok(BenchRow {
        action_id: action.id.clone(),
        n: topo.node_count(),
        m: topo.edge_count(),
        repetitions: reps,
        s_st_us: median_micros(reps, || s_st(black_box(topo), g.noise()))?,
        s_vn_us: median_micros(reps, || s_vn(black_box(topo)))?,
        s_vn_approx_us: median_micros(reps, || Ok(s_vn_approx(black_box(topo))))?,
        lb_hadamard_us: median_micros(reps, || {
            Ok(hadamard_log_product(black_box(topo), DEFAULT_ROOT, psi))
        })?,
        lb_exact_us: median_micros(reps, || tc.shifted_logdet(black_box(psi)))?,
        oracle_us: median_micros(reps, || fim(black_box(g)))?,
    })
}

/// Benchmarks every action, in input order. With `parallel`, actions are
/// spread over the current rayon pool; otherwise they run one at a time on
/// the calling thread.
pub fn bench(
    actions: &[CandidateAction],
    repetitions: usize,
    parallel: bool,
) -> Result<Vec<BenchRow>, Error> {
    if parallel {
        actions
            .par_iter()
            .map(|a| bench_action(a, repetitions))
            .collect()
    } else {
        actions
            .iter()
            .map(|a| bench_action(a, repetitions))
            .collect()
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "slope needs two points");
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
