//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`cargo test --test acceptance`). Every failure
//! makes the process exit nonzero, except the timing criterion, which
//! measures the machine it runs on; it is still printed as FAIL when it
//! misses, and `TBSP_ACCEPTANCE_STRICT=1` makes it gate too.

use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tbsp::bench::{bench, median_micros};
use tbsp::bounds::evaluate_bounds;
use tbsp::fim::{fim, odometry_logdet_closed_form, relative_pose_jacobians};
use tbsp::geometry::{pose_between, EmbeddedPoseGraph, NoiseModel, Pose2};
use tbsp::graph::{spanning_tree_count_bruteforce, Topology};
use tbsp::planner::{consistency_from_values, plan_with_certificate, PlanRequest};
use tbsp::signatures::{s_vn_approx, tau, SignatureKind};
use tbsp::synth::{generate_ensemble, generate_pose_graph, SynthConfig};
use tbsp::CandidateAction;

const SLACK: f64 = 1e-6;
const DEGREE_INCREMENTS: [f64; 5] = [0.1, 0.5, 0.75, 1.0, 2.0];
const XIS: [f64; 3] = [0.1, 0.35, 0.85];
const SIGMA_P: f64 = 0.1;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn noise(xi: f64) -> NoiseModel {
    NoiseModel::from_xi(SIGMA_P, xi).unwrap()
}

fn random_connected(n: usize, extra: usize, r: &mut ChaCha8Rng) -> Topology {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|k| (r.random_range(0..k), k)).collect();
    for _ in 0..extra {
        let (a, b) = (r.random_range(0..n), r.random_range(0..n));
        let e = (a.min(b), a.max(b));
        if a != b && !edges.contains(&e) {
            edges.push(e);
        }
    }
    Topology::new(n, edges).unwrap()
}

fn random_pose(r: &mut ChaCha8Rng, spread: f64) -> Pose2 {
    Pose2::new(
        r.random_range(-spread..spread),
        r.random_range(-spread..spread),
        r.random_range(-std::f64::consts::PI..std::f64::consts::PI),
    )
}

/// Synthetic graph for `cfg`, moving to the next seed when the requested
/// loop closures do not fit the trajectory. Returns the redraw count too.
fn synth_graph(mut cfg: SynthConfig) -> (EmbeddedPoseGraph, u64) {
    for redraw in 0..100 {
        if let Ok(g) = generate_pose_graph(&cfg) {
            return (g, redraw);
        }
        cfg.seed += 1_000_003;
    }
    panic!("no feasible trajectory for {cfg:?}");
}

fn synth_ensemble(mut cfg: SynthConfig, count: usize) -> Vec<CandidateAction> {
    for _ in 0..100 {
        if let Ok(a) = generate_ensemble(&cfg, count) {
            return a;
        }
        cfg.seed += 1_000_003;
    }
    panic!("no feasible ensemble for {cfg:?}");
}

fn matrix_tree() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    let mut max_trees = 0;
    for k in 0..200 {
        let n = 2 + k % 9;
        let extra = r.random_range(0..=2 * n);
        let g = random_connected(n, extra, &mut r);
        let count = spanning_tree_count_bruteforce(&g).unwrap();
        max_trees = max_trees.max(count);
        let t = tau(&g).unwrap().exp();
        worst = worst.max((t - count as f64).abs() / count as f64);
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst <= 1e-9 && secs < 10.0,
        format!("200 graphs, n<=10, up to {max_trees} trees; max rel err {worst:.1e}; {secs:.2} s"),
    )
}

fn odometry_chains() -> Outcome {
    let nm = NoiseModel::new(0.1, 0.01).unwrap();
    let per_edge = odometry_logdet_closed_form(2, &nm).unwrap();
    let mut worst: f64 = 0.0;
    let mut r = rng(2);
    for k in 0..50 {
        let n = 2 + k % 49;
        let poses = (0..n).map(|_| random_pose(&mut r, 25.0)).collect();
        let g = EmbeddedPoseGraph::new(Topology::chain(n).unwrap(), poses, nm).unwrap();
        let expected = (n - 1) as f64 * nm.ln_det_information();
        worst = worst.max((fim(&g).unwrap().logdet_i - expected).abs());
    }
    let increment_ok =
        (per_edge - 8.0 * 10f64.ln()).abs() < 1e-12 && (per_edge - 18.420681).abs() < 1e-6;
    Outcome::new(
        worst <= 1e-8 && increment_ok,
        format!(
            "50 random-geometry chains, n<=50; max abs err {worst:.1e}; per-edge {per_edge:.6}"
        ),
    )
}

fn sandwich() -> Outcome {
    let start = Instant::now();
    let mut violations = Vec::new();
    let mut redraws = 0;
    let mut worst_margin = f64::INFINITY;
    for k in 0..300usize {
        let n = 10 + (k * 37) % 191;
        let dd = DEGREE_INCREMENTS[k % 5];
        let xi = XIS[(k / 5) % 3];
        let (g, extra) = synth_graph(SynthConfig::new(n, dd, noise(xi), k as u64));
        redraws += extra;
        let b = evaluate_bounds("g", &g, true).unwrap();
        let j = fim(&g).unwrap().entropy_j;
        let chain = [b.lower_hadamard, b.lower_exact.unwrap(), j, b.upper];
        for w in chain.windows(2) {
            worst_margin = worst_margin.min(w[1] - w[0]);
        }
        if chain.windows(2).any(|w| w[0] > w[1] + SLACK) {
            violations.push(format!("#{k} n={n} dd={dd} xi={xi}: {chain:?}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let mut detail = format!(
        "300 synth graphs, n 10..200; {} violations; tightest step {worst_margin:.1e}; {redraws} seed redraws; {secs:.1} s",
        violations.len()
    );
    for v in violations.iter().take(5) {
        write!(detail, "\n      {v}").unwrap();
    }
    Outcome::new(violations.is_empty() && secs < 120.0, detail)
}

fn certified_gap() -> Outcome {
    let mut failures = Vec::new();
    let mut surviving_hadamard = 0;
    let mut surviving_exact = 0;
    for k in 0..50usize {
        let count = 5 + k % 16;
        let n = 30 + (k * 13) % 71;
        let cfg = SynthConfig::new(
            n,
            DEGREE_INCREMENTS[k % 5],
            noise(XIS[k % 3]),
            100 + k as u64,
        );
        let actions = synth_ensemble(cfg, count);
        let j: Vec<f64> = actions
            .iter()
            .map(|a| fim(&a.graph).unwrap().entropy_j)
            .collect();
        let best = j.iter().copied().fold(f64::INFINITY, f64::min);
        let req = PlanRequest::new(actions.clone(), SignatureKind::St, None).unwrap();
        for exact in [false, true] {
            let result = plan_with_certificate(&req, exact).unwrap();
            let cert = result.certificate.unwrap();
            let sel = actions
                .iter()
                .position(|a| a.id == result.selected)
                .unwrap();
            let eps = (j[sel] - best).abs();
            if exact {
                surviving_exact += cert.surviving.len();
            } else {
                surviving_hadamard += cert.surviving.len();
            }
            if eps > cert.delta_j_max + SLACK {
                failures.push(format!(
                    "#{k} exact={exact}: eps {eps} > {}",
                    cert.delta_j_max
                ));
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "50 ensembles of 5..20 actions; {} violations; mean |A| {:.2} (Hadamard), {:.2} (exact){}",
            failures.len(),
            surviving_hadamard as f64 / 50.0,
            surviving_exact as f64 / 50.0,
            failures.iter().take(5).map(|f| format!("\n      {f}")).collect::<String>()
        ),
    )
}

fn tightness() -> Outcome {
    let actions = synth_ensemble(SynthConfig::new(60, 1.0, noise(0.85), 7), 8);
    let steps = [0.85, 0.35, 0.1, 1e-2, 1e-4];
    let mut monotone = true;
    let mut gaps = vec![0.0; steps.len()];
    for a in &actions {
        let mut last = f64::INFINITY;
        for (s, &xi) in steps.iter().enumerate() {
            let b = evaluate_bounds(&a.id, &a.graph.with_noise(noise(xi)), true).unwrap();
            let gap = b.upper - b.lower_exact.unwrap();
            monotone &= gap < last;
            last = gap;
            gaps[s] = f64::max(gaps[s], gap);
        }
    }
    let last = gaps[steps.len() - 1];
    Outcome::new(
        monotone && last <= 1e-3,
        format!(
            "8 actions, n 70..90; max UB-LB_exact per xi: {}",
            steps
                .iter()
                .zip(&gaps)
                .map(|(xi, g)| format!("{xi:e}->{g:.2e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn jacobians() -> Outcome {
    let h = 1e-6;
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    let wrap = |t: f64| {
        let pi = std::f64::consts::PI;
        (t + pi).rem_euclid(2.0 * pi) - pi
    };
    for _ in 0..100 {
        let (a, b) = (random_pose(&mut r, 10.0), random_pose(&mut r, 10.0));
        let (ja, jb) = relative_pose_jacobians(&a, &b);
        for k in 0..3 {
            let bump = |p: &Pose2, s: f64| {
                let mut q = *p;
                match k {
                    0 => q.x += s,
                    1 => q.y += s,
                    _ => q.theta += s,
                }
                q
            };
            let fd = |z1: Pose2, z0: Pose2| {
                [
                    (z1.x - z0.x) / (2.0 * h),
                    (z1.y - z0.y) / (2.0 * h),
                    wrap(z1.theta - z0.theta) / (2.0 * h),
                ]
            };
            let da = fd(
                pose_between(&bump(&a, h), &b),
                pose_between(&bump(&a, -h), &b),
            );
            let db = fd(
                pose_between(&a, &bump(&b, h)),
                pose_between(&a, &bump(&b, -h)),
            );
            for row in 0..3 {
                worst = worst
                    .max((ja[(row, k)] - da[row]).abs())
                    .max((jb[(row, k)] - db[row]).abs());
            }
        }
    }
    Outcome::new(
        worst <= 1e-6,
        format!("100 random pose pairs, h=1e-6; max abs err {worst:.1e}"),
    )
}

fn rank_consistency() -> Outcome {
    let mut rhos = Vec::new();
    let mut agree = 0;
    let mut dump = String::from(
        "ensemble,n,mean_degree_increment,xi,spearman,epsilon,action_id,s_st,oracle_j\n",
    );
    let ensembles = 45;
    for k in 0..ensembles {
        let dd = DEGREE_INCREMENTS[k % 5];
        let xi = XIS[(k / 5) % 3];
        let actions = synth_ensemble(SynthConfig::new(100, dd, noise(xi), 500 + k as u64), 10);
        let req = PlanRequest::new(actions.clone(), SignatureKind::St, None).unwrap();
        let s: Vec<f64> = plan_with_certificate(&req, false)
            .unwrap()
            .bounds
            .iter()
            .map(|b| b.s_st)
            .collect();
        let j: Vec<f64> = actions
            .iter()
            .map(|a| fim(&a.graph).unwrap().entropy_j)
            .collect();
        let ids: Vec<&str> = actions.iter().map(|a| a.id.as_str()).collect();
        let report = consistency_from_values(&ids, &s, &j);
        rhos.push(report.spearman);
        if report.action_consistent {
            agree += 1;
        }
        if !report.action_consistent || report.spearman < 0.9 {
            for (i, a) in actions.iter().enumerate() {
                writeln!(
                    dump,
                    "{k},100,{dd},{xi},{},{},{},{},{}",
                    report.spearman, report.epsilon, a.id, s[i], j[i]
                )
                .unwrap();
            }
        }
    }
    let mut sorted = rhos.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
    let share = agree as f64 / ensembles as f64;
    let dump_path = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-rank-failures.csv");
    std::fs::write(&dump_path, &dump).unwrap();
    Outcome::new(
        median >= 0.9 && share >= 0.95,
        format!(
            "{ensembles} ensembles x 10 actions, n=100; spearman median {median:.3}, mean {mean:.3}, min {:.3}; argmax agreement {:.1}%; dump {}",
            sorted[0],
            100.0 * share,
            dump_path.display()
        ),
    )
}

fn timing() -> Outcome {
    let mut detail = String::new();
    let mut pass = true;
    for n in [500, 1000] {
        let actions = synth_ensemble(SynthConfig::new(n, 1.0, noise(0.35), 800 + n as u64), 6);
        let rows = bench(&actions, 7, false).unwrap();
        let mut st: Vec<f64> = rows.iter().map(|r| r.s_st_us).collect();
        let mut oracle: Vec<f64> = rows.iter().map(|r| r.oracle_us).collect();
        let ratio = tbsp::bench::median(&mut oracle) / tbsp::bench::median(&mut st);
        pass &= ratio >= 10.0;
        write!(detail, "n={n}: oracle/s_ST {ratio:.1}x; ").unwrap();
    }

    // ŝ_VN over doubling edge counts.
    let mut r = rng(8);
    let (mut ms, mut ts) = (Vec::new(), Vec::new());
    for n in [1000, 2000, 4000, 8000] {
        let g = random_connected(n, n / 2, &mut r);
        let t = median_micros(31, || Ok(s_vn_approx(&g).value)).unwrap();
        ms.push(g.edge_count() as f64);
        ts.push(t);
    }
    let slope = tbsp::bench::log_log_slope(&ms, &ts);
    pass &= (slope - 1.0).abs() <= 0.15;
    write!(detail, "s_VN approx log-log slope {slope:.2} over m {ms:?}").unwrap();
    Outcome::new(pass, detail)
}

fn run_tbsp(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_tbsp"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "tbsp {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let mut same = Vec::new();
    for (run, threads) in [(0, "1"), (1, "4")] {
        let scenario = path(&format!("scenario{run}.json"));
        let manifest = path(&format!("synth{run}.csv"));
        run_tbsp(&[
            "synth",
            "--scenario",
            &scenario,
            "--out",
            &manifest,
            "--kind",
            "ensemble",
            "--n",
            "80",
            "--mean-degree-increment",
            "1",
            "--seed",
            "11",
            "--count",
            "12",
            "--threads",
            threads,
        ]);
        let plan = path(&format!("plan{run}.csv"));
        run_tbsp(&[
            "plan",
            &scenario,
            "--exact-lb",
            "--out",
            &plan,
            "--threads",
            threads,
        ]);
        same.push((
            std::fs::read(&manifest).unwrap(),
            std::fs::read(&plan).unwrap(),
            std::fs::read(&scenario).unwrap(),
        ));
    }
    let synth_same = same[0].0 == same[1].0 && same[0].2 == same[1].2;
    let plan_same = same[0].1 == same[1].1;
    Outcome::new(
        synth_same && plan_same && !same[0].1.is_empty(),
        format!(
            "synth and plan at 1 and 4 threads; synth CSV+scenario identical: {synth_same}; plan CSV identical: {plan_same}"
        ),
    )
}

/// Name, check, and whether a failure fails the run.
type Criterion = (&'static str, fn() -> Outcome, bool);

fn main() -> ExitCode {
    let strict = std::env::var("TBSP_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let criteria: [Criterion; 9] = [
        ("matrix-tree identity", matrix_tree, true),
        ("odometry closed form", odometry_chains, true),
        ("bound sandwich", sandwich, true),
        ("certified suboptimality", certified_gap, true),
        ("tightness as xi -> 0", tightness, true),
        ("relative-pose jacobians", jacobians, true),
        ("rank consistency", rank_consistency, true),
        ("timing", timing, strict),
        ("determinism", determinism, true),
    ];
    let mut gating_failures = 0;
    for (k, (name, check, gating)) in criteria.into_iter().enumerate() {
        let outcome = check();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        let note = if !outcome.pass && !gating {
            " (machine-dependent; not gating)"
        } else {
            ""
        };
        println!("{status} {} {name}{note}: {}", k + 1, outcome.detail);
        if !outcome.pass && gating {
            gating_failures += 1;
        }
    }
    if gating_failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
