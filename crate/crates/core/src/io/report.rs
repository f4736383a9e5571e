//! CSV reports.
//!
//! Every report starts with a `#` comment line naming its schema version and
//! units, followed by a fixed header row. Floats are written in shortest
//! round-trip form; quantities that were not computed are left empty.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::bounds::hadamard_log_product;
use crate::fim::fim;
use crate::geometry::EmbeddedPoseGraph;
use crate::planner::{CandidateAction, PlanResult};
use crate::signatures::{
    s_st_from_tau, s_vn, s_vn_approx, SignatureKind, TreeConnectivity, DEFAULT_ROOT,
};
use crate::Error;

use super::FormatError;

pub const REPORT_VERSION: &str = "tbsp-report/1";

pub const UNITS_COMMENT: &str =
    "# tbsp-report/1; signatures and entropies in nats, lengths in meters, angles in radians, times in microseconds";

/// Per-action table written by `signatures`, `bounds` and `oracle`.
pub const ACTION_HEADER: &str =
    "action_id,n,m,tau,s_st,s_vn,s_vn_approx,psi,ub,lb_exact,lb_hadamard,oracle_j,\
t_s_st_us,t_s_vn_us,t_s_vn_approx_us,t_lb_hadamard_us,t_lb_exact_us,t_oracle_us";

/// Ranking table written by `plan`.
pub const PLAN_HEADER: &str =
    "rank,action_id,signature_kind,signature,selected,ub,lower_bound_kind,lb,surviving,delta_j_max,margin,margin_met";

/// Generated-graph table written by `synth`.
pub const SYNTH_HEADER: &str = "action_id,n,m,loop_closures,mean_degree,psi";

/// Sandwich check written by `verify`.
pub const VERIFY_HEADER: &str = "action_id,lb_hadamard,lb_exact,oracle_j,ub,violations";

/// Timing table written by `bench`.
pub const BENCH_HEADER: &str = "action_id,n,m,repetitions,t_s_st_us,t_s_vn_us,t_s_vn_approx_us,\
t_lb_hadamard_us,t_lb_exact_us,t_oracle_us,oracle_over_s_st,s_st_over_s_vn";

/// How much of the per-action table to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReportLevel {
    Signatures,
    Bounds,
    Oracle,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageTimings {
    pub s_st: Option<f64>,
    pub s_vn: Option<f64>,
    pub s_vn_approx: Option<f64>,
    pub lb_hadamard: Option<f64>,
    pub lb_exact: Option<f64>,
    pub oracle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub action_id: String,
    pub n: usize,
    pub m: usize,
    pub tau: f64,
    pub s_st: f64,
    pub s_vn: f64,
    pub s_vn_approx: f64,
    pub psi: f64,
    pub ub: Option<f64>,
    pub lb_exact: Option<f64>,
    pub lb_hadamard: Option<f64>,
    pub oracle_j: Option<f64>,
    pub timings: StageTimings,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e6)
}

/// Evaluates one action up to `level`.
pub fn evaluate_row(
    id: &str,
    g: &EmbeddedPoseGraph,
    level: ReportLevel,
) -> Result<ReportRow, Error> {
    let topo = g.topology();
    let noise = g.noise();
    let (tc, t_st) = timed(|| TreeConnectivity::new(topo, DEFAULT_ROOT));
    let tc = tc?;
    let s_st = s_st_from_tau(tc.tau, topo.node_count(), noise);
    let (vn, t_vn) = timed(|| s_vn(topo));
    let (vna, t_vna) = timed(|| s_vn_approx(topo));
    let psi = g.psi();
    let mut row = ReportRow {
        action_id: id.to_string(),
        n: topo.node_count(),
        m: topo.edge_count(),
        tau: tc.tau,
        s_st,
        s_vn: vn?.value,
        s_vn_approx: vna.value,
        psi,
        ub: None,
        lb_exact: None,
        lb_hadamard: None,
        oracle_j: None,
        timings: StageTimings {
            s_st: Some(t_st),
            s_vn: Some(t_vn),
            s_vn_approx: Some(t_vna),
            ..Default::default()
        },
    };
    if level >= ReportLevel::Bounds {
        let ub = -s_st;
        let (h, t_h) = timed(|| hadamard_log_product(topo, DEFAULT_ROOT, psi));
        let (shifted, t_e) = timed(|| tc.shifted_logdet(psi));
        row.ub = Some(ub);
        row.lb_hadamard = Some(ub - 0.5 * (h - tc.tau));
        row.lb_exact = Some(ub - 0.5 * (shifted? - tc.tau));
        row.timings.lb_hadamard = Some(t_h);
        row.timings.lb_exact = Some(t_e);
    }
    if level >= ReportLevel::Oracle {
        let (j, t_o) = timed(|| fim(g));
        row.oracle_j = Some(j?.entropy_j);
        row.timings.oracle = Some(t_o);
    }
    Ok(row)
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn micros(v: Option<f64>, with_timings: bool) -> String {
    if with_timings {
        v.map(|t| format!("{t:.3}")).unwrap_or_default()
    } else {
        String::new()
    }
}

/// Comment line and header, then a CSV writer for the body.
fn begin<W: Write>(mut out: W, header: &str) -> Result<csv::Writer<W>, Error> {
    writeln!(out, "{UNITS_COMMENT}").map_err(FormatError::from)?;
    writeln!(out, "{header}").map_err(FormatError::from)?;
    Ok(csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out))
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<(), Error> {
    w.into_inner()
        .map_err(|e| FormatError::Io(e.into_error()))?
        .flush()
        .map_err(FormatError::from)?;
    Ok(())
}

fn record<W: Write>(w: &mut csv::Writer<W>, fields: Vec<String>) -> Result<(), Error> {
    w.write_record(fields).map_err(FormatError::from)?;
    Ok(())
}

/// Writes per-action rows; timing columns stay empty unless `with_timings`,
/// so that the body is reproducible.
pub fn write_action_report<W: Write>(
    out: W,
    rows: &[ReportRow],
    with_timings: bool,
) -> Result<(), Error> {
    let mut w = begin(out, ACTION_HEADER)?;
    for r in rows {
        let t = &r.timings;
        record(
            &mut w,
            vec![
                r.action_id.clone(),
                r.n.to_string(),
                r.m.to_string(),
                num(r.tau),
                num(r.s_st),
                num(r.s_vn),
                num(r.s_vn_approx),
                num(r.psi),
                opt(r.ub),
                opt(r.lb_exact),
                opt(r.lb_hadamard),
                opt(r.oracle_j),
                micros(t.s_st, with_timings),
                micros(t.s_vn, with_timings),
                micros(t.s_vn_approx, with_timings),
                micros(t.lb_hadamard, with_timings),
                micros(t.lb_exact, with_timings),
                micros(t.oracle, with_timings),
            ],
        )?;
    }
    finish(w)
}

pub fn write_plan_report<W: Write>(
    out: W,
    kind: SignatureKind,
    result: &PlanResult,
) -> Result<(), Error> {
    let mut w = begin(out, PLAN_HEADER)?;
    let cert = result.certificate.as_ref();
    for (rank, entry) in result.ranking.iter().enumerate() {
        let selected = entry.id == result.selected;
        let bounds = result.bounds.iter().find(|b| b.action_id == entry.id);
        let ub = match bounds {
            Some(b) => Some(b.upper),
            None if selected => result.selected_upper_bound,
            None => None,
        };
        let lb = match (bounds, cert) {
            (Some(b), Some(c)) => b.lower(c.lower_bound),
            _ => None,
        };
        record(
            &mut w,
            vec![
                (rank + 1).to_string(),
                entry.id.clone(),
                kind.as_str().to_string(),
                num(entry.signature),
                selected.to_string(),
                opt(ub),
                cert.map(|c| c.lower_bound.as_str().to_string())
                    .unwrap_or_default(),
                opt(lb),
                cert.map(|c| c.surviving.contains(&entry.id).to_string())
                    .unwrap_or_default(),
                opt(cert.map(|c| c.delta_j_max)),
                opt(result.margin),
                result.margin_met.map(|m| m.to_string()).unwrap_or_default(),
            ],
        )?;
    }
    finish(w)
}

pub fn write_synth_report<W: Write>(
    out: W,
    actions: &[CandidateAction],
    base_edges: &[usize],
) -> Result<(), Error> {
    let mut w = begin(out, SYNTH_HEADER)?;
    for (a, &base) in actions.iter().zip(base_edges) {
        let t = a.graph.topology();
        let n = t.node_count();
        record(
            &mut w,
            vec![
                a.id.clone(),
                n.to_string(),
                t.edge_count().to_string(),
                (t.edge_count() - base).to_string(),
                num(2.0 * t.edge_count() as f64 / n as f64),
                num(a.graph.psi()),
            ],
        )?;
    }
    finish(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub action_id: String,
    pub lb_hadamard: f64,
    pub lb_exact: f64,
    pub oracle_j: f64,
    pub ub: f64,
    pub violations: Vec<&'static str>,
}

pub fn write_verify_report<W: Write>(out: W, rows: &[VerifyRow]) -> Result<(), Error> {
    let mut w = begin(out, VERIFY_HEADER)?;
    for r in rows {
        record(
            &mut w,
            vec![
                r.action_id.clone(),
                num(r.lb_hadamard),
                num(r.lb_exact),
                num(r.oracle_j),
                num(r.ub),
                r.violations.join(";"),
            ],
        )?;
    }
    finish(w)
}

pub fn write_bench_report<W: Write>(out: W, rows: &[crate::bench::BenchRow]) -> Result<(), Error> {
    let mut w = begin(out, BENCH_HEADER)?;
    for r in rows {
        let t = |v: f64| format!("{v:.3}");
        record(
            &mut w,
            vec![
                r.action_id.clone(),
                r.n.to_string(),
                r.m.to_string(),
                r.repetitions.to_string(),
                t(r.s_st_us),
                t(r.s_vn_us),
                t(r.s_vn_approx_us),
                t(r.lb_hadamard_us),
                t(r.lb_exact_us),
                t(r.oracle_us),
                num(r.oracle_over_s_st()),
                num(r.s_st_over_s_vn()),
            ],
        )?;
    }
    finish(w)
}

/// Run metadata written next to every CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub report: &'static str,
    pub command: String,
    pub args: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<&'static str>,
    pub threads: usize,
}

impl RunMetadata {
    pub fn new(command: &str, args: Vec<String>, threads: usize) -> Self {
        Self {
            tool: "tbsp",
            version: env!("CARGO_PKG_VERSION"),
            report: REPORT_VERSION,
            command: command.to_string(),
            args,
            seed: None,
            generator: None,
            lower_bound: None,
            threads,
        }
    }

    pub fn to_json(&self) -> Result<String, Error> {
        let mut s = serde_json::to_string_pretty(self).map_err(FormatError::from)?;
        s.push('\n');
        Ok(s)
    }
}
