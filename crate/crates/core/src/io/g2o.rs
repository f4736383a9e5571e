//! The planar g2o subset.
//!
//! ```text
//! VERTEX_SE2 id x y theta
//! EDGE_SE2 i j dx dy dtheta i11 i12 i13 i22 i23 i33
//! ```
//!
//! Information blocks must be diagonal with `i11 = i22`, identical across
//! edges up to a relative 1e-9. Measurements are read and discarded: the
//! posterior is linearized at the vertex poses. Other record types are
//! skipped and counted; blank lines and `#` comments are ignored.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::geometry::{pose_between, EmbeddedPoseGraph, NoiseModel, Pose2};
use crate::graph::Topology;
use crate::Error;

use super::FormatError;

const NOISE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct G2oGraph {
    pub graph: EmbeddedPoseGraph,
    /// Original vertex id of each node, ascending.
    pub vertex_ids: Vec<i64>,
    /// Records of other types that were skipped.
    pub ignored_records: usize,
}

fn malformed(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        line,
        message: message.into(),
    }
}

fn fields<const N: usize>(line: usize, tag: &str, rest: &[&str]) -> Result<[f64; N], FormatError> {
    if rest.len() != N {
        return Err(malformed(
            line,
            format!("{tag} expects {N} values after the ids, got {}", rest.len()),
        ));
    }
    let mut out = [0.0; N];
    for (o, s) in out.iter_mut().zip(rest) {
        *o = s
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| malformed(line, format!("`{s}` is not a finite number")))?;
    }
    Ok(out)
}

fn vertex_id(line: usize, s: Option<&&str>) -> Result<i64, FormatError> {
    let s = s.ok_or_else(|| malformed(line, "missing vertex id"))?;
    s.parse()
        .map_err(|_| malformed(line, format!("`{s}` is not an integer vertex id")))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= NOISE_RTOL * a.abs().max(b.abs())
}

pub fn parse_g2o_2d<R: BufRead>(reader: R) -> Result<G2oGraph, Error> {
    let mut vertices: BTreeMap<i64, Pose2> = BTreeMap::new();
    let mut raw_edges: Vec<(usize, i64, i64)> = Vec::new();
    let mut info: Option<(f64, f64)> = None;
    let mut ignored = 0;

    for (k, text) in reader.lines().enumerate() {
        let line = k + 1;
        let text = text.map_err(FormatError::Io)?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let Some(&tag) = tokens.first() else { continue };
        if tag.starts_with('#') {
            continue;
        }
        match tag {
            "VERTEX_SE2" => {
                let id = vertex_id(line, tokens.get(1))?;
                let [x, y, theta] = fields::<3>(line, tag, &tokens[2.min(tokens.len())..])?;
                if vertices.insert(id, Pose2::new(x, y, theta)).is_some() {
                    return Err(FormatError::DuplicateVertex { line, id }.into());
                }
            }
            "EDGE_SE2" => {
                let i = vertex_id(line, tokens.get(1))?;
                let j = vertex_id(line, tokens.get(2))?;
                let v = fields::<9>(line, tag, &tokens[3.min(tokens.len())..])?;
                let [_dx, _dy, _dth, i11, i12, i13, i22, i23, i33] = v;
                if i12 != 0.0 || i13 != 0.0 || i23 != 0.0 {
                    return Err(FormatError::NonDiagonalInformation { line }.into());
                }
                if !(i11 > 0.0 && i33 > 0.0) {
                    return Err(malformed(line, "information entries must be positive").into());
                }
                if i11 != i22 {
                    return Err(FormatError::AnisotropicPosition { line }.into());
                }
                match info {
                    None => info = Some((i11, i33)),
                    Some((p, t)) if !(close(p, i11) && close(t, i33)) => {
                        return Err(FormatError::HeterogeneousNoise { line }.into())
                    }
                    Some(_) => {}
                }
                raw_edges.push((line, i, j));
            }
            _ => ignored += 1,
        }
    }

    let vertex_ids: Vec<i64> = vertices.keys().copied().collect();
    let index = |line: usize, id: i64| {
        vertex_ids
            .binary_search(&id)
            .map_err(|_| FormatError::MissingVertex { line, id })
    };
    let edges = raw_edges
        .iter()
        .map(|&(line, i, j)| Ok((index(line, i)?, index(line, j)?)))
        .collect::<Result<Vec<_>, FormatError>>()?;
    let topology = Topology::new(vertex_ids.len(), edges)?;
    // A connected graph on two or more nodes has at least one edge.
    let (i11, i33) = info.expect("connected topology has edges");
    let noise = NoiseModel::new(1.0 / i11.sqrt(), 1.0 / i33.sqrt())?;
    let graph = EmbeddedPoseGraph::new(topology, vertices.into_values().collect(), noise)?;
    Ok(G2oGraph {
        graph,
        vertex_ids,
        ignored_records: ignored,
    })
}

/// Writes vertices `0..n` and one edge per topology edge, with the
/// measurement set to the relative pose between the stored poses.
pub fn write_g2o<W: Write>(g: &EmbeddedPoseGraph, mut out: W) -> std::io::Result<()> {
    for (i, p) in g.poses().iter().enumerate() {
        writeln!(out, "VERTEX_SE2 {i} {} {} {}", p.x, p.y, p.theta)?;
    }
    let [wp, _, wt] = g.noise().information_diagonal();
    for &(i, j) in g.topology().edges() {
        let z = pose_between(&g.poses()[i], &g.poses()[j]);
        writeln!(
            out,
            "EDGE_SE2 {i} {j} {} {} {} {wp} 0 0 {wp} 0 {wt}",
            z.x, z.y, z.theta
        )?;
    }
    Ok(())
}
