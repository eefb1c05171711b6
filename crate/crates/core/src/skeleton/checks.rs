//! Claim-by-claim verification of a computed skeleton.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{SkeletonGraph, VertexKind};
use crate::dynamics::{hopf_budget, CriticalPoint, Terminal};
use crate::green::GreenModel;
use crate::surfaces::TopologyInfo;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Int(i64),
    Real(f64),
    Flag(bool),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub id: String,
    pub anchor: String,
    /// False when the hypotheses of the claim do not hold; the claim then
    /// passes vacuously.
    pub applicable: bool,
    pub pass: bool,
    pub tolerance: Option<f64>,
    pub values: BTreeMap<String, Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChecksReport {
    pub claims: Vec<ClaimRecord>,
    pub all_pass: bool,
}

impl ChecksReport {
    pub fn claim(&self, id: &str) -> Option<&ClaimRecord> {
        self.claims.iter().find(|c| c.id == id)
    }
}

fn claim(id: &str, anchor: &str, applicable: bool, pass: bool, values: &[(&str, Quantity)]) -> ClaimRecord {
    ClaimRecord {
        id: id.to_string(),
        anchor: anchor.to_string(),
        applicable,
        pass: pass || !applicable,
        tolerance: None,
        values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    }
}

/// Whether every decreasing chain of edges is finite and ends at an end
/// minimum.
fn chains_end_in_minima(graph: &SkeletonGraph) -> (bool, bool) {
    let n = graph.vertices.len();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &graph.edges {
        out[e.source].push(e.sink);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut acyclic = true;
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < out[v].len() {
                let w = out[v][*next];
                *next += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => acyclic = false,
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    let sinks_are_minima = (0..n)
        .filter(|&v| out[v].is_empty())
        .all(|v| graph.vertices[v].kind == VertexKind::EndMinimum);
    (acyclic, sinks_are_minima)
}

/// Evaluates the structural claims on a compactified skeleton (and, when
/// given, the rank bound on the open variant).
pub fn verify_report(
    model: &GreenModel,
    topo: &TopologyInfo,
    zeros: &[CriticalPoint],
    graph: &SkeletonGraph,
    open: Option<&SkeletonGraph>,
) -> ChecksReport {
    let n = zeros.len() as i64;
    let nu = topo.nu as i64;
    let mut claims = Vec::new();

    claims.push(claim(
        "critical_point_bound",
        "critical points bounded by twice the genus plus the number of ends minus one",
        true,
        n <= topo.bound_conformal && n <= topo.bound_topological,
        &[
            ("critical_points", Quantity::Int(n)),
            ("bound_conformal", Quantity::Int(topo.bound_conformal)),
            ("bound_topological", Quantity::Int(topo.bound_topological)),
        ],
    ));

    let morse = zeros.iter().all(CriticalPoint::is_morse);
    let attained = n == topo.bound_conformal;
    claims.push(claim(
        "morse_at_bound",
        "attaining the conformal bound forces nondegenerate critical points",
        attained,
        morse,
        &[("bound_attained", Quantity::Flag(attained)), ("morse", Quantity::Flag(morse))],
    ));

    let hopf = hopf_budget(zeros, topo);
    claims.push(claim(
        "hopf_index_sum",
        "pole, critical point and end-minimum indices sum to the Euler characteristic",
        true,
        hopf.holds(),
        &[("lhs", Quantity::Int(hopf.lhs)), ("euler_characteristic", Quantity::Int(hopf.rhs))],
    ));

    let (b0, b1) = (graph.beta0, graph.beta1);
    claims.push(claim(
        "skeleton_homology",
        "compactified skeleton is connected with first Betti number twice the genus",
        true,
        graph.complete() && b0 == Some(1) && b1 == Some(2 * nu),
        &[
            ("beta0", Quantity::Int(b0.map_or(-1, |b| b as i64))),
            ("beta1", Quantity::Int(b1.unwrap_or(-1))),
            ("expected_beta1", Quantity::Int(2 * nu)),
            ("unresolved_edges", Quantity::Int(graph.unresolved.len() as i64)),
        ],
    ));

    let monotone = graph.edges.iter().all(|e| e.monotone && e.g_range[0] > e.g_range[1]);
    let branches_ok = graph.vertices.iter().enumerate().all(|(v, vert)| match (vert.zero, vert.m) {
        (Some(_), Some(m)) => graph.edges.iter().filter(|e| e.source == v).count() == m as usize,
        _ => true,
    });
    let no_pole_sink = graph.edges.iter().all(|e| e.terminal != Terminal::Pole);
    let (acyclic, minimal) = chains_end_in_minima(graph);
    claims.push(claim(
        "gradient_like_skeleton",
        "edges strictly decrease the extended potential and every maximal chain ends at an end minimum",
        true,
        monotone && branches_ok && no_pole_sink && acyclic && minimal,
        &[
            ("edges_monotone", Quantity::Flag(monotone)),
            ("stable_branch_counts", Quantity::Flag(branches_ok)),
            ("no_pole_sink", Quantity::Flag(no_pole_sink)),
            ("acyclic", Quantity::Flag(acyclic)),
            ("chains_end_in_minima", Quantity::Flag(minimal)),
        ],
    ));

    let interior_index: i64 = zeros.iter().filter(|z| !z.at_removable_end).map(|z| z.index as i64).sum();
    let removable_index: i64 = zeros.iter().filter(|z| z.at_removable_end).map(|z| z.index as i64).sum();
    let lhs = -interior_index;
    let rhs = 2 * nu - 1 + topo.lambda1_prime as i64 + topo.lambda2 as i64 + removable_index;
    claims.push(claim(
        "removable_split_balance",
        "interior and removable-end critical indices balance against genus and end counts",
        true,
        lhs == rhs,
        &[("lhs", Quantity::Int(lhs)), ("rhs", Quantity::Int(rhs))],
    ));

    let interior = zeros.iter().filter(|z| !z.at_removable_end).count() as i64;
    let no_removable = model.ends().iter().all(|e| !e.removable());
    let forced = topo.lambda >= 2 && no_removable;
    claims.push(claim(
        "forced_critical_point",
        "two or more ends, none removable, force an interior critical point",
        forced,
        interior >= 1,
        &[
            ("interior_critical_points", Quantity::Int(interior)),
            ("ends", Quantity::Int(topo.lambda as i64)),
        ],
    ));

    if let Some(open) = open {
        claims.push(claim(
            "open_skeleton_rank",
            "open skeleton has first Betti number at most twice the genus",
            true,
            open.complete() && open.beta1.is_some_and(|b| b <= 2 * nu),
            &[
                ("beta0", Quantity::Int(open.beta0.map_or(-1, |b| b as i64))),
                ("beta1", Quantity::Int(open.beta1.unwrap_or(-1))),
            ],
        ));
    }

    let all_pass = claims.iter().all(|c| c.pass);
    ChecksReport { claims, all_pass }
}
