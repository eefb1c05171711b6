//! Basin boundary graphs: vertices at zeros and ends, edges along the
//! stable separatrices.

mod basin;
mod checks;

use num_complex::Complex64;
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    integrate_flow, separatrix_directions, CriticalPoint, Direction, FlowStops, Terminal, Tolerances, TrajectorySample,
};
use crate::green::GreenModel;
use crate::surfaces::ChartPoint;

pub use basin::{basin_sample, BasinLabel, BasinOptions, BasinRaster};
pub use checks::{verify_report, ChecksReport, ClaimRecord, Quantity};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkeletonError {
    #[error("graph has {0} unresolved edges")]
    IncompleteGraph(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Ends kept as vertices.
    Compactified,
    /// Ends removed; removable ends contribute their incoming orbits.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    CriticalPoint,
    EndMinimum,
    RemovableEnd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub kind: VertexKind,
    /// `None` for a collapsed boundary circle.
    pub point: Option<ChartPoint>,
    /// Extended value; `None` where it is `-inf`.
    pub value: Option<f64>,
    /// Index into the zero list.
    pub zero: Option<usize>,
    /// Puncture (or boundary) index.
    pub end: Option<usize>,
    pub m: Option<u32>,
    /// Open variant: a private copy of a deleted end, one per incidence.
    pub removed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub sink: usize,
    pub samples: Vec<TrajectorySample>,
    /// `[G(source), G at the last sample]`.
    pub g_range: [f64; 2],
    pub terminal: Terminal,
    pub monotone: bool,
    /// Seed direction index `k` at the source zero.
    pub branch: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnresolvedEdge {
    pub zero: Option<usize>,
    /// Set for orbits traced from a removable end.
    pub end: Option<usize>,
    pub branch: Option<u32>,
    pub terminal: Terminal,
    pub last: ChartPoint,
}

/// A removable end found on a separatrix of a zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coincidence {
    pub end: usize,
    pub zero: usize,
    pub branch: Option<u32>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonGraph {
    pub variant: Variant,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub unresolved: Vec<UnresolvedEdge>,
    pub coincidences: Vec<Coincidence>,
    pub beta0: Option<usize>,
    pub beta1: Option<i64>,
}

impl SkeletonGraph {
    pub fn complete(&self) -> bool {
        self.unresolved.is_empty()
    }
}

pub fn betti(graph: &SkeletonGraph) -> Result<(usize, i64), SkeletonError> {
    if !graph.complete() {
        return Err(SkeletonError::IncompleteGraph(graph.unresolved.len()));
    }
    let n = graph.vertices.len();
    let mut uf = UnionFind::<usize>::new(n);
    for e in &graph.edges {
        uf.union(e.source, e.sink);
    }
    let mut roots: Vec<usize> = (0..n).map(|v| uf.find(v)).collect();
    roots.sort_unstable();
    roots.dedup();
    let c = roots.len();
    Ok((c, graph.edges.len() as i64 - n as i64 + c as i64))
}

/// Distance from `p` to the segment `[a, b]`, measured in `a`'s chart.
fn segment_distance(model: &GreenModel, p: ChartPoint, a: ChartPoint, b: ChartPoint) -> f64 {
    let (Some(pz), Some(bz)) = (model.transfer(p, a.chart), model.transfer(b, a.chart)) else {
        return f64::INFINITY;
    };
    let [px, py] = model.periods(a.chart);
    let wrap = |d: Complex64| {
        let w = |x: f64, per: Option<f64>| per.map_or(x, |t| crate::surfaces::wrap_centered(x, 0.0, t));
        Complex64::new(w(d.re, px), w(d.im, py))
    };
    let d = wrap(pz - a.z);
    let s = wrap(bz - a.z);
    let len2 = s.norm_sqr();
    let t = if len2 > 0.0 {
        ((d.re * s.re + d.im * s.im) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (d - s * t).norm()
}

/// Largest distance from a sample of `a` to the polyline `b`.
fn polyline_gap(model: &GreenModel, a: &[TrajectorySample], b: &[TrajectorySample]) -> f64 {
    a.iter()
        .map(|s| {
            if b.len() == 1 {
                return model.distance(s.point, b[0].point);
            }
            b.windows(2)
                .map(|w| segment_distance(model, s.point, w[0].point, w[1].point))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Polylines closer than this are treated as the same separatrix.
const DUPLICATE_GAP: f64 = 1e-3;

struct Builder<'a> {
    model: &'a GreenModel,
    zeros: &'a [CriticalPoint],
    tol: &'a Tolerances,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    unresolved: Vec<UnresolvedEdge>,
    coincidences: Vec<Coincidence>,
    /// Vertex ids of the ends by puncture index, and of the boundary.
    end_vertex: Vec<Option<usize>>,
    boundary_vertex: Option<usize>,
}

impl Builder<'_> {
    fn vertex_for(&self, terminal: Terminal) -> Option<usize> {
        match terminal {
            Terminal::Zero(j) => Some(j),
            Terminal::ParabolicEnd(k) => self.end_vertex.get(k).copied().flatten(),
            Terminal::HyperbolicBoundary => self.boundary_vertex,
            _ => None,
        }
    }

    fn edge_from(&self, source: usize, source_value: f64, tr: &crate::dynamics::Trajectory, branch: Option<u32>) -> Option<Edge> {
        let sink = self.vertex_for(tr.terminal)?;
        Some(Edge {
            source,
            sink,
            g_range: [source_value, tr.last().value],
            monotone: tr.is_monotone() && tr.samples.first().is_none_or(|s| s.value <= source_value),
            terminal: tr.terminal,
            samples: tr.samples.clone(),
            branch,
        })
    }
}

/// Traces the stable separatrices of every zero backward and assembles
/// the requested graph variant.
pub fn build_skeleton(model: &GreenModel, zeros: &[CriticalPoint], variant: Variant, tol: &Tolerances) -> SkeletonGraph {
    let mut b = Builder {
        model,
        zeros,
        tol,
        vertices: Vec::new(),
        edges: Vec::new(),
        unresolved: Vec::new(),
        coincidences: Vec::new(),
        end_vertex: vec![None; model.spec().punctures.len()],
        boundary_vertex: None,
    };
    for (i, z) in zeros.iter().enumerate() {
        b.vertices.push(Vertex {
            kind: if z.at_removable_end {
                VertexKind::RemovableEnd
            } else {
                VertexKind::CriticalPoint
            },
            point: Some(z.point),
            value: Some(z.value),
            zero: Some(i),
            end: z.end,
            m: Some(z.m),
            removed: false,
        });
    }
    if model.has_hyperbolic_boundary() {
        b.boundary_vertex = Some(b.vertices.len());
        b.vertices.push(Vertex {
            kind: VertexKind::EndMinimum,
            point: None,
            value: Some(0.0),
            zero: None,
            end: Some(0),
            m: None,
            removed: false,
        });
    }
    for e in model.ends().iter().filter(|e| !e.removable()) {
        b.end_vertex[e.index] = Some(b.vertices.len());
        b.vertices.push(Vertex {
            kind: VertexKind::EndMinimum,
            point: Some(e.point),
            value: None,
            zero: None,
            end: Some(e.index),
            m: None,
            removed: false,
        });
    }

    let seeds: Vec<(usize, u32, ChartPoint)> = zeros
        .iter()
        .enumerate()
        .flat_map(|(i, z)| {
            separatrix_directions(z)
                .into_iter()
                .filter(|d| d.stable)
                .map(move |d| (i, d.k, ChartPoint::new(z.point.chart, z.point.z + Complex64::from_polar(tol.eps_sep, d.angle))))
        })
        .collect();
    let stops = FlowStops {
        zeros,
        ..FlowStops::default()
    };
    let traces: Vec<_> = seeds
        .par_iter()
        .map(|&(i, k, seed)| (i, k, integrate_flow(model, seed, Direction::Backward, &stops, tol)))
        .collect();
    for (i, k, tr) in traces {
        match b.edge_from(i, zeros[i].value, &tr, Some(k)) {
            Some(edge) => b.edges.push(edge),
            None => b.unresolved.push(UnresolvedEdge {
                zero: Some(i),
                end: None,
                branch: Some(k),
                terminal: tr.terminal,
                last: tr.last().point,
            }),
        }
    }

    if variant == Variant::Open {
        open_variant(&mut b);
    }

    let mut graph = SkeletonGraph {
        variant,
        vertices: b.vertices,
        edges: b.edges,
        unresolved: b.unresolved,
        coincidences: b.coincidences,
        beta0: None,
        beta1: None,
    };
    if let Ok((b0, b1)) = betti(&graph) {
        graph.beta0 = Some(b0);
        graph.beta1 = Some(b1);
    }
    graph
}

fn open_variant(b: &mut Builder<'_>) {
    let model = b.model;
    let tol = b.tol;
    // removable ends that are not zeros
    let regular: Vec<_> = model
        .ends()
        .iter()
        .filter(|e| e.removable() && !b.zeros.iter().any(|z| z.end == Some(e.index)))
        .copied()
        .collect();
    let mut split_vertex = Vec::new();
    for e in &regular {
        let value = model.evaluate(e.point).map(|s| s.value).ok();
        split_vertex.push(b.vertices.len());
        b.end_vertex[e.index] = Some(b.vertices.len());
        b.vertices.push(Vertex {
            kind: VertexKind::RemovableEnd,
            point: Some(e.point),
            value,
            zero: None,
            end: Some(e.index),
            m: None,
            removed: false,
        });
    }

    // split separatrices passing through a regular removable end
    let mut queue: Vec<Edge> = std::mem::take(&mut b.edges);
    let mut done = Vec::new();
    while let Some(edge) = queue.pop() {
        let hit = regular.iter().enumerate().find_map(|(r, e)| {
            if edge.source == split_vertex[r] || edge.sink == split_vertex[r] {
                return None;
            }
            edge.samples.windows(2).enumerate().find_map(|(i, w)| {
                let d = segment_distance(model, e.point, w[0].point, w[1].point);
                (d < tol.delta_match).then_some((r, i, d))
            })
        });
        let Some((r, i, d)) = hit else {
            done.push(edge);
            continue;
        };
        let end = regular[r];
        if let Some(zero) = b.vertices[edge.source].zero {
            b.coincidences.push(Coincidence {
                end: end.index,
                zero,
                branch: edge.branch,
                distance: d,
            });
        }
        let value = b.vertices[split_vertex[r]].value.unwrap_or(edge.samples[i].value);
        let cut = TrajectorySample {
            t: edge.samples[i].t,
            point: end.point,
            value,
        };
        let mut head: Vec<TrajectorySample> = edge.samples[..=i].to_vec();
        head.push(cut);
        let mut tail = vec![cut];
        tail.extend_from_slice(&edge.samples[i + 1..]);
        done.push(Edge {
            source: edge.source,
            sink: split_vertex[r],
            g_range: [edge.g_range[0], value],
            monotone: edge.monotone,
            terminal: edge.terminal,
            samples: head,
            branch: edge.branch,
        });
        queue.push(Edge {
            source: split_vertex[r],
            sink: edge.sink,
            g_range: [value, edge.g_range[1]],
            monotone: edge.monotone,
            terminal: edge.terminal,
            samples: tail,
            branch: None,
        });
    }
    done.sort_by_key(|e| (e.source, e.sink, e.branch));
    b.edges = done;

    // orbits flowing into each regular removable end
    let stops = FlowStops {
        zeros: b.zeros,
        ..FlowStops::default()
    };
    for (r, e) in regular.iter().enumerate() {
        let source = split_vertex[r];
        let tr = integrate_flow(model, e.point, Direction::Backward, &stops, tol);
        let value = b.vertices[source].value.unwrap_or(f64::NAN);
        let Some(edge) = b.edge_from(source, value, &tr, None) else {
            b.unresolved.push(UnresolvedEdge {
                zero: None,
                end: Some(e.index),
                branch: None,
                terminal: tr.terminal,
                last: tr.last().point,
            });
            continue;
        };
        let duplicate = b.edges.iter().any(|o| {
            o.source == edge.source && o.sink == edge.sink && polyline_gap(model, &edge.samples, &o.samples) < DUPLICATE_GAP
        });
        if !duplicate {
            b.edges.push(edge);
        }
    }

    // delete ends and removable zeros, one private leaf per incidence
    let deleted: Vec<bool> = b
        .vertices
        .iter()
        .map(|v| matches!(v.kind, VertexKind::EndMinimum | VertexKind::RemovableEnd))
        .collect();
    let mut remap = vec![usize::MAX; b.vertices.len()];
    let mut vertices = Vec::new();
    for (i, v) in b.vertices.iter().enumerate() {
        if !deleted[i] {
            remap[i] = vertices.len();
            vertices.push(v.clone());
        }
    }
    for edge in &mut b.edges {
        for slot in [&mut edge.source, &mut edge.sink] {
            if deleted[*slot] {
                let mut leaf = b.vertices[*slot].clone();
                leaf.removed = true;
                *slot = vertices.len();
                vertices.push(leaf);
            } else {
                *slot = remap[*slot];
            }
        }
    }
    b.vertices = vertices;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vertex() -> Vertex {
        Vertex {
            kind: VertexKind::CriticalPoint,
            point: None,
            value: None,
            zero: None,
            end: None,
            m: None,
            removed: false,
        }
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> SkeletonGraph {
        SkeletonGraph {
            variant: Variant::Compactified,
            vertices: vec![vertex(); n],
            edges: edges
                .iter()
                .map(|&(source, sink)| Edge {
                    source,
                    sink,
                    samples: Vec::new(),
                    g_range: [0.0, -1.0],
                    terminal: Terminal::Pole,
                    monotone: true,
                    branch: None,
                })
                .collect(),
            unresolved: Vec::new(),
            coincidences: Vec::new(),
            beta0: None,
            beta1: None,
        }
    }

    #[test]
    fn betti_small_graphs() {
        assert_eq!(betti(&graph(0, &[])).unwrap(), (0, 0));
        assert_eq!(betti(&graph(1, &[])).unwrap(), (1, 0));
        // two circles through a shared vertex pair plus loops: torus skeleton shape
        assert_eq!(betti(&graph(3, &[(0, 1), (0, 1), (1, 2), (1, 2)])).unwrap(), (1, 2));
        assert_eq!(betti(&graph(4, &[(0, 1), (2, 3)])).unwrap(), (2, 0));
    }

    #[test]
    fn incomplete_graph_rejected() {
        let mut g = graph(1, &[]);
        g.unresolved.push(UnresolvedEdge {
            zero: Some(0),
            end: None,
            branch: Some(1),
            terminal: Terminal::MaxSteps,
            last: ChartPoint::primary(0.0, 0.0),
        });
        assert_eq!(betti(&g), Err(SkeletonError::IncompleteGraph(1)));
    }
}
