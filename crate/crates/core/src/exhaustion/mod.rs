//! Dirichlet Green's functions on nested mesh domains and their shifted limit.

mod mesh;
mod solver;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::green::{GreenError, GreenModel};

pub use mesh::{build_mesh, Mesh, MeshFamily};
pub use solver::{pcg, CgOutcome, Csr};

/// Relative residual target of the linear solves.
pub const SOLVER_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExhaustionError {
    #[error("mesh resolution {0} is below 16")]
    Resolution(usize),
    #[error("triangle {0} is degenerate or inverted")]
    DegenerateTriangle(usize),
    #[error("conjugate gradients stalled at relative residual {residual:e} after {iterations} iterations")]
    SolverStall { iterations: usize, residual: f64 },
    #[error("domain has no Dirichlet boundary")]
    EmptyBoundary,
    #[error("pole vertex {0} is not interior to the domain")]
    PoleOutsideDomain(usize),
    #[error("exhaustion is not nested: {0}")]
    NotNested(String),
}

/// Unknowns of a domain: masked vertices off the mesh boundary.
fn unknowns(mesh: &Mesh, mask: &[bool]) -> Vec<bool> {
    mask.iter().zip(&mesh.boundary).map(|(&m, &b)| m && !b).collect()
}

/// Solves `L G = e_pole` on `domain_mask` with `G = 0` elsewhere.
pub fn dirichlet_green(mesh: &Mesh, domain_mask: &[bool], pole_vertex: usize) -> Result<Vec<f64>, ExhaustionError> {
    dirichlet_green_tol(mesh, domain_mask, pole_vertex, SOLVER_TOL)
}

pub fn dirichlet_green_tol(
    mesh: &Mesh,
    domain_mask: &[bool],
    pole_vertex: usize,
    tol: f64,
) -> Result<Vec<f64>, ExhaustionError> {
    let free = unknowns(mesh, domain_mask);
    if !free[pole_vertex] {
        return Err(ExhaustionError::PoleOutsideDomain(pole_vertex));
    }
    if free.iter().all(|&f| f) {
        return Err(ExhaustionError::EmptyBoundary);
    }
    let mut index = vec![usize::MAX; free.len()];
    let mut order = Vec::new();
    for (v, _) in free.iter().enumerate().filter(|(_, &f)| f) {
        index[v] = order.len();
        order.push(v);
    }
    let rows = order
        .iter()
        .map(|&v| {
            let row = &mesh.neighbors[v];
            let diag: f64 = row.iter().map(|&(_, w)| w).sum();
            std::iter::once((index[v], diag))
                .chain(row.iter().filter(|&&(j, _)| free[j]).map(|&(j, w)| (index[j], -w)))
                .collect()
        })
        .collect();
    let a = Csr::from_rows(rows);
    let mut b = vec![0.0; order.len()];
    b[index[pole_vertex]] = 1.0;
    let max_iter = 20 * order.len() + 100;
    let out = pcg(&a, &b, tol, max_iter).map_err(|o| ExhaustionError::SolverStall {
        iterations: o.iterations,
        residual: o.relative_residual,
    })?;
    let mut g = vec![0.0; free.len()];
    for (k, &v) in order.iter().enumerate() {
        g[v] = out.x[k];
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionSequence {
    pub domains: Vec<Vec<bool>>,
    pub solutions: Vec<Vec<f64>>,
    pub shifts: Vec<f64>,
    pub pole_vertex: usize,
    pub ref_vertex: usize,
    pub compact: Vec<bool>,
    /// `sup_K |(G_{j+1} - a_{j+1}) - (G_j - a_j)|`, one entry per consecutive pair.
    pub differences: Vec<f64>,
    pub tol_conv: f64,
    pub converged: bool,
}

impl ExhaustionSequence {
    /// Shifted solution `G_j - a_j`.
    pub fn normalized(&self, j: usize) -> Vec<f64> {
        self.solutions[j].iter().map(|g| g - self.shifts[j]).collect()
    }

    /// Last normalized solution.
    pub fn limit(&self) -> Vec<f64> {
        self.normalized(self.solutions.len() - 1)
    }

    /// Whether the difference metric strictly decreases from its second entry on.
    pub fn differences_decreasing(&self) -> bool {
        self.differences.windows(2).all(|w| w[1] < w[0])
    }

    pub fn convergence_table(&self) -> ConvergenceTable {
        ConvergenceTable {
            rows: (0..self.solutions.len())
                .map(|j| ConvergenceRow {
                    j: j + 1,
                    domain_size: self.domains[j].iter().filter(|&&m| m).count(),
                    shift: self.shifts[j],
                    ref_value: self.solutions[j][self.ref_vertex],
                    difference: self.differences.get(j.wrapping_sub(1)).copied(),
                })
                .collect(),
            tol_conv: self.tol_conv,
            converged: self.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub j: usize,
    pub domain_size: usize,
    pub shift: f64,
    pub ref_value: f64,
    /// Difference to the previous normalized solution; absent for `j = 1`.
    pub difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub tol_conv: f64,
    pub converged: bool,
}

fn subset(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| !x || y)
}

/// Solves on every domain and normalizes at `ref_vertex`.
pub fn li_tam_sequence(
    mesh: &Mesh,
    domains: &[Vec<bool>],
    pole_vertex: usize,
    ref_vertex: usize,
    compact: &[bool],
    tol_conv: f64,
) -> Result<ExhaustionSequence, ExhaustionError> {
    let nv = mesh.vertices.len();
    if domains.is_empty() || domains.iter().any(|d| d.len() != nv) || compact.len() != nv {
        return Err(ExhaustionError::NotNested("mask length mismatch or no domains".into()));
    }
    if let Some(j) = domains.windows(2).position(|w| !subset(&w[0], &w[1])) {
        return Err(ExhaustionError::NotNested(format!("domain {} is not contained in domain {}", j + 1, j + 2)));
    }
    let first = unknowns(mesh, &domains[0]);
    if !first[pole_vertex] {
        return Err(ExhaustionError::NotNested("pole is not in the first domain".into()));
    }
    if !subset(compact, &first) {
        return Err(ExhaustionError::NotNested("reference set is not inside the first domain".into()));
    }
    if !compact[ref_vertex] || ref_vertex == pole_vertex {
        return Err(ExhaustionError::NotNested("reference vertex must lie in the reference set away from the pole".into()));
    }
    let solutions = domains
        .par_iter()
        .map(|d| dirichlet_green(mesh, d, pole_vertex))
        .collect::<Result<Vec<_>, _>>()?;
    let base = solutions[0][ref_vertex];
    let shifts: Vec<f64> = solutions.iter().map(|g| (g[ref_vertex] - base).max(0.0)).collect();
    let differences: Vec<f64> = (1..solutions.len())
        .map(|j| {
            (0..nv)
                .filter(|&v| compact[v])
                .map(|v| ((solutions[j][v] - shifts[j]) - (solutions[j - 1][v] - shifts[j - 1])).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let converged = differences.last().is_some_and(|&d| d < tol_conv);
    Ok(ExhaustionSequence {
        domains: domains.to_vec(),
        solutions,
        shifts,
        pole_vertex,
        ref_vertex,
        compact: compact.to_vec(),
        differences,
        tol_conv,
        converged,
    })
}

/// Domains of points farther than each radius from `puncture`; a radius
/// of zero removes only the nearest vertex.
pub fn puncture_exhaustion(mesh: &Mesh, puncture: [f64; 2], radii: &[f64]) -> Vec<Vec<bool>> {
    let nearest = mesh.nearest(puncture);
    radii
        .iter()
        .map(|&r| {
            (0..mesh.vertices.len())
                .map(|v| v != nearest && mesh.distance_to(v, puncture) > r)
                .collect()
        })
        .collect()
}

/// Disks `|x| < r` about the origin; `r >= 1` yields the whole mesh.
pub fn disk_exhaustion(mesh: &Mesh, radii: &[f64]) -> Vec<Vec<bool>> {
    radii
        .iter()
        .map(|&r| mesh.vertices.iter().map(|p| p[0].hypot(p[1]) < r - 1e-9 || r >= 1.0).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingCheck {
    pub radius: f64,
    pub ring_vertices: usize,
    /// `None` when the band or the exterior holds no domain vertex.
    pub ring_max: Option<f64>,
    pub exterior_sup: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMonotonicityReport {
    pub rings: Vec<RingCheck>,
    pub tolerance: f64,
    pub holds: bool,
}

/// Compares the sup of `values` beyond each ring with the max on the ring.
/// A ring is the band of vertices within half an edge length of the circle
/// of the given radius about the pole; only vertices of `domain` count.
pub fn discrete_monotonicity(
    mesh: &Mesh,
    values: &[f64],
    domain: &[bool],
    pole_vertex: usize,
    radii: &[f64],
    tol: f64,
) -> DiscreteMonotonicityReport {
    let half = 0.5 * mesh.max_edge_length();
    let center = mesh.vertices[pole_vertex];
    let rings: Vec<RingCheck> = radii
        .iter()
        .map(|&r| {
            let (mut ring_max, mut exterior_sup, mut count) = (None::<f64>, None::<f64>, 0);
            for v in (0..mesh.vertices.len()).filter(|&v| domain[v]) {
                let d = mesh.distance_to(v, center);
                if (d - r).abs() <= half {
                    ring_max = Some(ring_max.map_or(values[v], |m| m.max(values[v])));
                    count += 1;
                } else if d > r + half {
                    exterior_sup = Some(exterior_sup.map_or(values[v], |m| m.max(values[v])));
                }
            }
            let holds = match (ring_max, exterior_sup) {
                (Some(m), Some(e)) => e <= m + tol,
                (Some(_), None) => true,
                _ => false,
            };
            RingCheck {
                radius: r,
                ring_vertices: count,
                ring_max,
                exterior_sup,
                holds,
            }
        })
        .collect();
    let holds = rings.iter().all(|r| r.holds);
    DiscreteMonotonicityReport {
        rings,
        tolerance: tol,
        holds,
    }
}

/// Relative sup difference between `values` and an analytic model on the
/// vertices of `compact`, after removing the mean of each over that set.
/// The scale is the sup of the centred analytic values.
pub fn model_relative_error(mesh: &Mesh, values: &[f64], compact: &[bool], model: &GreenModel) -> Result<f64, GreenError> {
    let ks: Vec<usize> = (0..mesh.vertices.len()).filter(|&v| compact[v]).collect();
    let exact = ks
        .iter()
        .map(|&v| model.evaluate_primary(mesh.vertices[v][0], mesh.vertices[v][1]).map(|s| s.value))
        .collect::<Result<Vec<f64>, _>>()?;
    let mean = |x: &mut dyn Iterator<Item = f64>| {
        let (s, n) = x.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        s / n.max(1) as f64
    };
    let me = mean(&mut exact.iter().copied());
    let md = mean(&mut ks.iter().map(|&v| values[v]));
    let scale = exact.iter().map(|e| (e - me).abs()).fold(0.0, f64::max);
    let err = ks
        .iter()
        .zip(&exact)
        .map(|(&v, e)| ((e - me) - (values[v] - md)).abs())
        .fold(0.0, f64::max);
    Ok(err / scale)
}

/// `vertex,x1,x2,value` rows.
pub fn solution_csv(mesh: &Mesh, values: &[f64]) -> String {
    let mut s = String::from("vertex,x1,x2,value\n");
    for (v, (p, g)) in mesh.vertices.iter().zip(values).enumerate() {
        s.push_str(&format!("{v},{},{},{g}\n", p[0], p[1]));
    }
    s
}
