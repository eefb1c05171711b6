//! Structured triangulations of the flat torus and the unit disk.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ExhaustionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshFamily {
    Torus,
    Disk,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub family: MeshFamily,
    pub resolution: usize,
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Periods of the torus; `None` for the disk.
    pub periods: Option<[f64; 2]>,
    /// Vertices on the outer boundary of the mesh.
    pub boundary: Vec<bool>,
    /// Symmetric cotan weights, one list per vertex.
    pub neighbors: Vec<Vec<(usize, f64)>>,
    /// Lumped (barycentric) vertex areas.
    pub areas: Vec<f64>,
}

const MIN_ANGLE: f64 = PI / 180.0;

impl Mesh {
    /// Difference `b - a`, wrapped to the nearest periodic image.
    pub fn delta(&self, a: usize, b: usize) -> [f64; 2] {
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let mut d = [pb[0] - pa[0], pb[1] - pa[1]];
        if let Some(per) = self.periods {
            for k in 0..2 {
                d[k] = crate::surfaces::wrap_centered(d[k], 0.0, per[k]);
            }
        }
        d
    }

    /// Flat distance from vertex `v` to the point `x`.
    pub fn distance_to(&self, v: usize, x: [f64; 2]) -> f64 {
        let p = self.vertices[v];
        let mut d = [x[0] - p[0], x[1] - p[1]];
        if let Some(per) = self.periods {
            for k in 0..2 {
                d[k] = crate::surfaces::wrap_centered(d[k], 0.0, per[k]);
            }
        }
        d[0].hypot(d[1])
    }

    pub fn max_edge_length(&self) -> f64 {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, _)| (i, j)))
            .map(|(i, j)| {
                let d = self.delta(i, j);
                d[0].hypot(d[1])
            })
            .fold(0.0, f64::max)
    }

    /// Vertex nearest to `x`.
    pub fn nearest(&self, x: [f64; 2]) -> usize {
        (0..self.vertices.len())
            .min_by(|&a, &b| self.distance_to(a, x).total_cmp(&self.distance_to(b, x)))
            .expect("mesh has vertices")
    }

    /// `L x` for the cotan Laplacian `L = D - W`.
    pub fn apply_laplacian(&self, x: &[f64]) -> Vec<f64> {
        self.neighbors
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().map(|&(j, w)| w * (x[i] - x[j])).sum())
            .collect()
    }

    fn assemble(
        family: MeshFamily,
        resolution: usize,
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        periods: Option<[f64; 2]>,
        boundary: Vec<bool>,
    ) -> Result<Self, ExhaustionError> {
        let n = vertices.len();
        let mut mesh = Mesh {
            family,
            resolution,
            vertices,
            triangles: Vec::new(),
            periods,
            boundary,
            neighbors: vec![Vec::new(); n],
            areas: vec![0.0; n],
        };
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = *tri;
            // local coordinates relative to `a`
            let pb = mesh.delta(a, b);
            let pc = mesh.delta(a, c);
            let pts = [[0.0, 0.0], pb, pc];
            let area2 = pb[0] * pc[1] - pb[1] * pc[0];
            if area2 <= 0.0 {
                return Err(ExhaustionError::DegenerateTriangle(t));
            }
            for k in 0..3 {
                let (o, i, j) = (pts[k], pts[(k + 1) % 3], pts[(k + 2) % 3]);
                let u = [i[0] - o[0], i[1] - o[1]];
                let v = [j[0] - o[0], j[1] - o[1]];
                let cross = u[0] * v[1] - u[1] * v[0];
                let dotp = u[0] * v[0] + u[1] * v[1];
                if cross.atan2(dotp) < MIN_ANGLE {
                    return Err(ExhaustionError::DegenerateTriangle(t));
                }
                let w = 0.5 * dotp / cross;
                let (vi, vj) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                rows[vi].push((vj, w));
                rows[vj].push((vi, w));
                mesh.areas[tri[k]] += area2 / 6.0;
            }
        }
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::new();
            for (j, w) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += w,
                    _ => merged.push((j, w)),
                }
            }
            mesh.neighbors[i] = merged;
        }
        mesh.triangles = triangles;
        Ok(mesh)
    }
}

pub fn build_mesh(family: MeshFamily, resolution: usize) -> Result<Mesh, ExhaustionError> {
    if resolution < 16 {
        return Err(ExhaustionError::Resolution(resolution));
    }
    match family {
        MeshFamily::Torus => torus_mesh(resolution, [2.0 * PI, 2.0 * PI]),
        MeshFamily::Disk => disk_mesh(resolution),
    }
}

/// `n x n` periodic grid, each square split along its rising diagonal.
fn torus_mesh(n: usize, periods: [f64; 2]) -> Result<Mesh, ExhaustionError> {
    let id = |i: usize, j: usize| (j % n) * n + (i % n);
    let vertices = (0..n * n)
        .map(|k| [periods[0] * (k % n) as f64 / n as f64, periods[1] * (k / n) as f64 / n as f64])
        .collect();
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::assemble(MeshFamily::Torus, n, vertices, triangles, Some(periods), vec![false; n * n])
}

/// Concentric rings `k = 1..n` of `6k` vertices at radius `k / n`, stitched
/// ring to ring by merging angles.
fn disk_mesh(n: usize) -> Result<Mesh, ExhaustionError> {
    let mut vertices = vec![[0.0, 0.0]];
    let mut ring_start = vec![0usize];
    for k in 1..=n {
        ring_start.push(vertices.len());
        let r = k as f64 / n as f64;
        for i in 0..6 * k {
            let t = 2.0 * PI * i as f64 / (6 * k) as f64;
            vertices.push([r * t.cos(), r * t.sin()]);
        }
    }
    let ring = |k: usize, i: usize| -> usize {
        if k == 0 {
            0
        } else {
            ring_start[k] + i % (6 * k)
        }
    };
    let mut triangles = Vec::new();
    for b in 0..6 {
        triangles.push([0, ring(1, b), ring(1, b + 1)]);
    }
    for k in 2..=n {
        let inner = k - 1;
        let (mut a, mut b) = (0usize, 0usize);
        while a < 6 * inner || b < 6 * k {
            // compare angular midpoints of the next outer and inner segments
            let advance_outer = a == 6 * inner || (b < 6 * k && (2 * b + 1) * inner <= (2 * a + 1) * k);
            if advance_outer {
                triangles.push([ring(inner, a), ring(k, b), ring(k, b + 1)]);
                b += 1;
            } else {
                triangles.push([ring(inner, a), ring(k, b), ring(inner, a + 1)]);
                a += 1;
            }
        }
    }
    let mut boundary = vec![false; vertices.len()];
    for flag in boundary.iter_mut().skip(ring_start[n]) {
        *flag = true;
    }
    Mesh::assemble(MeshFamily::Disk, n, vertices, triangles, None, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_counts_and_weights() {
        let m = build_mesh(MeshFamily::Torus, 16).unwrap();
        assert_eq!(m.triangles.len(), 2 * 16 * 16);
        for row in &m.neighbors {
            let axis: Vec<f64> = row.iter().map(|&(_, w)| w).filter(|w| w.abs() > 1e-12).collect();
            assert_eq!(axis.len(), 4);
            assert!(axis.iter().all(|w| (w - 1.0).abs() < 1e-12));
            assert!(row.iter().all(|&(_, w)| w >= -1e-12));
        }
        let total: f64 = m.areas.iter().sum();
        assert!((total - 4.0 * PI * PI).abs() < 1e-9);
    }

    #[test]
    fn disk_boundary_is_outer_ring() {
        let m = build_mesh(MeshFamily::Disk, 16).unwrap();
        assert_eq!(m.boundary.iter().filter(|&&b| b).count(), 6 * 16);
        assert_eq!(m.vertices.len(), 1 + 3 * 16 * 17);
        let area: f64 = m.areas.iter().sum();
        // inscribed polygon area approaches pi
        assert!((area - PI).abs() < 0.01);
    }

    #[test]
    fn disk_weights_nonnegative() {
        let m = build_mesh(MeshFamily::Disk, 32).unwrap();
        let worst = m.neighbors.iter().flatten().map(|&(_, w)| w).fold(f64::INFINITY, f64::min);
        assert!(worst > -1e-12, "{worst}");
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let m = build_mesh(MeshFamily::Torus, 16).unwrap();
        let ones = vec![1.0; m.vertices.len()];
        assert!(m.apply_laplacian(&ones).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn low_resolution_rejected() {
        assert!(matches!(build_mesh(MeshFamily::Disk, 8), Err(ExhaustionError::Resolution(8))));
    }
}
