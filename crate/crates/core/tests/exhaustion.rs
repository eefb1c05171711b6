use std::f64::consts::PI;

use green_skeleton::exhaustion::*;
use green_skeleton::green::make_model;
use green_skeleton::surfaces::SurfaceSpec;

/// Max error against `-(1/2pi) log|z|` over vertices with `|z| >= 0.25`.
fn disk_error(n: usize) -> f64 {
    let mesh = build_mesh(MeshFamily::Disk, n).unwrap();
    let all = vec![true; mesh.vertices.len()];
    let g = dirichlet_green_tol(&mesh, &all, 0, 1e-12).unwrap();
    mesh.vertices
        .iter()
        .zip(&g)
        .filter(|(p, _)| p[0].hypot(p[1]) >= 0.25)
        .map(|(p, v)| (v + p[0].hypot(p[1]).ln() / (2.0 * PI)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn disk_refinement_order() {
    let e: Vec<f64> = [32, 64, 128].iter().map(|&n| disk_error(n)).collect();
    let orders: Vec<f64> = e.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    println!("errors {e:?} orders {orders:?}");
    assert!(orders.iter().all(|&p| p >= 1.8), "{orders:?}");
}

pub struct TorusRun {
    pub mesh: Mesh,
    pub seq: ExhaustionSequence,
    pub relative_error: f64,
}

/// Shrinking puncture exhaustion of the torus with pole (0,0), puncture (0,pi).
pub fn torus_run(n: usize) -> TorusRun {
    let mesh = build_mesh(MeshFamily::Torus, n).unwrap();
    let puncture = [0.0, PI];
    let domains = puncture_exhaustion(&mesh, puncture, &[1.6, 0.8, 0.4, 0.2, 0.0]);
    let pole = mesh.nearest([0.0, 0.0]);
    let compact: Vec<bool> = (0..mesh.vertices.len())
        .map(|v| mesh.distance_to(v, puncture) >= 2.0 && mesh.distance_to(v, [0.0, 0.0]) >= 0.5)
        .collect();
    let reference = mesh.nearest([PI, 0.0]);
    let seq = li_tam_sequence(&mesh, &domains, pole, reference, &compact, 1e-2).unwrap();

    let model = make_model(&SurfaceSpec::punctured_torus([0.0, 0.0], &[(0.0, PI, 1.0)])).unwrap();
    let limit = seq.limit();
    let ks: Vec<usize> = (0..mesh.vertices.len()).filter(|&v| compact[v]).collect();
    let exact: Vec<f64> = ks
        .iter()
        .map(|&v| model.evaluate_primary(mesh.vertices[v][0], mesh.vertices[v][1]).unwrap().value)
        .collect();
    let disc: Vec<f64> = ks.iter().map(|&v| limit[v]).collect();
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let (me, md) = (mean(&exact), mean(&disc));
    let scale = exact.iter().map(|e| (e - me).abs()).fold(0.0, f64::max);
    let err = exact.iter().zip(&disc).map(|(e, d)| ((e - me) - (d - md)).abs()).fold(0.0, f64::max);
    TorusRun {
        mesh,
        seq,
        relative_error: err / scale,
    }
}

#[test]
fn torus_puncture_exhaustion() {
    let run = torus_run(64);
    println!("differences {:?} shifts {:?} rel {}", run.seq.differences, run.seq.shifts, run.relative_error);
    assert!(run.seq.differences_decreasing());
    assert!(run.seq.shifts.iter().all(|&a| a >= 0.0));
    assert!(run.relative_error < 0.05);
    let last = run.seq.solutions.len() - 1;
    let rep = discrete_monotonicity(&run.mesh, &run.seq.limit(), &run.seq.domains[last], run.seq.pole_vertex, &[0.5, 1.0], 1e-6);
    assert!(rep.holds, "{rep:?}");
}

#[test]
fn disk_exhaustion_reaches_dirichlet_green() {
    let mesh = build_mesh(MeshFamily::Disk, 32).unwrap();
    let domains = disk_exhaustion(&mesh, &[0.4, 0.6, 0.8, 1.0]);
    let compact: Vec<bool> = mesh.vertices.iter().map(|p| p[0].hypot(p[1]) < 0.3).collect();
    let reference = mesh.nearest([0.2, 0.0]);
    let seq = li_tam_sequence(&mesh, &domains, 0, reference, &compact, 1e-2).unwrap();
    // shifts follow log(r_j / r_1) / 2pi
    for (a, r) in seq.shifts.iter().zip([0.4_f64, 0.6, 0.8, 1.0]) {
        assert!((a - (r / 0.4).ln() / (2.0 * PI)).abs() < 5e-3, "{a} {r}");
    }
    // final term is the direct solve on the whole disk, offset by its shift
    let all = vec![true; mesh.vertices.len()];
    let direct = dirichlet_green(&mesh, &all, 0).unwrap();
    let last = seq.solutions.len() - 1;
    let normalized = seq.normalized(last);
    for (u, d) in normalized.iter().zip(&direct) {
        assert!((u + seq.shifts[last] - d).abs() < 1e-8);
    }
    assert!(seq.converged, "{:?}", seq.differences);
    let table = seq.convergence_table();
    assert_eq!(table.rows.len(), 4);
    assert!(table.rows[0].difference.is_none());
}

#[test]
fn anchor_changes_limit_by_constant() {
    let mesh = build_mesh(MeshFamily::Torus, 32).unwrap();
    let puncture = [0.0, PI];
    let domains = puncture_exhaustion(&mesh, puncture, &[1.6, 0.8, 0.0]);
    let compact: Vec<bool> = (0..mesh.vertices.len()).map(|v| mesh.distance_to(v, puncture) >= 2.0).collect();
    let pole = mesh.nearest([0.0, 0.0]);
    let r1 = mesh.nearest([PI, 0.0]);
    let r2 = mesh.nearest([PI, PI / 2.0]);
    let a = li_tam_sequence(&mesh, &domains, pole, r1, &compact, 1e-2).unwrap().limit();
    let b = li_tam_sequence(&mesh, &domains, pole, r2, &compact, 1e-2).unwrap().limit();
    let d0 = a[0] - b[0];
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y - d0).abs() < 1e-8));
}
