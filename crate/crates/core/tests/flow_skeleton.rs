use std::collections::VecDeque;
use std::f64::consts::PI;

use green_skeleton::dynamics::*;
use green_skeleton::green::*;
use green_skeleton::skeleton::*;
use green_skeleton::surfaces::*;
use proptest::prelude::*;

fn bare_vertex() -> Vertex {
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

fn bare_edge(source: usize, sink: usize) -> Edge {
    Edge {
        source,
        sink,
        samples: Vec::new(),
        g_range: [1.0, 0.0],
        terminal: Terminal::HyperbolicBoundary,
        monotone: true,
        branch: None,
    }
}

fn components_bfs(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    count
}

fn torus_setup() -> (GreenModel, Vec<CriticalPoint>, SkeletonGraph, Tolerances) {
    let tol = Tolerances::default();
    let model = make_model(&SurfaceSpec::punctured_torus([0.0, 0.0], &[(0.0, PI, 1.0)])).unwrap();
    let zeros = locate_all_zeros(&model, 32, &tol).unwrap();
    let graph = build_skeleton(&model, &zeros, Variant::Compactified, &tol);
    (model, zeros, graph, tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn betti_matches_bfs_oracle(
        n in 1usize..12,
        raw in proptest::collection::vec((0usize..12, 0usize..12), 0..20),
    ) {
        let edges: Vec<(usize, usize)> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
        let graph = SkeletonGraph {
            variant: Variant::Compactified,
            vertices: (0..n).map(|_| bare_vertex()).collect(),
            edges: edges.iter().map(|&(a, b)| bare_edge(a, b)).collect(),
            unresolved: Vec::new(),
            coincidences: Vec::new(),
            beta0: None,
            beta1: None,
        };
        let (b0, b1) = betti(&graph).unwrap();
        let c = components_bfs(n, &edges);
        prop_assert_eq!(b0, c);
        prop_assert_eq!(b1, edges.len() as i64 - n as i64 + c as i64);
        prop_assert!(b1 >= 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn flow_is_monotone(x in -2.5f64..2.5, y in -2.5f64..2.5, which in 0usize..4, forward in any::<bool>()) {
        let spec = match which {
            0 => SurfaceSpec::plane([0.0, 0.0]),
            1 => SurfaceSpec::cylinder_g1([0.0, 0.0]),
            2 => SurfaceSpec::punctured_torus([0.0, 0.0], &[(0.0, PI, 1.0)]),
            _ => SurfaceSpec::hyperbolic_disk([0.2, 0.0]),
        };
        let model = make_model(&spec).unwrap();
        let p = if which == 3 { ChartPoint::primary(x / 3.0, y / 3.0) } else { ChartPoint::primary(x, y) };
        prop_assume!(model.evaluate(p).is_ok());
        let dir = if forward { Direction::Forward } else { Direction::Backward };
        let traj = integrate_flow(&model, p, dir, &FlowStops::default(), &Tolerances::default());
        prop_assert!(traj.is_monotone());
        if forward {
            prop_assert!(!matches!(traj.terminal, Terminal::ParabolicEnd(_) | Terminal::HyperbolicBoundary));
        } else {
            prop_assert!(traj.terminal != Terminal::Pole);
        }
    }
}

#[test]
fn untouched_torus_skeleton_passes() {
    let (model, zeros, graph, _) = torus_setup();
    let report = verify_report(&model, model.topology(), &zeros, &graph, None);
    assert!(report.all_pass);
}

#[test]
fn dropped_edge_fails_homology() {
    let (model, zeros, mut graph, _) = torus_setup();
    graph.edges.pop();
    let (b0, b1) = betti(&graph).unwrap();
    graph.beta0 = Some(b0);
    graph.beta1 = Some(b1);
    let report = verify_report(&model, model.topology(), &zeros, &graph, None);
    assert!(!report.all_pass);
    assert!(!report.claim("skeleton_homology").unwrap().pass);
    assert!(!report.claim("gradient_like_skeleton").unwrap().pass);
}

#[test]
fn reversed_edge_fails_monotonicity() {
    let (model, zeros, mut graph, _) = torus_setup();
    let e = &mut graph.edges[0];
    e.g_range = [e.g_range[1], e.g_range[0]];
    let report = verify_report(&model, model.topology(), &zeros, &graph, None);
    assert!(!report.claim("gradient_like_skeleton").unwrap().pass);
    assert!(report.claim("skeleton_homology").unwrap().pass);
}

#[test]
fn unresolved_edge_blocks_betti() {
    let (_, _, mut graph, _) = torus_setup();
    graph.unresolved.push(UnresolvedEdge {
        zero: Some(0),
        end: None,
        branch: Some(0),
        terminal: Terminal::MaxSteps,
        last: ChartPoint::primary(0.0, 0.0),
    });
    assert!(matches!(betti(&graph), Err(SkeletonError::IncompleteGraph(1))));
}
