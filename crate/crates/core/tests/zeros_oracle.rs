use std::f64::consts::PI;

use green_skeleton::dynamics::*;
use green_skeleton::green::*;
use green_skeleton::skeleton::*;
use green_skeleton::surfaces::*;
use num_complex::Complex64;
use proptest::prelude::*;

type C = Complex64;

fn mul(a: &[C], b: &[C]) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients (lowest first) of `-prod(z - p_i) + sum c_i (z - y) prod_{j != i} (z - p_j)`,
/// the numerator of `-1/(z - y) + sum c_i / (z - p_i)`.
fn numerator(pole: C, punctures: &[(C, f64)]) -> Vec<C> {
    let one = C::new(1.0, 0.0);
    let lin = |r: C| vec![-r, one];
    let mut total = punctures.iter().fold(vec![one], |acc, &(p, _)| mul(&acc, &lin(p)));
    for t in total.iter_mut() {
        *t = -*t;
    }
    for (i, &(_, c)) in punctures.iter().enumerate() {
        let mut term = lin(pole);
        for (j, &(p, _)) in punctures.iter().enumerate() {
            if j != i {
                term = mul(&term, &lin(p));
            }
        }
        for (k, t) in term.iter().enumerate() {
            total[k] += t * c;
        }
    }
    while total.len() > 1 && total.last().unwrap().norm() < 1e-9 {
        total.pop();
    }
    total
}

/// Durand-Kerner roots.
fn roots(coeffs: &[C]) -> Vec<C> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<C> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |z: C| monic.iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * z + c);
    let mut r: Vec<C> = (0..n).map(|k| C::new(0.4, 0.9).powu(k as u32)).collect();
    for _ in 0..500 {
        for i in 0..n {
            let denom = (0..n).filter(|&j| j != i).fold(C::new(1.0, 0.0), |acc, j| acc * (r[i] - r[j]));
            let step = eval(r[i]) / denom;
            r[i] -= step;
        }
    }
    r
}

fn angle_points(angles: &[f64], radii: &[f64]) -> Vec<C> {
    angles.iter().zip(radii).map(|(&t, &r)| C::from_polar(r, t)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Finite zeros of a sphere potential with removable infinity are the
    /// roots of the partial-fraction numerator.
    #[test]
    fn sphere_zeros_match_numerator_roots(
        n in 2usize..5,
        angles in proptest::collection::vec(0.0f64..2.0 * PI, 4),
        radii in proptest::collection::vec(0.8f64..2.0, 4),
        raw in proptest::collection::vec(0.2f64..1.0, 4),
    ) {
        let pts = angle_points(&angles[..n], &radii[..n]);
        for i in 0..n {
            for j in 0..i {
                prop_assume!((pts[i] - pts[j]).norm() > 0.4);
            }
        }
        let s: f64 = raw[..n].iter().sum();
        let mut weights: Vec<f64> = raw[..n].iter().map(|w| w / s).collect();
        let head: f64 = weights[..n - 1].iter().sum();
        weights[n - 1] = 1.0 - head;
        let pole = C::new(0.0, 0.0);
        let punct: Vec<(C, f64)> = pts.iter().copied().zip(weights.iter().copied()).collect();
        let num = numerator(pole, &punct);
        let oracle = if num.len() > 1 { roots(&num) } else { Vec::new() };
        prop_assume!(oracle.iter().all(|r| r.norm() < 6.0));
        for i in 0..oracle.len() {
            prop_assume!(punct.iter().all(|(p, _)| (oracle[i] - p).norm() > 0.05) && oracle[i].norm() > 0.05);
            for j in 0..i {
                prop_assume!((oracle[i] - oracle[j]).norm() > 0.05);
            }
        }

        let finite: Vec<(f64, f64, f64)> = punct.iter().map(|(p, c)| (p.re, p.im, *c)).collect();
        let model = make_model(&SurfaceSpec::punctured_sphere([0.0, 0.0], &finite, Some(0.0))).unwrap();
        let zeros = locate_all_zeros(&model, 32, &Tolerances::default()).unwrap();
        let primary: Vec<&CriticalPoint> = zeros.iter().filter(|z| !z.at_removable_end).collect();
        prop_assert_eq!(primary.len(), oracle.len());
        for r in &oracle {
            let hit = primary.iter().any(|z| {
                let p = model.transfer(z.point, ChartId::Primary).unwrap_or(z.point.z);
                (p - r).norm() < 1e-6
            });
            prop_assert!(hit, "root {} not found", r);
        }
        prop_assert!(hopf_budget(&zeros, model.topology()).holds());
    }

    /// Moving the torus pole off the lattice point keeps the picture: two
    /// Morse saddles and a skeleton of rank two.
    #[test]
    fn torus_pole_perturbation(dx in -0.3f64..0.3, dy in -0.3f64..0.3) {
        let tol = Tolerances::default();
        let model = make_model(&SurfaceSpec::punctured_torus([dx, dy], &[(0.0, PI, 1.0)])).unwrap();
        let zeros = locate_all_zeros(&model, 32, &tol).unwrap();
        prop_assert_eq!(zeros.len(), 2);
        prop_assert!(zeros.iter().all(CriticalPoint::is_morse));
        let g = build_skeleton(&model, &zeros, Variant::Compactified, &tol);
        prop_assert_eq!(g.beta0, Some(1));
        prop_assert_eq!(g.beta1, Some(2));
        let report = verify_report(&model, model.topology(), &zeros, &g, None);
        prop_assert!(report.all_pass);
    }
}

#[test]
fn oracle_numerator_of_two_thirds_sphere() {
    let num = numerator(C::new(0.0, 0.0), &[(C::new(1.0, 0.0), 2.0 / 3.0), (C::new(-1.0, 0.0), 1.0 / 3.0)]);
    // -(z^2 - 1) + (2/3) z (z + 1) + (1/3) z (z - 1) = z/3 + 1
    assert_eq!(num.len(), 2);
    assert!((num[0] - 1.0).norm() < 1e-12 && (num[1] - 1.0 / 3.0).norm() < 1e-12);
}

#[test]
fn classification_stable_over_radii() {
    let model = make_model(&SurfaceSpec::cylinder_g1([0.0, 0.0])).unwrap();
    let zeros = locate_all_zeros(&model, 32, &Tolerances::default()).unwrap();
    for r_cls in [1e-4, 1e-3, 1e-2] {
        let tol = Tolerances {
            r_cls,
            ..Tolerances::default()
        };
        let c = classify_zero(&model, zeros[0].point, &tol).unwrap();
        assert_eq!(c.m, 2);
        // Taylor coefficient of the saddle: G - G(z) ~ (1/16 pi) Re[u^2]
        assert!((c.amplitude - 1.0 / (16.0 * PI)).abs() < 1e-3 / (16.0 * PI) + r_cls * r_cls);
    }
}

#[test]
fn regular_point_is_degenerate_circle() {
    let model = make_model(&SurfaceSpec::plane([0.0, 0.0])).unwrap();
    let r = classify_zero(&model, ChartPoint::primary(1.0, 1.0), &Tolerances::default());
    assert!(matches!(r, Err(DynamicsError::DegenerateCircle(_))));
}
