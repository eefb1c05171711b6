//! Declared model surfaces in uniformized form and the topological counts
//! derived from them.
//!
//! A surface is never uniformized here: callers declare the family, the
//! genus, the parabolic ends (as punctures with a flux weight) and the
//! hyperbolic ends. A parabolic end of weight zero is a removable
//! singularity of the Green's function.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the puncture weight sum.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("puncture weights sum to {sum}, expected {expected}")]
    WeightSum { sum: f64, expected: f64 },
    #[error("family mismatch: {0}")]
    FamilyMismatch(String),
    #[error("point out of domain: {0}")]
    OutOfDomain(String),
    #[error("invalid puncture weight {0} (must lie in [0, 1])")]
    InvalidWeight(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Plane,
    Cylinder,
    PuncturedSphere,
    PuncturedTorus,
    HyperbolicDisk,
    Mesh,
}

/// Where a parabolic end sits in the model's charts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndLocation {
    /// A finite point of the primary chart.
    Point { x1: f64, x2: f64 },
    /// The point at infinity of the sphere (origin of the chart `w = 1/z`).
    Infinity,
    /// The cylinder end `z -> -inf`.
    CylinderMinus,
    /// The cylinder end `z -> +inf`.
    CylinderPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Puncture {
    pub location: EndLocation,
    pub weight: f64,
}

impl Puncture {
    pub fn at(x1: f64, x2: f64, weight: f64) -> Self {
        Self {
            location: EndLocation::Point { x1, x2 },
            weight,
        }
    }

    /// A parabolic end is removable exactly when its flux weight vanishes.
    pub fn removable(&self) -> bool {
        self.weight == 0.0
    }
}

/// A boundary circle of a deleted disk (hyperbolic end), in primary-chart
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicEnd {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub family: Family,
    pub genus: u32,
    pub punctures: Vec<Puncture>,
    pub hyperbolic_ends: Vec<HyperbolicEnd>,
    /// Rectangular lattice periods for the torus.
    pub lattice: Option<[f64; 2]>,
    pub pole: [f64; 2],
}

pub const SQUARE_LATTICE: [f64; 2] = [2.0 * PI, 2.0 * PI];

impl SurfaceSpec {
    /// Euclidean plane: one parabolic end at infinity carrying the full flux.
    pub fn plane(pole: [f64; 2]) -> Self {
        Self {
            family: Family::Plane,
            genus: 0,
            punctures: vec![Puncture {
                location: EndLocation::Infinity,
                weight: 1.0,
            }],
            hyperbolic_ends: Vec::new(),
            lattice: None,
            pole,
        }
    }

    /// Flat cylinder `R x S^1` with flux weights at the two ends.
    pub fn cylinder(pole: [f64; 2], weight_minus: f64, weight_plus: f64) -> Self {
        Self {
            family: Family::Cylinder,
            genus: 0,
            punctures: vec![
                Puncture {
                    location: EndLocation::CylinderMinus,
                    weight: weight_minus,
                },
                Puncture {
                    location: EndLocation::CylinderPlus,
                    weight: weight_plus,
                },
            ],
            hyperbolic_ends: Vec::new(),
            lattice: None,
            pole,
        }
    }

    /// The symmetric cylinder Green's function, singular at both ends.
    pub fn cylinder_g1(pole: [f64; 2]) -> Self {
        Self::cylinder(pole, 0.5, 0.5)
    }

    /// The cylinder Green's function with a removable end at `z -> -inf`.
    pub fn cylinder_g2(pole: [f64; 2]) -> Self {
        Self::cylinder(pole, 0.0, 1.0)
    }

    /// Riemann sphere minus finitely many points. `infinity` declares the
    /// point at infinity as a puncture with the given weight.
    pub fn punctured_sphere(pole: [f64; 2], finite: &[(f64, f64, f64)], infinity: Option<f64>) -> Self {
        let mut punctures: Vec<Puncture> = finite.iter().map(|&(x1, x2, c)| Puncture::at(x1, x2, c)).collect();
        if let Some(weight) = infinity {
            punctures.push(Puncture {
                location: EndLocation::Infinity,
                weight,
            });
        }
        Self {
            family: Family::PuncturedSphere,
            genus: 0,
            punctures,
            hyperbolic_ends: Vec::new(),
            lattice: None,
            pole,
        }
    }

    /// Flat torus on the square `2pi x 2pi` lattice minus finitely many points.
    pub fn punctured_torus(pole: [f64; 2], punctures: &[(f64, f64, f64)]) -> Self {
        Self {
            family: Family::PuncturedTorus,
            genus: 1,
            punctures: punctures.iter().map(|&(x1, x2, c)| Puncture::at(x1, x2, c)).collect(),
            hyperbolic_ends: Vec::new(),
            lattice: Some(SQUARE_LATTICE),
            pole,
        }
    }

    /// Unit disk: a sphere with one deleted closed disk.
    pub fn hyperbolic_disk(pole: [f64; 2]) -> Self {
        Self {
            family: Family::HyperbolicDisk,
            genus: 0,
            punctures: Vec::new(),
            hyperbolic_ends: vec![HyperbolicEnd {
                center: [0.0, 0.0],
                radius: 1.0,
            }],
            lattice: None,
            pole,
        }
    }

    pub fn pole_complex(&self) -> Complex64 {
        Complex64::new(self.pole[0], self.pole[1])
    }

    pub fn lattice_periods(&self) -> [f64; 2] {
        self.lattice.unwrap_or(SQUARE_LATTICE)
    }
}

/// Counts derived from a validated spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyInfo {
    pub nu: u32,
    pub lambda1: u32,
    pub lambda1_prime: u32,
    pub lambda2: u32,
    pub lambda_prime: u32,
    pub lambda: u32,
    pub euler_char: i64,
    pub bound_topological: i64,
    pub bound_conformal: i64,
}

impl TopologyInfo {
    fn from_counts(nu: u32, lambda1: u32, lambda1_prime: u32, lambda2: u32) -> Self {
        let lambda_prime = if lambda2 == 0 { lambda1_prime } else { lambda2 };
        let lambda = lambda1 + lambda2;
        let two_nu = 2 * i64::from(nu);
        Self {
            nu,
            lambda1,
            lambda1_prime,
            lambda2,
            lambda_prime,
            lambda,
            euler_char: 2 - two_nu,
            bound_topological: two_nu + i64::from(lambda) - 1,
            bound_conformal: two_nu + i64::from(lambda_prime) - 1,
        }
    }
}

pub fn validate_spec(spec: &SurfaceSpec) -> Result<TopologyInfo, SurfaceError> {
    for p in &spec.punctures {
        if !(0.0..=1.0).contains(&p.weight) || !p.weight.is_finite() {
            return Err(SurfaceError::InvalidWeight(p.weight));
        }
    }
    let lambda1 = spec.punctures.len() as u32;
    let lambda1_prime = spec.punctures.iter().filter(|p| p.weight > 0.0).count() as u32;
    let lambda2 = spec.hyperbolic_ends.len() as u32;
    let mismatch = |msg: &str| Err(SurfaceError::FamilyMismatch(format!("{:?}: {msg}", spec.family)));

    let finite_only = spec.punctures.iter().all(|p| matches!(p.location, EndLocation::Point { .. }));
    match spec.family {
        Family::Plane => {
            if spec.genus != 0 || lambda2 != 0 {
                return mismatch("plane has genus 0 and no hyperbolic ends");
            }
            if spec.punctures.len() != 1 || spec.punctures[0].location != EndLocation::Infinity {
                return mismatch("plane has exactly one parabolic end, at infinity");
            }
        }
        Family::Cylinder => {
            if spec.genus != 0 || lambda2 != 0 {
                return mismatch("cylinder has genus 0 and no hyperbolic ends");
            }
            let minus = spec.punctures.iter().filter(|p| p.location == EndLocation::CylinderMinus).count();
            let plus = spec.punctures.iter().filter(|p| p.location == EndLocation::CylinderPlus).count();
            if spec.punctures.len() != 2 || minus != 1 || plus != 1 {
                return mismatch("cylinder has exactly two parabolic ends");
            }
        }
        Family::PuncturedSphere => {
            if spec.genus != 0 || lambda2 != 0 || lambda1 == 0 {
                return mismatch("punctured sphere has genus 0, at least one puncture, no hyperbolic ends");
            }
            let infinities = spec.punctures.iter().filter(|p| p.location == EndLocation::Infinity).count();
            let cylinder_ends = spec
                .punctures
                .iter()
                .any(|p| matches!(p.location, EndLocation::CylinderMinus | EndLocation::CylinderPlus));
            if infinities > 1 || cylinder_ends {
                return mismatch("sphere punctures are finite points or a single point at infinity");
            }
        }
        Family::PuncturedTorus => {
            if spec.genus != 1 || lambda2 != 0 || lambda1 == 0 {
                return mismatch("punctured torus has genus 1, at least one puncture, no hyperbolic ends");
            }
            if !finite_only {
                return mismatch("torus punctures are finite chart points");
            }
            let [a, b] = spec.lattice_periods();
            if !(a > 0.0 && b > 0.0) {
                return mismatch("torus lattice periods must be positive");
            }
        }
        Family::HyperbolicDisk => {
            if spec.genus != 0 || lambda2 != 1 || lambda1 != 0 {
                return mismatch("hyperbolic disk has genus 0, one hyperbolic end, no punctures");
            }
        }
        Family::Mesh => {
            if lambda1 + lambda2 == 0 {
                return mismatch("an open surface needs at least one end");
            }
        }
    }

    if lambda2 == 0 {
        let sum: f64 = spec.punctures.iter().map(|p| p.weight).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(SurfaceError::WeightSum { sum, expected: 1.0 });
        }
    } else if let Some(p) = spec.punctures.iter().find(|p| p.weight != 0.0) {
        // with a hyperbolic end every parabolic end is removable
        return Err(SurfaceError::WeightSum {
            sum: p.weight,
            expected: 0.0,
        });
    }

    Ok(TopologyInfo::from_counts(spec.genus, lambda1, lambda1_prime, lambda2))
}

/// Coordinate charts used by the built-in models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartId {
    /// Global isothermal coordinates of the family.
    Primary,
    /// `w = 1/z` around the point at infinity of the sphere.
    Infinity,
    /// `w = exp(z + i theta)` around the cylinder end `z -> -inf`.
    EndMinus,
    /// `w = exp(-(z + i theta))` around the cylinder end `z -> +inf`.
    EndPlus,
}

/// A point expressed in one of the model charts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: ChartId,
    pub z: Complex64,
}

impl ChartPoint {
    pub fn primary(x1: f64, x2: f64) -> Self {
        Self {
            chart: ChartId::Primary,
            z: Complex64::new(x1, x2),
        }
    }

    pub fn new(chart: ChartId, z: Complex64) -> Self {
        Self { chart, z }
    }
}

/// Input point for [`chart`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfacePoint {
    Finite([f64; 2]),
    Infinity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartDescriptor {
    pub chart: ChartId,
    pub coords: [f64; 2],
    pub map: &'static str,
    pub conformal_factor: f64,
}

fn round_sphere_factor(z: Complex64) -> f64 {
    let d = 1.0 + z.norm_sqr();
    4.0 / (d * d)
}

pub fn chart(spec: &SurfaceSpec, point: SurfacePoint) -> Result<ChartDescriptor, SurfaceError> {
    let out = |msg: &str| Err(SurfaceError::OutOfDomain(msg.to_string()));
    match (spec.family, point) {
        (Family::Plane | Family::PuncturedSphere, SurfacePoint::Finite([x1, x2])) => {
            let z = Complex64::new(x1, x2);
            Ok(ChartDescriptor {
                chart: ChartId::Primary,
                coords: [x1, x2],
                map: "stereographic z",
                conformal_factor: if spec.family == Family::Plane { 1.0 } else { round_sphere_factor(z) },
            })
        }
        (Family::Plane | Family::PuncturedSphere, SurfacePoint::Infinity) => Ok(ChartDescriptor {
            chart: ChartId::Infinity,
            coords: [0.0, 0.0],
            map: "w = 1/z",
            conformal_factor: round_sphere_factor(Complex64::new(0.0, 0.0)),
        }),
        (Family::Cylinder, SurfacePoint::Finite([x1, x2])) => Ok(ChartDescriptor {
            chart: ChartId::Primary,
            coords: [x1, wrap_centered(x2, spec.pole[1], 2.0 * PI)],
            map: "(z, theta) identity",
            conformal_factor: 1.0,
        }),
        (Family::PuncturedTorus, SurfacePoint::Finite([x1, x2])) => {
            let [a, b] = spec.lattice_periods();
            Ok(ChartDescriptor {
                chart: ChartId::Primary,
                coords: [x1.rem_euclid(a), x2.rem_euclid(b)],
                map: "periodic identity",
                conformal_factor: 1.0,
            })
        }
        (Family::HyperbolicDisk, SurfacePoint::Finite([x1, x2])) => {
            if x1 * x1 + x2 * x2 >= 1.0 {
                return out("hyperbolic disk chart requires |z| < 1");
            }
            Ok(ChartDescriptor {
                chart: ChartId::Primary,
                coords: [x1, x2],
                map: "identity",
                conformal_factor: 1.0,
            })
        }
        (Family::Mesh, _) => out("mesh surfaces have no analytic chart"),
        (_, SurfacePoint::Infinity) => out("point at infinity is not part of this surface"),
    }
}

/// Wraps `x` into `[center - period/2, center + period/2)`.
pub fn wrap_centered(x: f64, center: f64, period: f64) -> f64 {
    (x - center + 0.5 * period).rem_euclid(period) - 0.5 * period + center
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_counts() {
        let t = validate_spec(&SurfaceSpec::plane([0.0, 0.0])).unwrap();
        assert_eq!((t.nu, t.lambda, t.lambda_prime), (0, 1, 1));
        assert_eq!((t.bound_topological, t.bound_conformal), (0, 0));
    }

    #[test]
    fn torus_single_puncture() {
        let t = validate_spec(&SurfaceSpec::punctured_torus([0.0, 0.0], &[(0.0, PI, 1.0)])).unwrap();
        assert_eq!(t.nu, 1);
        assert_eq!(t.lambda_prime, 1);
        assert_eq!(t.bound_conformal, 2);
        assert_eq!(t.euler_char, 0);
    }

    #[test]
    fn sphere_with_removable_infinity() {
        let spec = SurfaceSpec::punctured_sphere([0.0, 0.0], &[(1.0, 0.0, 2.0 / 3.0), (-1.0, 0.0, 1.0 / 3.0)], Some(0.0));
        let t = validate_spec(&spec).unwrap();
        assert_eq!(t.lambda1, 3);
        assert_eq!(t.lambda1_prime, 2);
        assert_eq!(t.bound_conformal, 1);
        assert_eq!(t.bound_topological, 2);
    }

    #[test]
    fn weight_sum_rejected() {
        let spec = SurfaceSpec::punctured_torus([0.0, 0.0], &[(0.0, PI, 0.9)]);
        assert!(matches!(validate_spec(&spec), Err(SurfaceError::WeightSum { .. })));
    }

    #[test]
    fn hyperbolic_forces_removable_punctures() {
        let mut spec = SurfaceSpec::hyperbolic_disk([0.3, 0.0]);
        let t = validate_spec(&spec).unwrap();
        assert_eq!((t.lambda2, t.lambda_prime, t.bound_conformal), (1, 1, 0));
        spec.family = Family::Mesh;
        spec.punctures.push(Puncture::at(0.5, 0.0, 0.2));
        assert!(matches!(validate_spec(&spec), Err(SurfaceError::WeightSum { .. })));
    }

    #[test]
    fn family_mismatch() {
        let mut spec = SurfaceSpec::punctured_torus([0.0, 0.0], &[(0.0, PI, 1.0)]);
        spec.genus = 0;
        assert!(matches!(validate_spec(&spec), Err(SurfaceError::FamilyMismatch(_))));
        let mut disk = SurfaceSpec::hyperbolic_disk([0.0, 0.0]);
        disk.hyperbolic_ends.clear();
        assert!(matches!(validate_spec(&disk), Err(SurfaceError::FamilyMismatch(_))));
    }

    #[test]
    fn cylinder_variants() {
        let g1 = validate_spec(&SurfaceSpec::cylinder_g1([0.0, 0.0])).unwrap();
        assert_eq!((g1.lambda_prime, g1.bound_conformal, g1.bound_topological), (2, 1, 1));
        let g2 = validate_spec(&SurfaceSpec::cylinder_g2([0.0, 0.0])).unwrap();
        assert_eq!((g2.lambda_prime, g2.bound_conformal), (1, 0));
    }

    #[test]
    fn charts() {
        let sphere = SurfaceSpec::punctured_sphere([0.0, 0.0], &[(1.0, 0.0, 1.0)], None);
        let c = chart(&sphere, SurfacePoint::Finite([2.0, 0.0])).unwrap();
        assert_eq!(c.chart, ChartId::Primary);
        assert_eq!(c.coords, [2.0, 0.0]);
        let c = chart(&sphere, SurfacePoint::Infinity).unwrap();
        assert_eq!(c.chart, ChartId::Infinity);
        assert_eq!(c.coords, [0.0, 0.0]);

        let torus = SurfaceSpec::punctured_torus([0.0, 0.0], &[(0.0, PI, 1.0)]);
        let c = chart(&torus, SurfacePoint::Finite([7.0, -1.0])).unwrap();
        assert!((c.coords[0] - (7.0 - 2.0 * PI)).abs() < 1e-15);
        assert!((c.coords[1] - (2.0 * PI - 1.0)).abs() < 1e-15);

        let disk = SurfaceSpec::hyperbolic_disk([0.0, 0.0]);
        assert!(matches!(
            chart(&disk, SurfacePoint::Finite([1.0, 0.5])),
            Err(SurfaceError::OutOfDomain(_))
        ));
    }

    #[test]
    fn conformal_bound_identity() {
        for spec in [
            SurfaceSpec::plane([0.0, 0.0]),
            SurfaceSpec::cylinder_g1([0.0, 0.0]),
            SurfaceSpec::hyperbolic_disk([0.1, 0.0]),
            SurfaceSpec::punctured_torus([0.0, 0.0], &[(0.0, PI, 0.5), (PI, 0.0, 0.5), (1.0, 1.0, 0.0)]),
        ] {
            let t = validate_spec(&spec).unwrap();
            assert!(t.bound_conformal <= t.bound_topological);
            assert_eq!(1 + i64::from(t.lambda_prime) - t.euler_char, t.bound_conformal);
        }
    }
}
