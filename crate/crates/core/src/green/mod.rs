//! Closed-form Green's functions on the built-in model surfaces.
//!
//! Every model is evaluated in isothermal chart coordinates, where it is
//! harmonic away from its pole and ends. Alongside the value each sample
//! carries the Wirtinger derivative `fz = 2 dG/dz`, a meromorphic function
//! of the chart variable whose zeros are the critical points.

mod kernels;
pub mod theta;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::surfaces::{validate_spec, ChartId, ChartPoint, EndLocation, Family, SurfaceError, SurfaceSpec, TopologyInfo};
use kernels::{Cylinder, Disk, Rational, Torus};
pub use kernels::TorusKernel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreenError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("pole collides with puncture {0}")]
    PoleCollision(usize),
    #[error("point is singular for the model ({0})")]
    SingularPoint(String),
    #[error("chart {0:?} is not available on this model")]
    ChartUnavailable(ChartId),
    #[error("no closed-form Green's function for family {0:?}")]
    UnsupportedFamily(Family),
    #[error("window passes within {distance:.3e} of a singular point (needs {required:.3e})")]
    WindowTouchesSingularity { distance: f64, required: f64 },
    #[error("pole outside the model domain")]
    PoleOutOfDomain,
}

/// Value, chart gradient and complex derivative at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenSample {
    pub value: f64,
    pub grad: [f64; 2],
    pub fz: Complex64,
}

impl GreenSample {
    fn new(value: f64, fz: Complex64) -> Self {
        Self {
            value,
            grad: [fz.re, -fz.im],
            fz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularKind {
    Pole,
    NonRemovableEnd,
    HyperbolicBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub kind: SingularKind,
    /// `None` for a boundary circle.
    pub point: Option<ChartPoint>,
    /// Index into the spec's puncture (or hyperbolic end) list.
    pub end: Option<usize>,
}

/// A parabolic end of the model located in some chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndPoint {
    pub index: usize,
    pub point: ChartPoint,
    pub weight: f64,
}

impl EndPoint {
    pub fn removable(&self) -> bool {
        self.weight == 0.0
    }
}

/// Axis-aligned rectangle in one chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub chart: ChartId,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

#[derive(Debug, Clone)]
enum ModelKind {
    Rational { potential: Rational, radius: f64 },
    Cylinder { cyl: Cylinder, switch: f64, search: f64 },
    Torus(Torus),
    Disk(Disk),
}

#[derive(Debug, Clone)]
pub struct GreenModel {
    spec: SurfaceSpec,
    topology: TopologyInfo,
    kind: ModelKind,
    ends: Vec<EndPoint>,
}

fn c(x1: f64, x2: f64) -> Complex64 {
    Complex64::new(x1, x2)
}

fn wrap(x: f64, center: f64, period: f64) -> f64 {
    crate::surfaces::wrap_centered(x, center, period)
}

pub fn make_model(spec: &SurfaceSpec) -> Result<GreenModel, GreenError> {
    let topology = validate_spec(spec)?;
    let pole = spec.pole_complex();
    let mut ends = Vec::new();

    let kind = match spec.family {
        Family::Plane | Family::PuncturedSphere => {
            let mut finite = Vec::new();
            let mut weight_inf = 0.0;
            let mut reach = pole.norm().max(1.0);
            for (index, p) in spec.punctures.iter().enumerate() {
                let point = match p.location {
                    EndLocation::Point { x1, x2 } => {
                        let z = c(x1, x2);
                        if (z - pole).norm() < 1e-12 {
                            return Err(GreenError::PoleCollision(index));
                        }
                        reach = reach.max(z.norm());
                        if p.weight > 0.0 {
                            finite.push((z, p.weight));
                        }
                        ChartPoint::new(ChartId::Primary, z)
                    }
                    EndLocation::Infinity => {
                        weight_inf = p.weight;
                        ChartPoint::new(ChartId::Infinity, c(0.0, 0.0))
                    }
                    _ => unreachable!("validated"),
                };
                ends.push(EndPoint {
                    index,
                    point,
                    weight: p.weight,
                });
            }
            ModelKind::Rational {
                potential: Rational {
                    pole,
                    punctures: finite,
                    weight_inf,
                },
                radius: 2.0 * reach + 1.0,
            }
        }
        Family::Cylinder => {
            let mut weights = [0.0; 2];
            for (index, p) in spec.punctures.iter().enumerate() {
                let (slot, chart) = match p.location {
                    EndLocation::CylinderMinus => (0, ChartId::EndMinus),
                    _ => (1, ChartId::EndPlus),
                };
                weights[slot] = p.weight;
                ends.push(EndPoint {
                    index,
                    point: ChartPoint::new(chart, c(0.0, 0.0)),
                    weight: p.weight,
                });
            }
            ModelKind::Cylinder {
                cyl: Cylinder::new(pole, weights[0], weights[1]),
                switch: pole.re.abs() + 6.0,
                search: (pole.re.abs() + 4.0).max(8.0),
            }
        }
        Family::PuncturedTorus => {
            let lattice = spec.lattice_periods();
            let mut punctures = Vec::new();
            for (index, p) in spec.punctures.iter().enumerate() {
                let EndLocation::Point { x1, x2 } = p.location else {
                    unreachable!("validated")
                };
                let z = c(wrap_half_open(x1, lattice[0]), wrap_half_open(x2, lattice[1]));
                if torus_distance(z, pole, lattice) < 1e-12 {
                    return Err(GreenError::PoleCollision(index));
                }
                punctures.push((z, p.weight));
                ends.push(EndPoint {
                    index,
                    point: ChartPoint::new(ChartId::Primary, z),
                    weight: p.weight,
                });
            }
            ModelKind::Torus(Torus {
                kernel: TorusKernel::new(lattice),
                pole,
                punctures,
            })
        }
        Family::HyperbolicDisk => {
            if pole.norm() >= 1.0 {
                return Err(GreenError::PoleOutOfDomain);
            }
            ModelKind::Disk(Disk { pole })
        }
        Family::Mesh => return Err(GreenError::UnsupportedFamily(Family::Mesh)),
    };

    Ok(GreenModel {
        spec: spec.clone(),
        topology,
        kind,
        ends,
    })
}

/// `x mod period` in `[0, period)`, guarding against rounding up to `period`.
fn wrap_half_open(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

fn torus_distance(a: Complex64, b: Complex64, lattice: [f64; 2]) -> f64 {
    let d = a - b;
    c(wrap(d.re, 0.0, lattice[0]), wrap(d.im, 0.0, lattice[1])).norm()
}

impl GreenModel {
    pub fn spec(&self) -> &SurfaceSpec {
        &self.spec
    }

    pub fn topology(&self) -> &TopologyInfo {
        &self.topology
    }

    pub fn family(&self) -> Family {
        self.spec.family
    }

    pub fn pole(&self) -> ChartPoint {
        ChartPoint::new(ChartId::Primary, self.spec.pole_complex())
    }

    pub fn ends(&self) -> &[EndPoint] {
        &self.ends
    }

    pub fn has_hyperbolic_boundary(&self) -> bool {
        matches!(self.kind, ModelKind::Disk(_))
    }

    pub fn singular_points(&self) -> Vec<SingularPoint> {
        let mut out = vec![SingularPoint {
            kind: SingularKind::Pole,
            point: Some(self.pole()),
            end: None,
        }];
        for e in self.ends.iter().filter(|e| !e.removable()) {
            out.push(SingularPoint {
                kind: SingularKind::NonRemovableEnd,
                point: Some(e.point),
                end: Some(e.index),
            });
        }
        if self.has_hyperbolic_boundary() {
            out.push(SingularPoint {
                kind: SingularKind::HyperbolicBoundary,
                point: None,
                end: Some(0),
            });
        }
        out
    }

    /// Charts in which the model can be evaluated.
    pub fn charts(&self) -> &'static [ChartId] {
        match self.kind {
            ModelKind::Rational { .. } => &[ChartId::Primary, ChartId::Infinity],
            ModelKind::Cylinder { .. } => &[ChartId::Primary, ChartId::EndMinus, ChartId::EndPlus],
            ModelKind::Torus(_) | ModelKind::Disk(_) => &[ChartId::Primary],
        }
    }

    /// Periods of the chart coordinates, per axis.
    pub fn periods(&self, chart: ChartId) -> [Option<f64>; 2] {
        match (&self.kind, chart) {
            (ModelKind::Torus(t), ChartId::Primary) => {
                let [a, b] = t.kernel_lattice();
                [Some(a), Some(b)]
            }
            (ModelKind::Cylinder { .. }, ChartId::Primary) => [None, Some(2.0 * PI)],
            _ => [None, None],
        }
    }

    pub fn evaluate(&self, p: ChartPoint) -> Result<GreenSample, GreenError> {
        let z = p.z;
        let (value, fz) = match (&self.kind, p.chart) {
            (ModelKind::Rational { potential, .. }, ChartId::Primary) => (potential.value_z(z), potential.fz_z(z)),
            (ModelKind::Rational { potential, .. }, ChartId::Infinity) => (potential.value_w(z), potential.fz_w(z)),
            (ModelKind::Cylinder { cyl, .. }, ChartId::Primary) => (cyl.value_primary(z), cyl.fz_primary(z)),
            (ModelKind::Cylinder { cyl, .. }, ChartId::EndMinus) => {
                (cyl.ends.value_z(z) + cyl.offset, cyl.ends.fz_z(z))
            }
            (ModelKind::Cylinder { cyl, .. }, ChartId::EndPlus) => {
                (cyl.ends.value_w(z) + cyl.offset, cyl.ends.fz_w(z))
            }
            (ModelKind::Torus(t), ChartId::Primary) => t.eval(z),
            (ModelKind::Disk(d), ChartId::Primary) => {
                if z.norm() >= 1.0 {
                    return Err(GreenError::SingularPoint("outside the unit disk".into()));
                }
                (d.value(z), d.fz(z))
            }
            (_, chart) => return Err(GreenError::ChartUnavailable(chart)),
        };
        if !value.is_finite() || !fz.re.is_finite() || !fz.im.is_finite() {
            return Err(GreenError::SingularPoint(format!("{:?} {}", p.chart, p.z)));
        }
        Ok(GreenSample::new(value, fz))
    }

    /// `fz` continued as a meromorphic function of the chart variable,
    /// ignoring the domain restriction of the disk model.
    pub fn fz_extended(&self, chart: ChartId, z: Complex64) -> Option<Complex64> {
        let fz = match (&self.kind, chart) {
            (ModelKind::Disk(d), ChartId::Primary) => d.fz(z),
            _ => self.evaluate(ChartPoint::new(chart, z)).ok()?.fz,
        };
        (fz.re.is_finite() && fz.im.is_finite()).then_some(fz)
    }

    pub fn evaluate_primary(&self, x1: f64, x2: f64) -> Result<GreenSample, GreenError> {
        self.evaluate(ChartPoint::primary(x1, x2))
    }

    /// Value of the extended function: `+inf` at the pole, `-inf` at
    /// non-removable ends, `0` on a hyperbolic boundary, NaN outside.
    pub fn extended_value(&self, p: ChartPoint) -> f64 {
        match self.evaluate(p) {
            Ok(s) => s.value,
            Err(_) => {
                if self.distance(p, self.pole()) < 1e-12 {
                    f64::INFINITY
                } else if self.ends.iter().any(|e| !e.removable() && self.distance(p, e.point) < 1e-12) {
                    f64::NEG_INFINITY
                } else if self.has_hyperbolic_boundary() && (p.z.norm() - 1.0).abs() < 1e-12 {
                    0.0
                } else {
                    f64::NAN
                }
            }
        }
    }

    pub fn in_domain(&self, p: ChartPoint) -> bool {
        match &self.kind {
            ModelKind::Disk(_) => p.chart == ChartId::Primary && p.z.norm() < 1.0,
            _ => self.charts().contains(&p.chart),
        }
    }

    /// Re-expresses a point in its preferred chart: wraps periodic
    /// coordinates and switches charts with hysteresis.
    pub fn canonical(&self, p: ChartPoint) -> ChartPoint {
        match (&self.kind, p.chart) {
            (ModelKind::Rational { radius, .. }, ChartId::Primary) if p.z.norm() > 2.0 * radius => {
                ChartPoint::new(ChartId::Infinity, p.z.inv())
            }
            (ModelKind::Rational { radius, .. }, ChartId::Infinity) if p.z.norm() > 1.0 / radius => {
                ChartPoint::new(ChartId::Primary, p.z.inv())
            }
            (ModelKind::Cylinder { cyl, switch, .. }, ChartId::Primary) => {
                if p.z.re < -(switch + 1.0) {
                    ChartPoint::new(ChartId::EndMinus, p.z.exp())
                } else if p.z.re > switch + 1.0 {
                    ChartPoint::new(ChartId::EndPlus, (-p.z).exp())
                } else {
                    ChartPoint::new(ChartId::Primary, c(p.z.re, wrap(p.z.im, cyl.pole.im, 2.0 * PI)))
                }
            }
            (ModelKind::Cylinder { cyl, switch, .. }, ChartId::EndMinus | ChartId::EndPlus)
                if p.z.norm() > (-switch).exp() =>
            {
                let s = self.transfer(p, ChartId::Primary).expect("nonzero end coordinate");
                ChartPoint::new(ChartId::Primary, c(s.re, wrap(s.im, cyl.pole.im, 2.0 * PI)))
            }
            (ModelKind::Torus(t), ChartId::Primary) => {
                let [a, b] = t.kernel_lattice();
                ChartPoint::new(ChartId::Primary, c(wrap_half_open(p.z.re, a), wrap_half_open(p.z.im, b)))
            }
            _ => p,
        }
    }

    /// Coordinates of `p` in the chart `target`, if representable.
    pub fn transfer(&self, p: ChartPoint, target: ChartId) -> Option<Complex64> {
        if p.chart == target {
            return Some(p.z);
        }
        match self.kind {
            ModelKind::Rational { .. } => match (p.chart, target) {
                (ChartId::Primary, ChartId::Infinity) | (ChartId::Infinity, ChartId::Primary) => {
                    (p.z.norm() > 0.0).then(|| p.z.inv())
                }
                _ => None,
            },
            ModelKind::Cylinder { .. } => {
                let s = match p.chart {
                    ChartId::Primary => p.z,
                    ChartId::EndMinus if p.z.norm() > 0.0 => p.z.ln(),
                    ChartId::EndPlus if p.z.norm() > 0.0 => -p.z.ln(),
                    _ => return None,
                };
                match target {
                    ChartId::Primary => Some(s),
                    ChartId::EndMinus => Some(s.exp()),
                    ChartId::EndPlus => Some((-s).exp()),
                    ChartId::Infinity => None,
                }
            }
            _ => None,
        }
    }

    /// Flat distance measured in one of the two points' charts, accounting
    /// for periodicity; infinite when neither chart contains both points.
    pub fn distance(&self, a: ChartPoint, b: ChartPoint) -> f64 {
        if let Some(bz) = self.transfer(b, a.chart) {
            self.chart_distance(a.chart, a.z, bz)
        } else if let Some(az) = self.transfer(a, b.chart) {
            self.chart_distance(b.chart, az, b.z)
        } else {
            f64::INFINITY
        }
    }

    pub fn chart_distance(&self, chart: ChartId, a: Complex64, b: Complex64) -> f64 {
        let d = a - b;
        let [pa, pb] = self.periods(chart);
        let dx = pa.map_or(d.re, |p| wrap(d.re, 0.0, p));
        let dy = pb.map_or(d.im, |p| wrap(d.im, 0.0, p));
        dx.hypot(dy)
    }

    /// Poles of `fz` in a chart (one representative per periodic class).
    pub fn fz_poles(&self, chart: ChartId) -> Vec<Complex64> {
        let zero = c(0.0, 0.0);
        match (&self.kind, chart) {
            (ModelKind::Rational { potential, .. }, ChartId::Primary) => std::iter::once(potential.pole)
                .chain(potential.punctures.iter().map(|&(p, _)| p))
                .collect(),
            (ModelKind::Rational { potential, .. }, ChartId::Infinity) => {
                let mut out: Vec<Complex64> = std::iter::once(potential.pole)
                    .chain(potential.punctures.iter().map(|&(p, _)| p))
                    .filter(|p| p.norm() > 0.0)
                    .map(|p| p.inv())
                    .collect();
                if potential.weight_inf > 0.0 {
                    out.push(zero);
                }
                out
            }
            (ModelKind::Cylinder { cyl, .. }, ChartId::Primary) => vec![cyl.pole],
            (ModelKind::Cylinder { cyl, .. }, ChartId::EndMinus) => {
                let mut out = vec![cyl.ends.pole];
                if !cyl.ends.punctures.is_empty() {
                    out.push(zero);
                }
                out
            }
            (ModelKind::Cylinder { cyl, .. }, ChartId::EndPlus) => {
                let mut out = vec![cyl.ends.pole.inv()];
                if cyl.ends.weight_inf > 0.0 {
                    out.push(zero);
                }
                out
            }
            (ModelKind::Torus(t), ChartId::Primary) => std::iter::once(t.pole)
                .chain(t.punctures.iter().filter(|&&(_, w)| w > 0.0).map(|&(p, _)| p))
                .collect(),
            (ModelKind::Disk(d), ChartId::Primary) => {
                let mut out = vec![d.pole];
                if d.pole.norm() > 0.0 {
                    out.push(d.pole.conj().inv());
                }
                out
            }
            _ => Vec::new(),
        }
    }

    /// Chart rectangles that together cover the whole compactified surface.
    pub fn default_regions(&self) -> Vec<SearchRegion> {
        match &self.kind {
            ModelKind::Rational { radius, .. } => vec![
                SearchRegion {
                    chart: ChartId::Primary,
                    lo: [-radius, -radius],
                    hi: [*radius, *radius],
                },
                SearchRegion {
                    chart: ChartId::Infinity,
                    lo: [-1.0 / radius, -1.0 / radius],
                    hi: [1.0 / radius, 1.0 / radius],
                },
            ],
            ModelKind::Cylinder { cyl, search, .. } => {
                let end = (-search).exp();
                vec![
                    SearchRegion {
                        chart: ChartId::Primary,
                        lo: [-search, cyl.pole.im - PI],
                        hi: [*search, cyl.pole.im + PI],
                    },
                    SearchRegion {
                        chart: ChartId::EndMinus,
                        lo: [-end, -end],
                        hi: [end, end],
                    },
                    SearchRegion {
                        chart: ChartId::EndPlus,
                        lo: [-end, -end],
                        hi: [end, end],
                    },
                ]
            }
            ModelKind::Torus(t) => {
                let [a, b] = t.kernel_lattice();
                vec![SearchRegion {
                    chart: ChartId::Primary,
                    lo: [-0.5 * a, -0.5 * b],
                    hi: [0.5 * a, 0.5 * b],
                }]
            }
            ModelKind::Disk(_) => vec![SearchRegion {
                chart: ChartId::Primary,
                lo: [-1.0, -1.0],
                hi: [1.0, 1.0],
            }],
        }
    }

    /// Sampling window over a fundamental domain in the primary chart.
    pub fn default_window(&self) -> Window {
        let y = self.spec.pole_complex();
        match &self.kind {
            ModelKind::Rational { radius, .. } => Window::new([-radius, -radius], [*radius, *radius]),
            ModelKind::Cylinder { cyl, .. } => Window::new([-5.0, cyl.pole.im - PI], [5.0, cyl.pole.im + PI]),
            ModelKind::Torus(t) => {
                let [a, b] = t.kernel_lattice();
                Window::new([y.re - 0.5 * a, y.im - 0.5 * b], [y.re + 0.5 * a, y.im + 0.5 * b])
            }
            ModelKind::Disk(_) => Window::new([-1.0, -1.0], [1.0, 1.0]),
        }
    }
}

impl Torus {
    fn kernel_lattice(&self) -> [f64; 2] {
        self.kernel.lattice()
    }
}

/// Rectangle in the primary chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Window {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Self { lo, hi }
    }

    fn distance_to(&self, z: Complex64) -> f64 {
        let dx = (self.lo[0] - z.re).max(z.re - self.hi[0]).max(0.0);
        let dy = (self.lo[1] - z.im).max(z.im - self.hi[1]).max(0.0);
        dx.hypot(dy)
    }
}

/// Largest 5-point finite-difference Laplacian of `f` over an `n x n`
/// grid covering `window`. `singular` lists points (with periodic images
/// generated from `periods`) that must stay `10 h` away from the window.
pub fn laplacian_residual_of(
    f: impl Fn(Complex64) -> f64,
    window: Window,
    h: f64,
    n: usize,
    singular: &[Complex64],
    periods: [Option<f64>; 2],
) -> Result<f64, GreenError> {
    let required = 10.0 * h;
    for &s in singular {
        let shifts = |p: Option<f64>| -> Vec<f64> { p.map_or(vec![0.0], |p| vec![-2.0 * p, -p, 0.0, p, 2.0 * p]) };
        for dx in shifts(periods[0]) {
            for dy in shifts(periods[1]) {
                let d = window.distance_to(s + c(dx, dy));
                if d < required {
                    return Err(GreenError::WindowTouchesSingularity { distance: d, required });
                }
            }
        }
    }
    let n = n.max(2);
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let x = window.lo[0] + (window.hi[0] - window.lo[0]) * i as f64 / (n - 1) as f64;
            let y = window.lo[1] + (window.hi[1] - window.lo[1]) * j as f64 / (n - 1) as f64;
            let z = c(x, y);
            let lap = (f(z + h) + f(z - h) + f(z + c(0.0, h)) + f(z - c(0.0, h)) - 4.0 * f(z)) / (h * h);
            worst = worst.max(lap.abs());
        }
    }
    Ok(worst)
}

/// Maximum absolute discrete Laplacian of the model over `window`.
pub fn laplacian_residual(model: &GreenModel, window: Window, h: f64) -> Result<f64, GreenError> {
    let mut singular = model.fz_poles(ChartId::Primary);
    if let ModelKind::Disk(d) = &model.kind {
        // the window must also stay inside the disk
        singular.retain(|p| p.norm() < 1.0);
        let _ = d;
        for k in 0..64 {
            let t = 2.0 * PI * k as f64 / 64.0;
            let rim = c(t.cos(), t.sin());
            let dist = window.distance_to(rim);
            if dist < 10.0 * h {
                return Err(GreenError::WindowTouchesSingularity {
                    distance: dist,
                    required: 10.0 * h,
                });
            }
        }
    }
    laplacian_residual_of(
        |z| model.evaluate(ChartPoint::new(ChartId::Primary, z)).map_or(f64::NAN, |s| s.value),
        window,
        h,
        21,
        &singular,
        model.periods(ChartId::Primary),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusMargin {
    pub radius: f64,
    pub circle_max: f64,
    pub exterior_max: f64,
    /// `circle_max - exterior_max`; negative values are violations.
    pub margin: f64,
    pub exterior_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub radii: Vec<RadiusMargin>,
    pub worst_margin: f64,
    pub tolerance: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct MonotonicityOptions {
    pub radii: Vec<f64>,
    pub n_angles: usize,
    pub n_exterior: usize,
    pub window: Option<Window>,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for MonotonicityOptions {
    fn default() -> Self {
        Self {
            radii: vec![0.5, 1.0, 2.0],
            n_angles: 720,
            n_exterior: 10_000,
            window: None,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

/// Checks that the supremum of `G` outside each pole-centred ball is
/// attained on the bounding circle.
pub fn monotonicity_check(model: &GreenModel, opts: &MonotonicityOptions) -> MonotonicityReport {
    let window = opts.window.unwrap_or_else(|| model.default_window());
    let pole = model.pole();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let exterior: Vec<(ChartPoint, f64)> = (0..opts.n_exterior * 4)
        .filter_map(|_| {
            let x = rng.gen_range(window.lo[0]..window.hi[0]);
            let y = rng.gen_range(window.lo[1]..window.hi[1]);
            let p = ChartPoint::primary(x, y);
            if !model.in_domain(p) {
                return None;
            }
            model.evaluate(p).ok().map(|s| (p, s.value))
        })
        .take(opts.n_exterior)
        .collect();

    let mut radii = Vec::new();
    for &r in &opts.radii {
        let circle_max = (0..opts.n_angles)
            .filter_map(|k| {
                let t = 2.0 * PI * k as f64 / opts.n_angles as f64;
                let p = ChartPoint::new(ChartId::Primary, pole.z + c(r * t.cos(), r * t.sin()));
                model.evaluate(p).ok().map(|s| s.value)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let outside: Vec<f64> = exterior
            .iter()
            .filter(|(p, _)| model.distance(*p, pole) >= r)
            .map(|&(_, v)| v)
            .collect();
        let exterior_max = outside.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        radii.push(RadiusMargin {
            radius: r,
            circle_max,
            exterior_max,
            margin: circle_max - exterior_max,
            exterior_samples: outside.len(),
        });
    }
    let worst_margin = radii.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);
    MonotonicityReport {
        holds: worst_margin >= -opts.tolerance,
        radii,
        worst_margin,
        tolerance: opts.tolerance,
    }
}
