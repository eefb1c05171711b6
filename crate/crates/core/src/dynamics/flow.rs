//! Adaptive integration of the regularized gradient flow.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CriticalPoint, Tolerances};
use crate::green::{GreenModel, Window};
use crate::surfaces::{wrap_centered, ChartId, ChartPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "ref", rename_all = "snake_case")]
pub enum Terminal {
    Pole,
    /// Index into the zero list passed to the integrator.
    Zero(usize),
    /// Puncture index of the end.
    ParabolicEnd(usize),
    HyperbolicBoundary,
    Escape,
    MaxSteps,
    StepCollapse,
}

impl Terminal {
    pub fn resolved(&self) -> bool {
        !matches!(self, Terminal::Escape | Terminal::MaxSteps | Terminal::StepCollapse)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub point: ChartPoint,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroApproach {
    pub zero: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub direction: Direction,
    pub terminal: Terminal,
    pub steps: u64,
    /// Closest approach to any listed zero.
    pub closest_zero: Option<ZeroApproach>,
}

impl Trajectory {
    /// Whether `G` moves strictly in the flow direction between samples.
    pub fn is_monotone(&self) -> bool {
        let s = self.direction.sign();
        self.samples.windows(2).all(|w| s * (w[1].value - w[0].value) > 0.0)
    }

    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has a start sample")
    }
}

/// What the integrator may stop at besides the pole and ends.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlowStops<'a> {
    pub zeros: &'a [CriticalPoint],
    pub window: Option<Window>,
    /// Keep only the first and last samples.
    pub sparse: bool,
    /// Pseudo-time budget; exceeding it ends the run as `MaxSteps`.
    pub t_max: Option<f64>,
}

// Dormand-Prince 5(4); the field is autonomous so the nodes are not needed
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Field<'a> {
    model: &'a GreenModel,
    chart: ChartId,
    sign: f64,
    kappa: f64,
}

impl Field<'_> {
    fn at(&self, z: Complex64) -> Option<Complex64> {
        let f = self.model.fz_extended(self.chart, z)?;
        // grad G = conj(fz)
        Some(f.conj() * (self.sign / (f.norm() + self.kappa)))
    }

    /// One embedded step; returns the 5th-order point and the error estimate.
    fn step(&self, z: Complex64, h: f64) -> Option<(Complex64, f64)> {
        let mut k = [Complex64::new(0.0, 0.0); 7];
        k[0] = self.at(z)?;
        for s in 1..7 {
            let mut acc = z;
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += kj * (h * A[s][j]);
            }
            k[s] = self.at(acc)?;
        }
        let mut hi = z;
        let mut err = Complex64::new(0.0, 0.0);
        for s in 0..7 {
            hi += k[s] * (h * B5[s]);
            err += k[s] * (h * (B5[s] - B4[s]));
        }
        Some((hi, err.norm()))
    }
}

struct Stopper<'a> {
    model: &'a GreenModel,
    stops: FlowStops<'a>,
    direction: Direction,
    tol: &'a Tolerances,
}

impl Stopper<'_> {
    fn check(&self, p: ChartPoint, value: f64, fz: Complex64, closest: &mut Option<ZeroApproach>) -> Option<Terminal> {
        let model = self.model;
        if self.direction == Direction::Forward && model.distance(p, model.pole()) < self.tol.r_pole {
            return Some(Terminal::Pole);
        }
        for (i, z) in self.stops.zeros.iter().enumerate() {
            // a zero behind us in G cannot be a limit
            if self.direction.sign() * (z.value - value) <= 0.0 {
                continue;
            }
            let d = model.distance(p, z.point);
            if closest.is_none_or(|c| d < c.distance) {
                *closest = Some(ZeroApproach { zero: i, distance: d });
            }
            if d < self.tol.delta_match || (fz.norm() < self.tol.zero_capture && d < self.tol.r_cls) {
                return Some(Terminal::Zero(i));
            }
        }
        if self.direction == Direction::Backward {
            let mut nearest: Option<(usize, f64)> = None;
            for e in model.ends().iter().filter(|e| !e.removable()) {
                let d = model.distance(p, e.point);
                if d < self.tol.r_end {
                    return Some(Terminal::ParabolicEnd(e.index));
                }
                if nearest.is_none_or(|(_, best)| d < best) {
                    nearest = Some((e.index, d));
                }
            }
            if value < self.tol.g_floor {
                if let Some((i, _)) = nearest {
                    return Some(Terminal::ParabolicEnd(i));
                }
            }
            if model.has_hyperbolic_boundary() && value < self.tol.eps_bdry {
                return Some(Terminal::HyperbolicBoundary);
            }
        }
        if let Some(w) = self.stops.window {
            if p.chart == ChartId::Primary
                && (p.z.re < w.lo[0] || p.z.re > w.hi[0] || p.z.im < w.lo[1] || p.z.im > w.hi[1])
            {
                return Some(Terminal::Escape);
            }
        }
        None
    }
}

/// Flows `x0` along `+grad G` (forward) or `-grad G` (backward) until a
/// terminal is reached. `G` is strictly monotone along the samples.
pub fn integrate_flow(
    model: &GreenModel,
    x0: ChartPoint,
    direction: Direction,
    stops: &FlowStops<'_>,
    tol: &Tolerances,
) -> Trajectory {
    let stopper = Stopper {
        model,
        stops: *stops,
        direction,
        tol,
    };
    let sign = direction.sign();
    let mut p = model.canonical(x0);
    let mut closest = None;
    let mut samples = Vec::new();
    let finish = |samples: Vec<TrajectorySample>, terminal, steps, closest| Trajectory {
        samples,
        direction,
        terminal,
        steps,
        closest_zero: closest,
    };

    let start = match model.evaluate(p) {
        Ok(s) => s,
        Err(_) => {
            let terminal = if model.has_hyperbolic_boundary() && !model.in_domain(p) {
                Terminal::HyperbolicBoundary
            } else {
                Terminal::Escape
            };
            return finish(samples, terminal, 0, closest);
        }
    };
    let mut value = start.value;
    let mut t = 0.0;
    samples.push(TrajectorySample { t, point: p, value });
    if let Some(term) = stopper.check(p, value, start.fz, &mut closest) {
        return finish(samples, term, 0, closest);
    }

    let mut h = 0.1 * tol.max_step;
    let mut steps = 0;
    while steps < tol.max_steps {
        steps += 1;
        let field = Field {
            model,
            chart: p.chart,
            sign,
            kappa: tol.kappa,
        };
        // stay well clear of the chart singularities
        let clearance = model
            .fz_poles(p.chart)
            .iter()
            .map(|&q| model.chart_distance(p.chart, p.z, q))
            .fold(f64::INFINITY, f64::min);
        h = h.min(tol.max_step).min(0.5 * clearance);
        if h < tol.h_min {
            return finish(samples, Terminal::StepCollapse, steps, closest);
        }
        let Some((z_new, err)) = field.step(p.z, h) else {
            if model.has_hyperbolic_boundary() && h < 1e3 * tol.h_min {
                return finish(samples, Terminal::HyperbolicBoundary, steps, closest);
            }
            h *= 0.25;
            continue;
        };
        if err > tol.step_tol {
            h *= (0.9 * (tol.step_tol / err).powf(0.2)).clamp(0.1, 0.9);
            continue;
        }
        let candidate = ChartPoint::new(p.chart, z_new);
        let sample = match model.evaluate(candidate) {
            Ok(s) if sign * (s.value - value) > 0.0 => s,
            Ok(_) => {
                h *= 0.5;
                continue;
            }
            Err(_) => {
                if model.has_hyperbolic_boundary() && !model.in_domain(candidate) && sign < 0.0 {
                    return finish(samples, Terminal::HyperbolicBoundary, steps, closest);
                }
                h *= 0.5;
                continue;
            }
        };
        t += h;
        value = sample.value;
        p = model.canonical(candidate);
        let record = TrajectorySample { t, point: p, value };
        if stops.sparse && samples.len() > 1 {
            *samples.last_mut().expect("nonempty") = record;
        } else {
            samples.push(record);
        }
        if let Some(term) = stopper.check(p, value, sample.fz, &mut closest) {
            return finish(samples, term, steps, closest);
        }
        if stops.t_max.is_some_and(|limit| t > limit) {
            return finish(samples, Terminal::MaxSteps, steps, closest);
        }
        let grow = if err > 0.0 {
            (0.9 * (tol.step_tol / err).powf(0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= grow;
    }
    finish(samples, Terminal::MaxSteps, steps, closest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleNodeReport {
    pub radius: f64,
    pub samples: usize,
    pub reached_pole: usize,
    /// Largest angle between the last segment and the direction to the pole.
    pub max_tangent_deviation: f64,
    /// Largest gap between sorted arrival angles around the pole.
    pub max_arrival_gap: f64,
    pub node: bool,
}

/// Flows points of the circle `|x - y| = radius` forward and checks that
/// they all enter the pole along well-defined, evenly spread tangents.
pub fn pole_node_check(model: &GreenModel, radius: f64, n_samples: usize, seed: u64, tol: &Tolerances) -> PoleNodeReport {
    let pole = model.pole();
    let offset = ChaCha8Rng::seed_from_u64(seed).gen_range(0.0..2.0 * PI / n_samples as f64);
    let periods = model.periods(pole.chart);
    let wrapped = |d: Complex64| {
        let mut d = [d.re, d.im];
        for (x, per) in d.iter_mut().zip(periods) {
            if let Some(per) = per {
                *x = wrap_centered(*x, 0.0, per);
            }
        }
        Complex64::new(d[0], d[1])
    };
    let results: Vec<Option<(f64, f64)>> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let phi = offset + 2.0 * PI * k as f64 / n_samples as f64;
            let start = ChartPoint::new(ChartId::Primary, pole.z + Complex64::from_polar(radius, phi));
            let tr = integrate_flow(model, start, Direction::Forward, &FlowStops::default(), tol);
            if tr.terminal != Terminal::Pole || tr.samples.len() < 2 {
                return None;
            }
            let n = tr.samples.len();
            let (a, b) = (tr.samples[n - 2].point, tr.samples[n - 1].point);
            let seg = wrapped(b.z - a.z);
            let to_pole = wrapped(pole.z - b.z);
            let deviation = (seg / to_pole).arg().abs();
            let arrival = (-to_pole).arg();
            Some((deviation, arrival))
        })
        .collect();
    let ok: Vec<(f64, f64)> = results.iter().flatten().copied().collect();
    let max_tangent_deviation = ok.iter().map(|r| r.0).fold(0.0, f64::max);
    let mut arrivals: Vec<f64> = ok.iter().map(|r| r.1.rem_euclid(2.0 * PI)).collect();
    arrivals.sort_by(f64::total_cmp);
    let max_arrival_gap = if arrivals.is_empty() {
        2.0 * PI
    } else {
        let wrap_gap = arrivals[0] + 2.0 * PI - arrivals[arrivals.len() - 1];
        arrivals.windows(2).map(|w| w[1] - w[0]).fold(wrap_gap, f64::max)
    };
    let reached_pole = ok.len();
    PoleNodeReport {
        radius,
        samples: n_samples,
        reached_pole,
        max_tangent_deviation,
        max_arrival_gap,
        node: reached_pole == n_samples && max_tangent_deviation < 1e-2 && max_arrival_gap < 3.0 * 2.0 * PI / n_samples as f64,
    }
}
