//! Zero isolation by the argument principle, Newton refinement and
//! local classification.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CriticalPoint, DynamicsError, Tolerances};
use crate::green::{GreenModel, SearchRegion};
use crate::surfaces::{ChartId, ChartPoint};

const MIN_EDGE_SAMPLES: usize = 8;
const MAX_ARG_STEP: f64 = PI / 3.0;
const CIRCLE_VERTICES: usize = 64;
const NEWTON_DERIV_STEP: f64 = 1e-7;
/// Cells holding a single zero are handed to Newton below this fraction of
/// the region size; clusters are resolved further.
const SIMPLE_CELL: f64 = 1e-2;
const CLUSTER_CELL: f64 = 1e-7;

/// Zeros found in one grid cell: position, multiplicity, Newton residual.
type CellResult = Result<Vec<(Complex64, i64, f64)>, DynamicsError>;

fn c(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

/// Change of `arg f` from `a` to `b`, bisecting until consecutive samples
/// differ by less than `MAX_ARG_STEP`.
fn arg_change(
    f: &dyn Fn(Complex64) -> Option<Complex64>,
    (a, fa): (Complex64, Complex64),
    (b, fb): (Complex64, Complex64),
    depth: u32,
) -> Option<f64> {
    let d = (fb / fa).arg();
    if d.abs() < MAX_ARG_STEP {
        return Some(d);
    }
    if depth == 0 {
        return None;
    }
    let mid = (a + b) * 0.5;
    let fm = f(mid).filter(|v| v.norm() > 0.0)?;
    Some(arg_change(f, (a, fa), (mid, fm), depth - 1)? + arg_change(f, (mid, fm), (b, fb), depth - 1)?)
}

/// Winding number of `f` along the closed polygon `vertices`; `None` when
/// the polygon passes (numerically) through a zero or pole.
pub fn loop_winding(f: &dyn Fn(Complex64) -> Option<Complex64>, vertices: &[Complex64], max_depth: u32) -> Option<i64> {
    let mut total = 0.0;
    let n = vertices.len();
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        let pts: Vec<Complex64> = (0..=MIN_EDGE_SAMPLES)
            .map(|k| a + (b - a) * (k as f64 / MIN_EDGE_SAMPLES as f64))
            .collect();
        let vals: Option<Vec<Complex64>> = pts.iter().map(|&z| f(z).filter(|v| v.norm() > 0.0)).collect();
        let vals = vals?;
        for k in 0..MIN_EDGE_SAMPLES {
            total += arg_change(f, (pts[k], vals[k]), (pts[k + 1], vals[k + 1]), max_depth)?;
        }
    }
    let w = total / (2.0 * PI);
    ((w - w.round()).abs() < 1e-6).then_some(w.round() as i64)
}

fn rect_vertices(lo: [f64; 2], hi: [f64; 2]) -> [Complex64; 4] {
    [c(lo[0], lo[1]), c(hi[0], lo[1]), c(hi[0], hi[1]), c(lo[0], hi[1])]
}

fn circle_vertices(center: Complex64, r: f64) -> Vec<Complex64> {
    (0..CIRCLE_VERTICES)
        .map(|k| center + Complex64::from_polar(r, 2.0 * PI * k as f64 / CIRCLE_VERTICES as f64))
        .collect()
}

/// Winding number of `fz` on the circle of radius `r` around `p`.
pub fn winding_on_circle(model: &GreenModel, p: ChartPoint, r: f64, max_depth: u32) -> Option<i64> {
    let f = |z: Complex64| model.fz_extended(p.chart, z);
    loop_winding(&f, &circle_vertices(p.z, r), max_depth)
}

struct Scan<'a> {
    model: &'a GreenModel,
    chart: ChartId,
    periods: [Option<f64>; 2],
    poles: Vec<Complex64>,
    scale: f64,
    tol: &'a Tolerances,
}

enum CellCount {
    Known(i64),
    Ambiguous,
}

impl Scan<'_> {
    fn f(&self, z: Complex64) -> Option<Complex64> {
        self.model.fz_extended(self.chart, z)
    }

    fn images(&self, p: Complex64) -> Vec<Complex64> {
        let shifts = |per: Option<f64>| per.map_or(vec![0.0], |t| vec![-2.0 * t, -t, 0.0, t, 2.0 * t]);
        let mut out = Vec::new();
        for dx in shifts(self.periods[0]) {
            for dy in shifts(self.periods[1]) {
                out.push(p + c(dx, dy));
            }
        }
        out
    }

    /// Number of zeros (with multiplicity) inside the half-open cell.
    fn count(&self, lo: [f64; 2], hi: [f64; 2]) -> CellCount {
        let guard = 1e-9 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let mut poles = 0;
        for &p in &self.poles {
            for q in self.images(p) {
                let near_edge = (q.re - lo[0]).abs() < guard
                    || (q.re - hi[0]).abs() < guard
                    || (q.im - lo[1]).abs() < guard
                    || (q.im - hi[1]).abs() < guard;
                let inside = q.re >= lo[0] && q.re < hi[0] && q.im >= lo[1] && q.im < hi[1];
                let close = q.re > lo[0] - guard && q.re < hi[0] + guard && q.im > lo[1] - guard && q.im < hi[1] + guard;
                if close && near_edge {
                    return CellCount::Ambiguous;
                }
                if inside {
                    poles += 1;
                }
            }
        }
        let f = |z: Complex64| self.f(z);
        match loop_winding(&f, &rect_vertices(lo, hi), self.tol.max_bisections) {
            Some(w) if w + poles >= 0 => CellCount::Known(w + poles),
            _ => CellCount::Ambiguous,
        }
    }

    fn ambiguous(&self, lo: [f64; 2], hi: [f64; 2]) -> DynamicsError {
        DynamicsError::WindingAmbiguous {
            chart: self.chart,
            lo,
            hi,
        }
    }

    fn newton(&self, z0: Complex64, k: i64) -> (Complex64, f64) {
        let mut z = z0;
        let mut best = (z0, self.f(z0).map_or(f64::INFINITY, |v| v.norm()));
        for _ in 0..100 {
            let Some(fz) = self.f(z) else { break };
            if fz.norm() < best.1 {
                best = (z, fz.norm());
            }
            if fz.norm() == 0.0 {
                break;
            }
            let h = NEWTON_DERIV_STEP * (1.0 + z.norm());
            let (Some(fp), Some(fm)) = (self.f(z + h), self.f(z - h)) else {
                break;
            };
            let d = (fp - fm) / (2.0 * h);
            if d.norm() == 0.0 {
                break;
            }
            let step = fz / d * k as f64;
            z -= step;
            if step.norm() < 1e-15 * (1.0 + z.norm()) {
                if let Some(v) = self.f(z) {
                    if v.norm() < best.1 {
                        best = (z, v.norm());
                    }
                }
                break;
            }
        }
        best
    }

    fn refine(
        &self,
        lo: [f64; 2],
        hi: [f64; 2],
        count: i64,
        out: &mut Vec<(Complex64, i64, f64)>,
    ) -> Result<(), DynamicsError> {
        if count == 0 {
            return Ok(());
        }
        let size = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let small = if count == 1 { SIMPLE_CELL } else { CLUSTER_CELL };
        if size <= small * self.scale {
            let center = c(0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]));
            let (z, residual) = self.newton(center, count);
            let inside = (z.re - center.re).abs() <= size && (z.im - center.im).abs() <= size;
            if inside && residual <= self.tol.newton_tol {
                out.push((z, count, residual));
                return Ok(());
            }
            if size <= CLUSTER_CELL * self.scale {
                return Err(DynamicsError::NewtonDiverged {
                    point: ChartPoint::new(self.chart, z),
                    residual,
                });
            }
        }
        for attempt in 0..4 {
            let s = 0.5 + 0.0371 * attempt as f64;
            let mx = lo[0] + s * (hi[0] - lo[0]);
            let my = lo[1] + s * (hi[1] - lo[1]);
            let subs = [
                ([lo[0], lo[1]], [mx, my]),
                ([mx, lo[1]], [hi[0], my]),
                ([lo[0], my], [mx, hi[1]]),
                ([mx, my], [hi[0], hi[1]]),
            ];
            let counts: Vec<Option<i64>> = subs
                .iter()
                .map(|&(a, b)| match self.count(a, b) {
                    CellCount::Known(k) => Some(k),
                    CellCount::Ambiguous => None,
                })
                .collect();
            if counts.iter().all(Option::is_some) && counts.iter().map(|k| k.unwrap()).sum::<i64>() == count {
                for (&(a, b), k) in subs.iter().zip(counts) {
                    self.refine(a, b, k.unwrap(), out)?;
                }
                return Ok(());
            }
        }
        Err(self.ambiguous(lo, hi))
    }

    fn run(&self, region: &SearchRegion, grid_n: usize, phase: f64) -> Result<Vec<(Complex64, i64, f64)>, DynamicsError> {
        let mut lo = region.lo;
        let mut hi = region.hi;
        for axis in 0..2 {
            let h0 = (region.hi[axis] - region.lo[axis]) / grid_n as f64;
            match self.periods[axis] {
                Some(_) => {
                    lo[axis] += phase * h0;
                    hi[axis] += phase * h0;
                }
                None => {
                    // asymmetric so that symmetric configurations stay off grid lines
                    lo[axis] -= phase * h0;
                    hi[axis] += 0.5 * phase * h0;
                }
            }
        }
        let hx = (hi[0] - lo[0]) / grid_n as f64;
        let hy = (hi[1] - lo[1]) / grid_n as f64;
        let cells: Vec<([f64; 2], [f64; 2])> = (0..grid_n * grid_n)
            .map(|k| {
                let (i, j) = (k % grid_n, k / grid_n);
                let a = [lo[0] + i as f64 * hx, lo[1] + j as f64 * hy];
                let b = [
                    if i + 1 == grid_n { hi[0] } else { lo[0] + (i + 1) as f64 * hx },
                    if j + 1 == grid_n { hi[1] } else { lo[1] + (j + 1) as f64 * hy },
                ];
                (a, b)
            })
            .collect();
        let found: Vec<CellResult> = cells
            .par_iter()
            .map(|&(a, b)| match self.count(a, b) {
                CellCount::Ambiguous => Err(self.ambiguous(a, b)),
                CellCount::Known(k) => {
                    let mut out = Vec::new();
                    self.refine(a, b, k, &mut out)?;
                    Ok(out)
                }
            })
            .collect();
        let mut all = Vec::new();
        for r in found {
            all.extend(r?);
        }
        Ok(all)
    }
}

/// All zeros of `fz` in one chart rectangle, classified. Periodic axes of
/// the region must span exactly one period.
pub fn locate_zeros(
    model: &GreenModel,
    region: &SearchRegion,
    grid_n: usize,
    tol: &Tolerances,
) -> Result<Vec<CriticalPoint>, DynamicsError> {
    let grid_n = grid_n.max(16);
    let scan = Scan {
        model,
        chart: region.chart,
        periods: model.periods(region.chart),
        poles: model.fz_poles(region.chart),
        scale: (region.hi[0] - region.lo[0]).max(region.hi[1] - region.lo[1]),
        tol,
    };
    let mut last_err = None;
    for attempt in 0..=tol.winding_retries {
        let phase = (0.1234 * (attempt + 1) as f64).fract();
        match scan.run(region, grid_n, phase) {
            Ok(raw) => {
                let mut out = Vec::new();
                for (z, _k, _) in raw {
                    let p = model.canonical(ChartPoint::new(region.chart, z));
                    if !model.in_domain(p) {
                        continue;
                    }
                    out.push(classify_zero(model, p, tol)?);
                }
                return Ok(dedupe(model, out, tol));
            }
            Err(e @ DynamicsError::WindingAmbiguous { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Zeros over every chart region of the model, merged across overlaps.
pub fn locate_all_zeros(model: &GreenModel, grid_n: usize, tol: &Tolerances) -> Result<Vec<CriticalPoint>, DynamicsError> {
    let mut all = Vec::new();
    for region in model.default_regions() {
        all.extend(locate_zeros(model, &region, grid_n, tol)?);
    }
    Ok(dedupe(model, all, tol))
}

fn chart_rank(chart: ChartId) -> u8 {
    match chart {
        ChartId::Primary => 0,
        ChartId::Infinity => 1,
        ChartId::EndMinus => 2,
        ChartId::EndPlus => 3,
    }
}

fn dedupe(model: &GreenModel, mut zeros: Vec<CriticalPoint>, tol: &Tolerances) -> Vec<CriticalPoint> {
    zeros.sort_by(|a, b| {
        chart_rank(a.point.chart)
            .cmp(&chart_rank(b.point.chart))
            .then(a.point.z.re.total_cmp(&b.point.z.re))
            .then(a.point.z.im.total_cmp(&b.point.z.im))
    });
    let mut out: Vec<CriticalPoint> = Vec::new();
    for z in zeros {
        if !out.iter().any(|k| model.distance(k.point, z.point) < tol.delta_match) {
            out.push(z);
        }
    }
    out
}

/// Degree, index and sector phase of the zero at `p`.
pub fn classify_zero(model: &GreenModel, p: ChartPoint, tol: &Tolerances) -> Result<CriticalPoint, DynamicsError> {
    let residual = model.fz_extended(p.chart, p.z).map_or(f64::INFINITY, |v| v.norm());
    let mut found = None;
    for r in [tol.r_cls, 0.5 * tol.r_cls, 2.0 * tol.r_cls] {
        if let Some(w) = winding_on_circle(model, p, r, tol.max_bisections) {
            if w >= 1 {
                found = Some((w, r));
                break;
            }
        }
    }
    let Some((w, r)) = found else {
        return Err(DynamicsError::DegenerateCircle(p));
    };
    let m = (w + 1) as u32;
    let g0 = model.evaluate(p)?.value;
    let mut coef = Complex64::new(0.0, 0.0);
    for k in 0..CIRCLE_VERTICES {
        let phi = 2.0 * PI * k as f64 / CIRCLE_VERTICES as f64;
        let q = ChartPoint::new(p.chart, p.z + Complex64::from_polar(r, phi));
        let g = model.evaluate(q)?.value - g0;
        coef += Complex64::from_polar(g, -(m as f64) * phi);
    }
    coef *= 2.0 / CIRCLE_VERTICES as f64;
    let end = model
        .ends()
        .iter()
        .find(|e| e.removable() && model.distance(e.point, p) < tol.delta_match)
        .map(|e| e.index);
    Ok(CriticalPoint {
        point: p,
        m,
        index: 1 - m as i32,
        value: g0,
        at_removable_end: end.is_some(),
        end,
        sector_phase: coef.arg(),
        amplitude: coef.norm() / r.powi(m as i32),
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixDirection {
    pub k: u32,
    pub angle: f64,
    /// Stable branches flow into the zero; `G` decreases away from it.
    pub stable: bool,
}

/// The `2m` directions `(k pi - alpha) / m`, odd `k` stable.
pub fn separatrix_directions(cp: &CriticalPoint) -> Vec<SeparatrixDirection> {
    let m = cp.m as f64;
    (1..=2 * cp.m)
        .map(|k| SeparatrixDirection {
            k,
            angle: (k as f64 * PI - cp.sector_phase) / m,
            stable: k % 2 == 1,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::make_model;
    use crate::surfaces::SurfaceSpec;

    #[test]
    fn winding_counts_polynomial_roots() {
        let f = |z: Complex64| Some(z * z * (z - 2.0));
        let square = rect_vertices([-1.0, -1.0], [1.0, 1.0]);
        assert_eq!(loop_winding(&f, &square, 20), Some(2));
        let big = rect_vertices([-3.0, -3.0], [3.0, 3.0]);
        assert_eq!(loop_winding(&f, &big, 20), Some(3));
        let pole = |z: Complex64| Some((z - 0.5).inv());
        assert_eq!(loop_winding(&pole, &square, 20), Some(-1));
    }

    #[test]
    fn winding_rejects_zero_on_edge() {
        let f = |z: Complex64| Some(z - 1.0);
        assert_eq!(loop_winding(&f, &rect_vertices([-1.0, -1.0], [1.0, 1.0]), 20), None);
    }

    #[test]
    fn separatrix_angles_m2() {
        let cp = CriticalPoint {
            point: ChartPoint::primary(0.0, 0.0),
            m: 2,
            index: -1,
            value: 0.0,
            at_removable_end: false,
            end: None,
            sector_phase: 0.0,
            amplitude: 1.0,
            residual: 0.0,
        };
        let d = separatrix_directions(&cp);
        let angles: Vec<f64> = d.iter().map(|s| s.angle).collect();
        let expect = [PI / 2.0, PI, 1.5 * PI, 2.0 * PI];
        for (a, b) in angles.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(d.iter().filter(|s| s.stable).count(), 2);
        assert!(d[0].stable && !d[1].stable);
    }

    #[test]
    fn cylinder_g1_saddle_classified() {
        let m = make_model(&SurfaceSpec::cylinder_g1([0.2, 0.5])).unwrap();
        let cp = classify_zero(&m, ChartPoint::primary(0.2, 0.5 + PI), &Tolerances::default()).unwrap();
        assert_eq!((cp.m, cp.index), (2, -1));
        // G decreases along z, so the stable directions are horizontal
        let stable: Vec<f64> = separatrix_directions(&cp).iter().filter(|s| s.stable).map(|s| s.angle).collect();
        for a in stable {
            assert!(a.sin().abs() < 1e-8, "{a}");
        }
    }

    #[test]
    fn plane_has_no_zeros() {
        let m = make_model(&SurfaceSpec::plane([0.0, 0.0])).unwrap();
        assert!(locate_all_zeros(&m, 16, &Tolerances::default()).unwrap().is_empty());
    }
}
