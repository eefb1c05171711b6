//! Grid sampling of the basin of attraction of the pole.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate_flow, CriticalPoint, Direction, FlowStops, Terminal, Tolerances};
use crate::green::{GreenModel, Window};
use crate::surfaces::ChartPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasinLabel {
    Pole,
    Zero,
    End,
    Boundary,
    Escape,
    Undecided,
    /// Within `r_excl` of a singular point or outside the domain.
    Excluded,
}

impl BasinLabel {
    /// Gray level used in raster exports.
    pub fn gray(self) -> u8 {
        match self {
            BasinLabel::Pole => 255,
            BasinLabel::Zero => 0,
            BasinLabel::End => 64,
            BasinLabel::Boundary => 96,
            BasinLabel::Escape => 128,
            BasinLabel::Undecided => 160,
            BasinLabel::Excluded => 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinOptions {
    pub grid_n: usize,
    /// Defaults to the model's fundamental window.
    pub window: Option<Window>,
    /// Pseudo-time budget per point.
    pub t_max: f64,
    /// Seeded sub-cell jitter; cell centres when `None`.
    pub jitter_seed: Option<u64>,
}

impl Default for BasinOptions {
    fn default() -> Self {
        Self {
            grid_n: 200,
            window: None,
            t_max: 1e3,
            jitter_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinRaster {
    pub grid_n: usize,
    pub window: Window,
    /// Row-major, row `j` at the `j`-th `x2` level from the bottom.
    pub labels: Vec<BasinLabel>,
    pub fraction_to_pole: f64,
    pub sampled: usize,
}

impl BasinRaster {
    pub fn count(&self, label: BasinLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Flows every grid point forward and labels it by its terminal.
/// Integration uses the looser of `tol` and a basin-grade step control.
pub fn basin_sample(model: &GreenModel, zeros: &[CriticalPoint], opts: &BasinOptions, tol: &Tolerances) -> BasinRaster {
    let n = opts.grid_n.max(1);
    let window = opts.window.unwrap_or_else(|| model.default_window());
    let coarse = Tolerances {
        step_tol: tol.step_tol.max(1e-7),
        max_step: tol.max_step.max(0.25),
        ..*tol
    };
    let hx = (window.hi[0] - window.lo[0]) / n as f64;
    let hy = (window.hi[1] - window.lo[1]) / n as f64;
    let offsets: Vec<(f64, f64)> = match opts.jitter_seed {
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n * n).map(|_| (rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9))).collect()
        }
        None => vec![(0.5, 0.5); n * n],
    };
    let singular: Vec<ChartPoint> = std::iter::once(model.pole())
        .chain(model.ends().iter().filter(|e| !e.removable()).map(|e| e.point))
        .collect();
    let stops = FlowStops {
        zeros,
        window: None,
        sparse: true,
        t_max: Some(opts.t_max),
    };
    let labels: Vec<BasinLabel> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % n, k / n);
            let (ox, oy) = offsets[k];
            let p = ChartPoint::primary(window.lo[0] + (i as f64 + ox) * hx, window.lo[1] + (j as f64 + oy) * hy);
            if !model.in_domain(p) || model.evaluate(p).is_err() || singular.iter().any(|&s| model.distance(p, s) < tol.r_excl) {
                return BasinLabel::Excluded;
            }
            let tr = integrate_flow(model, p, Direction::Forward, &stops, &coarse);
            match tr.terminal {
                Terminal::Pole => BasinLabel::Pole,
                Terminal::Zero(_) => BasinLabel::Zero,
                Terminal::ParabolicEnd(_) => BasinLabel::End,
                Terminal::HyperbolicBoundary => BasinLabel::Boundary,
                Terminal::Escape => BasinLabel::Escape,
                Terminal::MaxSteps | Terminal::StepCollapse => BasinLabel::Undecided,
            }
        })
        .collect();
    let sampled = labels.iter().filter(|&&l| l != BasinLabel::Excluded).count();
    let to_pole = labels.iter().filter(|&&l| l == BasinLabel::Pole).count();
    BasinRaster {
        grid_n: n,
        window,
        fraction_to_pole: if sampled == 0 { 0.0 } else { to_pole as f64 / sampled as f64 },
        labels,
        sampled,
    }
}
