//! Zeros of the gradient field and its (regularized) flow.

mod flow;
mod zeros;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::green::GreenError;
use crate::surfaces::{ChartId, ChartPoint, TopologyInfo};

pub use flow::{
    integrate_flow, pole_node_check, Direction, FlowStops, PoleNodeReport, Terminal, Trajectory, TrajectorySample,
    ZeroApproach,
};
pub use zeros::{
    classify_zero, locate_all_zeros, locate_zeros, loop_winding, separatrix_directions, winding_on_circle,
    SeparatrixDirection,
};

/// Numerical knobs shared by zero finding, flow integration and skeleton
/// assembly. Lengths are in chart units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub newton_tol: f64,
    pub r_cls: f64,
    pub zero_capture: f64,
    pub delta_match: f64,
    pub g_floor: f64,
    pub eps_bdry: f64,
    pub max_steps: u64,
    pub kappa: f64,
    pub eps_sep: f64,
    pub r_pole: f64,
    pub r_end: f64,
    pub r_excl: f64,
    pub max_step: f64,
    pub step_tol: f64,
    pub h_min: f64,
    pub winding_retries: u32,
    pub max_bisections: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            r_cls: 1e-3,
            zero_capture: 1e-6,
            delta_match: 1e-5,
            g_floor: -20.0 / (2.0 * std::f64::consts::PI),
            eps_bdry: 1e-4,
            max_steps: 1_000_000,
            kappa: 1e-9,
            eps_sep: 1e-4,
            r_pole: 1e-3,
            r_end: 1e-6,
            r_excl: 1e-2,
            max_step: 0.05,
            step_tol: 1e-10,
            h_min: 1e-14,
            winding_retries: 4,
            max_bisections: 24,
        }
    }
}

impl Tolerances {
    /// Names of fields holding invalid values.
    pub fn invalid_fields(&self) -> Vec<&'static str> {
        let positive = [
            ("newton_tol", self.newton_tol),
            ("r_cls", self.r_cls),
            ("zero_capture", self.zero_capture),
            ("delta_match", self.delta_match),
            ("eps_bdry", self.eps_bdry),
            ("kappa", self.kappa),
            ("eps_sep", self.eps_sep),
            ("r_pole", self.r_pole),
            ("r_end", self.r_end),
            ("r_excl", self.r_excl),
            ("max_step", self.max_step),
            ("step_tol", self.step_tol),
            ("h_min", self.h_min),
        ];
        let mut bad: Vec<&'static str> = positive
            .iter()
            .filter(|(_, v)| !(v.is_finite() && *v > 0.0))
            .map(|&(k, _)| k)
            .collect();
        if !(self.g_floor.is_finite() && self.g_floor < 0.0) {
            bad.push("g_floor");
        }
        if self.max_steps == 0 {
            bad.push("max_steps");
        }
        if self.max_bisections == 0 {
            bad.push("max_bisections");
        }
        bad
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error("winding number undetermined in {chart:?} cell [{lo:?}, {hi:?}] after retries")]
    WindingAmbiguous { chart: ChartId, lo: [f64; 2], hi: [f64; 2] },
    #[error("Newton iteration diverged near {point:?} (|fz| = {residual:.3e})")]
    NewtonDiverged { point: ChartPoint, residual: f64 },
    #[error("fz does not wind around {0:?} on any test radius")]
    DegenerateCircle(ChartPoint),
}

/// A zero of the gradient, classified by the leading harmonic term
/// `C Re[e^{i alpha} u^m]` of `G - G(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub point: ChartPoint,
    pub m: u32,
    pub index: i32,
    pub value: f64,
    pub at_removable_end: bool,
    /// Puncture index of the removable end, when `at_removable_end`.
    pub end: Option<usize>,
    pub sector_phase: f64,
    pub amplitude: f64,
    pub residual: f64,
}

impl CriticalPoint {
    pub fn is_morse(&self) -> bool {
        self.m == 2
    }
}

/// Both sides of `1 + sum (1 - m) + lambda' = 2 - 2 nu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HopfBudget {
    pub lhs: i64,
    pub rhs: i64,
}

impl HopfBudget {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub fn hopf_budget(zeros: &[CriticalPoint], topo: &TopologyInfo) -> HopfBudget {
    let indices: i64 = zeros.iter().map(|z| z.index as i64).sum();
    HopfBudget {
        lhs: 1 + indices + topo.lambda_prime as i64,
        rhs: topo.euler_char,
    }
}
