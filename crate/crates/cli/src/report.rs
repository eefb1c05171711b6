//! Report written by `analyze`.

use std::collections::BTreeMap;

use green_skeleton::dynamics::{CriticalPoint, HopfBudget, PoleNodeReport};
use green_skeleton::exhaustion::{ConvergenceTable, MeshFamily};
use green_skeleton::green::{MonotonicityReport, Window};
use green_skeleton::skeleton::{BasinRaster, ChecksReport, SkeletonGraph};
use green_skeleton::surfaces::{SurfaceSpec, TopologyInfo};
use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub surface: SurfaceSpec,
    pub seed: u64,
    pub topology: TopologyInfo,
    pub zeros: Vec<CriticalPoint>,
    pub hopf: HopfBudget,
    pub skeleton: SkeletonGraph,
    pub open_skeleton: Option<SkeletonGraph>,
    pub checks: ChecksReport,
    pub basin: Option<BasinSummary>,
    pub monotonicity: Option<MonotonicitySummary>,
    pub pole_node: Option<PoleNodeReport>,
    pub exhaustion: Option<ExhaustionSummary>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Process exit status: 0 when every claim passes, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.checks.all_pass {
            0
        } else {
            2
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinSummary {
    pub grid_n: usize,
    pub window: Window,
    pub fraction_to_pole: f64,
    pub sampled: usize,
    pub counts: BTreeMap<String, usize>,
}

impl From<&BasinRaster> for BasinSummary {
    fn from(r: &BasinRaster) -> Self {
        let mut counts = BTreeMap::new();
        for label in &r.labels {
            let key = serde_json::to_value(label)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            *counts.entry(key).or_insert(0) += 1;
        }
        Self {
            grid_n: r.grid_n,
            window: r.window,
            fraction_to_pole: r.fraction_to_pole,
            sampled: r.sampled,
            counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusSummary {
    pub radius: f64,
    pub circle_max: Option<f64>,
    pub exterior_max: Option<f64>,
    pub exterior_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicitySummary {
    pub radii: Vec<RadiusSummary>,
    pub worst_margin: Option<f64>,
    pub tolerance: f64,
    pub holds: bool,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl From<&MonotonicityReport> for MonotonicitySummary {
    fn from(r: &MonotonicityReport) -> Self {
        Self {
            radii: r
                .radii
                .iter()
                .map(|m| RadiusSummary {
                    radius: m.radius,
                    circle_max: finite(m.circle_max),
                    exterior_max: finite(m.exterior_max),
                    exterior_samples: m.exterior_samples,
                })
                .collect(),
            worst_margin: finite(r.worst_margin),
            tolerance: r.tolerance,
            holds: r.holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionSummary {
    pub mesh: MeshFamily,
    pub resolution: usize,
    /// Mesh vertex carrying the unit source.
    pub mesh_pole: [f64; 2],
    pub table: ConvergenceTable,
    pub differences_decreasing: bool,
    /// Mean-aligned relative error of the limit against the analytic model.
    pub relative_error: f64,
}
