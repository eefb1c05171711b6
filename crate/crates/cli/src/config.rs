//! Run configuration.

use std::path::{Path, PathBuf};

use green_skeleton::dynamics::Tolerances;
use green_skeleton::green::Window;
use green_skeleton::surfaces::{EndLocation, Family, HyperbolicEnd, Puncture, SurfaceSpec, SQUARE_LATTICE};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub family: Family,
    /// Checked against the family when present.
    #[serde(default)]
    pub genus: Option<u32>,
    /// Finite punctures `[x1, x2, weight]` (sphere and torus).
    #[serde(default)]
    pub punctures: Vec<[f64; 3]>,
    /// Weight of the point at infinity (sphere only).
    #[serde(default)]
    pub infinity_weight: Option<f64>,
    /// Weights of the ends `z -> -inf` and `z -> +inf` (cylinder only).
    #[serde(default)]
    pub end_weights: Option<[f64; 2]>,
    /// Rectangular periods (torus only).
    #[serde(default)]
    pub lattice: Option<[f64; 2]>,
    pub pole: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// Cells per axis of the zero search.
    pub zero_grid: usize,
    /// Basin raster size per axis; 0 skips basin sampling.
    pub basin_grid: usize,
    pub basin_window: Option<Window>,
    /// Exterior samples of the monotonicity check; 0 skips it.
    pub monotonicity_samples: usize,
    /// Circle samples of the pole node check; 0 skips it.
    pub pole_node_samples: usize,
    /// Mesh resolution used by `--mesh-exhaust`.
    pub mesh_resolution: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            zero_grid: 32,
            basin_grid: 64,
            basin_window: None,
            monotonicity_samples: 2000,
            pole_node_samples: 32,
            mesh_resolution: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; relative paths resolve against the config file.
    pub dir: Option<PathBuf>,
    pub report: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            report: "report.json".into(),
        }
    }
}

fn config_error(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| config_error("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_error(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if let Some(&bad) = self.tolerances.invalid_fields().first() {
            return Err(config_error(&format!("tolerances.{bad}"), "must be positive and finite"));
        }
        if self.grids.zero_grid == 0 {
            return Err(config_error("grids.zero_grid", "must be positive"));
        }
        if self.output.report.is_empty() {
            return Err(config_error("output.report", "must not be empty"));
        }
        self.surface.to_spec().map(|_| ())
    }
}

impl SurfaceConfig {
    fn reject(&self, present: bool, key: &str) -> Result<(), CliError> {
        if present {
            Err(config_error(
                &format!("surface.{key}"),
                format!("not used by family {:?}", self.family),
            ))
        } else {
            Ok(())
        }
    }

    pub fn to_spec(&self) -> Result<SurfaceSpec, CliError> {
        if !self.pole.iter().all(|v| v.is_finite()) {
            return Err(config_error("surface.pole", "must be finite"));
        }
        let expected_genus = match self.family {
            Family::PuncturedTorus => 1,
            _ => 0,
        };
        if let Some(g) = self.genus {
            if g != expected_genus {
                return Err(config_error(
                    "surface.genus",
                    format!("family {:?} has genus {expected_genus}, got {g}", self.family),
                ));
            }
        }
        let finite: Vec<(f64, f64, f64)> = self.punctures.iter().map(|p| (p[0], p[1], p[2])).collect();
        let spec = match self.family {
            Family::Plane | Family::HyperbolicDisk => {
                self.reject(!self.punctures.is_empty(), "punctures")?;
                self.reject(self.infinity_weight.is_some(), "infinity_weight")?;
                self.reject(self.end_weights.is_some(), "end_weights")?;
                self.reject(self.lattice.is_some(), "lattice")?;
                if self.family == Family::Plane {
                    SurfaceSpec::plane(self.pole)
                } else {
                    SurfaceSpec::hyperbolic_disk(self.pole)
                }
            }
            Family::Cylinder => {
                self.reject(!self.punctures.is_empty(), "punctures")?;
                self.reject(self.infinity_weight.is_some(), "infinity_weight")?;
                self.reject(self.lattice.is_some(), "lattice")?;
                let [minus, plus] = self.end_weights.unwrap_or([0.5, 0.5]);
                SurfaceSpec::cylinder(self.pole, minus, plus)
            }
            Family::PuncturedSphere => {
                self.reject(self.end_weights.is_some(), "end_weights")?;
                self.reject(self.lattice.is_some(), "lattice")?;
                SurfaceSpec::punctured_sphere(self.pole, &finite, self.infinity_weight)
            }
            Family::PuncturedTorus => {
                self.reject(self.infinity_weight.is_some(), "infinity_weight")?;
                self.reject(self.end_weights.is_some(), "end_weights")?;
                let mut spec = SurfaceSpec::punctured_torus(self.pole, &finite);
                spec.lattice = Some(self.lattice.unwrap_or(SQUARE_LATTICE));
                spec
            }
            Family::Mesh => SurfaceSpec {
                family: Family::Mesh,
                genus: 0,
                punctures: self.punctures.iter().map(|p| Puncture::at(p[0], p[1], p[2])).collect(),
                hyperbolic_ends: Vec::<HyperbolicEnd>::new(),
                lattice: None,
                pole: self.pole,
            },
        };
        Ok(spec)
    }
}

/// Puncture coordinates of a spec, for display.
pub fn finite_punctures(spec: &SurfaceSpec) -> Vec<[f64; 2]> {
    spec.punctures
        .iter()
        .filter_map(|p| match p.location {
            EndLocation::Point { x1, x2 } => Some([x1, x2]),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TORUS: &str = r#"{
        "schema_version": 1,
        "surface": {"family": "punctured_torus", "genus": 1, "punctures": [[0.0, 3.141592653589793, 1.0]], "pole": [0.0, 0.0]}
    }"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = RunConfig::from_json(TORUS).unwrap();
        assert_eq!(cfg.grids, Grids::default());
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.surface.to_spec().unwrap().genus, 1);
    }

    #[test]
    fn unknown_key_named() {
        let text = TORUS.replace("\"genus\": 1,", "\"genus\": 1, \"colour\": 3,");
        let err = RunConfig::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn unknown_tolerance_named() {
        let text = TORUS.replace("\"schema_version\": 1,", "\"schema_version\": 1, \"tolerances\": {\"newton\": 1.0},");
        assert!(RunConfig::from_json(&text).unwrap_err().to_string().contains("newton"));
    }

    #[test]
    fn nonpositive_tolerance_rejected() {
        let text = TORUS.replace("\"schema_version\": 1,", "\"schema_version\": 1, \"tolerances\": {\"r_cls\": 0.0},");
        match RunConfig::from_json(&text) {
            Err(CliError::Config { key, .. }) => assert_eq!(key, "tolerances.r_cls"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_genus_rejected() {
        let text = TORUS.replace("\"genus\": 1", "\"genus\": 2");
        match RunConfig::from_json(&text) {
            Err(CliError::Config { key, .. }) => assert_eq!(key, "surface.genus"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_version_checked() {
        let text = TORUS.replace("\"schema_version\": 1", "\"schema_version\": 7");
        match RunConfig::from_json(&text) {
            Err(CliError::Config { key, .. }) => assert_eq!(key, "schema_version"),
            other => panic!("{other:?}"),
        }
    }
}
