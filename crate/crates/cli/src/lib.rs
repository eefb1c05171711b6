//! The `analyze` pipeline: configuration, report and plot exports.

pub mod config;
pub mod plots;
pub mod report;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use green_skeleton::dynamics::{hopf_budget, locate_all_zeros, pole_node_check, DynamicsError};
use green_skeleton::exhaustion::{
    build_mesh, disk_exhaustion, li_tam_sequence, model_relative_error, puncture_exhaustion, solution_csv, ExhaustionError,
    ExhaustionSequence, Mesh, MeshFamily,
};
use green_skeleton::green::{make_model, monotonicity_check, GreenError, GreenModel, MonotonicityOptions};
use green_skeleton::skeleton::{basin_sample, build_skeleton, verify_report, BasinOptions, BasinRaster, Variant};
use green_skeleton::surfaces::{validate_spec, Family, SurfaceError, SurfaceSpec};
use thiserror::Error;

pub use config::RunConfig;
pub use plots::{emit_plots, PlotOptions};
pub use report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("surface error: {0}")]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("mesh exhaustion failed: {0}")]
    Exhaustion(#[from] ExhaustionError),
    #[error("{0}")]
    Analysis(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum VariantChoice {
    Open,
    Compactified,
    #[default]
    Both,
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub emit_svg: bool,
    pub emit_raster: bool,
    pub seed: Option<u64>,
    pub variant: VariantChoice,
    pub mesh_exhaust: bool,
}

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn output_dir(opts: &AnalyzeOptions, cfg: &RunConfig) -> PathBuf {
    if let Some(out) = &opts.out {
        return out.clone();
    }
    let base = opts.config.parent().unwrap_or(Path::new("."));
    match &cfg.output.dir {
        Some(dir) if dir.is_absolute() => dir.clone(),
        Some(dir) => base.join(dir),
        None => PathBuf::from("out"),
    }
}

/// Monotonicity radii that stay inside the surface.
fn monotonicity_radii(model: &GreenModel) -> Vec<f64> {
    match model.family() {
        Family::HyperbolicDisk => {
            let p = model.spec().pole;
            let room = 1.0 - p[0].hypot(p[1]);
            vec![0.2 * room, 0.4 * room, 0.6 * room]
        }
        _ => vec![0.5, 1.0, 2.0],
    }
}

struct MeshRun {
    mesh: Mesh,
    seq: ExhaustionSequence,
    relative_error: f64,
}

/// Shrinking puncture exhaustion on the torus, growing disks on the disk.
fn mesh_exhaustion(model: &GreenModel, resolution: usize) -> Result<MeshRun, CliError> {
    let spec = model.spec();
    let pole = spec.pole;
    let unsupported = |message: &str| CliError::Config {
        key: "--mesh-exhaust".into(),
        message: message.into(),
    };
    let (mesh, domains, compact) = match spec.family {
        Family::PuncturedTorus => {
            if spec.lattice_periods() != [2.0 * PI, 2.0 * PI] || spec.punctures.len() != 1 {
                return Err(unsupported("torus mesh exhaustion needs the square lattice and one puncture"));
            }
            let puncture = config::finite_punctures(spec)[0];
            let mesh = build_mesh(MeshFamily::Torus, resolution)?;
            let domains = puncture_exhaustion(&mesh, puncture, &[1.6, 0.8, 0.4, 0.2, 0.0]);
            let compact: Vec<bool> = (0..mesh.vertices.len())
                .map(|v| mesh.distance_to(v, puncture) >= 2.0 && mesh.distance_to(v, pole) >= 0.5)
                .collect();
            (mesh, domains, compact)
        }
        Family::HyperbolicDisk => {
            let r0 = pole[0].hypot(pole[1]);
            if r0 > 0.6 {
                return Err(unsupported("disk mesh exhaustion needs |pole| <= 0.6"));
            }
            let mesh = build_mesh(MeshFamily::Disk, resolution)?;
            let r1 = r0 + 0.3;
            let radii: Vec<f64> = (0..4).map(|k| r1 + (1.0 - r1) * k as f64 / 3.0).collect();
            let domains = disk_exhaustion(&mesh, &radii);
            let compact: Vec<bool> = (0..mesh.vertices.len())
                .map(|v| {
                    let p = mesh.vertices[v];
                    p[0].hypot(p[1]) < r1 - 0.1 && mesh.distance_to(v, pole) >= 0.1
                })
                .collect();
            (mesh, domains, compact)
        }
        _ => return Err(unsupported("mesh exhaustion is available for the torus and the disk")),
    };
    let pole_vertex = mesh.nearest(pole);
    let reference = (0..mesh.vertices.len())
        .filter(|&v| compact[v])
        .max_by(|&a, &b| mesh.distance_to(a, pole).total_cmp(&mesh.distance_to(b, pole)))
        .ok_or_else(|| unsupported("reference set is empty"))?;
    let seq = li_tam_sequence(&mesh, &domains, pole_vertex, reference, &compact, 1e-2)?;
    // compare against the model whose pole sits on the source vertex
    let snapped = make_model(&SurfaceSpec {
        pole: mesh.vertices[pole_vertex],
        ..spec.clone()
    })?;
    let relative_error = model_relative_error(&mesh, &seq.limit(), &compact, &snapped)?;
    Ok(MeshRun {
        mesh,
        seq,
        relative_error,
    })
}

/// Runs the full pipeline and writes the report (and any requested plots).
pub fn run_analyze(opts: &AnalyzeOptions) -> Result<Outcome, CliError> {
    let cfg = RunConfig::load(&opts.config)?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let tol = cfg.tolerances;
    let spec = cfg.surface.to_spec()?;
    let topology = validate_spec(&spec)?;
    let model = make_model(&spec)?;

    let zeros = locate_all_zeros(&model, cfg.grids.zero_grid, &tol)?;
    let skeleton = build_skeleton(&model, &zeros, Variant::Compactified, &tol);
    let open_skeleton = match opts.variant {
        VariantChoice::Compactified => None,
        _ => Some(build_skeleton(&model, &zeros, Variant::Open, &tol)),
    };
    let checks = verify_report(&model, &topology, &zeros, &skeleton, open_skeleton.as_ref());

    let raster: Option<BasinRaster> = (cfg.grids.basin_grid > 0).then(|| {
        let bopts = BasinOptions {
            grid_n: cfg.grids.basin_grid,
            window: cfg.grids.basin_window,
            jitter_seed: Some(seed),
            ..BasinOptions::default()
        };
        basin_sample(&model, &zeros, &bopts, &tol)
    });
    let monotonicity = (cfg.grids.monotonicity_samples > 0).then(|| {
        let mopts = MonotonicityOptions {
            radii: monotonicity_radii(&model),
            n_exterior: cfg.grids.monotonicity_samples,
            seed,
            ..MonotonicityOptions::default()
        };
        (&monotonicity_check(&model, &mopts)).into()
    });
    let pole_node = (cfg.grids.pole_node_samples > 0)
        .then(|| pole_node_check(&model, 0.05, cfg.grids.pole_node_samples, seed, &tol));
    let mesh_run = if opts.mesh_exhaust {
        Some(mesh_exhaustion(&model, cfg.grids.mesh_resolution)?)
    } else {
        None
    };

    let report = Report {
        schema_version: report::REPORT_SCHEMA_VERSION,
        surface: spec,
        seed,
        hopf: hopf_budget(&zeros, &topology),
        topology,
        zeros,
        skeleton,
        open_skeleton,
        checks,
        basin: raster.as_ref().map(Into::into),
        monotonicity,
        pole_node,
        exhaustion: mesh_run.as_ref().map(|r| report::ExhaustionSummary {
            mesh: r.mesh.family,
            resolution: r.mesh.resolution,
            mesh_pole: r.mesh.vertices[r.seq.pole_vertex],
            table: r.seq.convergence_table(),
            differences_decreasing: r.seq.differences_decreasing(),
            relative_error: r.relative_error,
        }),
    };

    let out_dir = output_dir(opts, &cfg);
    std::fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
    let report_path = out_dir.join(&cfg.output.report);
    std::fs::write(&report_path, report.to_json()).map_err(io_err(&report_path))?;
    let mut files = vec![report_path];
    if let Some(run) = &mesh_run {
        let csv = out_dir.join("exhaustion_limit.csv");
        std::fs::write(&csv, solution_csv(&run.mesh, &run.seq.limit())).map_err(io_err(&csv))?;
        let table = out_dir.join("exhaustion_convergence.json");
        let json = serde_json::to_string_pretty(&run.seq.convergence_table()).expect("table serializes") + "\n";
        std::fs::write(&table, json).map_err(io_err(&table))?;
        files.extend([csv, table]);
    }
    let plot_opts = PlotOptions {
        svg: opts.emit_svg,
        trajectories: opts.emit_svg,
    };
    let basin = if opts.emit_raster { raster.as_ref() } else { None };
    files.extend(emit_plots(&report, basin, &out_dir, plot_opts)?);
    Ok(Outcome { report, out_dir, files })
}
