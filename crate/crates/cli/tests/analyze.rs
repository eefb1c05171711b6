use std::path::{Path, PathBuf};
use std::process::Command;

use greenskel::{run_analyze, AnalyzeOptions, CliError, Report, VariantChoice};
use green_skeleton::surfaces::SurfaceError;
use serde_json::{json, Value};

fn repo_config(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Writes `cfg` with small sampling grids into `dir`.
fn write_config(dir: &Path, mut cfg: Value) -> PathBuf {
    let grids = cfg.as_object_mut().unwrap().entry("grids").or_insert(json!({}));
    let g = grids.as_object_mut().unwrap();
    g.insert("basin_grid".into(), json!(24));
    g.insert("monotonicity_samples".into(), json!(300));
    g.insert("pole_node_samples".into(), json!(8));
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn analyze(dir: &Path, cfg: Value, svg: bool) -> Result<greenskel::Outcome, CliError> {
    let config = write_config(dir, cfg);
    run_analyze(&AnalyzeOptions {
        config,
        out: Some(dir.join("out")),
        emit_svg: svg,
        emit_raster: svg,
        ..AnalyzeOptions::default()
    })
}

fn count(text: &str, needle: &str) -> usize {
    text.matches(needle).count()
}

#[test]
fn torus_report_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = analyze(dir.path(), repo_config("torus.json"), true).unwrap();
    assert_eq!(out.exit_code(), 0);
    let r = &out.report;
    assert_eq!(r.zeros.len(), 2);
    assert_eq!(r.skeleton.beta0, Some(1));
    assert_eq!(r.skeleton.beta1, Some(2));
    assert_eq!(r.open_skeleton.as_ref().unwrap().beta1, Some(1));
    let svg = std::fs::read_to_string(out.out_dir.join("skeleton.svg")).unwrap();
    assert_eq!(count(&svg, r#"class="edge""#), r.skeleton.edges.len());
    assert_eq!(count(&svg, r#"class="edge""#), 4);
    assert_eq!(count(&svg, r#"class="vertex""#), 3);
    assert_eq!(count(&svg, r#"class="pole""#), 1);
    let csv = std::fs::read_to_string(out.out_dir.join("trajectories/edge_000.csv")).unwrap();
    assert!(csv.starts_with("t,x1,x2,G\n"));
    let pgm = std::fs::read(out.out_dir.join("basin.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n24 24\n255\n"));
    assert_eq!(pgm.len(), b"P5\n24 24\n255\n".len() + 24 * 24);
}

#[test]
fn outputs_are_byte_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = analyze(a.path(), repo_config("torus.json"), true).unwrap();
    let ob = analyze(b.path(), repo_config("torus.json"), true).unwrap();
    assert_eq!(oa.files.len(), ob.files.len());
    for (fa, fb) in oa.files.iter().zip(&ob.files) {
        assert_eq!(fa.file_name(), fb.file_name());
        assert_eq!(std::fs::read(fa).unwrap(), std::fs::read(fb).unwrap(), "{}", fa.display());
    }
}

#[test]
fn sphere_two_thirds_single_zero() {
    // numerator of the gradient, -z/3 - 1, vanishes at -3
    let root = -1.0 / (1.0 / 3.0);
    let dir = tempfile::tempdir().unwrap();
    let out = analyze(dir.path(), repo_config("sphere_two_thirds.json"), false).unwrap();
    assert_eq!(out.exit_code(), 0);
    assert_eq!(out.report.zeros.len(), 1);
    let z = out.report.zeros[0].point.z;
    assert!((z.re - root).abs() < 1e-8 && z.im.abs() < 1e-8, "{z}");
}

#[test]
fn plane_svg_has_pole_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = analyze(dir.path(), repo_config("plane.json"), true).unwrap();
    let svg = std::fs::read_to_string(out.out_dir.join("skeleton.svg")).unwrap();
    assert_eq!(count(&svg, r#"class="edge""#), 0);
    assert_eq!(count(&svg, r#"class="vertex""#), 0);
    assert_eq!(count(&svg, r#"class="pole""#), 1);
}

#[test]
fn reports_round_trip() {
    for name in [
        "torus.json",
        "plane.json",
        "cylinder_g1.json",
        "cylinder_g2.json",
        "disk.json",
        "sphere_two_thirds.json",
        "sphere_pair.json",
        "sphere_cube_roots.json",
    ] {
        let dir = tempfile::tempdir().unwrap();
        let out = analyze(dir.path(), repo_config(name), false).unwrap();
        assert_eq!(out.exit_code(), 0, "{name}");
        let text = std::fs::read_to_string(&out.files[0]).unwrap();
        let back = Report::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(back.to_json(), text, "{name}");
    }
}

#[test]
fn weight_sum_error() {
    let mut cfg = repo_config("sphere_two_thirds.json");
    cfg["surface"]["punctures"][0][2] = json!(0.5666666666666667);
    let dir = tempfile::tempdir().unwrap();
    match analyze(dir.path(), cfg, false) {
        Err(CliError::Surface(SurfaceError::WeightSum { sum, .. })) => assert!((sum - 0.9).abs() < 1e-9),
        other => panic!("{other:?}"),
    }
}

#[test]
fn failed_check_exits_two() {
    let mut cfg = repo_config("torus.json");
    cfg["tolerances"] = json!({ "max_steps": 3 });
    let dir = tempfile::tempdir().unwrap();
    let out = analyze(dir.path(), cfg, false).unwrap();
    assert!(!out.report.checks.all_pass);
    assert_eq!(out.exit_code(), 2);
}

#[test]
fn compactified_variant_omits_open_graph() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), repo_config("torus.json"));
    let out = run_analyze(&AnalyzeOptions {
        config,
        out: Some(dir.path().join("out")),
        variant: VariantChoice::Compactified,
        ..AnalyzeOptions::default()
    })
    .unwrap();
    assert!(out.report.open_skeleton.is_none());
    assert!(out.report.checks.claim("open_skeleton_rank").is_none());
}

#[test]
fn mesh_exhaustion_on_disk() {
    let mut cfg = repo_config("disk.json");
    cfg["grids"] = json!({ "mesh_resolution": 32 });
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), cfg);
    let out = run_analyze(&AnalyzeOptions {
        config,
        out: Some(dir.path().join("out")),
        mesh_exhaust: true,
        ..AnalyzeOptions::default()
    })
    .unwrap();
    let ex = out.report.exhaustion.as_ref().unwrap();
    assert_eq!(ex.table.rows.len(), 4);
    assert!(ex.relative_error < 0.05, "{}", ex.relative_error);
    let csv = std::fs::read_to_string(out.out_dir.join("exhaustion_limit.csv")).unwrap();
    assert!(csv.starts_with("vertex,x1,x2,value\n"));
    assert!(out.out_dir.join("exhaustion_convergence.json").exists());
}

fn binary(dir: &Path, cfg: Value) -> std::process::Output {
    let config = write_config(dir, cfg);
    Command::new(env!("CARGO_BIN_EXE_greenskel"))
        .args(["analyze", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(binary(dir.path(), repo_config("plane.json")).status.code(), Some(0));

    let mut cfg = repo_config("plane.json");
    cfg["surface"]["colour"] = json!("red");
    let out = binary(dir.path(), cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    let mut cfg = repo_config("torus.json");
    cfg["tolerances"] = json!({ "max_steps": 3 });
    assert_eq!(binary(dir.path(), cfg).status.code(), Some(2));
}
