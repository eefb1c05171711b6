//! SVG, PGM and CSV exports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use green_skeleton::green::{make_model, GreenModel, Window};
use green_skeleton::skeleton::{BasinRaster, SkeletonGraph};
use green_skeleton::surfaces::{ChartId, ChartPoint};

use crate::config::finite_punctures;
use crate::report::Report;
use crate::CliError;

const SIZE: f64 = 800.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlotOptions {
    pub svg: bool,
    pub trajectories: bool,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<PathBuf, CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(path.to_path_buf())
}

/// Primary-chart coordinates, where the point has them.
fn primary(model: &GreenModel, p: ChartPoint) -> Option<[f64; 2]> {
    let z = if p.chart == ChartId::Primary {
        Some(p.z)
    } else {
        model.transfer(p, ChartId::Primary)
    }?;
    (z.re.is_finite() && z.im.is_finite()).then_some([z.re, z.im])
}

struct Frame {
    window: Window,
    periods: [Option<f64>; 2],
}

impl Frame {
    fn map(&self, x: [f64; 2]) -> [f64; 2] {
        let w = &self.window;
        [
            (x[0] - w.lo[0]) / (w.hi[0] - w.lo[0]) * SIZE,
            (w.hi[1] - x[1]) / (w.hi[1] - w.lo[1]) * SIZE,
        ]
    }

    /// Keeps points at most one window size outside the window.
    fn visible(&self, x: [f64; 2]) -> bool {
        let w = &self.window;
        (0..2).all(|k| {
            let span = w.hi[k] - w.lo[k];
            x[k] >= w.lo[k] - span && x[k] <= w.hi[k] + span
        })
    }

    /// Removes period jumps between consecutive points.
    fn unwrap(&self, pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let mut out: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
        for &p in pts {
            let mut q = p;
            if let Some(prev) = out.last() {
                for k in 0..2 {
                    if let Some(per) = self.periods[k] {
                        q[k] -= per * ((q[k] - prev[k]) / per).round();
                    }
                }
            }
            out.push(q);
        }
        out
    }
}

/// Blue (low) to red (high) ramp.
fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.5 };
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

fn svg(model: &GreenModel, graph: &SkeletonGraph, report: &Report) -> String {
    let frame = Frame {
        window: model.default_window(),
        periods: model.periods(ChartId::Primary),
    };
    let paths: Vec<(Vec<[f64; 2]>, f64)> = graph
        .edges
        .iter()
        .map(|e| {
            let pts: Vec<[f64; 2]> = e.samples.iter().filter_map(|s| primary(model, s.point)).collect();
            let pts: Vec<[f64; 2]> = frame.unwrap(&pts).into_iter().filter(|&p| frame.visible(p)).collect();
            let mean = e.samples.iter().map(|s| s.value).sum::<f64>() / e.samples.len().max(1) as f64;
            (pts, mean)
        })
        .collect();
    let (lo, hi) = paths
        .iter()
        .map(|p| p.1)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r##"<rect width="{SIZE}" height="{SIZE}" fill="#ffffff"/>"##);
    for (k, (pts, mean)) in paths.iter().enumerate() {
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let q = frame.map(p);
                format!("{:.3},{:.3}", q[0], q[1])
            })
            .collect();
        let t = if hi > lo { (mean - lo) / (hi - lo) } else { 0.5 };
        let _ = writeln!(
            s,
            r#"<polyline class="edge" data-edge="{k}" fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            color(t),
            coords.join(" ")
        );
    }
    for (k, v) in graph.vertices.iter().enumerate() {
        let Some(x) = v.point.and_then(|p| primary(model, p)) else {
            continue;
        };
        if !frame.visible(x) {
            continue;
        }
        let q = frame.map(x);
        let r = 3.0 + 2.0 * v.m.unwrap_or(1) as f64;
        let _ = writeln!(
            s,
            r##"<circle class="vertex" data-vertex="{k}" cx="{:.3}" cy="{:.3}" r="{r:.1}" fill="#202020"/>"##,
            q[0], q[1]
        );
    }
    for p in finite_punctures(&report.surface) {
        let q = frame.map(p);
        let _ = writeln!(
            s,
            r##"<rect class="puncture" x="{:.3}" y="{:.3}" width="6" height="6" fill="none" stroke="#606060"/>"##,
            q[0] - 3.0,
            q[1] - 3.0
        );
    }
    let q = frame.map(report.surface.pole);
    let _ = writeln!(
        s,
        r##"<circle class="pole" cx="{:.3}" cy="{:.3}" r="6" fill="none" stroke="#d00000" stroke-width="2"/>"##,
        q[0], q[1]
    );
    s.push_str("</svg>\n");
    s
}

/// Binary PGM with row 0 at the top of the window.
pub fn pgm(raster: &BasinRaster) -> Vec<u8> {
    let n = raster.grid_n;
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    for j in (0..n).rev() {
        out.extend(raster.labels[j * n..(j + 1) * n].iter().map(|l| l.gray()));
    }
    out
}

/// Writes the SVG skeleton, one `t,x1,x2,G` CSV per edge, and the PGM
/// basin raster when given. Returns the written paths.
pub fn emit_plots(
    report: &Report,
    basin: Option<&BasinRaster>,
    out_dir: &Path,
    opts: PlotOptions,
) -> Result<Vec<PathBuf>, CliError> {
    let model = make_model(&report.surface).map_err(|e| CliError::Analysis(e.to_string()))?;
    let mut files = Vec::new();
    let graph = &report.skeleton;
    if opts.svg {
        files.push(write_file(&out_dir.join("skeleton.svg"), svg(&model, graph, report).as_bytes())?);
    }
    if opts.trajectories {
        let dir = out_dir.join("trajectories");
        std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
        for (k, e) in graph.edges.iter().enumerate() {
            let mut csv = String::from("t,x1,x2,G\n");
            for smp in &e.samples {
                let x = primary(&model, smp.point).unwrap_or([smp.point.z.re, smp.point.z.im]);
                let _ = writeln!(csv, "{},{},{},{}", smp.t, x[0], x[1], smp.value);
            }
            files.push(write_file(&dir.join(format!("edge_{k:03}.csv")), csv.as_bytes())?);
        }
    }
    if let Some(r) = basin {
        files.push(write_file(&out_dir.join("basin.pgm"), &pgm(r))?);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use green_skeleton::skeleton::BasinLabel;

    #[test]
    fn pgm_header_and_size() {
        let raster = BasinRaster {
            grid_n: 2,
            window: Window::new([0.0, 0.0], [1.0, 1.0]),
            labels: vec![BasinLabel::Pole, BasinLabel::Zero, BasinLabel::Escape, BasinLabel::Pole],
            fraction_to_pole: 0.5,
            sampled: 4,
        };
        let bytes = pgm(&raster);
        assert!(bytes.starts_with(b"P5\n2 2\n255\n"));
        // top row is the last raster row
        assert_eq!(&bytes[bytes.len() - 4..], &[128, 255, 255, 0]);
    }

    #[test]
    fn color_endpoints() {
        assert_eq!(color(0.0), "#0040ff");
        assert_eq!(color(1.0), "#ff4000");
    }
}
