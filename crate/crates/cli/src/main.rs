use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use greenskel::{run_analyze, AnalyzeOptions, VariantChoice};

#[derive(Parser)]
#[command(name = "greenskel", version, about = "Green's function skeletons of model open surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate critical points, build skeletons, verify and write a report.
    Analyze {
        /// Run configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write skeleton.svg and per-edge trajectory CSVs.
        #[arg(long)]
        emit_svg: bool,
        /// Write the basin raster as basin.pgm.
        #[arg(long)]
        emit_raster: bool,
        /// Sampling seed; overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Skeleton variants to build.
        #[arg(long, value_enum, default_value_t = VariantChoice::Both)]
        variant: VariantChoice,
        /// Run the discrete exhaustion on a mesh (torus and disk only).
        #[arg(long)]
        mesh_exhaust: bool,
    },
}

fn main() -> ExitCode {
    let Command::Analyze {
        config,
        out,
        emit_svg,
        emit_raster,
        seed,
        variant,
        mesh_exhaust,
    } = Cli::parse().command;
    let opts = AnalyzeOptions {
        config,
        out,
        emit_svg,
        emit_raster,
        seed,
        variant,
        mesh_exhaust,
    };
    match run_analyze(&opts) {
        Ok(outcome) => {
            let r = &outcome.report;
            println!(
                "critical points: {}, beta = ({}, {}), all checks pass: {}",
                r.zeros.len(),
                r.skeleton.beta0.map_or("?".into(), |b| b.to_string()),
                r.skeleton.beta1.map_or("?".into(), |b| b.to_string()),
                r.checks.all_pass
            );
            for c in r.checks.claims.iter().filter(|c| !c.pass) {
                eprintln!("FAILED {}: {}", c.id, c.anchor);
            }
            println!("report: {}", outcome.files[0].display());
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
