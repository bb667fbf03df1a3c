//! `pano distort` — re-render planar views at several focal lengths.
//!
//! Warping a view with `f = r = F` bends straight lines more as `F`
//! shrinks, giving a controlled distortion series of otherwise identical
//! frames. Output naming matches the series `pano dataset` emits:
//! `<out>/<sequence>/distort_f<F>/{rgb,labels}/<frame>_<direction>.png`.

use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use rayon::prelude::*;

use pano_core::dataset::{focal_tag, SequenceSpec};
use pano_core::pngio;
use pano_core::stitch::Direction;
use pano_core::CylindricalCamera;

use crate::error::CliError;
use crate::Ctx;

#[derive(Debug, Args)]
pub struct DistortArgs {
    /// Source tree: one subdirectory per sequence
    pub source: PathBuf,

    /// Output root
    pub output: PathBuf,

    /// Comma-separated focal lengths to render (overrides the config)
    #[arg(long, value_name = "PX,..", value_delimiter = ',')]
    pub focal_lengths: Option<Vec<f64>>,

    /// Comma-separated views to distort: left,forward,right,back
    /// (overrides the config)
    #[arg(long, value_name = "DIR,..", value_delimiter = ',')]
    pub directions: Option<Vec<String>>,
}

pub fn run(args: &DistortArgs, ctx: &Ctx) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let focal_lengths = args
        .focal_lengths
        .clone()
        .unwrap_or_else(|| cfg.distortion.focal_lengths.clone());
    let directions: Vec<Direction> = match &args.directions {
        Some(names) => names
            .iter()
            .map(|name| {
                Direction::from_str(name).map_err(|_| {
                    CliError::config(format!(
                        "unknown direction {name:?} (expected left, forward, right or back)"
                    ))
                })
            })
            .collect::<Result<_, _>>()?,
        None => cfg.distortion.directions.clone(),
    };
    if focal_lengths.is_empty() || directions.is_empty() {
        return Err(CliError::config(
            "distortion series needs at least one focal length and one direction",
        ));
    }
    for &f in &focal_lengths {
        if !(f.is_finite() && f > 0.0) {
            return Err(CliError::config(format!(
                "focal lengths must be finite and > 0, got {f}"
            )));
        }
    }

    let sequences = SequenceSpec::discover(&args.source)?;

    if ctx.dry_run {
        println!(
            "distort: {} -> {}, focal lengths {:?}, directions {:?}",
            args.source.display(),
            args.output.display(),
            focal_lengths,
            directions.iter().map(Direction::as_str).collect::<Vec<_>>(),
        );
        for seq in &sequences {
            println!(
                "  sequence {}: {} frames x {} focals x {} directions = {} image pairs",
                seq.name,
                seq.frames.len(),
                focal_lengths.len(),
                directions.len(),
                seq.frames.len() * focal_lengths.len() * directions.len()
            );
        }
        return Ok(());
    }

    let palette = cfg.load_palette()?;
    let mut total = 0usize;
    for seq in &sequences {
        let results: Vec<Result<usize, CliError>> = seq
            .frames
            .par_iter()
            .map(|frame| {
                let mut written = 0;
                for &dir in &directions {
                    let rgb = pngio::load_image(&seq.rgb_path(frame, dir))?;
                    let labels = pngio::load_labels(&seq.labels_path(frame, dir), &palette)?;
                    for &f in &focal_lengths {
                        let camera =
                            CylindricalCamera::with_radius(f, f, rgb.width(), rgb.height())?;
                        let series = args
                            .output
                            .join(&seq.name)
                            .join(format!("distort_f{}", focal_tag(f)));
                        let name = format!("{frame}_{dir}.png");
                        let rgb_path = series.join("rgb").join(&name);
                        let labels_path = series.join("labels").join(&name);
                        for path in [&rgb_path, &labels_path] {
                            let parent = path.parent().expect("series paths have parents");
                            std::fs::create_dir_all(parent).map_err(|e| {
                                CliError::io(format!("{}: {e}", parent.display()))
                            })?;
                        }
                        pngio::save_image(&rgb_path, &camera.warp(&rgb)?)?;
                        pngio::save_labels(&labels_path, &camera.warp_labels(&labels)?)?;
                        written += 2;
                    }
                }
                Ok(written)
            })
            .collect();
        let mut seq_written = 0;
        for (frame, result) in seq.frames.iter().zip(results) {
            seq_written += result
                .map_err(|e| e.with_context(&format!("sequence {}, frame {frame}", seq.name)))?;
        }
        println!("sequence {}: {seq_written} files", seq.name);
        total += seq_written;
    }
    println!("wrote {total} files under {}", args.output.display());
    Ok(())
}
