//! `pano project` — warp planar images onto the cylinder.

use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;

use pano_core::palette::Palette;
use pano_core::pngio;
use pano_core::CylindricalCamera;

use crate::error::CliError;
use crate::Ctx;

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Input PNG file, or a directory of PNG files
    pub input: PathBuf,

    /// Output file (file input) or directory (directory input)
    pub output: PathBuf,

    /// Treat inputs as label maps: palette-aware load, nearest-neighbor warp
    #[arg(long)]
    pub labels: bool,

    /// Focal length in pixels (overrides the config)
    #[arg(long, value_name = "PIXELS")]
    pub f: Option<f64>,

    /// Cylinder radius in pixels (overrides the config; defaults to f)
    #[arg(long, value_name = "PIXELS")]
    pub r: Option<f64>,
}

pub fn run(args: &ProjectArgs, ctx: &Ctx) -> Result<(), CliError> {
    let mut cfg = ctx.config.clone();
    if let Some(f) = args.f {
        cfg.f = f;
    }
    if let Some(r) = args.r {
        cfg.r = Some(r);
    }
    cfg.validate()?;

    let directory_mode = args.input.is_dir();
    let pairs: Vec<(PathBuf, PathBuf)> = if directory_mode {
        super::png_files(&args.input)?
            .into_iter()
            .map(|src| {
                let name = src.file_name().expect("listed files have names");
                (src.clone(), args.output.join(name))
            })
            .collect()
    } else {
        vec![(args.input.clone(), args.output.clone())]
    };

    if ctx.dry_run {
        println!(
            "project: f = {}, r = {}, mode = {}",
            cfg.f,
            cfg.radius(),
            if args.labels { "labels" } else { "rgb" }
        );
        for (src, dst) in &pairs {
            println!("  would warp {} -> {}", src.display(), dst.display());
        }
        return Ok(());
    }

    let palette = if args.labels {
        Some(cfg.load_palette()?)
    } else {
        None
    };
    if directory_mode {
        std::fs::create_dir_all(&args.output)
            .map_err(|e| CliError::io(format!("{}: {e}", args.output.display())))?;
    }

    let results: Vec<Result<(), CliError>> = pairs
        .par_iter()
        .map(|(src, dst)| warp_one(src, dst, cfg.f, cfg.radius(), palette.as_ref()))
        .collect();
    for ((src, dst), result) in pairs.iter().zip(results) {
        result?;
        println!("{} -> {}", src.display(), dst.display());
    }
    Ok(())
}

fn warp_one(
    src: &Path,
    dst: &Path,
    f: f64,
    r: f64,
    palette: Option<&Palette>,
) -> Result<(), CliError> {
    match palette {
        None => {
            let img = pngio::load_image(src)?;
            let camera = CylindricalCamera::with_radius(f, r, img.width(), img.height())?;
            pngio::save_image(dst, &camera.warp(&img)?)?;
        }
        Some(palette) => {
            let labels = pngio::load_labels(src, palette)?;
            let camera = CylindricalCamera::with_radius(f, r, labels.width(), labels.height())?;
            pngio::save_labels(dst, &camera.warp_labels(&labels)?)?;
        }
    }
    Ok(())
}
