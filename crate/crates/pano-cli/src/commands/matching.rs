//! `pano match` — measure the inter-view distance between two adjacent
//! planar views by scanning region matching on their warped images.

use std::path::PathBuf;

use clap::Args;

use pano_core::matching::{scan_match, MatchConfig};
use pano_core::pngio;
use pano_core::raster::Raster;
use pano_core::CylindricalCamera;

use crate::error::CliError;
use crate::Ctx;

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// Left planar view (PNG)
    pub left: PathBuf,

    /// Forward planar view (PNG)
    pub forward: PathBuf,

    /// Reference region center column x_c1 in the warped left view
    /// (defaults to the right edge of its valid band)
    #[arg(long, value_name = "COLUMN")]
    pub xc1: Option<usize>,

    /// Region width in columns, odd (overrides the config)
    #[arg(long, value_name = "COLUMNS")]
    pub region_width: Option<usize>,

    /// Write the full discrepancy curve to this CSV file
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,

    /// Focal length in pixels (overrides the config)
    #[arg(long, value_name = "PIXELS")]
    pub f: Option<f64>,

    /// Cylinder radius in pixels (overrides the config; defaults to f)
    #[arg(long, value_name = "PIXELS")]
    pub r: Option<f64>,
}

pub fn run(args: &MatchArgs, ctx: &Ctx) -> Result<(), CliError> {
    let mut cfg = ctx.config.clone();
    if let Some(f) = args.f {
        cfg.f = f;
    }
    if let Some(r) = args.r {
        cfg.r = Some(r);
    }
    if let Some(w) = args.region_width {
        cfg.region_width = w;
    }
    cfg.validate()?;

    if ctx.dry_run {
        println!(
            "match: {} vs {}, f = {}, r = {}, region width = {}, x_c1 = {}",
            args.left.display(),
            args.forward.display(),
            cfg.f,
            cfg.radius(),
            cfg.region_width,
            args.xc1
                .map_or_else(|| "auto (valid-band edge)".to_string(), |c| c.to_string()),
        );
        if let Some(csv) = &args.csv {
            println!("  would write curve to {}", csv.display());
        }
        return Ok(());
    }

    let left = pngio::load_image(&args.left)?;
    let forward = pngio::load_image(&args.forward)?;
    let camera = CylindricalCamera::with_radius(cfg.f, cfg.radius(), left.width(), left.height())?;
    let warped_left = camera.warp(&left)?;
    let camera2 =
        CylindricalCamera::with_radius(cfg.f, cfg.radius(), forward.width(), forward.height())?;
    let warped_forward = camera2.warp(&forward)?;

    let reference_col = match args.xc1 {
        Some(col) => col,
        None => band_edge_reference(&warped_left, cfg.region_width)?,
    };
    let match_cfg = MatchConfig {
        region_width: cfg.region_width,
        ..MatchConfig::new(reference_col)
    };
    let curve = scan_match(&warped_left, &warped_forward, &match_cfg)?;

    println!("d = {}", curve.distance);
    println!(
        "x_c1 = {reference_col}, best x_c2 = {}, min Dv = {}, rows {}..={}",
        curve.best_col, curve.min_dv, curve.rows.0, curve.rows.1
    );
    if let Some(csv) = &args.csv {
        super::write_text(csv, &curve.to_csv())?;
        println!("curve: {} ({} candidates)", csv.display(), curve.candidates.len());
    }
    Ok(())
}

/// The default reference column: flush against the right edge of the
/// warped image's valid band, where the next camera's overlap lives. Any
/// candidate inside the band is then at least as tall as the reference
/// region, so the scan never starves for rows.
fn band_edge_reference(warped: &Raster, region_width: usize) -> Result<usize, CliError> {
    let mid = warped.height() / 2;
    let last_valid = (0..warped.width())
        .rev()
        .find(|&c| warped.is_valid(c, mid))
        .ok_or_else(|| {
            CliError::processing("left image has no valid pixels on its middle row after warping")
        })?;
    Ok(last_valid.saturating_sub(region_width / 2))
}
