//! `pano stitch` — stitch one frame's four planar views (RGB + labels)
//! into a 360° panorama with a calibration sidecar.

use std::path::PathBuf;

use clap::Args;

use pano_core::dataset::{calibrate_sequence, DistanceSource, SequenceSpec};
use pano_core::pngio;
use pano_core::stitch::{stitch_panorama, Direction};

use crate::error::CliError;
use crate::Ctx;

#[derive(Debug, Args)]
pub struct StitchArgs {
    /// Sequence directory (left/forward/right/back subdirectories, each
    /// with rgb/ and labels/)
    pub sequence: PathBuf,

    /// Frame stem to stitch (e.g. 000123)
    pub frame: String,

    /// Output directory; writes rgb/, labels/ and meta/ under it
    pub output: PathBuf,

    /// Inter-view distance in pixels (overrides the config; default is to
    /// measure it by region matching)
    #[arg(long, value_name = "PIXELS")]
    pub d: Option<usize>,

    /// Focal length in pixels (overrides the config)
    #[arg(long, value_name = "PIXELS")]
    pub f: Option<f64>,

    /// Cylinder radius in pixels (overrides the config; defaults to f)
    #[arg(long, value_name = "PIXELS")]
    pub r: Option<f64>,

    /// Rotate the panorama to start at this column (default 0: no rotation)
    #[arg(long, value_name = "COLUMN")]
    pub start: Option<usize>,
}

pub fn run(args: &StitchArgs, ctx: &Ctx) -> Result<(), CliError> {
    let mut cfg = ctx.config.clone();
    if let Some(f) = args.f {
        cfg.f = f;
    }
    if let Some(r) = args.r {
        cfg.r = Some(r);
    }
    if let Some(d) = args.d {
        cfg.d = Some(d);
    }
    cfg.validate()?;
    let opts = cfg.generator_options()?;

    if ctx.dry_run {
        println!(
            "stitch: sequence {}, frame {}, f = {}, r = {}, d = {}",
            args.sequence.display(),
            args.frame,
            cfg.f,
            cfg.radius(),
            cfg.d
                .map_or_else(|| "auto (region matching)".to_string(), |d| d.to_string()),
        );
        for sub in ["rgb", "labels", "meta"] {
            println!(
                "  would write {}",
                args.output.join(sub).join(&args.frame).display()
            );
        }
        return Ok(());
    }

    let seq = SequenceSpec::open(&args.sequence)?;
    if !seq.frames.iter().any(|f| f == &args.frame) {
        return Err(CliError::io(format!(
            "frame {} not found in {} ({} frames present)",
            args.frame,
            args.sequence.display(),
            seq.frames.len()
        )));
    }

    let calib = calibrate_sequence(&seq, &args.frame, &opts)?;
    let (rgb, labels) = seq.load_frame(&args.frame, Direction::ALL, &opts.palette)?;
    let mut pano = stitch_panorama(&rgb, Some(&labels), &calib.rig)?;
    if let Some(start) = args.start {
        pano = pano.rotate_start(start)?;
    }

    let rgb_path = args.output.join("rgb").join(format!("{}.png", args.frame));
    let labels_path = args
        .output
        .join("labels")
        .join(format!("{}.png", args.frame));
    let meta_path = args
        .output
        .join("meta")
        .join(format!("{}.json", args.frame));
    for dir in [&rgb_path, &labels_path, &meta_path] {
        let parent = dir.parent().expect("output paths have parents");
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::io(format!("{}: {e}", parent.display())))?;
    }
    pngio::save_image(&rgb_path, &pano.rgb)?;
    let pano_labels = pano
        .labels
        .as_ref()
        .expect("stitching with labels yields labels");
    pngio::save_labels(&labels_path, pano_labels)?;
    let sidecar = serde_json::to_string_pretty(&pano.sidecar())
        .expect("sidecar serializes")
        + "\n";
    super::write_text(&meta_path, &sidecar)?;

    let source = match calib.source {
        DistanceSource::Configured => "configured".to_string(),
        DistanceSource::Measured => format!("measured, spread {}", calib.spread),
    };
    if let Some(warning) = &calib.warning {
        eprintln!("warning: {warning}");
    }
    println!(
        "stitched {}: {}x{}, d = {} ({source})",
        args.frame,
        pano.width(),
        pano.height(),
        pano.distance
    );
    println!("rgb:    {}", rgb_path.display());
    println!("labels: {}", labels_path.display());
    println!("meta:   {}", meta_path.display());
    Ok(())
}
