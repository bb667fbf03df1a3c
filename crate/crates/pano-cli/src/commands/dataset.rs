//! `pano dataset` — batch-generate a panoramic dataset from a tree of
//! sequences, with deduplication, optional resizing, FoV splits, a
//! distortion series, and a manifest recording every output.

use std::path::PathBuf;

use clap::Args;

use pano_core::dataset::{generate_dataset, SequenceSpec};

use crate::config::JobConfig;
use crate::error::CliError;
use crate::Ctx;

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Source tree: one subdirectory per sequence
    pub source: PathBuf,

    /// Output root; a manifest.json is written at its top level
    pub output: PathBuf,

    /// Focal length in pixels (overrides the config)
    #[arg(long, value_name = "PIXELS")]
    pub f: Option<f64>,

    /// Cylinder radius in pixels (overrides the config; defaults to f)
    #[arg(long, value_name = "PIXELS")]
    pub r: Option<f64>,

    /// Inter-view distance in pixels (overrides the config; default is to
    /// measure it per sequence)
    #[arg(long, value_name = "PIXELS")]
    pub d: Option<usize>,

    /// Region width for distance measurement (overrides the config)
    #[arg(long, value_name = "COLUMNS")]
    pub region_width: Option<usize>,

    /// Near-duplicate threshold on forward-view mean absolute difference
    /// (overrides the config; 0 keeps every frame)
    #[arg(long, value_name = "LEVELS")]
    pub dedup_threshold: Option<f64>,

    /// Resize panoramas to WIDTHxHEIGHT before rotation and splitting
    #[arg(long, value_name = "WxH")]
    pub resize: Option<String>,

    /// Comma-separated FoV splits in degrees, e.g. 90,180
    #[arg(long, value_name = "DEG,..", value_delimiter = ',')]
    pub splits: Option<Vec<u32>>,

    /// Enable the distortion series (focal lengths from the config)
    #[arg(long)]
    pub distort: bool,

    /// Palette JSON file (overrides the config)
    #[arg(long, value_name = "FILE")]
    pub palette: Option<PathBuf>,
}

pub fn merge(args: &DatasetArgs, base: &JobConfig) -> Result<JobConfig, CliError> {
    let mut cfg = base.clone();
    if let Some(f) = args.f {
        cfg.f = f;
    }
    if let Some(r) = args.r {
        cfg.r = Some(r);
    }
    if let Some(d) = args.d {
        cfg.d = Some(d);
    }
    if let Some(w) = args.region_width {
        cfg.region_width = w;
    }
    if let Some(t) = args.dedup_threshold {
        cfg.dedup_threshold = t;
    }
    if let Some(spec) = &args.resize {
        cfg.resize = Some(parse_resize(spec)?);
    }
    if let Some(splits) = &args.splits {
        cfg.splits = splits.clone();
    }
    if args.distort {
        cfg.distortion.enabled = true;
    }
    if let Some(palette) = &args.palette {
        cfg.palette = Some(palette.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_resize(spec: &str) -> Result<[usize; 2], CliError> {
    let parse = |part: &str| part.trim().parse::<usize>().ok().filter(|&n| n > 0);
    spec.split_once(['x', 'X'])
        .and_then(|(w, h)| Some([parse(w)?, parse(h)?]))
        .ok_or_else(|| {
            CliError::config(format!(
                "--resize expects WIDTHxHEIGHT with positive integers, got {spec:?}"
            ))
        })
}

pub fn run(args: &DatasetArgs, ctx: &Ctx) -> Result<(), CliError> {
    let cfg = merge(args, &ctx.config)?;
    let opts = cfg.generator_options()?;

    if ctx.dry_run {
        let sequences = SequenceSpec::discover(&args.source)?;
        println!(
            "dataset: {} -> {}",
            args.source.display(),
            args.output.display()
        );
        println!("resolved config:\n{}", cfg.describe());
        for seq in &sequences {
            println!("  sequence {}: {} frames", seq.name, seq.frames.len());
        }
        return Ok(());
    }

    let outcome = generate_dataset(&args.source, &args.output, &opts)?;
    for seq in &outcome.manifest.sequences {
        match &seq.error {
            Some(error) => println!("sequence {}: FAILED: {error}", seq.name),
            None => {
                let dropped = seq.frames_total - seq.frames_kept;
                let source = match seq.distance_source {
                    pano_core::dataset::DistanceSource::Configured => "configured",
                    pano_core::dataset::DistanceSource::Measured => "measured",
                };
                println!(
                    "sequence {}: d = {} ({source}), {} frames kept, {} dropped",
                    seq.name, seq.distance, seq.frames_kept, dropped
                );
                if let Some(warning) = &seq.warning {
                    eprintln!("warning: sequence {}: {warning}", seq.name);
                }
            }
        }
    }
    println!("manifest: {}", args.output.join("manifest.json").display());

    if outcome.failures > 0 {
        return Err(CliError::processing(format!(
            "{} frame(s) or sequence(s) failed; details are in the manifest",
            outcome.failures
        )));
    }
    Ok(())
}
