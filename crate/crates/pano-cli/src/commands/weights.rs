//! `pano weights` — median-frequency class-balancing weights over a
//! directory of label maps.

use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use pano_core::metrics::median_frequency_weights;
use pano_core::palette::CLASS_COUNT;
use pano_core::pngio;

use crate::error::CliError;
use crate::Ctx;

#[derive(Debug, Args)]
pub struct WeightsArgs {
    /// Directory of label maps (PNG)
    pub labels: PathBuf,

    /// Write the JSON here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct WeightsReport {
    classes: Vec<ClassWeight>,
}

#[derive(Debug, Serialize)]
struct ClassWeight {
    index: u8,
    name: String,
    pixels: u64,
    weight: f64,
}

pub fn run(args: &WeightsArgs, ctx: &Ctx) -> Result<(), CliError> {
    let palette = ctx.config.load_palette()?;
    let files = super::png_files(&args.labels)?;

    if ctx.dry_run {
        println!(
            "weights: {} label map(s) from {}",
            files.len(),
            args.labels.display()
        );
        if let Some(out) = &args.output {
            println!("  would write weights JSON to {}", out.display());
        }
        return Ok(());
    }

    let counts = files
        .par_iter()
        .map(|path| -> Result<[u64; CLASS_COUNT], CliError> {
            let labels = pngio::load_labels(path, &palette)?;
            let mut counts = [0u64; CLASS_COUNT];
            for (&class, &valid) in labels.classes().iter().zip(labels.validity()) {
                if valid {
                    counts[usize::from(class)] += 1;
                }
            }
            Ok(counts)
        })
        .try_reduce(
            || [0u64; CLASS_COUNT],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;

    let weights = median_frequency_weights(&counts)?;
    let report = WeightsReport {
        classes: (0..CLASS_COUNT)
            .map(|c| ClassWeight {
                index: c as u8,
                name: palette.name_of(c as u8).to_string(),
                pixels: counts[c],
                weight: weights[c],
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&report).expect("weights report serializes");
    match &args.output {
        Some(path) => {
            super::write_text(path, &format!("{json}\n"))?;
            println!(
                "weights over {} file(s) written to {}",
                files.len(),
                path.display()
            );
        }
        None => println!("{json}"),
    }
    Ok(())
}
