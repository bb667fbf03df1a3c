//! `pano eval` — score a directory of predicted label maps against a
//! directory of ground-truth maps, paired by filename.

use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;

use pano_core::metrics::ConfusionMatrix;
use pano_core::pngio;

use crate::error::CliError;
use crate::Ctx;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of predicted label maps (PNG)
    pub predictions: PathBuf,

    /// Directory of ground-truth label maps; must hold a same-named file
    /// for every prediction
    pub ground_truth: PathBuf,

    /// Write the JSON report here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// Also write the per-class table as CSV
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,

    /// Comma-separated ground-truth classes to ignore (overrides the config)
    #[arg(long, value_name = "CLASS,..", value_delimiter = ',')]
    pub ignore: Option<Vec<u8>>,
}

pub fn run(args: &EvalArgs, ctx: &Ctx) -> Result<(), CliError> {
    let mut cfg = ctx.config.clone();
    if let Some(ignore) = &args.ignore {
        cfg.ignore = ignore.clone();
    }
    let ignore = cfg.ignore_set()?;
    let palette = cfg.load_palette()?;

    let files = super::png_files(&args.predictions)?;

    if ctx.dry_run {
        println!(
            "eval: {} predictions from {} vs ground truth in {}, ignoring classes {:?}",
            files.len(),
            args.predictions.display(),
            args.ground_truth.display(),
            cfg.ignore,
        );
        if let Some(out) = &args.output {
            println!("  would write JSON report to {}", out.display());
        }
        if let Some(csv) = &args.csv {
            println!("  would write per-class CSV to {}", csv.display());
        }
        return Ok(());
    }

    let matrix = files
        .par_iter()
        .map(|pred_path| -> Result<ConfusionMatrix, CliError> {
            let name = pred_path.file_name().expect("listed files have names");
            let gt_path = args.ground_truth.join(name);
            let pred = pngio::load_labels(pred_path, &palette)?;
            let gt = pngio::load_labels(&gt_path, &palette)?;
            let mut m = ConfusionMatrix::new();
            m.accumulate(&gt, &pred, ignore)
                .map_err(|e| CliError::from(e).with_context(&name.to_string_lossy()))?;
            Ok(m)
        })
        .try_reduce(ConfusionMatrix::new, |mut a, b| {
            a.merge(&b);
            Ok(a)
        })?;

    let report = matrix.report(&palette);
    let json = report.to_json();
    match &args.output {
        Some(path) => {
            super::write_text(path, &format!("{json}\n"))?;
            let miou = report
                .miou
                .map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"));
            println!(
                "evaluated {} file(s): miou = {miou}, report at {}",
                files.len(),
                path.display()
            );
        }
        None => println!("{json}"),
    }
    if let Some(csv) = &args.csv {
        super::write_text(csv, &report.to_csv())?;
    }
    Ok(())
}
