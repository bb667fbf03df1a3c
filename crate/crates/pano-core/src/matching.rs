//! Offset estimation by region matching.
//!
//! Adjacent cameras of the rig see a thin overlapping sliver. After both
//! images are warped onto the shared cylinder, the overlap coincides up to
//! a pure horizontal translation, so the inter-image distance `d` can be
//! measured directly: fix a narrow reference region `R1` around column
//! `x_c1` in the first image, slide a same-shaped candidate region across
//! the second image, and take the column `x_c2` minimizing the L1
//! discrepancy
//!
//! ```text
//! Dv(R1, R2) = Σ |p − q|        (sum over pixels and channels)
//! ```
//!
//! Then `d = x_c1 − x_c2`: scene content sits `d` columns further left in
//! the neighbor that looks `d` columns further right. Sparse feature
//! matching fails in these slivers (too little texture overlap); the dense
//! scan is cheap and exact to the pixel, which is all the stitcher needs.
//!
//! Warped images are only valid inside a bowtie-shaped region, so the scan
//! is validity-aware twice over: the reference row range shrinks (by
//! default) to the rows on which the whole reference region is valid, and
//! candidate columns whose region touches any invalid pixel are skipped —
//! recorded as absent rather than scored zero.

use rayon::prelude::*;
use thiserror::Error;

use crate::raster::Raster;

/// Default width of the matching region in columns ("a few columns").
pub const DEFAULT_REGION_WIDTH: usize = 9;

/// Default tolerated spread (max − min, pixels) between per-pair distance
/// estimates before a calibration warning is raised.
pub const DEFAULT_SPREAD_THRESHOLD: i64 = 4;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("regions hold {left} vs {right} samples; discrepancy needs identical shapes")]
    ShapeMismatch { left: usize, right: usize },
    #[error("region contains an invalid pixel at column {col}, row {row}")]
    InvalidPixels { col: usize, row: usize },
    #[error("region width {0} must be odd and at least 1")]
    BadRegionWidth(usize),
    #[error("region around column {col} does not fit the image or has no fully valid rows")]
    InvalidReference { col: usize },
    #[error("row range {lo}..={hi} is empty or out of bounds")]
    BadRowRange { lo: usize, hi: usize },
    #[error("images are {h1} and {h2} rows tall; matching needs equal heights")]
    HeightMismatch { h1: usize, h2: usize },
    #[error("no candidate column in {lo}..={hi} had a fully valid region")]
    EmptyScan { lo: usize, hi: usize },
    #[error("rig estimation needs at least one image pair")]
    NoPairs,
}

/// Parameters of one matching scan.
#[derive(Debug, Clone)]
pub struct MatchConfig {
    /// Center column of the reference region in the first image.
    pub reference_col: usize,
    /// Region width in columns; odd so the region centers on a column.
    pub region_width: usize,
    /// Inclusive row interval of the region. `None` selects the longest
    /// run of rows on which the reference region is fully valid — which is
    /// every row for fully valid images, and the bowtie-limited interval
    /// for warped ones.
    pub row_range: Option<(usize, usize)>,
    /// Inclusive interval of candidate center columns `x_c2`. `None` scans
    /// every column where the region fits.
    pub scan_range: Option<(usize, usize)>,
}

impl MatchConfig {
    pub fn new(reference_col: usize) -> Self {
        MatchConfig {
            reference_col,
            region_width: DEFAULT_REGION_WIDTH,
            row_range: None,
            scan_range: None,
        }
    }
}

/// The discrepancy curve of one scan: every evaluated candidate, the
/// winning column, and the distance estimate derived from it.
#[derive(Debug, Clone)]
pub struct MatchCurve {
    /// `(x_c2, Dv)` for every candidate whose region was fully valid,
    /// in ascending column order.
    pub candidates: Vec<(usize, u64)>,
    /// Candidate column with the minimum discrepancy (smallest column on
    /// ties, making the scan deterministic).
    pub best_col: usize,
    /// The minimum discrepancy value itself.
    pub min_dv: u64,
    /// Estimated inter-image distance, `reference_col − best_col`.
    pub distance: i64,
    /// Row interval the regions actually covered.
    pub rows: (usize, usize),
}

impl MatchCurve {
    /// The curve as CSV with an `x_c2,dv` header, for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_c2,dv\n");
        for (col, dv) in &self.candidates {
            out.push_str(&format!("{col},{dv}\n"));
        }
        out
    }
}

/// Result of estimating the rig's shared distance from several adjacent
/// pairs.
#[derive(Debug, Clone)]
pub struct RigEstimate {
    /// Median of the per-pair distances.
    pub distance: i64,
    /// Distance from each pair, in input order.
    pub per_pair: Vec<i64>,
    /// Full curves for diagnostics, in input order.
    pub curves: Vec<MatchCurve>,
    /// max − min of the per-pair distances.
    pub spread: i64,
    /// Set when `spread` exceeds the threshold: the rig geometry (or the
    /// imagery) is inconsistent, but the median is still returned.
    pub warning: Option<String>,
}

/// L1 discrepancy between two equally shaped sample buffers:
/// `Σ |a[i] − b[i]|`.
pub fn discrepancy(a: &[u8], b: &[u8]) -> Result<u64, MatchError> {
    if a.len() != b.len() {
        return Err(MatchError::ShapeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(p, q)| (*p as i32 - *q as i32).unsigned_abs() as u64)
        .sum())
}

/// Flattens the RGB samples of the region centered on `center_col` covering
/// the inclusive row interval `rows`, row-major. Errors if the region
/// leaves the image or touches an invalid pixel.
pub fn extract_region(
    img: &Raster,
    center_col: usize,
    width: usize,
    rows: (usize, usize),
) -> Result<Vec<u8>, MatchError> {
    if width % 2 == 0 || width == 0 {
        return Err(MatchError::BadRegionWidth(width));
    }
    let half = width / 2;
    if center_col < half || center_col + half >= img.width() {
        return Err(MatchError::InvalidReference { col: center_col });
    }
    let (lo, hi) = rows;
    if lo > hi || hi >= img.height() {
        return Err(MatchError::BadRowRange { lo, hi });
    }
    let mut out = Vec::with_capacity((hi - lo + 1) * width * 3);
    for row in lo..=hi {
        for col in center_col - half..=center_col + half {
            if !img.is_valid(col, row) {
                return Err(MatchError::InvalidPixels { col, row });
            }
            out.extend_from_slice(&img.get(col, row));
        }
    }
    Ok(out)
}

/// The longest run of rows on which all of columns
/// `center_col − width/2 ..= center_col + width/2` are valid. `None` when
/// no row qualifies or the region does not fit horizontally.
pub fn fully_valid_row_span(
    img: &Raster,
    center_col: usize,
    width: usize,
) -> Option<(usize, usize)> {
    let half = width / 2;
    if center_col < half || center_col + half >= img.width() {
        return None;
    }
    let mut best: Option<(usize, usize)> = None;
    let mut run_start: Option<usize> = None;
    for row in 0..img.height() {
        let ok = (center_col - half..=center_col + half).all(|c| img.is_valid(c, row));
        match (ok, run_start) {
            (true, None) => run_start = Some(row),
            (false, Some(start)) => {
                let run = (start, row - 1);
                if best.map_or(true, |(lo, hi)| run.1 - run.0 > hi - lo) {
                    best = Some(run);
                }
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(start) = run_start {
        let run = (start, img.height() - 1);
        if best.map_or(true, |(lo, hi)| run.1 - run.0 > hi - lo) {
            best = Some(run);
        }
    }
    best
}

/// Scans the reference region of `i1` across `i2` and returns the full
/// discrepancy curve. Candidates whose region is not fully valid in `i2`
/// are skipped; the curve records only evaluated candidates.
pub fn scan_match(i1: &Raster, i2: &Raster, cfg: &MatchConfig) -> Result<MatchCurve, MatchError> {
    if cfg.region_width % 2 == 0 || cfg.region_width == 0 {
        return Err(MatchError::BadRegionWidth(cfg.region_width));
    }
    if i1.height() != i2.height() {
        return Err(MatchError::HeightMismatch {
            h1: i1.height(),
            h2: i2.height(),
        });
    }
    let half = cfg.region_width / 2;

    let rows = match cfg.row_range {
        Some((lo, hi)) => {
            if lo > hi || hi >= i1.height() {
                return Err(MatchError::BadRowRange { lo, hi });
            }
            (lo, hi)
        }
        None => fully_valid_row_span(i1, cfg.reference_col, cfg.region_width)
            .ok_or(MatchError::InvalidReference { col: cfg.reference_col })?,
    };
    // Materializing the reference also re-checks its validity over the
    // chosen rows (explicit row ranges may include invalid pixels).
    let reference = extract_region(i1, cfg.reference_col, cfg.region_width, rows)?;

    let fit_lo = half;
    let fit_hi = i2.width().saturating_sub(half + 1);
    let (scan_lo, scan_hi) = match cfg.scan_range {
        Some((lo, hi)) => (lo.max(fit_lo), hi.min(fit_hi)),
        None => (fit_lo, fit_hi),
    };
    if scan_lo > scan_hi || i2.width() <= half {
        return Err(MatchError::EmptyScan {
            lo: scan_lo,
            hi: scan_hi,
        });
    }

    let (row_lo, row_hi) = rows;
    let candidates: Vec<(usize, u64)> = (scan_lo..=scan_hi)
        .into_par_iter()
        .filter_map(|col| {
            let mut dv = 0u64;
            let mut ref_iter = reference.iter();
            for row in row_lo..=row_hi {
                for c in col - half..=col + half {
                    if !i2.is_valid(c, row) {
                        return None;
                    }
                    let q = i2.get(c, row);
                    for &qv in &q {
                        let p = *ref_iter.next().unwrap();
                        dv += (i32::from(p) - i32::from(qv)).unsigned_abs() as u64;
                    }
                }
            }
            Some((col, dv))
        })
        .collect();

    if candidates.is_empty() {
        return Err(MatchError::EmptyScan {
            lo: scan_lo,
            hi: scan_hi,
        });
    }
    let (best_col, min_dv) = candidates
        .iter()
        .copied()
        .min_by_key(|(col, dv)| (*dv, *col))
        .unwrap();
    Ok(MatchCurve {
        candidates,
        best_col,
        min_dv,
        distance: cfg.reference_col as i64 - best_col as i64,
        rows,
    })
}

/// Estimates the rig's shared distance `d` from several adjacent warped
/// pairs: each pair is scanned independently and the median of the per-pair
/// distances wins (robust to one bad seam). A spread above
/// `spread_threshold` pixels produces a warning, not a failure.
pub fn estimate_rig_distance(
    pairs: &[(&Raster, &Raster)],
    cfg: &MatchConfig,
    spread_threshold: i64,
) -> Result<RigEstimate, MatchError> {
    if pairs.is_empty() {
        return Err(MatchError::NoPairs);
    }
    let curves: Vec<MatchCurve> = pairs
        .iter()
        .map(|(a, b)| scan_match(a, b, cfg))
        .collect::<Result<_, _>>()?;
    let per_pair: Vec<i64> = curves.iter().map(|c| c.distance).collect();
    let mut sorted = per_pair.clone();
    sorted.sort_unstable();
    // Lower median: exact middle for odd counts, lower of the two middle
    // values for even counts (keeps the estimate an observed integer).
    let distance = sorted[(sorted.len() - 1) / 2];
    let spread = sorted[sorted.len() - 1] - sorted[0];
    let warning = (spread > spread_threshold).then(|| {
        format!(
            "per-pair distance estimates {per_pair:?} spread over {spread} px \
             (threshold {spread_threshold} px); rig geometry may be inconsistent"
        )
    });
    Ok(RigEstimate {
        distance,
        per_pair,
        curves,
        spread,
        warning,
    })
}
