//! Cylindrical projection: the analytic plane ↔ cylinder mappings and the
//! image warps built on them.
//!
//! A planar camera image is reprojected onto a cylinder of radius `r`
//! around the camera's vertical axis. In center-origin coordinates (origin
//! at the image center, pixel centers on integers) the forward mapping is
//!
//! ```text
//! x' = r · atan(x / f)
//! y' = r · y / sqrt(x² + f²)
//! ```
//!
//! and the backward mapping inverts it:
//!
//! ```text
//! x = f · tan(x' / r)
//! y = (y' / r) · sqrt(x² + f²)
//! ```
//!
//! `f` is the focal length in pixels. With `r = f` (the usual choice) the
//! mapping is an angle-preserving unrolling: one cylinder column per pixel
//! of arc. The backward form has a pole at `|x'| = r·π/2`, where the ray
//! becomes parallel to the image plane.
//!
//! Warping always runs backward — every output pixel pulls from its source
//! preimage — so the result has no holes. Output pixels whose preimage
//! leaves the source area are marked invalid. The source area is the full
//! pixel footprint `|x| ≤ width/2, |y| ≤ height/2` (pixel centers plus
//! their half-pixel skirts); samples in the outer half-pixel ring clamp to
//! the border row/column. That convention makes the measured valid band
//! match `2·f·atan(width/(2f))` to within a pixel at any focal length.

use rayon::prelude::*;
use thiserror::Error;

use crate::raster::{LabelMap, Raster};

#[derive(Debug, Error)]
pub enum ProjectionError {
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("cylindrical x' = {x} is at or beyond the backward-mapping pole (|x'| < {limit})")]
    Singularity { x: f64, limit: f64 },
    #[error("image is {got_w}×{got_h} but the camera expects {want_w}×{want_h}")]
    DimensionMismatch {
        got_w: usize,
        got_h: usize,
        want_w: usize,
        want_h: usize,
    },
}

/// A point in center-origin image coordinates: `x` grows rightward, `y`
/// downward, and `(0, 0)` is the image center `((width−1)/2, (height−1)/2)`
/// in storage coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePoint {
    pub x: f64,
    pub y: f64,
}

impl ImagePoint {
    pub fn new(x: f64, y: f64) -> Self {
        ImagePoint { x, y }
    }
}

/// Focal length of the reference rig's cameras, in pixels. Used as the
/// default wherever a focal length is not supplied explicitly.
pub const DEFAULT_FOCAL: f64 = 532.740352;

/// Projection parameters: focal length `f`, cylinder radius `r`, and the
/// planar source dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylindricalCamera {
    pub f: f64,
    pub r: f64,
    pub width: usize,
    pub height: usize,
}

impl CylindricalCamera {
    /// Camera with the conventional radius choice `r = f`.
    pub fn new(f: f64, width: usize, height: usize) -> Result<Self, ProjectionError> {
        Self::with_radius(f, f, width, height)
    }

    /// Camera with an explicit cylinder radius.
    pub fn with_radius(
        f: f64,
        r: f64,
        width: usize,
        height: usize,
    ) -> Result<Self, ProjectionError> {
        if !(f.is_finite() && f > 0.0) {
            return Err(ProjectionError::InvalidCamera(format!(
                "focal length must be finite and > 0, got {f}"
            )));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(ProjectionError::InvalidCamera(format!(
                "cylinder radius must be finite and > 0, got {r}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(ProjectionError::InvalidCamera(format!(
                "image dimensions must be nonzero, got {width}×{height}"
            )));
        }
        Ok(CylindricalCamera { f, r, width, height })
    }

    /// Center of the canvas in storage coordinates: `((w−1)/2, (h−1)/2)`.
    pub fn center(&self) -> (f64, f64) {
        (
            (self.width as f64 - 1.0) / 2.0,
            (self.height as f64 - 1.0) / 2.0,
        )
    }

    /// Center-origin point for a storage-coordinate (column, row) position.
    pub fn from_storage(&self, col: f64, row: f64) -> ImagePoint {
        let (cx, cy) = self.center();
        ImagePoint::new(col - cx, row - cy)
    }

    /// Storage-coordinate (column, row) position of a center-origin point.
    pub fn to_storage(&self, p: ImagePoint) -> (f64, f64) {
        let (cx, cy) = self.center();
        (p.x + cx, p.y + cy)
    }

    /// The backward mapping's pole: `r·π/2`. `backward` is defined for
    /// `|x'|` strictly below this.
    pub fn singularity_limit(&self) -> f64 {
        self.r * std::f64::consts::FRAC_PI_2
    }

    /// Half-width of the valid band a full-width source produces:
    /// `r·atan(width / (2f))`.
    pub fn valid_band_half_width(&self) -> f64 {
        self.r * (self.width as f64 / (2.0 * self.f)).atan()
    }

    /// Forward mapping, plane → cylinder. Total: defined for every planar
    /// point.
    pub fn forward(&self, p: ImagePoint) -> ImagePoint {
        let s = (p.x * p.x + self.f * self.f).sqrt();
        ImagePoint::new(self.r * (p.x / self.f).atan(), self.r * p.y / s)
    }

    /// Backward mapping, cylinder → plane. Exact inverse of [`forward`]
    /// inside the pole bound.
    ///
    /// [`forward`]: CylindricalCamera::forward
    pub fn backward(&self, q: ImagePoint) -> Result<ImagePoint, ProjectionError> {
        let limit = self.singularity_limit();
        let ax = q.x.abs();
        // NaN must land in the error branch too, so test the complement.
        if ax >= limit || ax.is_nan() {
            return Err(ProjectionError::Singularity { x: q.x, limit });
        }
        let x = self.f * (q.x / self.r).tan();
        let s = (x * x + self.f * self.f).sqrt();
        Ok(ImagePoint::new(x, q.y * s / self.r))
    }

    /// Per-output-column backward-mapping terms shared by both warps:
    /// planar `x`, the row scale `sqrt(x²+f²)/r`, and whether the column's
    /// preimage is inside the source footprint at all.
    fn column_map(&self) -> Vec<(f64, f64, bool)> {
        let (cx, _) = self.center();
        let limit = self.singularity_limit();
        let half_w = self.width as f64 / 2.0;
        (0..self.width)
            .map(|c| {
                let xp = c as f64 - cx;
                if xp.abs() >= limit {
                    return (0.0, 0.0, false);
                }
                let x = self.f * (xp / self.r).tan();
                let scale = (x * x + self.f * self.f).sqrt() / self.r;
                (x, scale, x.abs() <= half_w)
            })
            .collect()
    }

    fn check_dims(&self, w: usize, h: usize) -> Result<(), ProjectionError> {
        if (w, h) != (self.width, self.height) {
            return Err(ProjectionError::DimensionMismatch {
                got_w: w,
                got_h: h,
                want_w: self.width,
                want_h: self.height,
            });
        }
        Ok(())
    }

    /// Warps a planar image onto the cylinder. The output canvas keeps the
    /// source dimensions, center-aligned; pixels outside the valid band (or
    /// whose sample pulls from invalid source pixels) are invalid. RGB data
    /// is sampled bilinearly.
    pub fn warp(&self, img: &Raster) -> Result<Raster, ProjectionError> {
        self.check_dims(img.width(), img.height())?;
        let cols = self.column_map();
        let (cx, cy) = self.center();
        let half_h = self.height as f64 / 2.0;
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;

        let w = self.width;
        let mut pixels = vec![[0u8; 3]; w * self.height];
        let mut valid = vec![false; w * self.height];
        pixels
            .par_chunks_mut(w)
            .zip(valid.par_chunks_mut(w))
            .enumerate()
            .for_each(|(row, (prow, vrow))| {
                let yp = row as f64 - cy;
                for c in 0..w {
                    let (x, scale, x_ok) = cols[c];
                    if !x_ok {
                        continue;
                    }
                    let y = yp * scale;
                    if y.abs() > half_h {
                        continue;
                    }
                    let sx = (x + cx).clamp(0.0, max_x);
                    let sy = (y + cy).clamp(0.0, max_y);
                    if let Some(p) = img.sample_bilinear(sx, sy) {
                        prow[c] = p;
                        vrow[c] = true;
                    }
                }
            });
        Ok(Raster::from_parts(w, self.height, pixels, valid))
    }

    /// Warps a label map onto the cylinder with nearest-neighbor sampling
    /// (classes are categories and must never blend). Geometry and validity
    /// rules match [`warp`].
    ///
    /// [`warp`]: CylindricalCamera::warp
    pub fn warp_labels(&self, labels: &LabelMap) -> Result<LabelMap, ProjectionError> {
        self.check_dims(labels.width(), labels.height())?;
        let cols = self.column_map();
        let (cx, cy) = self.center();
        let half_h = self.height as f64 / 2.0;
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;

        let w = self.width;
        let mut classes = vec![0u8; w * self.height];
        let mut valid = vec![false; w * self.height];
        classes
            .par_chunks_mut(w)
            .zip(valid.par_chunks_mut(w))
            .enumerate()
            .for_each(|(row, (crow, vrow))| {
                let yp = row as f64 - cy;
                for c in 0..w {
                    let (x, scale, x_ok) = cols[c];
                    if !x_ok {
                        continue;
                    }
                    let y = yp * scale;
                    if y.abs() > half_h {
                        continue;
                    }
                    let sx = (x + cx).clamp(0.0, max_x);
                    let sy = (y + cy).clamp(0.0, max_y);
                    if let Some(class) = labels.sample_nearest(sx, sy) {
                        crow[c] = class;
                        vrow[c] = true;
                    }
                }
            });
        Ok(LabelMap::from_parts(w, self.height, classes, valid))
    }
}
