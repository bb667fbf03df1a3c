//! Panorama assembly: composing four warped direction views into one 360°
//! image, plus the cyclic-rotation, resize, and field-of-view utilities
//! that post-process panoramas into training-ready crops.
//!
//! The rig holds four cameras 90° apart — left, forward, right, back —
//! each covering ~100°, so adjacent warped views overlap by a thin sliver.
//! On the shared cylinder the views differ only by horizontal translations
//! `t_x = {0, d, 2d, 3d}` (equal spacing: the rig angles are equal), with
//! `t_y = 0`. Stitching is therefore: warp each view, place them at their
//! offsets first-valid-wins, wrap the fourth view's dangling right overlap
//! back onto the start, and trim to exactly `4d` columns — one full turn,
//! whatever `d` region matching measured.
//!
//! No blending and no brightness compensation, deliberately: after
//! projection the overlaps coincide pixel-for-pixel, label maps must not be
//! blended at all, and using one compositing rule for both keeps RGB and
//! labels aligned.
//!
//! A warped view is only valid inside a bowtie-shaped region (full height
//! at its center column, shrinking toward the sides), so a panorama keeps
//! scalloped invalid margins along its top and bottom edges. What stitching
//! does guarantee — and checks — is full coverage along the center row;
//! a gap there means `d` exceeds the usable overlap.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cylinder::{CylindricalCamera, ProjectionError};
use crate::raster::{LabelMap, Raster};

#[derive(Debug, Error)]
pub enum StitchError {
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error("input {index} is {got_w}×{got_h}, expected {want_w}×{want_h}")]
    DimensionMismatch {
        index: usize,
        got_w: usize,
        got_h: usize,
        want_w: usize,
        want_h: usize,
    },
    #[error("invalid calibration: {0}")]
    BadCalibration(String),
    #[error(
        "panorama column {column} has no valid source pixel on the center row; \
         distance {distance} exceeds the rig's usable overlap"
    )]
    CoverageGap { column: usize, distance: usize },
    #[error("field of view must be 90, 180, or 360 degrees, got {0}")]
    UnsupportedFov(u32),
    #[error("width {width} does not split into {count} crops of 16-divisible width (needs a multiple of {required})")]
    WidthNotDivisible {
        width: usize,
        count: usize,
        required: usize,
    },
    #[error("start column {start} is out of range for width {width}")]
    StartOutOfRange { start: usize, width: usize },
}

/// One of the rig's four camera headings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Forward,
    Right,
    Back,
}

impl Direction {
    /// All headings in panorama order: each successive camera points 90°
    /// further clockwise, so their views land left-to-right.
    pub const ALL: [Direction; 4] = [
        Direction::Left,
        Direction::Forward,
        Direction::Right,
        Direction::Back,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Forward => "forward",
            Direction::Right => "right",
            Direction::Back => "back",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "left" => Ok(Direction::Left),
            "forward" => Ok(Direction::Forward),
            "right" => Ok(Direction::Right),
            "back" => Ok(Direction::Back),
            other => Err(format!(
                "unknown direction {other:?} (expected left, forward, right, or back)"
            )),
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything the stitcher needs to know about the rig: the measured
/// inter-view distance, which heading lands where, the shared camera
/// parameters, and the per-camera field of view.
#[derive(Debug, Clone)]
pub struct RigCalibration {
    /// Horizontal offset between adjacent warped views, in pixels.
    pub distance: usize,
    /// Heading of each of the four panorama slots, left to right.
    pub order: [Direction; 4],
    /// Shared camera parameters of all four views.
    pub camera: CylindricalCamera,
    /// Horizontal field of view of one camera, degrees.
    pub fov_per_image: f64,
}

impl RigCalibration {
    /// Calibration with the standard order (left, forward, right, back)
    /// and the rig's 100° per-camera field of view.
    pub fn new(distance: usize, camera: CylindricalCamera) -> Result<Self, StitchError> {
        let calib = RigCalibration {
            distance,
            order: Direction::ALL,
            camera,
            fov_per_image: 100.0,
        };
        calib.validate()?;
        Ok(calib)
    }

    /// The four translation offsets, `{0, d, 2d, 3d}`.
    pub fn offsets(&self) -> [usize; 4] {
        let d = self.distance;
        [0, d, 2 * d, 3 * d]
    }

    pub fn validate(&self) -> Result<(), StitchError> {
        if self.distance == 0 {
            return Err(StitchError::BadCalibration(
                "distance must be positive".into(),
            ));
        }
        if !(self.fov_per_image.is_finite() && self.fov_per_image > 0.0) {
            return Err(StitchError::BadCalibration(format!(
                "per-image field of view must be finite and positive, got {}",
                self.fov_per_image
            )));
        }
        if self.fov_per_image * 4.0 < 360.0 {
            return Err(StitchError::BadCalibration(format!(
                "4 × {}° = {}° < 360°: the views cannot cover a full turn",
                self.fov_per_image,
                self.fov_per_image * 4.0
            )));
        }
        let mut seen = [false; 4];
        for dir in self.order {
            let i = dir as usize;
            if seen[i] {
                return Err(StitchError::BadCalibration(format!(
                    "direction {dir} appears more than once in the order"
                )));
            }
            seen[i] = true;
        }
        Ok(())
    }
}

/// Metadata written next to saved panoramas.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PanoramaSidecar {
    pub d: usize,
    pub order: [Direction; 4],
    pub f: f64,
    pub r: f64,
    pub source_ids: [String; 4],
    pub start_column: usize,
}

/// A stitched 360° panorama: RGB, optional labels, and the calibration
/// provenance needed to reproduce or audit it.
#[derive(Debug, Clone)]
pub struct Panorama {
    pub rgb: Raster,
    pub labels: Option<LabelMap>,
    /// The four `t_x` offsets used, `{0, d, 2d, 3d}`.
    pub seam_offsets: [usize; 4],
    /// Provenance of the four inputs (file stems or direction names).
    pub source_ids: [String; 4],
    pub distance: usize,
    pub order: [Direction; 4],
    pub focal: f64,
    pub radius: f64,
    /// Composite column where the panorama window began — the first valid
    /// column of the first view. Fixed by the stitch; rotation does not
    /// change it.
    pub window_start: usize,
    /// Cumulative cyclic rotation applied via [`rotate_start`].
    ///
    /// [`rotate_start`]: Panorama::rotate_start
    pub start_column: usize,
}

impl Panorama {
    pub fn width(&self) -> usize {
        self.rgb.width()
    }

    pub fn height(&self) -> usize {
        self.rgb.height()
    }

    pub fn sidecar(&self) -> PanoramaSidecar {
        PanoramaSidecar {
            d: self.distance,
            order: self.order,
            f: self.focal,
            r: self.radius,
            source_ids: self.source_ids.clone(),
            start_column: self.start_column,
        }
    }

    /// Rotates the panorama cyclically so output column 0 shows input
    /// column `start_column`. A 360° panorama has no seam-free "front", so
    /// datasets draw this start at random to decouple image position from
    /// camera heading; rotating by the width is a full cycle (identity).
    pub fn rotate_start(&self, start_column: usize) -> Result<Panorama, StitchError> {
        let w = self.width();
        if start_column >= w {
            return Err(StitchError::StartOutOfRange {
                start: start_column,
                width: w,
            });
        }
        let mut out = self.clone();
        for y in 0..self.height() {
            for x in 0..w {
                let src = (x + start_column) % w;
                out.rgb.set(x, y, self.rgb.get(src, y));
                out.rgb.set_valid(x, y, self.rgb.is_valid(src, y));
            }
        }
        if let (Some(labels), Some(src_labels)) = (out.labels.as_mut(), self.labels.as_ref()) {
            for y in 0..src_labels.height() {
                for x in 0..w {
                    let src = (x + start_column) % w;
                    labels.set(x, y, src_labels.get(src, y));
                    labels.set_valid(x, y, src_labels.is_valid(src, y));
                }
            }
        }
        out.start_column = (self.start_column + start_column) % w;
        Ok(out)
    }

    /// Resizes the panorama (bilinear RGB, nearest labels), e.g. to make
    /// the width divisible by 16 for training crops.
    pub fn resize(&self, width: usize, height: usize) -> Panorama {
        let mut out = self.clone();
        out.rgb = self.rgb.resize(width, height);
        out.labels = self.labels.as_ref().map(|l| l.resize(width, height));
        out
    }

    /// Splits the panorama into non-overlapping crops covering `fov`
    /// degrees each: 360° → 1 crop, 180° → 2, 90° → 4. The width must
    /// divide into crops of 16-divisible width (resize first if needed).
    /// Concatenating the crops reproduces the panorama exactly.
    pub fn split_by_fov(&self, fov: u32) -> Result<Vec<(Raster, Option<LabelMap>)>, StitchError> {
        let count = match fov {
            360 => 1,
            180 => 2,
            90 => 4,
            other => return Err(StitchError::UnsupportedFov(other)),
        };
        let w = self.width();
        let required = count * 16;
        if w % required != 0 {
            return Err(StitchError::WidthNotDivisible {
                width: w,
                count,
                required,
            });
        }
        let crop_w = w / count;
        let h = self.height();
        Ok((0..count)
            .map(|k| {
                let rgb = self.rgb.crop(k * crop_w, 0, crop_w, h);
                let labels = self.labels.as_ref().map(|l| l.crop(k * crop_w, 0, crop_w, h));
                (rgb, labels)
            })
            .collect())
    }
}

/// Places `img` onto `canvas` at integer offset `(t_x, t_y)` with
/// first-valid-wins overlap resolution: valid canvas pixels are never
/// overwritten; invalid canvas positions take `img`'s valid pixels.
/// Parts of `img` falling outside the canvas are clipped.
pub fn translate_compose(canvas: &mut Raster, img: &Raster, t_x: i64, t_y: i64) {
    for y in 0..img.height() {
        let cy = y as i64 + t_y;
        if cy < 0 || cy >= canvas.height() as i64 {
            continue;
        }
        for x in 0..img.width() {
            let cx = x as i64 + t_x;
            if cx < 0 || cx >= canvas.width() as i64 {
                continue;
            }
            let (cx, cy) = (cx as usize, cy as usize);
            if !canvas.is_valid(cx, cy) && img.is_valid(x, y) {
                canvas.set(cx, cy, img.get(x, y));
                canvas.set_valid(cx, cy, true);
            }
        }
    }
}

/// [`translate_compose`] for label maps — same geometry, same
/// first-valid-wins rule.
pub fn translate_compose_labels(canvas: &mut LabelMap, img: &LabelMap, t_x: i64, t_y: i64) {
    for y in 0..img.height() {
        let cy = y as i64 + t_y;
        if cy < 0 || cy >= canvas.height() as i64 {
            continue;
        }
        for x in 0..img.width() {
            let cx = x as i64 + t_x;
            if cx < 0 || cx >= canvas.width() as i64 {
                continue;
            }
            let (cx, cy) = (cx as usize, cy as usize);
            if !canvas.is_valid(cx, cy) && img.is_valid(x, y) {
                canvas.set(cx, cy, img.get(x, y));
                canvas.set_valid(cx, cy, true);
            }
        }
    }
}

/// Stitches four planar direction views (ordered per the calibration) into
/// a 360° panorama of exactly `4·d` columns.
///
/// Each view is warped onto the cylinder, translated by `{0, d, 2d, 3d}`,
/// and composed first-valid-wins; the fourth view's dangling right overlap
/// wraps around modulo `4d`. The panorama window starts at the composite's
/// first valid column. Full coverage is verified along the center row and
/// a gap there is an error — it means `d` is larger than the per-seam
/// overlap can support.
pub fn stitch_panorama(
    rgb: &[Raster; 4],
    labels: Option<&[LabelMap; 4]>,
    calib: &RigCalibration,
) -> Result<Panorama, StitchError> {
    calib.validate()?;
    let cam = &calib.camera;
    for (i, img) in rgb.iter().enumerate() {
        if (img.width(), img.height()) != (cam.width, cam.height) {
            return Err(StitchError::DimensionMismatch {
                index: i,
                got_w: img.width(),
                got_h: img.height(),
                want_w: cam.width,
                want_h: cam.height,
            });
        }
    }
    if let Some(labels) = labels {
        for (i, l) in labels.iter().enumerate() {
            if (l.width(), l.height()) != (cam.width, cam.height) {
                return Err(StitchError::DimensionMismatch {
                    index: i,
                    got_w: l.width(),
                    got_h: l.height(),
                    want_w: cam.width,
                    want_h: cam.height,
                });
            }
        }
    }

    let d = calib.distance;
    let (w, h) = (cam.width, cam.height);
    let composite_w = 3 * d + w;
    let pano_w = 4 * d;
    let mid_row = (h - 1) / 2;

    let mut composite = Raster::new_invalid(composite_w, h);
    for (k, img) in rgb.iter().enumerate() {
        let warped = cam.warp(img)?;
        translate_compose(&mut composite, &warped, (k * d) as i64, 0);
    }

    let x_start = (0..composite_w)
        .find(|&c| composite.is_valid(c, mid_row))
        .ok_or(StitchError::CoverageGap {
            column: 0,
            distance: d,
        })?;

    // Trim to one full turn, folding the fourth view's overhang back onto
    // the start of the window.
    let mut pano = Raster::new_invalid(pano_w, h);
    for y in 0..h {
        for p in 0..pano_w {
            let c = x_start + p;
            let (src, ok) = if c < composite_w && composite.is_valid(c, y) {
                (c, true)
            } else if c + pano_w < composite_w && composite.is_valid(c + pano_w, y) {
                (c + pano_w, true)
            } else {
                (0, false)
            };
            if ok {
                pano.set(p, y, composite.get(src, y));
                pano.set_valid(p, y, true);
            }
        }
    }

    for p in 0..pano_w {
        if !pano.is_valid(p, mid_row) {
            return Err(StitchError::CoverageGap {
                column: p,
                distance: d,
            });
        }
    }

    let pano_labels = match labels {
        Some(label_views) => {
            let mut composite_l = LabelMap::new_invalid(composite_w, h);
            for (k, l) in label_views.iter().enumerate() {
                let warped = cam.warp_labels(l)?;
                translate_compose_labels(&mut composite_l, &warped, (k * d) as i64, 0);
            }
            let mut out = LabelMap::new_invalid(pano_w, h);
            for y in 0..h {
                for p in 0..pano_w {
                    let c = x_start + p;
                    let (src, ok) = if c < composite_w && composite_l.is_valid(c, y) {
                        (c, true)
                    } else if c + pano_w < composite_w && composite_l.is_valid(c + pano_w, y) {
                        (c + pano_w, true)
                    } else {
                        (0, false)
                    };
                    if ok {
                        out.set(p, y, composite_l.get(src, y));
                        out.set_valid(p, y, true);
                    }
                }
            }
            Some(out)
        }
        None => None,
    };

    Ok(Panorama {
        rgb: pano,
        labels: pano_labels,
        seam_offsets: calib.offsets(),
        source_ids: calib.order.map(|dir| dir.as_str().to_string()),
        distance: d,
        order: calib.order,
        focal: cam.f,
        radius: cam.r,
        window_start: x_start,
        start_column: 0,
    })
}
