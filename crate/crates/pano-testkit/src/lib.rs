//! Synthetic strip-rig oracles for testing the panorama pipeline against
//! known ground truth.
//!
//! The idea: invent the 360° scene first, then derive what each camera of
//! the rig would have photographed. The scene is a *strip* — the unrolled
//! cylinder surface — holding smooth periodic value noise (and a blocky
//! label layer). Four planar views are cut from it by the inverse
//! cylindrical mapping, evaluated here from scratch with `atan`/`hypot`
//! so the pipeline under test shares no code with its oracle. Feeding the
//! cut views through match → stitch must then reproduce the strip:
//!
//! * the measured inter-view distance must equal the rig's arc spacing,
//! * the panorama must equal the strip window pixel-for-pixel up to
//!   interpolation residue,
//! * label panoramas must match the strip's label blocks exactly away
//!   from block borders.
//!
//! Geometry: a rig with arc spacing `s` (strip columns per 90° step) lives
//! on a cylinder of radius `r = 2s/π`, so four steps make one full turn of
//! `4s` columns. The noise is periodic with exactly that period, which
//! makes the wrap-around seam as well-defined as any other column. `s`
//! must be even so the noise lattice (cell 8) divides the period.
//!
//! The strip's vertical coordinate is chosen so that view 0's warped
//! storage columns coincide with strip columns: a stitched (unrotated)
//! panorama column `p` shows strip column `(window_start + p) mod 4s` at
//! exactly its own row — comparisons need no resampling at all.

use std::f64::consts::PI;
use std::path::Path;

use pano_core::cylinder::CylindricalCamera;
use pano_core::pngio;
use pano_core::raster::{LabelMap, Raster};
use pano_core::stitch::Direction;

/// Noise lattice cell size, pixels.
const CELL: f64 = 8.0;

/// Number of label classes the synthetic strip uses (the palette's
/// non-reserved range).
const LABEL_CLASSES: u64 = 14;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash3(seed: u64, a: i64, b: i64) -> u64 {
    mix64(seed ^ mix64((a as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ mix64(b as u64)))
}

/// One channel of periodic value noise: pseudo-random values on a lattice
/// of `CELL`-sized cells, bilinearly interpolated in between. Defined on
/// the whole plane; periodic along `u` with period `cells_u · CELL`.
#[derive(Debug, Clone, Copy)]
struct NoiseChannel {
    seed: u64,
    cells_u: i64,
}

impl NoiseChannel {
    fn lattice(&self, cu: i64, cv: i64) -> f64 {
        let cu = cu.rem_euclid(self.cells_u);
        let bits = hash3(self.seed, cu, cv) >> 40;
        bits as f64 * (255.0 / ((1u64 << 24) - 1) as f64)
    }

    fn sample(&self, u: f64, v: f64) -> f64 {
        let (fu, fv) = (u / CELL, v / CELL);
        let (cu, cv) = (fu.floor(), fv.floor());
        let (tu, tv) = (fu - cu, fv - cv);
        let (cu, cv) = (cu as i64, cv as i64);
        let v00 = self.lattice(cu, cv);
        let v10 = self.lattice(cu + 1, cv);
        let v01 = self.lattice(cu, cv + 1);
        let v11 = self.lattice(cu + 1, cv + 1);
        let top = v00 + (v10 - v00) * tu;
        let bottom = v01 + (v11 - v01) * tu;
        top + (bottom - top) * tv
    }
}

fn quantize(value: f64) -> u8 {
    value.round().clamp(0.0, 255.0) as u8
}

/// A synthetic four-camera rig over a periodic noise strip.
#[derive(Debug, Clone)]
pub struct StripRig {
    /// Arc spacing between adjacent cameras, in strip columns. One full
    /// turn is `4 · spacing`.
    pub spacing: usize,
    /// Planar view width, pixels.
    pub width: usize,
    /// Planar view (and strip) height, pixels.
    pub height: usize,
    /// Focal length of the planar cameras.
    pub f: f64,
    /// Cylinder radius, `2·spacing/π` by construction.
    pub r: f64,
    pub seed: u64,
    channels: [NoiseChannel; 3],
    label_channel: NoiseChannel,
}

impl StripRig {
    fn build(spacing: usize, f: f64, width: usize, height: usize, seed: u64) -> StripRig {
        assert!(
            spacing >= 2 && spacing % 2 == 0,
            "arc spacing must be even so the noise period 4·spacing is a \
             multiple of the lattice cell"
        );
        assert!(width >= 2 && height >= 2);
        let cells_u = (4 * spacing) as i64 / CELL as i64;
        let channel = |salt: u64| NoiseChannel {
            seed: mix64(seed ^ salt),
            cells_u,
        };
        StripRig {
            spacing,
            width,
            height,
            f,
            r: 2.0 * spacing as f64 / PI,
            seed,
            channels: [channel(1), channel(2), channel(3)],
            label_channel: channel(0x1abe1),
        }
    }

    /// A rig following the `r = f` convention: the focal length is forced
    /// to the cylinder radius `2·spacing/π`, so the camera matches the
    /// default-radius projection exactly.
    pub fn matched(spacing: usize, width: usize, height: usize, seed: u64) -> StripRig {
        let r = 2.0 * spacing as f64 / PI;
        StripRig::build(spacing, r, width, height, seed)
    }

    /// A rig whose planar cameras cover `fov_degrees` horizontally
    /// (`f = (W/2)/tan(fov/2)`), with the cylinder radius still tied to
    /// the spacing.
    pub fn with_fov(
        spacing: usize,
        fov_degrees: f64,
        width: usize,
        height: usize,
        seed: u64,
    ) -> StripRig {
        assert!(fov_degrees > 0.0 && fov_degrees < 180.0);
        let f = (width as f64 / 2.0) / (fov_degrees.to_radians() / 2.0).tan();
        StripRig::build(spacing, f, width, height, seed)
    }

    /// Strip columns in one full turn.
    pub fn period(&self) -> usize {
        4 * self.spacing
    }

    /// The camera the pipeline should use to process this rig's views.
    pub fn camera(&self) -> CylindricalCamera {
        CylindricalCamera::with_radius(self.f, self.r, self.width, self.height)
            .expect("rig parameters are valid by construction")
    }

    fn center_x(&self) -> f64 {
        (self.width as f64 - 1.0) / 2.0
    }

    fn center_y(&self) -> f64 {
        (self.height as f64 - 1.0) / 2.0
    }

    /// The continuous strip intensity of one RGB channel at `(u, v)`.
    pub fn strip_value(&self, channel: usize, u: f64, v: f64) -> f64 {
        self.channels[channel].sample(u, v)
    }

    /// The strip's label class at `(u, v)`: constant on 8×8 blocks.
    pub fn strip_class(&self, u: f64, v: f64) -> u8 {
        let cu = (u / CELL).floor() as i64;
        let cv = (v / CELL).floor() as i64;
        let cu = cu.rem_euclid(self.label_channel.cells_u);
        (hash3(self.label_channel.seed, cu, cv) % LABEL_CLASSES) as u8
    }

    /// Renders the strip itself as a raster of the given width (content
    /// repeats beyond one period).
    pub fn strip_raster(&self, width: usize) -> Raster {
        let mut out = Raster::new(width, self.height, [0, 0, 0]);
        for v in 0..self.height {
            for u in 0..width {
                let px = [0, 1, 2].map(|ch| quantize(self.strip_value(ch, u as f64, v as f64)));
                out.set(u, v, px);
            }
        }
        out
    }

    /// Renders the strip's label layer.
    pub fn strip_labels(&self, width: usize) -> LabelMap {
        let mut out = LabelMap::new(width, self.height, 0);
        for v in 0..self.height {
            for u in 0..width {
                out.set(u, v, self.strip_class(u as f64, v as f64));
            }
        }
        out
    }

    /// Strip coordinates seen by planar pixel `(i, j)` of view `k`:
    /// the inverse cylindrical mapping, written out directly.
    fn planar_to_strip(&self, k: usize, i: f64, j: f64) -> (f64, f64) {
        let x = i - self.center_x();
        let y = j - self.center_y();
        let u = self.center_x() + (k * self.spacing) as f64 + self.r * (x / self.f).atan();
        let v = self.center_y() + y * self.r / x.hypot(self.f);
        (u, v)
    }

    /// Cuts the planar RGB view of camera `k` (0–3) out of the strip.
    pub fn cut_view(&self, k: usize) -> Raster {
        assert!(k < 4);
        let mut out = Raster::new(self.width, self.height, [0, 0, 0]);
        for i in 0..self.width {
            for j in 0..self.height {
                let (u, v) = self.planar_to_strip(k, i as f64, j as f64);
                let px = [0, 1, 2].map(|ch| quantize(self.strip_value(ch, u, v)));
                out.set(i, j, px);
            }
        }
        out
    }

    /// Cuts the planar label view of camera `k`.
    pub fn cut_labels(&self, k: usize) -> LabelMap {
        assert!(k < 4);
        let mut out = LabelMap::new(self.width, self.height, 0);
        for i in 0..self.width {
            for j in 0..self.height {
                let (u, v) = self.planar_to_strip(k, i as f64, j as f64);
                out.set(i, j, self.strip_class(u, v));
            }
        }
        out
    }

    /// All four RGB views in stitching order.
    pub fn views(&self) -> [Raster; 4] {
        [0, 1, 2, 3].map(|k| self.cut_view(k))
    }

    /// All four label views in stitching order.
    pub fn label_views(&self) -> [LabelMap; 4] {
        [0, 1, 2, 3].map(|k| self.cut_labels(k))
    }

    /// The composite column where a stitch of this rig's views must start:
    /// the first warped column of view 0 whose preimage stays inside the
    /// planar image (`|x| ≤ W/2`).
    pub fn expected_window_start(&self) -> usize {
        let half_band = self.r * (self.width as f64 / (2.0 * self.f)).atan();
        (self.center_x() - half_band).ceil() as usize
    }

    /// Mean absolute difference (over RGB channels) between a stitched,
    /// unrotated panorama and the strip, over the panorama's valid pixels.
    /// `window_start` is the panorama's composite start column. Returns
    /// the mean and the number of pixels compared.
    pub fn compare_rgb(&self, pano: &Raster, window_start: usize) -> (f64, usize) {
        let period = self.period();
        let mut total = 0.0;
        let mut pixels = 0usize;
        for q in 0..pano.height() {
            for p in 0..pano.width() {
                if !pano.is_valid(p, q) {
                    continue;
                }
                let u = ((window_start + p) % period) as f64;
                let got = pano.get(p, q);
                for (ch, &g) in got.iter().enumerate() {
                    let want = quantize(self.strip_value(ch, u, q as f64));
                    total += (f64::from(g) - f64::from(want)).abs();
                }
                pixels += 1;
            }
        }
        let mean = if pixels == 0 {
            0.0
        } else {
            total / (3 * pixels) as f64
        };
        (mean, pixels)
    }

    /// Compares a stitched, unrotated label panorama against the strip's
    /// label blocks, counting mismatches over valid pixels that sit well
    /// inside a block (≥ 2 columns/rows from its border, where
    /// nearest-neighbor resampling cannot legitimately flip the class).
    /// Returns `(mismatches, pixels_checked)`.
    pub fn compare_labels(&self, pano: &LabelMap, window_start: usize) -> (usize, usize) {
        let period = self.period();
        let cell = CELL as usize;
        let interior = |coord: usize| {
            let m = coord % cell;
            (2..=cell - 2).contains(&m)
        };
        let mut mismatches = 0;
        let mut checked = 0;
        for q in 0..pano.height() {
            if !interior(q) {
                continue;
            }
            for p in 0..pano.width() {
                let u = (window_start + p) % period;
                if !interior(u) || !pano.is_valid(p, q) {
                    continue;
                }
                checked += 1;
                if pano.get(p, q) != self.strip_class(u as f64, q as f64) {
                    mismatches += 1;
                }
            }
        }
        (mismatches, checked)
    }

    /// Writes this rig's eight files for one frame under
    /// `seq_root/<direction>/{rgb,labels}/<frame>.png`.
    pub fn write_frame(&self, seq_root: &Path, frame: &str) -> Result<(), pngio::PngError> {
        for (k, dir) in Direction::ALL.into_iter().enumerate() {
            let rgb = self.cut_view(k);
            let labels = self.cut_labels(k);
            pngio::save_image(
                &seq_root.join(dir.as_str()).join("rgb").join(format!("{frame}.png")),
                &rgb,
            )?;
            pngio::save_labels(
                &seq_root
                    .join(dir.as_str())
                    .join("labels")
                    .join(format!("{frame}.png")),
                &labels,
            )?;
        }
        Ok(())
    }
}
