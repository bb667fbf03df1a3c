//! Pixel containers: RGB rasters and per-pixel label maps.
//!
//! Both carry an explicit per-pixel validity mask. Warping a planar image
//! onto a cylinder leaves parts of the canvas with no source data, and
//! everything downstream (matching, compositing, metrics) has to know which
//! pixels are real. The mask starts all-true for images fresh from disk and
//! only ever shrinks as images move through geometric operations.
//!
//! Coordinates passed to the sampling functions are storage coordinates:
//! `x` is the column, `y` the row, and pixel centers sit on integer values.
//! `(0.0, 0.0)` is exactly the top-left pixel.

/// An 8-bit RGB image with a validity mask, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
    valid: Vec<bool>,
}

/// A per-pixel class-index image with a validity mask, stored row-major.
///
/// Class indices are small integers into a [`crate::palette::Palette`];
/// the container itself does not restrict their range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    classes: Vec<u8>,
    valid: Vec<bool>,
}

impl Raster {
    /// Creates a raster filled with `fill`, all pixels valid.
    ///
    /// # Panics
    ///
    /// Panics if either dimension is zero.
    pub fn new(width: usize, height: usize, fill: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be nonzero");
        Raster {
            width,
            height,
            pixels: vec![fill; width * height],
            valid: vec![true; width * height],
        }
    }

    /// Creates a raster from row-major pixel data, all pixels valid.
    ///
    /// # Panics
    ///
    /// Panics if `pixels.len() != width * height` or a dimension is zero.
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be nonzero");
        assert_eq!(pixels.len(), width * height, "pixel buffer size mismatch");
        let valid = vec![true; pixels.len()];
        Raster { width, height, pixels, valid }
    }

    /// Creates an all-invalid black raster, the starting state for
    /// compositing canvases.
    ///
    /// # Panics
    ///
    /// Panics if either dimension is zero.
    pub fn new_invalid(width: usize, height: usize) -> Self {
        let mut r = Raster::new(width, height, [0, 0, 0]);
        r.valid.fill(false);
        r
    }

    /// Assembles a raster from separately built pixel and validity buffers
    /// (used by warp/compose kernels that fill rows in parallel).
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        pixels: Vec<[u8; 3]>,
        valid: Vec<bool>,
    ) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be nonzero");
        assert_eq!(pixels.len(), width * height, "pixel buffer size mismatch");
        assert_eq!(valid.len(), width * height, "validity buffer size mismatch");
        Raster { width, height, pixels, valid }
    }

    /// Copies a rectangular window (pixels and validity).
    ///
    /// # Panics
    ///
    /// Panics if the window reaches outside the image or is empty.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Raster {
        assert!(width > 0 && height > 0, "crop window must be nonzero");
        assert!(x0 + width <= self.width && y0 + height <= self.height, "crop out of bounds");
        let mut out = Raster::new(width, height, [0, 0, 0]);
        for y in 0..height {
            for x in 0..width {
                out.set(x, y, self.get(x0 + x, y0 + y));
                out.set_valid(x, y, self.is_valid(x0 + x, y0 + y));
            }
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Column coordinate of the image center, `(width − 1) / 2`.
    pub fn center_x(&self) -> f64 {
        (self.width as f64 - 1.0) / 2.0
    }

    /// Row coordinate of the image center, `(height − 1) / 2`.
    pub fn center_y(&self) -> f64 {
        (self.height as f64 - 1.0) / 2.0
    }

    #[inline]
    fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[self.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: [u8; 3]) {
        let i = self.index(x, y);
        self.pixels[i] = value;
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[self.index(x, y)]
    }

    #[inline]
    pub fn set_valid(&mut self, x: usize, y: usize, valid: bool) {
        let i = self.index(x, y);
        self.valid[i] = valid;
    }

    /// Raw row-major pixel data.
    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    /// Raw row-major validity mask.
    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    /// Number of valid pixels.
    pub fn count_valid(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// True when every pixel is valid.
    pub fn fully_valid(&self) -> bool {
        self.valid.iter().all(|v| *v)
    }

    /// Samples the image bilinearly at fractional storage coordinates.
    ///
    /// The four surrounding pixel centers are blended by area weights and
    /// each channel rounds to the nearest integer. A neighbor whose weight
    /// is exactly zero (the sample sits on a pixel center or grid line) does
    /// not contribute; out of the contributing neighbors, all must exist and
    /// be valid or the sample is `None`. Sampling at `x = -0.5` therefore
    /// fails even though it is only half a pixel outside: the missing pixel
    /// at `x0 = -1` would carry half the weight.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Option<[u8; 3]> {
        if !x.is_finite() || !y.is_finite() {
            return None;
        }
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let mut acc = [0.0f64; 3];
        for (ix, wx) in [(x0, 1.0 - fx), (x0 + 1.0, fx)] {
            for (iy, wy) in [(y0, 1.0 - fy), (y0 + 1.0, fy)] {
                let w = wx * wy;
                if w == 0.0 {
                    continue;
                }
                if ix < 0.0 || iy < 0.0 || ix >= self.width as f64 || iy >= self.height as f64 {
                    return None;
                }
                let (ix, iy) = (ix as usize, iy as usize);
                if !self.is_valid(ix, iy) {
                    return None;
                }
                let p = self.get(ix, iy);
                for c in 0..3 {
                    acc[c] += w * p[c] as f64;
                }
            }
        }
        Some([
            acc[0].round() as u8,
            acc[1].round() as u8,
            acc[2].round() as u8,
        ])
    }

    /// Resizes with bilinear interpolation, center-aligned.
    ///
    /// Output pixel `d` samples the source at `(d + 0.5) · scale − 0.5`, so
    /// the image extents line up rather than the first pixel centers. Samples
    /// near the border clamp to the edge pixels. A target pixel is valid only
    /// when every source pixel that contributes to it is valid. Resizing to
    /// the same dimensions reproduces the image exactly.
    ///
    /// # Panics
    ///
    /// Panics if either target dimension is zero.
    pub fn resize(&self, width: usize, height: usize) -> Raster {
        assert!(width > 0 && height > 0, "resize target must be nonzero");
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let mut out = Raster::new(width, height, [0, 0, 0]);
        for dy in 0..height {
            let y = (dy as f64 + 0.5) * sy - 0.5;
            let (y0, y1, wy1) = clamped_span(y, self.height);
            for dx in 0..width {
                let x = (dx as f64 + 0.5) * sx - 0.5;
                let (x0, x1, wx1) = clamped_span(x, self.width);
                let mut acc = [0.0f64; 3];
                let mut ok = true;
                for (ix, wx) in [(x0, 1.0 - wx1), (x1, wx1)] {
                    for (iy, wy) in [(y0, 1.0 - wy1), (y1, wy1)] {
                        let w = wx * wy;
                        if w == 0.0 {
                            continue;
                        }
                        ok &= self.is_valid(ix, iy);
                        let p = self.get(ix, iy);
                        for c in 0..3 {
                            acc[c] += w * p[c] as f64;
                        }
                    }
                }
                out.set(dx, dy, [
                    acc[0].round() as u8,
                    acc[1].round() as u8,
                    acc[2].round() as u8,
                ]);
                out.set_valid(dx, dy, ok);
            }
        }
        out
    }

    /// Mean absolute channel difference over all pixels of two same-sized
    /// rasters, ignoring validity. Used for near-duplicate detection on
    /// full camera frames.
    ///
    /// # Panics
    ///
    /// Panics if the dimensions differ.
    pub fn mean_abs_diff(&self, other: &Raster) -> f64 {
        assert_eq!(
            (self.width, self.height),
            (other.width, other.height),
            "mean_abs_diff requires equal dimensions"
        );
        let mut sum = 0u64;
        for (p, q) in self.pixels.iter().zip(&other.pixels) {
            for c in 0..3 {
                sum += (p[c] as i32 - q[c] as i32).unsigned_abs() as u64;
            }
        }
        sum as f64 / (self.pixels.len() as f64 * 3.0)
    }
}

impl LabelMap {
    /// Creates a label map filled with class `fill`, all pixels valid.
    ///
    /// # Panics
    ///
    /// Panics if either dimension is zero.
    pub fn new(width: usize, height: usize, fill: u8) -> Self {
        assert!(width > 0 && height > 0, "label map dimensions must be nonzero");
        LabelMap {
            width,
            height,
            classes: vec![fill; width * height],
            valid: vec![true; width * height],
        }
    }

    /// Creates a label map from row-major class data, all pixels valid.
    ///
    /// # Panics
    ///
    /// Panics if `classes.len() != width * height` or a dimension is zero.
    pub fn from_classes(width: usize, height: usize, classes: Vec<u8>) -> Self {
        assert!(width > 0 && height > 0, "label map dimensions must be nonzero");
        assert_eq!(classes.len(), width * height, "class buffer size mismatch");
        let valid = vec![true; classes.len()];
        LabelMap { width, height, classes, valid }
    }

    /// Creates an all-invalid label map (class 0), the starting state for
    /// compositing canvases.
    ///
    /// # Panics
    ///
    /// Panics if either dimension is zero.
    pub fn new_invalid(width: usize, height: usize) -> Self {
        let mut m = LabelMap::new(width, height, 0);
        m.valid.fill(false);
        m
    }

    /// Assembles a label map from separately built class and validity
    /// buffers (used by warp/compose kernels that fill rows in parallel).
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        classes: Vec<u8>,
        valid: Vec<bool>,
    ) -> Self {
        assert!(width > 0 && height > 0, "label map dimensions must be nonzero");
        assert_eq!(classes.len(), width * height, "class buffer size mismatch");
        assert_eq!(valid.len(), width * height, "validity buffer size mismatch");
        LabelMap { width, height, classes, valid }
    }

    /// Copies a rectangular window (classes and validity).
    ///
    /// # Panics
    ///
    /// Panics if the window reaches outside the image or is empty.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> LabelMap {
        assert!(width > 0 && height > 0, "crop window must be nonzero");
        assert!(x0 + width <= self.width && y0 + height <= self.height, "crop out of bounds");
        let mut out = LabelMap::new(width, height, 0);
        for y in 0..height {
            for x in 0..width {
                out.set(x, y, self.get(x0 + x, y0 + y));
                out.set_valid(x, y, self.is_valid(x0 + x, y0 + y));
            }
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Column coordinate of the image center, `(width − 1) / 2`.
    pub fn center_x(&self) -> f64 {
        (self.width as f64 - 1.0) / 2.0
    }

    /// Row coordinate of the image center, `(height − 1) / 2`.
    pub fn center_y(&self) -> f64 {
        (self.height as f64 - 1.0) / 2.0
    }

    #[inline]
    fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.classes[self.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, class: u8) {
        let i = self.index(x, y);
        self.classes[i] = class;
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[self.index(x, y)]
    }

    #[inline]
    pub fn set_valid(&mut self, x: usize, y: usize, valid: bool) {
        let i = self.index(x, y);
        self.valid[i] = valid;
    }

    /// Raw row-major class data.
    pub fn classes(&self) -> &[u8] {
        &self.classes
    }

    /// Raw row-major validity mask.
    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    /// Number of valid pixels.
    pub fn count_valid(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// True when every pixel is valid.
    pub fn fully_valid(&self) -> bool {
        self.valid.iter().all(|v| *v)
    }

    /// Samples the nearest pixel at fractional storage coordinates.
    ///
    /// Class indices are categories, so no blending: the coordinate rounds
    /// to the nearest pixel center (halves round away from zero). `None` if
    /// the rounded position is outside the image or the pixel is invalid.
    pub fn sample_nearest(&self, x: f64, y: f64) -> Option<u8> {
        if !x.is_finite() || !y.is_finite() {
            return None;
        }
        let ix = x.round();
        let iy = y.round();
        if ix < 0.0 || iy < 0.0 || ix >= self.width as f64 || iy >= self.height as f64 {
            return None;
        }
        let (ix, iy) = (ix as usize, iy as usize);
        if !self.is_valid(ix, iy) {
            return None;
        }
        Some(self.get(ix, iy))
    }

    /// Resizes with nearest-neighbor sampling, center-aligned like
    /// [`Raster::resize`]. Each target pixel copies the class and validity
    /// of its nearest source pixel. Resizing to the same dimensions
    /// reproduces the map exactly.
    ///
    /// # Panics
    ///
    /// Panics if either target dimension is zero.
    pub fn resize(&self, width: usize, height: usize) -> LabelMap {
        assert!(width > 0 && height > 0, "resize target must be nonzero");
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let mut out = LabelMap::new(width, height, 0);
        for dy in 0..height {
            let y = (dy as f64 + 0.5) * sy - 0.5;
            let iy = (y.round().max(0.0) as usize).min(self.height - 1);
            for dx in 0..width {
                let x = (dx as f64 + 0.5) * sx - 0.5;
                let ix = (x.round().max(0.0) as usize).min(self.width - 1);
                out.set(dx, dy, self.get(ix, iy));
                out.set_valid(dx, dy, self.is_valid(ix, iy));
            }
        }
        out
    }
}

/// Clamped bilinear span along one axis: returns the two source indices and
/// the weight of the second one. Coordinates beyond the border collapse onto
/// the edge pixel, which is how border replication falls out for free.
fn clamped_span(coord: f64, len: usize) -> (usize, usize, f64) {
    let max = (len - 1) as f64;
    let c = coord.clamp(0.0, max);
    let i0 = c.floor();
    let frac = c - i0;
    let i1 = (i0 + 1.0).min(max);
    (i0 as usize, i1 as usize, frac)
}
