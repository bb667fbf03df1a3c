//! Lossless PNG I/O for rasters and label maps.
//!
//! RGB images travel as 8-bit RGB PNGs. Label maps travel either as 8-bit
//! grayscale PNGs holding raw class indices, or as color renderings that
//! are inverted through a [`Palette`] on load (paletted PNGs decode to RGB
//! and take the same path). Only PNG is compiled in; any other container
//! is reported as an unsupported format rather than silently re-encoded.
//!
//! Validity is not stored in the files. Saving paints invalid RGB pixels
//! with the designated black fill, and saving a label map substitutes the
//! reserved fill class [`palette::RESERVED_CLASS_B`] so downstream
//! consumers can treat those regions as ignore areas. Loading always
//! yields fully valid images.

use std::path::Path;

use image::{DynamicImage, ImageError, ImageFormat};
use thiserror::Error;

use crate::palette::{self, Palette, CLASS_COUNT};
use crate::raster::{LabelMap, Raster};

#[derive(Debug, Error)]
pub enum PngError {
    #[error("file not found: {path}")]
    Missing { path: String },
    #[error("unsupported image format in {path}: {detail}")]
    Unsupported { path: String, detail: String },
    #[error("corrupt image data in {path}: {detail}")]
    Corrupt { path: String, detail: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("label color {rgb:?} at ({x}, {y}) in {path} matches no palette entry")]
    UnmatchedColor {
        path: String,
        x: usize,
        y: usize,
        rgb: [u8; 3],
    },
    #[error("class index {class} at ({x}, {y}) in {path} is out of range (must be < {CLASS_COUNT})")]
    ClassOutOfRange {
        path: String,
        x: usize,
        y: usize,
        class: u8,
    },
}

fn classify(path: &Path, err: ImageError) -> PngError {
    let path = path.display().to_string();
    match err {
        ImageError::IoError(e) if e.kind() == std::io::ErrorKind::NotFound => {
            PngError::Missing { path }
        }
        // The decoder surfaces a file that ends mid-stream as an
        // unexpected-EOF read error; for callers that is a corrupt file,
        // not an I/O fault of the system.
        ImageError::IoError(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
            PngError::Corrupt {
                path,
                detail: e.to_string(),
            }
        }
        ImageError::IoError(source) => PngError::Io { path, source },
        ImageError::Unsupported(e) => PngError::Unsupported {
            path,
            detail: e.to_string(),
        },
        ImageError::Decoding(e) => PngError::Corrupt {
            path,
            detail: e.to_string(),
        },
        other => PngError::Corrupt {
            path,
            detail: other.to_string(),
        },
    }
}

fn decode(path: &Path) -> Result<DynamicImage, PngError> {
    image::open(path).map_err(|e| classify(path, e))
}

/// Loads an RGB PNG as a fully valid raster. Grayscale and alpha variants
/// are widened/flattened to RGB; 16-bit files are rejected as unsupported.
pub fn load_image(path: &Path) -> Result<Raster, PngError> {
    let img = decode(path)?;
    let rgb = match img {
        DynamicImage::ImageRgb8(b) => b,
        DynamicImage::ImageRgba8(_) | DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) => {
            img.to_rgb8()
        }
        other => {
            return Err(PngError::Unsupported {
                path: path.display().to_string(),
                detail: format!("{:?} pixels, expected 8-bit RGB", other.color()),
            })
        }
    };
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let pixels = rgb.pixels().map(|p| p.0).collect();
    Ok(Raster::from_pixels(w, h, pixels))
}

/// Loads a label PNG as a fully valid label map.
///
/// 8-bit grayscale files carry class indices directly; RGB files (including
/// decoded paletted PNGs) are inverted through `palette`. Any index ≥ 16 or
/// color missing from the palette is an error naming the offending pixel.
pub fn load_labels(path: &Path, palette: &Palette) -> Result<LabelMap, PngError> {
    let img = decode(path)?;
    let p = path.display().to_string();
    match img {
        DynamicImage::ImageLuma8(gray) => {
            let (w, h) = (gray.width() as usize, gray.height() as usize);
            let mut classes = Vec::with_capacity(w * h);
            for (i, px) in gray.pixels().enumerate() {
                let class = px.0[0];
                if class as usize >= CLASS_COUNT {
                    return Err(PngError::ClassOutOfRange {
                        path: p,
                        x: i % w,
                        y: i / w,
                        class,
                    });
                }
                classes.push(class);
            }
            Ok(LabelMap::from_classes(w, h, classes))
        }
        DynamicImage::ImageRgb8(_) | DynamicImage::ImageRgba8(_) => {
            let rgb = img.to_rgb8();
            let (w, h) = (rgb.width() as usize, rgb.height() as usize);
            let mut classes = Vec::with_capacity(w * h);
            for (i, px) in rgb.pixels().enumerate() {
                match palette.class_of_color(px.0) {
                    Some(c) => classes.push(c),
                    None => {
                        return Err(PngError::UnmatchedColor {
                            path: p,
                            x: i % w,
                            y: i / w,
                            rgb: px.0,
                        })
                    }
                }
            }
            Ok(LabelMap::from_classes(w, h, classes))
        }
        other => Err(PngError::Unsupported {
            path: p,
            detail: format!("{:?} pixels, expected 8-bit grayscale or RGB", other.color()),
        }),
    }
}

fn ensure_parent(path: &Path) -> Result<(), PngError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| PngError::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
    }
    Ok(())
}

/// Saves a raster as an 8-bit RGB PNG, creating parent directories as
/// needed. Invalid pixels are written as black `(0, 0, 0)`.
pub fn save_image(path: &Path, img: &Raster) -> Result<(), PngError> {
    ensure_parent(path)?;
    let mut bytes = Vec::with_capacity(img.width() * img.height() * 3);
    for (p, v) in img.pixels().iter().zip(img.validity()) {
        if *v {
            bytes.extend_from_slice(p);
        } else {
            bytes.extend_from_slice(&[0, 0, 0]);
        }
    }
    image::save_buffer_with_format(
        path,
        &bytes,
        img.width() as u32,
        img.height() as u32,
        image::ExtendedColorType::Rgb8,
        ImageFormat::Png,
    )
    .map_err(|e| classify(path, e))
}

/// Saves a label map as an 8-bit grayscale PNG of class indices, creating
/// parent directories as needed. Invalid pixels are written as the reserved
/// fill class [`palette::RESERVED_CLASS_B`].
pub fn save_labels(path: &Path, labels: &LabelMap) -> Result<(), PngError> {
    ensure_parent(path)?;
    let bytes: Vec<u8> = labels
        .classes()
        .iter()
        .zip(labels.validity())
        .map(|(c, v)| if *v { *c } else { palette::RESERVED_CLASS_B })
        .collect();
    image::save_buffer_with_format(
        path,
        &bytes,
        labels.width() as u32,
        labels.height() as u32,
        image::ExtendedColorType::L8,
        ImageFormat::Png,
    )
    .map_err(|e| classify(path, e))
}

/// Saves a label map as a color rendering through `palette` (invalid pixels
/// black), for visual inspection.
pub fn save_rendered_labels(
    path: &Path,
    labels: &LabelMap,
    palette: &Palette,
) -> Result<(), PngError> {
    save_image(path, &palette.render(labels))
}
