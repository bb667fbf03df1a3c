//! The 16-class label palette: class names, display colors, and the
//! RGB ↔ class-index conversions used when label maps travel as color
//! images.
//!
//! The class list follows the usual urban-driving label space — sky,
//! building, road, sidewalk, fence, vegetation, pole, car, traffic sign,
//! pedestrian, bicycle, lane marking, traffic light, terrain — with the
//! last two indices reserved. The colors are a shipped convention, not
//! ground truth, so the whole table can be replaced from a JSON file
//! (an array of 16 `{index, name, rgb}` objects).
//!
//! Pure black `(0, 0, 0)` is deliberately absent from the default table:
//! rendered label images paint invalid pixels black, and a black class
//! would make that rendering ambiguous.

use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

use crate::raster::{LabelMap, Raster};

/// Size of the label space. Class indices are always `0..CLASS_COUNT`.
pub const CLASS_COUNT: usize = 16;

/// The first of the two reserved class indices.
pub const RESERVED_CLASS_A: u8 = 14;
/// The second reserved class index, also used as the fill class when a
/// label map with invalid pixels is written to a plain index image.
pub const RESERVED_CLASS_B: u8 = 15;

const DEFAULT_TABLE: [(&str, [u8; 3]); CLASS_COUNT] = [
    ("sky", [128, 128, 128]),
    ("building", [128, 0, 0]),
    ("road", [128, 64, 128]),
    ("sidewalk", [0, 0, 192]),
    ("fence", [64, 64, 128]),
    ("vegetation", [128, 128, 0]),
    ("pole", [192, 192, 128]),
    ("car", [64, 0, 128]),
    ("traffic-sign", [192, 128, 128]),
    ("pedestrian", [64, 64, 0]),
    ("bicycle", [0, 128, 192]),
    ("lane-marking", [0, 172, 0]),
    ("traffic-light", [0, 128, 128]),
    ("terrain", [152, 251, 152]),
    ("reserved-1", [255, 255, 255]),
    ("reserved-2", [16, 16, 16]),
];

#[derive(Debug, Error)]
pub enum PaletteError {
    #[error("cannot read palette file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("palette file {path} is not valid JSON: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("palette must define exactly {CLASS_COUNT} classes, found {0}")]
    WrongCount(usize),
    #[error("palette index {0} is defined more than once")]
    DuplicateIndex(u8),
    #[error("palette index {0} is out of range (must be < {CLASS_COUNT})")]
    IndexOutOfRange(u8),
    #[error("palette color {0:?} is used by more than one class")]
    DuplicateColor([u8; 3]),
}

/// One palette entry as stored in the JSON config format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PaletteEntry {
    pub index: u8,
    pub name: String,
    pub rgb: [u8; 3],
}

/// Class index → (name, display color) table with exactly [`CLASS_COUNT`]
/// entries and all colors distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    names: Vec<String>,
    colors: Vec<[u8; 3]>,
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            names: DEFAULT_TABLE.iter().map(|(n, _)| n.to_string()).collect(),
            colors: DEFAULT_TABLE.iter().map(|(_, c)| *c).collect(),
        }
    }
}

impl Palette {
    /// Builds a palette from 16 entries, one per class index.
    pub fn from_entries(entries: &[PaletteEntry]) -> Result<Self, PaletteError> {
        if entries.len() != CLASS_COUNT {
            return Err(PaletteError::WrongCount(entries.len()));
        }
        let mut names = vec![None; CLASS_COUNT];
        let mut colors = vec![[0u8; 3]; CLASS_COUNT];
        for e in entries {
            let i = e.index as usize;
            if i >= CLASS_COUNT {
                return Err(PaletteError::IndexOutOfRange(e.index));
            }
            if names[i].is_some() {
                return Err(PaletteError::DuplicateIndex(e.index));
            }
            names[i] = Some(e.name.clone());
            colors[i] = e.rgb;
        }
        for (i, c) in colors.iter().enumerate() {
            if colors[..i].contains(c) {
                return Err(PaletteError::DuplicateColor(*c));
            }
        }
        Ok(Palette {
            names: names.into_iter().map(|n| n.unwrap()).collect(),
            colors,
        })
    }

    /// Loads a palette from a JSON file (array of 16 `{index, name, rgb}`
    /// objects).
    pub fn load(path: &Path) -> Result<Self, PaletteError> {
        let text = std::fs::read_to_string(path).map_err(|source| PaletteError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let entries: Vec<PaletteEntry> =
            serde_json::from_str(&text).map_err(|source| PaletteError::Parse {
                path: path.display().to_string(),
                source,
            })?;
        Palette::from_entries(&entries)
    }

    /// The palette as config-file entries, e.g. for writing a template.
    pub fn entries(&self) -> Vec<PaletteEntry> {
        (0..CLASS_COUNT)
            .map(|i| PaletteEntry {
                index: i as u8,
                name: self.names[i].clone(),
                rgb: self.colors[i],
            })
            .collect()
    }

    /// Display color of a class.
    ///
    /// # Panics
    ///
    /// Panics if `class >= CLASS_COUNT`.
    pub fn color_of(&self, class: u8) -> [u8; 3] {
        self.colors[class as usize]
    }

    /// Name of a class.
    ///
    /// # Panics
    ///
    /// Panics if `class >= CLASS_COUNT`.
    pub fn name_of(&self, class: u8) -> &str {
        &self.names[class as usize]
    }

    /// Inverse lookup: the class whose display color is exactly `rgb`.
    pub fn class_of_color(&self, rgb: [u8; 3]) -> Option<u8> {
        self.colors.iter().position(|c| *c == rgb).map(|i| i as u8)
    }

    /// Renders a label map as a color image. Valid pixels take their class
    /// color; invalid pixels are painted black and flagged invalid in the
    /// result.
    ///
    /// # Panics
    ///
    /// Panics if the map contains a class index `>= CLASS_COUNT`.
    pub fn render(&self, labels: &LabelMap) -> Raster {
        let mut out = Raster::new(labels.width(), labels.height(), [0, 0, 0]);
        for y in 0..labels.height() {
            for x in 0..labels.width() {
                if labels.is_valid(x, y) {
                    out.set(x, y, self.color_of(labels.get(x, y)));
                } else {
                    out.set_valid(x, y, false);
                }
            }
        }
        out
    }
}
