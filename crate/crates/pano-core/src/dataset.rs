//! Dataset generation: walking a captured four-camera tree, dropping
//! near-duplicate frames, stitching panoramas, producing field-of-view
//! crops and focal-length distortion series, and writing a manifest that
//! records exactly what was produced and why.
//!
//! ## Source layout
//!
//! ```text
//! src/<sequence>/<direction>/rgb/<frame>.png
//! src/<sequence>/<direction>/labels/<frame>.png
//! ```
//!
//! with `<direction>` one of `left`, `forward`, `right`, `back`. Frames
//! are identified by their file stem and processed in lexicographic
//! order (zero-padded numbering sorts correctly).
//!
//! ## Output layout
//!
//! ```text
//! out/<sequence>/pano/{rgb,labels,meta}/<frame>.{png,json}
//! out/<sequence>/fov<N>/{rgb,labels}/<frame>_<k>.png
//! out/<sequence>/distort_f<F>/{rgb,labels}/<frame>_<direction>.png
//! out/manifest.json
//! ```
//!
//! ## Determinism
//!
//! A run is a pure function of the source tree, the options, and the
//! seed. Panorama start columns are drawn from a per-frame RNG stream
//! keyed by hashing `<sequence>/<frame>`, so they do not depend on thread
//! scheduling or on which other frames exist; the manifest is assembled
//! in sorted order with no timestamps. Running twice with the same inputs
//! yields byte-identical outputs.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cylinder::{CylindricalCamera, ProjectionError, DEFAULT_FOCAL};
use crate::matching::{
    estimate_rig_distance, MatchConfig, MatchError, DEFAULT_REGION_WIDTH,
    DEFAULT_SPREAD_THRESHOLD,
};
use crate::palette::Palette;
use crate::pngio::{self, PngError};
use crate::raster::{LabelMap, Raster};
use crate::stitch::{stitch_panorama, Direction, RigCalibration, StitchError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Png(#[from] PngError),
    #[error(transparent)]
    Stitch(#[from] StitchError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("sequence {sequence}: frame {frame} is missing {path}")]
    MissingFile {
        sequence: String,
        frame: String,
        path: String,
    },
    #[error("{0} is not a sequence directory (no forward/rgb subdirectory)")]
    NotASequence(String),
    #[error("no sequences found under {0}")]
    EmptyRoot(String),
    #[error("sequence {0} has no frames")]
    EmptySequence(String),
    #[error("invalid options: {0}")]
    Config(String),
}

fn io_err(path: &Path, source: std::io::Error) -> DatasetError {
    DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// One sequence of the source tree: its name, its directory, and its
/// frame stems in processing order.
#[derive(Debug, Clone)]
pub struct SequenceSpec {
    pub name: String,
    pub root: PathBuf,
    pub frames: Vec<String>,
}

impl SequenceSpec {
    /// Scans a source tree and returns its sequences sorted by name.
    ///
    /// Strict by design: every subdirectory of `root` must be a sequence,
    /// and every frame must have all eight files (RGB and labels for each
    /// of the four directions). A capture with holes is a rig fault that
    /// should be fixed or pruned upstream, not silently skipped.
    pub fn discover(root: &Path) -> Result<Vec<SequenceSpec>, DatasetError> {
        let entries = std::fs::read_dir(root).map_err(|e| io_err(root, e))?;
        let mut names: Vec<String> = entries
            .filter_map(|entry| {
                let entry = entry.ok()?;
                let name = entry.file_name().to_string_lossy().into_owned();
                (entry.path().is_dir() && !name.starts_with('.')).then_some(name)
            })
            .collect();
        names.sort_unstable();
        if names.is_empty() {
            return Err(DatasetError::EmptyRoot(root.display().to_string()));
        }

        names
            .into_iter()
            .map(|name| SequenceSpec::open_named(root.join(&name), name))
            .collect()
    }

    /// Opens a single sequence directory, taking its name from the last
    /// path component. Applies the same strictness as [`discover`].
    ///
    /// [`discover`]: SequenceSpec::discover
    pub fn open(root: &Path) -> Result<SequenceSpec, DatasetError> {
        let name = root
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .ok_or_else(|| DatasetError::NotASequence(root.display().to_string()))?;
        SequenceSpec::open_named(root.to_path_buf(), name)
    }

    fn open_named(root: PathBuf, name: String) -> Result<SequenceSpec, DatasetError> {
        let forward_rgb = root.join("forward").join("rgb");
        if !forward_rgb.is_dir() {
            return Err(DatasetError::NotASequence(root.display().to_string()));
        }
        let entries = std::fs::read_dir(&forward_rgb).map_err(|e| io_err(&forward_rgb, e))?;
        let mut frames: Vec<String> = entries
            .filter_map(|entry| {
                let path = entry.ok()?.path();
                if path.extension().and_then(|e| e.to_str()) != Some("png") {
                    return None;
                }
                Some(path.file_stem()?.to_string_lossy().into_owned())
            })
            .collect();
        frames.sort_unstable();

        let seq = SequenceSpec { name, root, frames };
        for frame in &seq.frames {
            for dir in Direction::ALL {
                for path in [seq.rgb_path(frame, dir), seq.labels_path(frame, dir)] {
                    if !path.is_file() {
                        return Err(DatasetError::MissingFile {
                            sequence: seq.name.clone(),
                            frame: frame.clone(),
                            path: path.display().to_string(),
                        });
                    }
                }
            }
        }
        Ok(seq)
    }

    pub fn rgb_path(&self, frame: &str, dir: Direction) -> PathBuf {
        self.root
            .join(dir.as_str())
            .join("rgb")
            .join(format!("{frame}.png"))
    }

    pub fn labels_path(&self, frame: &str, dir: Direction) -> PathBuf {
        self.root
            .join(dir.as_str())
            .join("labels")
            .join(format!("{frame}.png"))
    }

    /// Loads one frame's four RGB views and four label maps, in the given
    /// stitching order.
    pub fn load_frame(
        &self,
        frame: &str,
        order: [Direction; 4],
        palette: &Palette,
    ) -> Result<([Raster; 4], [LabelMap; 4]), DatasetError> {
        let mut rgb = Vec::with_capacity(4);
        let mut labels = Vec::with_capacity(4);
        for dir in order {
            rgb.push(pngio::load_image(&self.rgb_path(frame, dir))?);
            labels.push(pngio::load_labels(&self.labels_path(frame, dir), palette)?);
        }
        let rgb: [Raster; 4] = rgb.try_into().expect("four directions were loaded");
        let labels: [LabelMap; 4] = labels.try_into().expect("four directions were loaded");
        Ok((rgb, labels))
    }
}

/// Distortion-series settings: re-render planar views at several focal
/// lengths (cylinder radius tied to each focal) to vary how strongly
/// straight lines bend.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistortionSpec {
    pub enabled: bool,
    /// Focal lengths to render, each used as both `f` and `r`.
    pub focal_lengths: Vec<f64>,
    /// Which planar views to distort.
    pub directions: Vec<Direction>,
}

impl Default for DistortionSpec {
    fn default() -> Self {
        DistortionSpec {
            enabled: false,
            focal_lengths: vec![700.0, 600.0, 500.0, 400.0],
            directions: vec![Direction::Forward],
        }
    }
}

/// Everything a generation run needs besides the source and output roots.
#[derive(Debug, Clone)]
pub struct GeneratorOptions {
    /// Focal length of the rig's cameras, in pixels.
    pub focal: f64,
    /// Cylinder radius; `None` uses the focal length.
    pub radius: Option<f64>,
    /// Inter-view distance in pixels; `None` measures it by region
    /// matching on each sequence's first kept frame.
    pub distance: Option<usize>,
    /// Region width for distance measurement.
    pub region_width: usize,
    /// Allowed spread between per-pair distance estimates before the
    /// manifest carries a calibration warning.
    pub spread_threshold: i64,
    /// Frames whose forward view differs from the last kept frame's by a
    /// mean absolute RGB difference below this are dropped. 0 keeps all.
    pub dedup_threshold: f64,
    /// Resize panoramas to this size before rotation and splitting.
    pub resize: Option<(usize, usize)>,
    /// Field-of-view splits to emit in addition to the full panorama.
    pub splits: Vec<u32>,
    pub distortion: DistortionSpec,
    /// Seed for the start-column draws.
    pub seed: u64,
    pub palette: Palette,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        GeneratorOptions {
            focal: DEFAULT_FOCAL,
            radius: None,
            distance: None,
            region_width: DEFAULT_REGION_WIDTH,
            spread_threshold: DEFAULT_SPREAD_THRESHOLD,
            dedup_threshold: 1.0,
            resize: None,
            splits: Vec::new(),
            distortion: DistortionSpec::default(),
            seed: 0,
            palette: Palette::default(),
        }
    }
}

impl GeneratorOptions {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if !(self.focal.is_finite() && self.focal > 0.0) {
            return Err(DatasetError::Config(format!(
                "focal length must be finite and > 0, got {}",
                self.focal
            )));
        }
        if let Some(r) = self.radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(DatasetError::Config(format!(
                    "cylinder radius must be finite and > 0, got {r}"
                )));
            }
        }
        if self.distance == Some(0) {
            return Err(DatasetError::Config("distance must be positive".into()));
        }
        if self.region_width % 2 == 0 || self.region_width == 0 {
            return Err(DatasetError::Config(format!(
                "region width must be odd and at least 1, got {}",
                self.region_width
            )));
        }
        if !(self.dedup_threshold.is_finite() && self.dedup_threshold >= 0.0) {
            return Err(DatasetError::Config(format!(
                "dedup threshold must be finite and ≥ 0, got {}",
                self.dedup_threshold
            )));
        }
        if let Some((w, h)) = self.resize {
            if w == 0 || h == 0 {
                return Err(DatasetError::Config(format!(
                    "resize target must be nonzero, got {w}×{h}"
                )));
            }
        }
        for &fov in &self.splits {
            if !matches!(fov, 90 | 180 | 360) {
                return Err(DatasetError::Config(format!(
                    "unsupported field-of-view split {fov} (expected 90, 180, or 360)"
                )));
            }
        }
        if self.distortion.enabled {
            if self.distortion.focal_lengths.is_empty() {
                return Err(DatasetError::Config(
                    "distortion is enabled but no focal lengths are listed".into(),
                ));
            }
            for &f in &self.distortion.focal_lengths {
                if !(f.is_finite() && f > 0.0) {
                    return Err(DatasetError::Config(format!(
                        "distortion focal lengths must be finite and > 0, got {f}"
                    )));
                }
            }
            if self.distortion.directions.is_empty() {
                return Err(DatasetError::Config(
                    "distortion is enabled but no directions are listed".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Splits a sequence's frames into kept and dropped: a frame is dropped
/// when the mean absolute RGB difference between its forward view and the
/// last **kept** frame's forward view falls below `threshold` — the rig
/// stood still, so the panorama would be (nearly) a duplicate. Comparing
/// against the last kept frame (not the previous frame) means a slow
/// creep eventually accumulates enough change to be kept.
pub fn deduplicate_frames(
    seq: &SequenceSpec,
    threshold: f64,
) -> Result<(Vec<String>, Vec<String>), DatasetError> {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut reference: Option<Raster> = None;
    for frame in &seq.frames {
        let img = pngio::load_image(&seq.rgb_path(frame, Direction::Forward))?;
        let is_new = match &reference {
            None => true,
            Some(last) => {
                if (last.width(), last.height()) != (img.width(), img.height()) {
                    true // a resolution change is certainly a new scene
                } else {
                    img.mean_abs_diff(last) >= threshold
                }
            }
        };
        if is_new {
            reference = Some(img);
            kept.push(frame.clone());
        } else {
            dropped.push(frame.clone());
        }
    }
    Ok((kept, dropped))
}

/// How a sequence's inter-view distance was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceSource {
    Configured,
    Measured,
}

/// A sequence's calibration along with its measurement diagnostics.
#[derive(Debug, Clone)]
pub struct SequenceCalibration {
    pub rig: RigCalibration,
    pub source: DistanceSource,
    pub spread: i64,
    pub warning: Option<String>,
}

/// Calibrates one sequence: builds the camera from the frame's forward
/// view dimensions and either adopts the configured distance or measures
/// it by matching all four adjacent warped view pairs (wrapping back to
/// the first) and taking the median.
pub fn calibrate_sequence(
    seq: &SequenceSpec,
    frame: &str,
    opts: &GeneratorOptions,
) -> Result<SequenceCalibration, DatasetError> {
    let (rgb, _) = seq.load_frame(frame, Direction::ALL, &opts.palette)?;
    let camera = CylindricalCamera::with_radius(
        opts.focal,
        opts.radius.unwrap_or(opts.focal),
        rgb[0].width(),
        rgb[0].height(),
    )?;

    if let Some(d) = opts.distance {
        return Ok(SequenceCalibration {
            rig: RigCalibration::new(d, camera)?,
            source: DistanceSource::Configured,
            spread: 0,
            warning: None,
        });
    }

    let warped: Vec<Raster> = rgb
        .iter()
        .map(|img| camera.warp(img))
        .collect::<Result<_, _>>()?;
    let pairs: Vec<(&Raster, &Raster)> = (0..4)
        .map(|k| (&warped[k], &warped[(k + 1) % 4]))
        .collect();

    // Anchor the reference region flush with the right edge of the valid
    // band. The band is symmetric about the image center, so every
    // candidate region that fits inside the band is at most as pinched by
    // the bowtie as this reference — the true match is never skipped for
    // failing the reference's row range, however small the overlap.
    let mid_row = (warped[0].height() - 1) / 2;
    let last_valid = (0..warped[0].width())
        .rev()
        .find(|&c| warped[0].is_valid(c, mid_row))
        .ok_or_else(|| {
            DatasetError::Config(format!(
                "sequence {}: warped frame {frame} has no valid pixels on the center row",
                seq.name
            ))
        })?;
    let reference_col = last_valid.saturating_sub(opts.region_width / 2);

    let mut cfg = MatchConfig::new(reference_col);
    cfg.region_width = opts.region_width;
    let estimate = estimate_rig_distance(&pairs, &cfg, opts.spread_threshold)?;
    if estimate.distance <= 0 {
        return Err(DatasetError::Config(format!(
            "sequence {}: measured inter-view distance {} is not positive; \
             the views do not look like a left-to-right rig capture",
            seq.name, estimate.distance
        )));
    }

    Ok(SequenceCalibration {
        rig: RigCalibration::new(estimate.distance as usize, camera)?,
        source: DistanceSource::Measured,
        spread: estimate.spread,
        warning: estimate.warning,
    })
}

/// Per-frame manifest entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameManifest {
    pub name: String,
    /// Random cyclic rotation applied to the panorama.
    pub start_column: usize,
    /// Relative paths of every file written for this frame, sorted.
    pub outputs: Vec<String>,
    /// Set when this frame failed; the run continues with other frames.
    pub error: Option<String>,
}

/// Per-sequence manifest entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceManifest {
    pub name: String,
    pub distance: usize,
    pub distance_source: DistanceSource,
    /// Spread of the per-pair distance estimates (0 when configured).
    pub spread: i64,
    /// Calibration warning, if the spread exceeded the threshold.
    pub warning: Option<String>,
    pub frames_total: usize,
    pub frames_kept: usize,
    /// Frames dropped as near-duplicates, in order.
    pub dropped: Vec<String>,
    pub frames: Vec<FrameManifest>,
    /// Set when the sequence could not be processed at all.
    pub error: Option<String>,
}

/// Echo of the options that shaped a run, stored so a manifest suffices
/// to reproduce it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestConfig {
    pub focal: f64,
    pub radius: f64,
    pub distance: Option<usize>,
    pub region_width: usize,
    pub spread_threshold: i64,
    pub dedup_threshold: f64,
    pub resize: Option<[usize; 2]>,
    pub splits: Vec<u32>,
    pub distortion: DistortionSpec,
    pub seed: u64,
}

/// The record of one generation run, written to `out/manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ManifestConfig,
    pub sequences: Vec<SequenceManifest>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut json =
            serde_json::to_string_pretty(self).expect("manifest serialization cannot fail");
        json.push('\n');
        json
    }

    /// Total frames that failed, plus failed sequences.
    pub fn failure_count(&self) -> usize {
        self.sequences
            .iter()
            .map(|s| {
                s.error.iter().count() + s.frames.iter().filter(|f| f.error.is_some()).count()
            })
            .sum()
    }

    /// Every output path the manifest claims, relative to the output root.
    pub fn listed_outputs(&self) -> Vec<&str> {
        self.sequences
            .iter()
            .flat_map(|s| s.frames.iter())
            .flat_map(|f| f.outputs.iter())
            .map(String::as_str)
            .collect()
    }

    /// Checks that every output listed in the manifest exists on disk,
    /// returning the missing ones.
    pub fn verify_outputs(&self, out_root: &Path) -> Vec<String> {
        self.listed_outputs()
            .iter()
            .filter(|rel| !out_root.join(rel).is_file())
            .map(|rel| rel.to_string())
            .collect()
    }
}

/// Result of a generation run: the manifest (already written to disk) and
/// how many sequences/frames failed.
#[derive(Debug)]
pub struct GenerationOutcome {
    pub manifest: Manifest,
    pub failures: usize,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// The RNG for one frame's random draws: one stream per `<seq>/<frame>`
/// key, so draws are independent of processing order and of which other
/// frames exist.
fn frame_rng(seed: u64, sequence: &str, frame: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a64(format!("{sequence}/{frame}").as_bytes()));
    rng
}

/// Formats a focal length for a directory name: `700` not `700.0`, but
/// fractional focals keep their digits.
/// Directory tag for a distortion focal length: `700.0` → `"700"`,
/// non-integral values keep their full decimal form.
pub fn focal_tag(f: f64) -> String {
    if f.fract() == 0.0 && f.abs() < 1e15 {
        format!("{}", f as i64)
    } else {
        format!("{f}")
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), DatasetError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Generates everything for one frame and returns its manifest entry
/// (start column and the relative paths written).
fn process_frame(
    seq: &SequenceSpec,
    frame: &str,
    calib: &SequenceCalibration,
    opts: &GeneratorOptions,
    out_root: &Path,
) -> Result<(usize, Vec<String>), DatasetError> {
    let (rgb, labels) = seq.load_frame(frame, calib.rig.order, &opts.palette)?;
    let mut outputs = Vec::new();

    let mut pano = stitch_panorama(&rgb, Some(&labels), &calib.rig)?;
    if let Some((w, h)) = opts.resize {
        pano = pano.resize(w, h);
    }
    let start = frame_rng(opts.seed, &seq.name, frame).gen_range(0..pano.width());
    pano = pano.rotate_start(start)?;

    let seq_dir = out_root.join(&seq.name);
    let mut save = |rel: PathBuf, write: &mut dyn FnMut(&Path) -> Result<(), DatasetError>|
     -> Result<(), DatasetError> {
        let path = seq_dir.join(&rel);
        write(&path)?;
        outputs.push(format!("{}/{}", seq.name, rel.display()));
        Ok(())
    };

    save(
        PathBuf::from("pano/rgb").join(format!("{frame}.png")),
        &mut |p| Ok(pngio::save_image(p, &pano.rgb)?),
    )?;
    let pano_labels = pano.labels.as_ref().expect("stitched with labels");
    save(
        PathBuf::from("pano/labels").join(format!("{frame}.png")),
        &mut |p| Ok(pngio::save_labels(p, pano_labels)?),
    )?;
    let sidecar = serde_json::to_string_pretty(&pano.sidecar())
        .expect("sidecar serialization cannot fail")
        + "\n";
    save(
        PathBuf::from("pano/meta").join(format!("{frame}.json")),
        &mut |p| write_text(p, &sidecar),
    )?;

    for &fov in &opts.splits {
        let crops = pano.split_by_fov(fov)?;
        for (k, (crop_rgb, crop_labels)) in crops.iter().enumerate() {
            save(
                PathBuf::from(format!("fov{fov}/rgb")).join(format!("{frame}_{k}.png")),
                &mut |p| Ok(pngio::save_image(p, crop_rgb)?),
            )?;
            let crop_labels = crop_labels.as_ref().expect("stitched with labels");
            save(
                PathBuf::from(format!("fov{fov}/labels")).join(format!("{frame}_{k}.png")),
                &mut |p| Ok(pngio::save_labels(p, crop_labels)?),
            )?;
        }
    }

    if opts.distortion.enabled {
        for &f in &opts.distortion.focal_lengths {
            let camera = CylindricalCamera::new(
                f,
                calib.rig.camera.width,
                calib.rig.camera.height,
            )?;
            let tag = focal_tag(f);
            for &dir in &opts.distortion.directions {
                let slot = calib
                    .rig
                    .order
                    .iter()
                    .position(|d| *d == dir)
                    .expect("order holds every direction");
                let warped_rgb = camera.warp(&rgb[slot])?;
                let warped_labels = camera.warp_labels(&labels[slot])?;
                save(
                    PathBuf::from(format!("distort_f{tag}/rgb"))
                        .join(format!("{frame}_{dir}.png")),
                    &mut |p| Ok(pngio::save_image(p, &warped_rgb)?),
                )?;
                save(
                    PathBuf::from(format!("distort_f{tag}/labels"))
                        .join(format!("{frame}_{dir}.png")),
                    &mut |p| Ok(pngio::save_labels(p, &warped_labels)?),
                )?;
            }
        }
    }

    outputs.sort_unstable();
    Ok((start, outputs))
}

fn process_sequence(
    seq: &SequenceSpec,
    opts: &GeneratorOptions,
    out_root: &Path,
) -> SequenceManifest {
    let mut manifest = SequenceManifest {
        name: seq.name.clone(),
        distance: 0,
        distance_source: DistanceSource::Configured,
        spread: 0,
        warning: None,
        frames_total: seq.frames.len(),
        frames_kept: 0,
        dropped: Vec::new(),
        frames: Vec::new(),
        error: None,
    };

    if seq.frames.is_empty() {
        manifest.error = Some(DatasetError::EmptySequence(seq.name.clone()).to_string());
        return manifest;
    }

    let (kept, dropped) = match deduplicate_frames(seq, opts.dedup_threshold) {
        Ok(split) => split,
        Err(e) => {
            manifest.error = Some(e.to_string());
            return manifest;
        }
    };
    manifest.frames_kept = kept.len();
    manifest.dropped = dropped;

    let calib = match calibrate_sequence(seq, &kept[0], opts) {
        Ok(calib) => calib,
        Err(e) => {
            manifest.error = Some(e.to_string());
            return manifest;
        }
    };
    manifest.distance = calib.rig.distance;
    manifest.distance_source = calib.source;
    manifest.spread = calib.spread;
    manifest.warning = calib.warning.clone();

    manifest.frames = kept
        .par_iter()
        .map(|frame| match process_frame(seq, frame, &calib, opts, out_root) {
            Ok((start_column, outputs)) => FrameManifest {
                name: frame.clone(),
                start_column,
                outputs,
                error: None,
            },
            Err(e) => FrameManifest {
                name: frame.clone(),
                start_column: 0,
                outputs: Vec::new(),
                error: Some(e.to_string()),
            },
        })
        .collect();
    manifest
}

/// Runs dataset generation end to end: discovers sequences, deduplicates,
/// calibrates, stitches, writes all outputs, and stores the manifest at
/// `out_root/manifest.json`.
///
/// Individual frame or sequence failures are recorded in the manifest and
/// counted in the outcome instead of aborting the run; only structural
/// problems (unreadable source tree, invalid options, unwritable output)
/// are hard errors.
pub fn generate_dataset(
    src_root: &Path,
    out_root: &Path,
    opts: &GeneratorOptions,
) -> Result<GenerationOutcome, DatasetError> {
    opts.validate()?;
    let sequences = SequenceSpec::discover(src_root)?;

    let manifests: Vec<SequenceManifest> = sequences
        .iter()
        .map(|seq| process_sequence(seq, opts, out_root))
        .collect();

    let manifest = Manifest {
        config: ManifestConfig {
            focal: opts.focal,
            radius: opts.radius.unwrap_or(opts.focal),
            distance: opts.distance,
            region_width: opts.region_width,
            spread_threshold: opts.spread_threshold,
            dedup_threshold: opts.dedup_threshold,
            resize: opts.resize.map(|(w, h)| [w, h]),
            splits: opts.splits.clone(),
            distortion: opts.distortion.clone(),
            seed: opts.seed,
        },
        sequences: manifests,
    };
    write_text(&out_root.join("manifest.json"), &manifest.to_json())?;

    let failures = manifest.failure_count();
    Ok(GenerationOutcome { manifest, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_png(path: &Path, img: &Raster) {
        pngio::save_image(path, img).unwrap();
    }

    /// A tiny rig tree: `n` frames of constant images whose level rises
    /// by `step` per frame.
    fn make_tree(root: &Path, seq: &str, n: usize, step: u8) {
        for i in 0..n {
            let v = (i as u8) * step;
            let frame = format!("{i:04}");
            for dir in Direction::ALL {
                let img = Raster::new(40, 30, [v, v, v]);
                write_png(&root.join(seq).join(dir.as_str()).join("rgb").join(format!("{frame}.png")), &img);
                let labels = LabelMap::new(40, 30, 1);
                pngio::save_labels(
                    &root.join(seq).join(dir.as_str()).join("labels").join(format!("{frame}.png")),
                    &labels,
                )
                .unwrap();
            }
        }
    }

    #[test]
    fn discovery_finds_sorted_sequences_and_frames() {
        let tmp = tempfile::tempdir().unwrap();
        make_tree(tmp.path(), "seq_b", 2, 50);
        make_tree(tmp.path(), "seq_a", 3, 50);
        let seqs = SequenceSpec::discover(tmp.path()).unwrap();
        assert_eq!(seqs.len(), 2);
        assert_eq!(seqs[0].name, "seq_a");
        assert_eq!(seqs[0].frames, ["0000", "0001", "0002"]);
        assert_eq!(seqs[1].name, "seq_b");
    }

    #[test]
    fn discovery_rejects_incomplete_frames() {
        let tmp = tempfile::tempdir().unwrap();
        make_tree(tmp.path(), "seq", 2, 50);
        std::fs::remove_file(
            tmp.path().join("seq/back/labels/0001.png"),
        )
        .unwrap();
        assert!(matches!(
            SequenceSpec::discover(tmp.path()),
            Err(DatasetError::MissingFile { .. })
        ));
    }

    #[test]
    fn discovery_rejects_non_sequence_directories_and_empty_roots() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(matches!(
            SequenceSpec::discover(tmp.path()),
            Err(DatasetError::EmptyRoot(_))
        ));
        std::fs::create_dir_all(tmp.path().join("stray/stuff")).unwrap();
        assert!(matches!(
            SequenceSpec::discover(tmp.path()),
            Err(DatasetError::NotASequence(_))
        ));
    }

    #[test]
    fn dedup_drops_still_frames_only() {
        let tmp = tempfile::tempdir().unwrap();
        // Levels 0, 0, 60, 60, 120: the rig pauses twice.
        for (i, v) in [0u8, 0, 60, 60, 120].into_iter().enumerate() {
            let frame = format!("{i:04}");
            for dir in Direction::ALL {
                write_png(
                    &tmp.path().join("s").join(dir.as_str()).join("rgb").join(format!("{frame}.png")),
                    &Raster::new(8, 6, [v, v, v]),
                );
                pngio::save_labels(
                    &tmp.path().join("s").join(dir.as_str()).join("labels").join(format!("{frame}.png")),
                    &LabelMap::new(8, 6, 0),
                )
                .unwrap();
            }
        }
        let seq = &SequenceSpec::discover(tmp.path()).unwrap()[0];

        let (kept, dropped) = deduplicate_frames(seq, 1.0).unwrap();
        assert_eq!(kept, ["0000", "0002", "0004"]);
        assert_eq!(dropped, ["0001", "0003"]);

        // Threshold 0 disables deduplication.
        let (kept, dropped) = deduplicate_frames(seq, 0.0).unwrap();
        assert_eq!(kept.len(), 5);
        assert!(dropped.is_empty());
    }

    #[test]
    fn dedup_compares_against_last_kept_frame() {
        // Levels 0, 40, 80, 120 with threshold 100. Every step is only 40
        // from its predecessor, but drift accumulates relative to the last
        // *kept* frame: 40 (drop), 80 (drop), 120 (keep).
        let tmp = tempfile::tempdir().unwrap();
        for (i, v) in [0u8, 40, 80, 120].into_iter().enumerate() {
            let frame = format!("{i:04}");
            for dir in Direction::ALL {
                write_png(
                    &tmp.path().join("s").join(dir.as_str()).join("rgb").join(format!("{frame}.png")),
                    &Raster::new(8, 6, [v, v, v]),
                );
                pngio::save_labels(
                    &tmp.path().join("s").join(dir.as_str()).join("labels").join(format!("{frame}.png")),
                    &LabelMap::new(8, 6, 0),
                )
                .unwrap();
            }
        }
        let seq = &SequenceSpec::discover(tmp.path()).unwrap()[0];
        let (kept, dropped) = deduplicate_frames(seq, 100.0).unwrap();
        assert_eq!(kept, ["0000", "0003"]);
        assert_eq!(dropped, ["0001", "0002"]);
    }

    #[test]
    fn options_validation_rejects_bad_values() {
        let opts = GeneratorOptions {
            region_width: 8,
            ..GeneratorOptions::default()
        };
        assert!(matches!(opts.validate(), Err(DatasetError::Config(_))));
        let opts = GeneratorOptions {
            splits: vec![45],
            ..GeneratorOptions::default()
        };
        assert!(matches!(opts.validate(), Err(DatasetError::Config(_))));
        let opts = GeneratorOptions {
            distortion: DistortionSpec {
                enabled: true,
                focal_lengths: Vec::new(),
                ..DistortionSpec::default()
            },
            ..GeneratorOptions::default()
        };
        assert!(matches!(opts.validate(), Err(DatasetError::Config(_))));
        assert!(GeneratorOptions::default().validate().is_ok());
    }

    #[test]
    fn frame_rng_is_keyed_by_sequence_and_frame() {
        let a: u64 = frame_rng(7, "seq", "0001").gen();
        let b: u64 = frame_rng(7, "seq", "0001").gen();
        assert_eq!(a, b);
        let c: u64 = frame_rng(7, "seq", "0002").gen();
        let d: u64 = frame_rng(7, "other", "0001").gen();
        let e: u64 = frame_rng(8, "seq", "0001").gen();
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert_ne!(a, e);
    }

    #[test]
    fn focal_tags_trim_integral_values() {
        assert_eq!(focal_tag(700.0), "700");
        assert_eq!(focal_tag(532.740352), "532.740352");
    }

    #[test]
    fn generation_with_configured_distance_writes_everything() {
        let tmp = tempfile::tempdir().unwrap();
        let src = tmp.path().join("src");
        let out = tmp.path().join("out");
        make_tree(&src, "seq", 2, 60);

        // The 40×30 test views are fully valid when warped with a large
        // radius, so a configured distance of 32 stitches cleanly.
        let opts = GeneratorOptions {
            focal: 16.0,
            radius: Some(26.0),
            distance: Some(32),
            ..GeneratorOptions::default()
        };
        let outcome = generate_dataset(&src, &out, &opts).unwrap();
        assert_eq!(outcome.failures, 0);
        assert_eq!(outcome.manifest.sequences.len(), 1);
        let seq = &outcome.manifest.sequences[0];
        assert_eq!(seq.distance, 32);
        assert_eq!(seq.distance_source, DistanceSource::Configured);
        assert_eq!(seq.frames.len(), 2);

        assert!(out.join("manifest.json").is_file());
        assert!(outcome.manifest.verify_outputs(&out).is_empty());
        let pano = pngio::load_image(&out.join("seq/pano/rgb/0000.png")).unwrap();
        assert_eq!((pano.width(), pano.height()), (128, 30));

        let meta: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(out.join("seq/pano/meta/0000.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(meta["d"], 32);
        assert_eq!(
            meta["start_column"],
            outcome.manifest.sequences[0].frames[0].start_column
        );
    }

    #[test]
    fn generation_is_deterministic() {
        let tmp = tempfile::tempdir().unwrap();
        let src = tmp.path().join("src");
        make_tree(&src, "seq", 2, 60);
        let opts = GeneratorOptions {
            focal: 16.0,
            radius: Some(26.0),
            distance: Some(32),
            ..GeneratorOptions::default()
        };

        let out1 = tmp.path().join("out1");
        let out2 = tmp.path().join("out2");
        generate_dataset(&src, &out1, &opts).unwrap();
        generate_dataset(&src, &out2, &opts).unwrap();

        let m1 = std::fs::read(out1.join("manifest.json")).unwrap();
        let m2 = std::fs::read(out2.join("manifest.json")).unwrap();
        assert_eq!(m1, m2);
        let p1 = std::fs::read(out1.join("seq/pano/rgb/0001.png")).unwrap();
        let p2 = std::fs::read(out2.join("seq/pano/rgb/0001.png")).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn distortion_series_and_splits_produce_expected_files() {
        let tmp = tempfile::tempdir().unwrap();
        let src = tmp.path().join("src");
        let out = tmp.path().join("out");
        make_tree(&src, "seq", 1, 0);

        let opts = GeneratorOptions {
            focal: 16.0,
            radius: Some(26.0),
            distance: Some(32), // pano width 128 = 4 × 32, splits need %64
            splits: vec![90, 360],
            distortion: DistortionSpec {
                enabled: true,
                focal_lengths: vec![20.0, 12.0],
                directions: vec![Direction::Forward, Direction::Back],
            },
            ..GeneratorOptions::default()
        };
        let outcome = generate_dataset(&src, &out, &opts).unwrap();
        assert_eq!(outcome.failures, 0);

        for rel in [
            "seq/pano/rgb/0000.png",
            "seq/fov90/rgb/0000_0.png",
            "seq/fov90/labels/0000_3.png",
            "seq/fov360/rgb/0000_0.png",
            "seq/distort_f20/rgb/0000_forward.png",
            "seq/distort_f12/labels/0000_back.png",
        ] {
            assert!(out.join(rel).is_file(), "missing {rel}");
        }
        let outputs = &outcome.manifest.sequences[0].frames[0].outputs;
        assert_eq!(outputs.len(), 3 + 2 * (4 + 1) + 2 * 2 * 2);
        let mut sorted = outputs.clone();
        sorted.sort_unstable();
        assert_eq!(*outputs, sorted);
    }

    #[test]
    fn frame_failures_are_recorded_not_fatal() {
        let tmp = tempfile::tempdir().unwrap();
        let src = tmp.path().join("src");
        let out = tmp.path().join("out");
        make_tree(&src, "seq", 2, 60);
        // Corrupt one frame's back view after discovery-time checks.
        std::fs::write(src.join("seq/back/rgb/0001.png"), b"not a png").unwrap();

        let opts = GeneratorOptions {
            focal: 16.0,
            radius: Some(26.0),
            distance: Some(32),
            ..GeneratorOptions::default()
        };
        let outcome = generate_dataset(&src, &out, &opts).unwrap();
        assert_eq!(outcome.failures, 1);
        let frames = &outcome.manifest.sequences[0].frames;
        assert!(frames[0].error.is_none());
        assert!(frames[1].error.is_some());
        assert!(frames[1].outputs.is_empty());
        assert!(out.join("seq/pano/rgb/0000.png").is_file());
    }

    #[test]
    fn oversized_distance_is_recorded_as_sequence_failure() {
        let tmp = tempfile::tempdir().unwrap();
        let src = tmp.path().join("src");
        let out = tmp.path().join("out");
        make_tree(&src, "seq", 1, 0);
        let opts = GeneratorOptions {
            focal: 16.0,
            radius: Some(26.0),
            distance: Some(64), // views are only 40 columns wide
            ..GeneratorOptions::default()
        };
        let outcome = generate_dataset(&src, &out, &opts).unwrap();
        assert_eq!(outcome.failures, 1);
        let seq = &outcome.manifest.sequences[0];
        assert!(seq.frames[0].error.as_deref().unwrap().contains("center row"));
    }
}
