//! Job configuration: a JSON file mirroring every operation parameter,
//! merged with command-line flags (flags win).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pano_core::cylinder::DEFAULT_FOCAL;
use pano_core::dataset::{DistortionSpec, GeneratorOptions};
use pano_core::matching::{DEFAULT_REGION_WIDTH, DEFAULT_SPREAD_THRESHOLD};
use pano_core::metrics::ClassSet;
use pano_core::palette::{Palette, RESERVED_CLASS_A, RESERVED_CLASS_B};

use crate::error::CliError;

/// Every knob a batch job can turn, with a sensible default for each so an
/// empty config file (or none at all) is a valid job. Unknown keys are
/// rejected — a typo must fail loudly, not silently fall back to a default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobConfig {
    /// Focal length of the rig's cameras, in pixels. Default 532.740352.
    pub f: f64,
    /// Cylinder radius in pixels; `null` ties it to the focal length.
    pub r: Option<f64>,
    /// Inter-view distance in pixels; `null` measures it per sequence by
    /// region matching.
    pub d: Option<usize>,
    /// Width of the matching region, in columns (odd). Default 9.
    pub region_width: usize,
    /// Allowed spread between the four per-seam distance estimates before
    /// a calibration warning is recorded. Default 4.
    pub spread_threshold: i64,
    /// Drop a frame when its forward view's mean absolute RGB difference
    /// from the last kept frame is below this. 0 keeps everything.
    /// Default 1.0.
    pub dedup_threshold: f64,
    /// Resize panoramas to `[width, height]` before rotation and
    /// splitting; `null` keeps the stitched size.
    pub resize: Option<[usize; 2]>,
    /// Field-of-view splits (degrees) to emit besides the panorama,
    /// e.g. `[90, 180]`. Default none.
    pub splits: Vec<u32>,
    /// Distortion-series settings (disabled by default; focal lengths
    /// 700/600/500/400; forward view only).
    pub distortion: DistortionSpec,
    /// Seed for every random draw a job makes. Default 0.
    pub seed: u64,
    /// Ground-truth classes excluded from evaluation. Default `[14, 15]`
    /// (the reserved classes).
    pub ignore: Vec<u8>,
    /// Path to a palette JSON file; `null` uses the built-in palette.
    pub palette: Option<PathBuf>,
    /// Worker threads for batch commands; `null` lets the runtime decide.
    pub jobs: Option<usize>,
}

impl Default for JobConfig {
    fn default() -> Self {
        JobConfig {
            f: DEFAULT_FOCAL,
            r: None,
            d: None,
            region_width: DEFAULT_REGION_WIDTH,
            spread_threshold: DEFAULT_SPREAD_THRESHOLD,
            dedup_threshold: 1.0,
            resize: None,
            splits: Vec::new(),
            distortion: DistortionSpec::default(),
            seed: 0,
            ignore: vec![RESERVED_CLASS_A, RESERVED_CLASS_B],
            palette: None,
            jobs: None,
        }
    }
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<JobConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    /// The camera-parameter checks shared by every command. Batch options
    /// get the full validation when they are turned into
    /// [`GeneratorOptions`].
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.f.is_finite() && self.f > 0.0) {
            return Err(CliError::config(format!(
                "focal length must be finite and > 0, got {}",
                self.f
            )));
        }
        if let Some(r) = self.r {
            if !(r.is_finite() && r > 0.0) {
                return Err(CliError::config(format!(
                    "cylinder radius must be finite and > 0, got {r}"
                )));
            }
        }
        if self.region_width == 0 || self.region_width % 2 == 0 {
            return Err(CliError::config(format!(
                "region width must be odd and at least 1, got {}",
                self.region_width
            )));
        }
        Ok(())
    }

    pub fn radius(&self) -> f64 {
        self.r.unwrap_or(self.f)
    }

    pub fn load_palette(&self) -> Result<Palette, CliError> {
        match &self.palette {
            Some(path) => Ok(Palette::load(path)?),
            None => Ok(Palette::default()),
        }
    }

    pub fn ignore_set(&self) -> Result<ClassSet, CliError> {
        Ok(ClassSet::from_indices(&self.ignore)?)
    }

    pub fn generator_options(&self) -> Result<GeneratorOptions, CliError> {
        let opts = GeneratorOptions {
            focal: self.f,
            radius: self.r,
            distance: self.d,
            region_width: self.region_width,
            spread_threshold: self.spread_threshold,
            dedup_threshold: self.dedup_threshold,
            resize: self.resize.map(|[w, h]| (w, h)),
            splits: self.splits.clone(),
            distortion: self.distortion.clone(),
            seed: self.seed,
            palette: self.load_palette()?,
        };
        opts.validate().map_err(CliError::from)?;
        Ok(opts)
    }

    /// Renders the fully resolved configuration for `--dry-run` output.
    pub fn describe(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documentation() {
        let cfg = JobConfig::default();
        assert_eq!(cfg.f, 532.740352);
        assert_eq!(cfg.r, None);
        assert_eq!(cfg.d, None);
        assert_eq!(cfg.region_width, 9);
        assert_eq!(cfg.spread_threshold, 4);
        assert_eq!(cfg.dedup_threshold, 1.0);
        assert_eq!(cfg.resize, None);
        assert!(cfg.splits.is_empty());
        assert!(!cfg.distortion.enabled);
        assert_eq!(cfg.distortion.focal_lengths, [700.0, 600.0, 500.0, 400.0]);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.ignore, [14, 15]);
        assert_eq!(cfg.palette, None);
        assert_eq!(cfg.jobs, None);
    }

    #[test]
    fn empty_object_is_a_valid_config() {
        let cfg: JobConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg.f, JobConfig::default().f);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<JobConfig>(r#"{"focal": 500.0}"#).unwrap_err();
        assert!(err.to_string().contains("focal"));
        assert!(serde_json::from_str::<JobConfig>(r#"{"distortion": {"enable": true}}"#).is_err());
    }

    #[test]
    fn partial_nested_objects_fill_in_defaults() {
        let cfg: JobConfig =
            serde_json::from_str(r#"{"distortion": {"enabled": true}, "d": 836}"#).unwrap();
        assert!(cfg.distortion.enabled);
        assert_eq!(cfg.distortion.focal_lengths, [700.0, 600.0, 500.0, 400.0]);
        assert_eq!(cfg.d, Some(836));
    }

    #[test]
    fn zero_focal_fails_validation() {
        let cfg = JobConfig {
            f: 0.0,
            ..JobConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn even_region_width_fails_validation() {
        let cfg = JobConfig {
            region_width: 8,
            ..JobConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }
}
