//! Error-to-exit-code mapping.
//!
//! Every failure the binary can hit is folded into one of three buckets so
//! scripts can tell *why* a run failed without parsing stderr:
//!
//! * `2` — configuration: bad flags, bad config file, invalid parameter
//!   values. (Matches clap's own exit code for usage errors, so "the
//!   invocation was wrong" is always 2 regardless of who caught it.)
//! * `3` — I/O: missing files, unreadable or unwritable paths.
//! * `4` — processing: the inputs were readable but could not be worked
//!   with (corrupt images, mismatched shapes, failed matching, frames
//!   that failed during generation).

use std::fmt;

use pano_core::cylinder::ProjectionError;
use pano_core::dataset::DatasetError;
use pano_core::matching::MatchError;
use pano_core::metrics::MetricsError;
use pano_core::palette::PaletteError;
use pano_core::pngio::PngError;
use pano_core::stitch::StitchError;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_PROCESSING: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Processing(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::Processing(_) => EXIT_PROCESSING,
        }
    }

    pub fn config(msg: impl Into<String>) -> CliError {
        CliError::Config(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> CliError {
        CliError::Io(msg.into())
    }

    pub fn processing(msg: impl Into<String>) -> CliError {
        CliError::Processing(msg.into())
    }

    /// Prepends context to the message, keeping the failure category (and
    /// with it the exit code) intact.
    pub fn with_context(self, context: &str) -> CliError {
        match self {
            CliError::Config(m) => CliError::Config(format!("{context}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{context}: {m}")),
            CliError::Processing(m) => CliError::Processing(format!("{context}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Io(msg) => write!(f, "I/O error: {msg}"),
            CliError::Processing(msg) => write!(f, "processing error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Io(e.to_string())
    }
}

impl From<PngError> for CliError {
    fn from(e: PngError) -> CliError {
        match e {
            PngError::Missing { .. } | PngError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Processing(e.to_string()),
        }
    }
}

impl From<PaletteError> for CliError {
    fn from(e: PaletteError) -> CliError {
        // A palette file is configuration; only a read failure is I/O.
        match e {
            PaletteError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ProjectionError> for CliError {
    fn from(e: ProjectionError) -> CliError {
        match e {
            ProjectionError::InvalidCamera(_) => CliError::Config(e.to_string()),
            _ => CliError::Processing(e.to_string()),
        }
    }
}

impl From<MatchError> for CliError {
    fn from(e: MatchError) -> CliError {
        match e {
            MatchError::BadRegionWidth(_) | MatchError::BadRowRange { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Processing(e.to_string()),
        }
    }
}

impl From<StitchError> for CliError {
    fn from(e: StitchError) -> CliError {
        match e {
            StitchError::Projection(p) => p.into(),
            StitchError::BadCalibration(_) => CliError::Config(e.to_string()),
            _ => CliError::Processing(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> CliError {
        match e {
            // The only way a class index reaches the metrics layer from the
            // CLI is through the ignore list, which is configuration.
            MetricsError::ClassOutOfRange(_) => CliError::Config(e.to_string()),
            _ => CliError::Processing(e.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> CliError {
        match e {
            DatasetError::Png(inner) => inner.into(),
            DatasetError::Stitch(inner) => inner.into(),
            DatasetError::Match(inner) => inner.into(),
            DatasetError::Projection(inner) => inner.into(),
            DatasetError::Io { .. }
            | DatasetError::MissingFile { .. }
            | DatasetError::NotASequence(_)
            | DatasetError::EmptyRoot(_) => CliError::Io(e.to_string()),
            DatasetError::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Processing(e.to_string()),
        }
    }
}
