//! Panorama synthesis for calibrated multi-camera segmentation rigs.
//!
//! The library turns sets of four planar camera views (left, forward, right,
//! back — 90° apart, shared focal length) into seamless 360° cylindrical
//! panoramas, for both RGB images and per-pixel class-label maps. Around that
//! core it provides the supporting machinery a dataset pipeline needs:
//!
//! * [`cylinder`] — planar ↔ cylindrical projection and image warping,
//! * [`matching`] — rig-offset estimation by scanning region matching,
//! * [`stitch`] — panorama compositing, wrap trimming, field-of-view splits,
//! * [`metrics`] — confusion-matrix segmentation scoring and class weights,
//! * [`dataset`] — batch generation with deduplication and manifests,
//! * [`raster`], [`palette`], [`pngio`] — pixel containers, the label color
//!   table, and PNG I/O.
//!
//! All geometry uses a center-origin convention: pixel centers sit on integer
//! coordinates and the origin of an image is its central pixel position
//! `((width − 1) / 2, (height − 1) / 2)`. Warped images carry a validity mask
//! because a cylindrical reprojection never fills the whole rectangular
//! canvas; every stage of the pipeline propagates that mask instead of
//! inventing pixel values.

pub mod cylinder;
pub mod dataset;
pub mod matching;
pub mod metrics;
pub mod palette;
pub mod pngio;
pub mod raster;
pub mod stitch;

pub use cylinder::CylindricalCamera;
pub use palette::Palette;
pub use raster::{LabelMap, Raster};
