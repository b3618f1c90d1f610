//! Face component extraction, analysis and storage.
//!
//! Given a cropped frontal face raster, the pipeline predicts where the six
//! facial components (two eyes, two eyebrows, nose, lip) appear as linear
//! functions of the face width, runs a per-component pixel pipeline to find
//! each component's exact bounding box, scores component sizes as
//! percentages of nominal width fractions, and persists components plus
//! their characteristics to a growable on-disk database.
//!
//! Modules:
//! - [`raster`]: pixel grids and per-pixel primitives
//! - [`pnm`]: binary PPM/PGM I/O
//! - [`edges`]: Canny edge detection and projection profiles
//! - [`geometry`]: region prediction anchored on the maximum-contrast row
//! - [`extract`]: the six component extractors
//! - [`analyze`]: size percentages and small/normal/large classification
//! - [`store`]: the on-disk component database
//! - [`fixtures`]: deterministic synthetic faces with ground truth
//! - [`cli`]: the batch command-line workflow

pub mod analyze;
pub mod cli;
pub mod edges;
pub mod error;
pub mod extract;
pub mod fixtures;
pub mod geometry;
pub mod pnm;
pub mod raster;
pub mod store;

pub use error::{Error, Result};
