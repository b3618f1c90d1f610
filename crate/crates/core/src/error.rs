//! Crate-wide error type.

use std::path::PathBuf;

use crate::geometry::ComponentKind;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A raster or parameter set failed basic validation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An image was too small for the requested operation.
    #[error("image {width}x{height} too small: {reason}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        reason: String,
    },

    /// A region lies entirely outside its host raster.
    #[error("region (rows {x1}..{x2}, cols {y1}..{y2}) lies outside a {width}x{height} raster")]
    RegionOutsideRaster {
        x1: i64,
        y1: i64,
        x2: i64,
        y2: i64,
        width: usize,
        height: usize,
    },

    /// A predicted component region clamped to nothing.
    #[error("predicted {kind} region is empty after clamping to the raster")]
    EmptyPrediction { kind: ComponentKind },

    /// Component boundary detection found no usable rows or columns.
    #[error("{kind} extraction failed: {reason}")]
    ExtractionFailed {
        kind: ComponentKind,
        reason: String,
    },

    /// Lip extraction was requested before the nose lower boundary was known.
    #[error("lip extraction requires the nose lower boundary; run nose extraction first")]
    NoseRowUnset,

    /// Projection profiles have no row or column meeting the policy counts.
    #[error("no boundary found: {0}")]
    NoBoundary(String),

    #[error("failed to parse netpbm data: {0}")]
    PnmParse(String),

    /// A record with this (face id, kind) pair already exists.
    #[error("component {kind} for face '{face_id}' already stored (pass overwrite to replace)")]
    DuplicateRecord {
        face_id: String,
        kind: ComponentKind,
    },

    #[error("'{}' is not a component database", .0.display())]
    NotADatabase(PathBuf),

    #[error("manifest line {line}: {reason}")]
    CorruptManifest { line: usize, reason: String },

    /// A query with no constraints set.
    #[error("query must constrain at least one of kind, width class, height class")]
    EmptyQuery,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
