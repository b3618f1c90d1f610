//! Face-relative coordinate logic: the maximum-contrast row statistic and
//! the width-relative region prediction formulas for the six components.
//!
//! Coordinate convention throughout: `x` is the row axis, `y` is the column
//! axis, boxes are inclusive on both ends.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::raster::{round_half_up, RasterGray, RasterRgb};

/// Inclusive rectangle: rows `x1..=x2`, columns `y1..=y2`.
///
/// Raw (pre-clamp) boxes may carry negative or out-of-range indices;
/// [`RegionBox::clamp_to`] intersects them with a raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionBox {
    pub x1: i64,
    pub y1: i64,
    pub x2: i64,
    pub y2: i64,
}

impl RegionBox {
    pub fn new(x1: i64, y1: i64, x2: i64, y2: i64) -> Self {
        Self { x1, y1, x2, y2 }
    }

    /// Rows spanned, `x2 - x1 + 1`.
    pub fn height(&self) -> i64 {
        self.x2 - self.x1 + 1
    }

    /// Columns spanned, `y2 - y1 + 1`.
    pub fn width(&self) -> i64 {
        self.y2 - self.y1 + 1
    }

    /// Intersection with a `width x height` raster, or `None` when empty.
    pub fn clamp_to(&self, width: usize, height: usize) -> Option<RegionBox> {
        let x1 = self.x1.max(0);
        let y1 = self.y1.max(0);
        let x2 = self.x2.min(height as i64 - 1);
        let y2 = self.y2.min(width as i64 - 1);
        if x1 > x2 || y1 > y2 {
            None
        } else {
            Some(RegionBox { x1, y1, x2, y2 })
        }
    }

    pub fn contains(&self, other: &RegionBox) -> bool {
        self.x1 <= other.x1 && self.y1 <= other.y1 && self.x2 >= other.x2 && self.y2 >= other.y2
    }

    pub fn intersects(&self, other: &RegionBox) -> bool {
        self.x1 <= other.x2 && other.x1 <= self.x2 && self.y1 <= other.y2 && other.y1 <= self.y2
    }

    /// Shifts the box by `(rows, cols)`.
    pub fn translate(&self, rows: i64, cols: i64) -> RegionBox {
        RegionBox {
            x1: self.x1 + rows,
            y1: self.y1 + cols,
            x2: self.x2 + rows,
            y2: self.y2 + cols,
        }
    }

    /// The box of this region in a horizontally mirrored `width`-column raster.
    pub fn mirror_cols(&self, width: usize) -> RegionBox {
        RegionBox {
            x1: self.x1,
            y1: width as i64 - 1 - self.y2,
            x2: self.x2,
            y2: width as i64 - 1 - self.y1,
        }
    }

    /// Intersection-over-union of two inclusive rectangles.
    pub fn iou(&self, other: &RegionBox) -> f64 {
        let ix1 = self.x1.max(other.x1);
        let iy1 = self.y1.max(other.y1);
        let ix2 = self.x2.min(other.x2);
        let iy2 = self.y2.min(other.y2);
        if ix1 > ix2 || iy1 > iy2 {
            return 0.0;
        }
        let inter = ((ix2 - ix1 + 1) * (iy2 - iy1 + 1)) as f64;
        let a = (self.height() * self.width()) as f64;
        let b = (other.height() * other.width()) as f64;
        inter / (a + b - inter)
    }
}

/// The six facial components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentKind {
    RightEye,
    LeftEye,
    RightEyebrow,
    LeftEyebrow,
    Nose,
    Lip,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 6] = [
        ComponentKind::RightEye,
        ComponentKind::LeftEye,
        ComponentKind::RightEyebrow,
        ComponentKind::LeftEyebrow,
        ComponentKind::Nose,
        ComponentKind::Lip,
    ];

    /// Stable token used in manifests, file names and reports.
    pub fn token(&self) -> &'static str {
        match self {
            ComponentKind::RightEye => "right_eye",
            ComponentKind::LeftEye => "left_eye",
            ComponentKind::RightEyebrow => "right_eyebrow",
            ComponentKind::LeftEyebrow => "left_eyebrow",
            ComponentKind::Nose => "nose",
            ComponentKind::Lip => "lip",
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ComponentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ComponentKind::ALL
            .iter()
            .copied()
            .find(|k| k.token() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown component kind '{s}'")))
    }
}

/// Which axis adjacent-pixel differences are taken along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Adjacency {
    /// Differences between column neighbors within a row (the default; eyes
    /// are horizontal dark-light-dark structures).
    #[default]
    Horizontal,
    /// Differences between row neighbors within a column.
    Vertical,
}

/// Face-wide measurements every region prediction is anchored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceGeometry {
    /// Face raster width W; every prediction is a linear function of it.
    pub w: usize,
    /// Face raster height, used only to clamp predictions.
    pub h: usize,
    /// Maximum-contrast row of the right half (image-left columns).
    pub max_index_right: usize,
    /// Maximum-contrast row of the left half.
    pub max_index_left: usize,
    /// Row of the extracted nose's lower boundary; set by nose extraction,
    /// required by lip prediction.
    pub nose_lower_row: Option<usize>,
}

/// Row holding the adjacent pixel pair with the largest absolute intensity
/// difference. Ties break to the smallest row, then the smallest column.
pub fn max_diff_row(img: &RasterGray) -> Result<usize> {
    max_diff_row_along(img, Adjacency::Horizontal)
}

/// [`max_diff_row`] with a selectable difference axis.
pub fn max_diff_row_along(img: &RasterGray, adjacency: Adjacency) -> Result<usize> {
    let (need_w, need_h) = match adjacency {
        Adjacency::Horizontal => (2, 1),
        Adjacency::Vertical => (1, 2),
    };
    if img.width() < need_w || img.height() < need_h {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            reason: "adjacent-difference scan needs two pixels along the scan axis".into(),
        });
    }
    let mut best_row = 0usize;
    let mut best_diff = -1i32;
    match adjacency {
        Adjacency::Horizontal => {
            for row in 0..img.height() {
                for col in 0..img.width() - 1 {
                    let d = (i32::from(img.get(row, col)) - i32::from(img.get(row, col + 1))).abs();
                    if d > best_diff {
                        best_diff = d;
                        best_row = row;
                    }
                }
            }
        }
        Adjacency::Vertical => {
            for row in 0..img.height() - 1 {
                for col in 0..img.width() {
                    let d = (i32::from(img.get(row, col)) - i32::from(img.get(row + 1, col))).abs();
                    if d > best_diff {
                        best_diff = d;
                        best_row = row;
                    }
                }
            }
        }
    }
    Ok(best_row)
}

/// Splits a face into its right half (image-left columns `0..W/2`) and left
/// half (the remaining columns). The subject's right side appears on the
/// image's left.
pub fn split_halves(img: &RasterRgb) -> Result<(RasterRgb, RasterRgb)> {
    if img.width() < 2 {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            reason: "cannot split a single-column face".into(),
        });
    }
    let mid = img.width() / 2;
    let h = img.height() as i64;
    let right = img.crop(&RegionBox::new(0, 0, h - 1, mid as i64 - 1))?;
    let left = img.crop(&RegionBox::new(0, mid as i64, h - 1, img.width() as i64 - 1))?;
    Ok((right, left))
}

/// Computes the face geometry: half-split, per-half gray conversion and
/// maximum-contrast rows. The nose lower boundary starts unset.
pub fn compute_face_geometry(face: &RasterRgb) -> Result<FaceGeometry> {
    let (right, left) = split_halves(face)?;
    let max_index_right = max_diff_row(&crate::raster::to_gray(&right))?;
    let max_index_left = max_diff_row(&crate::raster::to_gray(&left))?;
    Ok(FaceGeometry {
        w: face.width(),
        h: face.height(),
        max_index_right,
        max_index_left,
        nose_lower_row: None,
    })
}

/// Raw (unclamped) predicted box for a component. Each edge is the rounded
/// anchor term; the far edge adds the rounded span so spans are exact
/// functions of W.
fn raw_prediction(kind: ComponentKind, geom: &FaceGeometry) -> Result<RegionBox> {
    let w = geom.w as f64;
    let mi_r = geom.max_index_right as f64;
    let mi_l = geom.max_index_left as f64;

    let anchored = |x1: f64, rows: f64, y1: f64, cols: f64| {
        let x1 = round_half_up(x1);
        let y1 = round_half_up(y1);
        RegionBox::new(x1, y1, x1 + round_half_up(rows), y1 + round_half_up(cols))
    };

    Ok(match kind {
        ComponentKind::RightEye => anchored(mi_r - 0.06 * w, 0.12 * w, 0.14 * w, 0.36 * w),
        ComponentKind::LeftEye => anchored(mi_l - 0.06 * w, 0.12 * w, 0.5 * w, 0.45 * w),
        ComponentKind::RightEyebrow => anchored(mi_r - 0.15 * w, 0.15 * w, 0.05 * w, 0.45 * w),
        ComponentKind::LeftEyebrow => anchored(mi_l - 0.15 * w, 0.15 * w, 0.5 * w, 0.45 * w),
        ComponentKind::Nose => anchored(mi_r - 0.15 * w, 0.55 * w, 0.32 * w, 0.4 * w),
        ComponentKind::Lip => {
            let nose_lx = geom.nose_lower_row.ok_or(Error::NoseRowUnset)? as f64;
            anchored(nose_lx + 0.05 * w, 0.25 * w, 0.25 * w, 0.5 * w)
        }
    })
}

/// Predicted region for a component, clamped to the face raster. Errors when
/// the clamped box is empty (prediction entirely off-raster).
pub fn predict_region(kind: ComponentKind, geom: &FaceGeometry) -> Result<RegionBox> {
    let raw = raw_prediction(kind, geom)?;
    raw.clamp_to(geom.w, geom.h)
        .ok_or(Error::EmptyPrediction { kind })
}
