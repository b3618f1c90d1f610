//! The six component extractors: apply the predicted region, run the
//! per-component pixel pipeline and produce an exact bounding box plus the
//! cropped pixels.
//!
//! Eyes and lip share one pipeline (gray, median, +127, edge detection,
//! projection-profile bounding box). The nose adds Otsu binarization for its
//! upper boundary and works on the bottom third of its crop for the nostril
//! row and the remaining boundaries. Eyebrows use the fuzzy value-channel
//! mask instead of edges.
//!
//! Extraction failure is a typed, per-component outcome, never a crash:
//! batch runs report failures and keep going. The extractors are pure given
//! `(face, geometry, config)`; only lip ordering matters — it needs the nose
//! lower boundary.

use crate::edges::{canny, edge_projection_profiles, CannyParams};
use crate::error::{Error, Result};
use crate::geometry::{
    compute_face_geometry, predict_region, ComponentKind, FaceGeometry, RegionBox,
};
use crate::raster::{
    fuzzy_v_binarize, median_filter, sat_add_127, to_gray, value_plane, FuzzyParams, RasterBinary,
    RasterGray, RasterRgb,
};

/// Minimum face width the eye formulas stay non-degenerate at.
const MIN_FACE_WIDTH: usize = 40;

/// Median filter radius used ahead of edge detection (3x3 window).
const MEDIAN_RADIUS: usize = 1;

/// Minimum edge pixels for a row/column to count as part of a component,
/// plus the fraction of the lower-nose crop scanned for lateral boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPolicy {
    pub min_row_count: usize,
    pub min_col_count: usize,
    /// Width fraction of the left/right column bands searched for the nose's
    /// lateral boundaries.
    pub nose_band_fraction: f64,
}

impl Default for BoundaryPolicy {
    fn default() -> Self {
        Self {
            min_row_count: 2,
            min_col_count: 2,
            nose_band_fraction: 1.0 / 3.0,
        }
    }
}

impl BoundaryPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.min_row_count < 1 || self.min_col_count < 1 {
            return Err(Error::InvalidInput(
                "boundary counts must be at least 1".into(),
            ));
        }
        if !(0.0 < self.nose_band_fraction && self.nose_band_fraction <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "nose band fraction {} out of (0, 1]",
                self.nose_band_fraction
            )));
        }
        Ok(())
    }
}

/// Everything the extractors need besides the face itself.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtractConfig {
    pub canny: CannyParams,
    pub fuzzy: FuzzyParams,
    pub policy: BoundaryPolicy,
}

/// Per-component measurements recorded alongside the boxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// Edge pixels (mask pixels of the selected region for eyebrows).
    pub edge_pixels: usize,
    /// Nostril row in face coordinates; nose only.
    pub nostril_row: Option<usize>,
    /// Fraction of the crop the fuzzy mask marked; eyebrows only.
    pub mask_fill: Option<f64>,
}

/// Outcome of one component extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    pub kind: ComponentKind,
    /// Region the formulas predicted, in face coordinates.
    pub predicted: RegionBox,
    /// Detected component box, in face coordinates; contained in `predicted`.
    pub exact: RegionBox,
    /// RGB crop of the exact box.
    pub pixels: RasterRgb,
    pub diagnostics: Diagnostics,
}

/// An intermediate raster captured for stage dumps.
#[derive(Debug, Clone, PartialEq)]
pub enum StageImage {
    Rgb(RasterRgb),
    Gray(RasterGray),
    Binary(RasterBinary),
}

/// Named pipeline intermediates of one extractor run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageTrace {
    pub stages: Vec<(String, StageImage)>,
}

impl StageTrace {
    fn push(trace: &mut Option<&mut StageTrace>, name: &str, img: StageImage) {
        if let Some(t) = trace {
            t.stages.push((name.to_string(), img));
        }
    }

    pub fn get(&self, name: &str) -> Option<&StageImage> {
        self.stages.iter().find(|(n, _)| n == name).map(|(_, i)| i)
    }
}

fn fail(kind: ComponentKind, err: Error) -> Error {
    match err {
        e @ (Error::EmptyPrediction { .. } | Error::NoseRowUnset) => e,
        e => Error::ExtractionFailed {
            kind,
            reason: e.to_string(),
        },
    }
}

/// Bounding box of the populated projection profiles: the first..last rows
/// and columns whose edge counts reach the policy minima. Coordinates are
/// local to `edges`.
pub fn bbox_from_edges(edges: &RasterBinary, policy: &BoundaryPolicy) -> Result<RegionBox> {
    policy.validate()?;
    let (rows, cols) = edge_projection_profiles(edges);
    let x1 = rows.iter().position(|&c| c >= policy.min_row_count);
    let x2 = rows.iter().rposition(|&c| c >= policy.min_row_count);
    let y1 = cols.iter().position(|&c| c >= policy.min_col_count);
    let y2 = cols.iter().rposition(|&c| c >= policy.min_col_count);
    match (x1, x2, y1, y2) {
        (Some(x1), Some(x2), Some(y1), Some(y2)) => Ok(RegionBox::new(
            x1 as i64, y1 as i64, x2 as i64, y2 as i64,
        )),
        _ => Err(Error::NoBoundary(format!(
            "no row with >= {} edge pixels or no column with >= {}",
            policy.min_row_count, policy.min_col_count
        ))),
    }
}

/// Row of the global minimum intensity; ties break to the smallest row.
pub fn min_intensity_row(img: &RasterGray) -> usize {
    let mut best = (u8::MAX, 0usize);
    for row in 0..img.height() {
        for col in 0..img.width() {
            let v = img.get(row, col);
            if v < best.0 {
                best = (v, row);
            }
        }
    }
    best.1
}

/// Shared eye/lip pipeline on a predicted crop: gray, median, +127,
/// edge detection, profile bounding box (local coordinates).
fn edge_pipeline(
    crop: &RasterRgb,
    canny_params: &CannyParams,
    policy: &BoundaryPolicy,
    trace: &mut Option<&mut StageTrace>,
) -> Result<(RegionBox, usize)> {
    let gray = to_gray(crop);
    StageTrace::push(trace, "gray", StageImage::Gray(gray.clone()));
    let filtered = median_filter(&gray, MEDIAN_RADIUS)?;
    StageTrace::push(trace, "median", StageImage::Gray(filtered.clone()));
    let normalized = sat_add_127(&filtered);
    StageTrace::push(trace, "normalized", StageImage::Gray(normalized.clone()));
    let edges = canny(&normalized, canny_params)?;
    StageTrace::push(trace, "edges", StageImage::Binary(edges.clone()));
    let bbox = bbox_from_edges(&edges, policy)?;
    Ok((bbox, edges.count_ones()))
}

fn extract_edge_component(
    face: &RasterRgb,
    kind: ComponentKind,
    geom: &FaceGeometry,
    canny_params: &CannyParams,
    policy: &BoundaryPolicy,
    mut trace: Option<&mut StageTrace>,
) -> Result<ExtractionResult> {
    let predicted = predict_region(kind, geom)?;
    let crop = face.crop(&predicted).map_err(|e| fail(kind, e))?;
    StageTrace::push(&mut trace, "predicted_crop", StageImage::Rgb(crop.clone()));
    let (local, edge_pixels) =
        edge_pipeline(&crop, canny_params, policy, &mut trace).map_err(|e| fail(kind, e))?;
    let exact = local.translate(predicted.x1, predicted.y1);
    let pixels = face.crop(&exact).map_err(|e| fail(kind, e))?;
    Ok(ExtractionResult {
        kind,
        predicted,
        exact,
        pixels,
        diagnostics: Diagnostics {
            edge_pixels,
            nostril_row: None,
            mask_fill: None,
        },
    })
}

fn check_face_width(kind: ComponentKind, face: &RasterRgb) -> Result<()> {
    if face.width() < MIN_FACE_WIDTH {
        return Err(Error::ExtractionFailed {
            kind,
            reason: format!(
                "face width {} below minimum {MIN_FACE_WIDTH}",
                face.width()
            ),
        });
    }
    Ok(())
}

/// Right-eye extractor: predicted crop, gray, median, +127, edges, profile
/// bounding box.
pub fn extract_right_eye(
    face: &RasterRgb,
    geom: &FaceGeometry,
    canny_params: &CannyParams,
    policy: &BoundaryPolicy,
    trace: Option<&mut StageTrace>,
) -> Result<ExtractionResult> {
    check_face_width(ComponentKind::RightEye, face)?;
    extract_edge_component(face, ComponentKind::RightEye, geom, canny_params, policy, trace)
}

/// Left-eye extractor; same pipeline as the right eye over the mirrored
/// prediction region.
pub fn extract_left_eye(
    face: &RasterRgb,
    geom: &FaceGeometry,
    canny_params: &CannyParams,
    policy: &BoundaryPolicy,
    trace: Option<&mut StageTrace>,
) -> Result<ExtractionResult> {
    check_face_width(ComponentKind::LeftEye, face)?;
    extract_edge_component(face, ComponentKind::LeftEye, geom, canny_params, policy, trace)
}

/// Lip extractor; requires the nose lower boundary in `geom`.
pub fn extract_lip(
    face: &RasterRgb,
    geom: &FaceGeometry,
    canny_params: &CannyParams,
    policy: &BoundaryPolicy,
    trace: Option<&mut StageTrace>,
) -> Result<ExtractionResult> {
    extract_edge_component(face, ComponentKind::Lip, geom, canny_params, policy, trace)
}

/// An 8-connected region of mask pixels.
struct MaskRegion {
    count: usize,
    row_sum: f64,
    bbox: RegionBox,
}

fn connected_regions(mask: &RasterBinary) -> Vec<MaskRegion> {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let mut regions = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if mask.pixels()[start] != 1 || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut region = MaskRegion {
            count: 0,
            row_sum: 0.0,
            bbox: RegionBox::new(i64::MAX, i64::MAX, i64::MIN, i64::MIN),
        };
        while let Some(i) = stack.pop() {
            let (row, col) = ((i / w) as i64, (i % w) as i64);
            region.count += 1;
            region.row_sum += row as f64;
            region.bbox.x1 = region.bbox.x1.min(row);
            region.bbox.y1 = region.bbox.y1.min(col);
            region.bbox.x2 = region.bbox.x2.max(row);
            region.bbox.y2 = region.bbox.y2.max(col);
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (nr, nc) = (row + dr, col + dc);
                    if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                        continue;
                    }
                    let n = nr as usize * w + nc as usize;
                    if mask.pixels()[n] == 1 && !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        regions.push(region);
    }
    regions
}

/// Eyebrow extractor: fuzzy value-channel mask over the predicted crop, then
/// the largest 8-connected mask region whose centroid lies in the crop's
/// upper half (the eyebrow, not the eye below it).
pub fn extract_eyebrow(
    face: &RasterRgb,
    side_kind: ComponentKind,
    geom: &FaceGeometry,
    fuzzy: &FuzzyParams,
    mut trace: Option<&mut StageTrace>,
) -> Result<ExtractionResult> {
    let kind = match side_kind {
        ComponentKind::RightEyebrow | ComponentKind::LeftEyebrow => side_kind,
        other => {
            return Err(Error::InvalidInput(format!(
                "extract_eyebrow called for {other}"
            )))
        }
    };
    fuzzy.validate().map_err(|e| fail(kind, e))?;
    let predicted = predict_region(kind, geom)?;
    let crop = face.crop(&predicted).map_err(|e| fail(kind, e))?;
    StageTrace::push(&mut trace, "predicted_crop", StageImage::Rgb(crop.clone()));
    let plane = value_plane(&crop);
    let mask = fuzzy_v_binarize(&plane, fuzzy);
    StageTrace::push(&mut trace, "fuzzy_mask", StageImage::Binary(mask.clone()));

    let total = mask.width() * mask.height();
    let ones = mask.count_ones();
    if ones == 0 {
        return Err(Error::ExtractionFailed {
            kind,
            reason: "fuzzy mask is empty".into(),
        });
    }
    let mask_fill = ones as f64 / total as f64;

    // Upper half: mean row strictly above the crop's vertical center.
    let center = (mask.height() as f64 - 1.0) / 2.0;
    let best = connected_regions(&mask)
        .into_iter()
        .filter(|r| r.row_sum / (r.count as f64) < center)
        .reduce(|a, b| if b.count > a.count { b } else { a });
    let region = best.ok_or_else(|| Error::ExtractionFailed {
        kind,
        reason: "no mask region with an upper-half centroid".into(),
    })?;

    let exact = region.bbox.translate(predicted.x1, predicted.y1);
    let pixels = face.crop(&exact).map_err(|e| fail(kind, e))?;
    Ok(ExtractionResult {
        kind,
        predicted,
        exact,
        pixels,
        diagnostics: Diagnostics {
            edge_pixels: region.count,
            nostril_row: None,
            mask_fill: Some(mask_fill),
        },
    })
}

/// Nose extractor. Upper boundary comes from the first sufficiently
/// populated row of the Otsu-binarized crop; the nostril row, lateral and
/// lower boundaries come from the normalized bottom third. Records the lower
/// boundary in `geom` for the lip prediction.
pub fn extract_nose(
    face: &RasterRgb,
    geom: &mut FaceGeometry,
    canny_params: &CannyParams,
    policy: &BoundaryPolicy,
    mut trace: Option<&mut StageTrace>,
) -> Result<ExtractionResult> {
    let kind = ComponentKind::Nose;
    policy.validate().map_err(|e| fail(kind, e))?;
    let predicted = predict_region(kind, geom)?;
    let face_gray = to_gray(face);
    let crop = face_gray.crop(&predicted).map_err(|e| fail(kind, e))?;
    StageTrace::push(&mut trace, "gray_crop", StageImage::Gray(crop.clone()));

    let binary = crate::raster::binarize_otsu(&crop);
    StageTrace::push(&mut trace, "otsu", StageImage::Binary(binary.clone()));
    let (bin_rows, _) = edge_projection_profiles(&binary);
    let upper_local = bin_rows
        .iter()
        .position(|&c| c >= policy.min_row_count)
        .ok_or_else(|| Error::ExtractionFailed {
            kind,
            reason: "no populated row in the binarized crop (upper boundary)".into(),
        })?;

    // Bottom third of the crop.
    let crop_h = crop.height() as i64;
    let lower_start = 2 * crop_h / 3;
    let lower = crop
        .crop(&RegionBox::new(lower_start, 0, crop_h - 1, crop.width() as i64 - 1))
        .map_err(|e| fail(kind, e))?;
    StageTrace::push(&mut trace, "lower_third", StageImage::Gray(lower.clone()));
    let normalized = sat_add_127(&lower);
    StageTrace::push(&mut trace, "lower_normalized", StageImage::Gray(normalized.clone()));

    let nostril_local = min_intensity_row(&normalized);

    let edges = canny(&normalized, canny_params).map_err(|e| fail(kind, e))?;
    StageTrace::push(&mut trace, "lower_edges", StageImage::Binary(edges.clone()));
    let (rows, cols) = edge_projection_profiles(&edges);

    let band = ((edges.width() as f64 * policy.nose_band_fraction).round() as usize)
        .clamp(1, edges.width());
    let left_local = cols[..band]
        .iter()
        .position(|&c| c >= policy.min_col_count)
        .ok_or_else(|| Error::ExtractionFailed {
            kind,
            reason: "no left boundary in the left column band".into(),
        })?;
    let right_band_start = edges.width() - band;
    let right_local = cols[right_band_start..]
        .iter()
        .rposition(|&c| c >= policy.min_col_count)
        .map(|i| right_band_start + i)
        .ok_or_else(|| Error::ExtractionFailed {
            kind,
            reason: "no right boundary in the right column band".into(),
        })?;
    let lower_local = rows[nostril_local..]
        .iter()
        .rposition(|&c| c >= policy.min_row_count)
        .map(|i| nostril_local + i)
        .ok_or_else(|| Error::ExtractionFailed {
            kind,
            reason: "no lower boundary at or below the nostril row".into(),
        })?;

    let upper_face = predicted.x1 + upper_local as i64;
    let lower_face = predicted.x1 + lower_start + lower_local as i64;
    let left_face = predicted.y1 + left_local as i64;
    let right_face = predicted.y1 + right_local as i64;
    if upper_face > lower_face || left_face > right_face {
        return Err(Error::ExtractionFailed {
            kind,
            reason: "detected boundaries are inverted".into(),
        });
    }

    let exact = RegionBox::new(upper_face, left_face, lower_face, right_face);
    let pixels = face.crop(&exact).map_err(|e| fail(kind, e))?;
    let nostril_row = (predicted.x1 + lower_start + nostril_local as i64) as usize;
    geom.nose_lower_row = Some(lower_face as usize);
    Ok(ExtractionResult {
        kind,
        predicted,
        exact,
        pixels,
        diagnostics: Diagnostics {
            edge_pixels: edges.count_ones(),
            nostril_row: Some(nostril_row),
            mask_fill: None,
        },
    })
}

/// Stage dumps of a whole-face run, one entry per attempted component.
pub type FaceTrace = Vec<(ComponentKind, StageTrace)>;

/// Outcome of a whole-face extraction: the computed geometry plus one result
/// or error per component.
#[derive(Debug)]
pub struct ExtractionBatch {
    pub geometry: FaceGeometry,
    pub outcomes: Vec<(ComponentKind, Result<ExtractionResult>)>,
}

impl ExtractionBatch {
    pub fn successes(&self) -> impl Iterator<Item = &ExtractionResult> {
        self.outcomes.iter().filter_map(|(_, r)| r.as_ref().ok())
    }

    pub fn failure_count(&self) -> usize {
        self.outcomes.iter().filter(|(_, r)| r.is_err()).count()
    }
}

/// Runs all six extractors over a preprocessed face. Eyes, eyebrows and nose
/// are independent; lip runs last because its prediction needs the nose
/// lower boundary. Per-component failures are reported without aborting the
/// rest.
pub fn extract_all(
    face: &RasterRgb,
    config: &ExtractConfig,
    mut trace: Option<&mut FaceTrace>,
) -> Result<ExtractionBatch> {
    let mut geom = compute_face_geometry(face)?;
    let mut outcomes = Vec::with_capacity(6);

    let run =
        |kind: ComponentKind, geom: &mut FaceGeometry, trace: &mut Option<&mut FaceTrace>| {
            let mut stage = StageTrace::default();
            let stage_opt = trace.is_some().then_some(&mut stage);
            let result = match kind {
                ComponentKind::RightEye => {
                    extract_right_eye(face, geom, &config.canny, &config.policy, stage_opt)
                }
                ComponentKind::LeftEye => {
                    extract_left_eye(face, geom, &config.canny, &config.policy, stage_opt)
                }
                ComponentKind::RightEyebrow | ComponentKind::LeftEyebrow => {
                    extract_eyebrow(face, kind, geom, &config.fuzzy, stage_opt)
                }
                ComponentKind::Nose => {
                    extract_nose(face, geom, &config.canny, &config.policy, stage_opt)
                }
                ComponentKind::Lip => {
                    extract_lip(face, geom, &config.canny, &config.policy, stage_opt)
                }
            };
            if let Some(t) = trace {
                t.push((kind, stage));
            }
            (kind, result)
        };

    for kind in ComponentKind::ALL {
        outcomes.push(run(kind, &mut geom, &mut trace));
    }

    Ok(ExtractionBatch {
        geometry: geom,
        outcomes,
    })
}
