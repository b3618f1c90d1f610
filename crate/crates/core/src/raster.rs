//! Pixel-grid types and the per-pixel primitives the extractors build on:
//! gray conversion, median filtering, +127 normalization, HSV conversion,
//! Otsu and fuzzy-V binarization, width-capped resizing and cropping.
//!
//! Grids are row-major and addressed `(row, col)`. Every operation is a pure
//! function of its inputs and safe to call concurrently.

use crate::error::{Error, Result};
use crate::geometry::RegionBox;

/// Width images are reduced to before extraction.
pub const DEFAULT_MAX_WIDTH: usize = 200;

/// An 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterRgb {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

/// An 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterGray {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

/// A binary raster; values are exactly 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterBinary {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

/// A grid of HSV value-channel fractions in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuePlane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidInput(format!(
            "raster dimensions must be at least 1x1, got {width}x{height}"
        )));
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::InvalidInput("raster dimensions overflow".into()))?;
    if len != expected {
        return Err(Error::InvalidInput(format!(
            "pixel count {len} does not match {width}x{height}"
        )));
    }
    Ok(())
}

macro_rules! grid_common {
    ($ty:ident, $px:ty) => {
        impl $ty {
            pub fn width(&self) -> usize {
                self.width
            }

            pub fn height(&self) -> usize {
                self.height
            }

            #[inline]
            pub fn get(&self, row: usize, col: usize) -> $px {
                debug_assert!(row < self.height && col < self.width);
                self.data[row * self.width + col]
            }

            #[inline]
            pub fn set(&mut self, row: usize, col: usize, value: $px) {
                debug_assert!(row < self.height && col < self.width);
                self.data[row * self.width + col] = value;
            }

            /// Row-major pixel slice.
            pub fn pixels(&self) -> &[$px] {
                &self.data
            }
        }
    };
}

grid_common!(RasterRgb, [u8; 3]);
grid_common!(RasterGray, u8);
grid_common!(RasterBinary, u8);
grid_common!(ValuePlane, f64);

impl RasterRgb {
    pub fn new(width: usize, height: usize, data: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// A raster filled with one color.
    pub fn filled(width: usize, height: usize, color: [u8; 3]) -> Result<Self> {
        check_dims(width, height, width * height)?;
        Ok(Self {
            width,
            height,
            data: vec![color; width * height],
        })
    }

    /// Inclusive sub-grid of `region` clamped to the raster bounds.
    pub fn crop(&self, region: &RegionBox) -> Result<Self> {
        let (x1, y1, x2, y2) = clamp_region(region, self.width, self.height)?;
        let mut data = Vec::with_capacity((x2 - x1 + 1) * (y2 - y1 + 1));
        for row in x1..=x2 {
            data.extend_from_slice(&self.data[row * self.width + y1..=row * self.width + y2]);
        }
        Self::new(y2 - y1 + 1, x2 - x1 + 1, data)
    }

    /// Horizontal mirror (columns reversed).
    pub fn mirror_cols(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for row in 0..self.height {
            let line = &self.data[row * self.width..(row + 1) * self.width];
            data.extend(line.iter().rev());
        }
        Self {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

impl RasterGray {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Ok(Self {
            width,
            height,
            data: vec![value; check_dims(width, height, width * height).map(|_| width * height)?],
        })
    }

    /// Inclusive sub-grid of `region` clamped to the raster bounds.
    pub fn crop(&self, region: &RegionBox) -> Result<Self> {
        let (x1, y1, x2, y2) = clamp_region(region, self.width, self.height)?;
        let mut data = Vec::with_capacity((x2 - x1 + 1) * (y2 - y1 + 1));
        for row in x1..=x2 {
            data.extend_from_slice(&self.data[row * self.width + y1..=row * self.width + y2]);
        }
        Self::new(y2 - y1 + 1, x2 - x1 + 1, data)
    }
}

impl RasterBinary {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if data.iter().any(|&v| v > 1) {
            return Err(Error::InvalidInput(
                "binary raster values must be 0 or 1".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height, width * height)?;
        Ok(Self {
            width,
            height,
            data: vec![0; width * height],
        })
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }
}

impl ValuePlane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidInput(
                "value-plane entries must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }
}

fn clamp_region(
    region: &RegionBox,
    width: usize,
    height: usize,
) -> Result<(usize, usize, usize, usize)> {
    match region.clamp_to(width, height) {
        Some(r) => Ok((r.x1 as usize, r.y1 as usize, r.x2 as usize, r.y2 as usize)),
        None => Err(Error::RegionOutsideRaster {
            x1: region.x1,
            y1: region.y1,
            x2: region.x2,
            y2: region.y2,
            width,
            height,
        }),
    }
}

/// A pixel in hexcone HSV space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvPixel {
    /// Hue in degrees, `[0, 360)`; 0 when the pixel is achromatic.
    pub h: f64,
    /// Saturation fraction in `[0, 1]`.
    pub s: f64,
    /// Value fraction in `[0, 1]`.
    pub v: f64,
}

/// Which exponent the fuzzy membership uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FuzzyExponent {
    /// `F = 1 - ((V - P) / Q)^2`; keeps F in `[0, 1]` on the in-band branch.
    #[default]
    SquaredRatio,
    /// `F = 1 - (V - P) / Q^2`; kept for comparison runs.
    RatioOverQSquared,
}

/// Parameters of the fuzzy value-channel binarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyParams {
    pub p: f64,
    pub q: f64,
    pub exponent: FuzzyExponent,
}

impl Default for FuzzyParams {
    fn default() -> Self {
        Self {
            p: 0.25,
            q: 0.25,
            exponent: FuzzyExponent::SquaredRatio,
        }
    }
}

impl FuzzyParams {
    pub fn validate(&self) -> Result<()> {
        if self.q <= 0.0 || !self.q.is_finite() || !self.p.is_finite() {
            return Err(Error::InvalidInput(format!(
                "fuzzy params need finite p and q > 0, got p={} q={}",
                self.p, self.q
            )));
        }
        Ok(())
    }
}

/// One pixel's pass through the fuzzy binarization steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyResponse {
    /// 1 when `|V - P| <= Q`, else 0.
    pub t: u8,
    /// Membership; 0 on the out-of-band branch.
    pub f: f64,
    /// Final binary value: 1 when `F < 0.5`.
    pub c: u8,
}

/// Evaluates the fuzzy steps for a single value-channel sample.
pub fn fuzzy_response(v: f64, params: &FuzzyParams) -> FuzzyResponse {
    let t = if (v - params.p).abs() > params.q { 0 } else { 1 };
    let f = if t == 1 {
        match params.exponent {
            FuzzyExponent::SquaredRatio => {
                let r = (v - params.p) / params.q;
                1.0 - r * r
            }
            FuzzyExponent::RatioOverQSquared => 1.0 - (v - params.p) / (params.q * params.q),
        }
    } else {
        0.0
    };
    let c = if f < 0.5 { 1 } else { 0 };
    FuzzyResponse { t, f, c }
}

/// Binarizes a value plane with the fuzzy membership rule.
pub fn fuzzy_v_binarize(plane: &ValuePlane, params: &FuzzyParams) -> RasterBinary {
    let data = plane
        .data
        .iter()
        .map(|&v| fuzzy_response(v, params).c)
        .collect();
    RasterBinary {
        width: plane.width,
        height: plane.height,
        data,
    }
}

/// Luma gray conversion, `round(0.299 r + 0.587 g + 0.114 b)`.
pub fn to_gray(img: &RasterRgb) -> RasterGray {
    let data = img
        .data
        .iter()
        .map(|&[r, g, b]| {
            let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    RasterGray {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Median filter with a `(2 radius + 1)`-square window; windows shrink at the
/// borders instead of padding. Even-sized clipped windows take the lower
/// median.
pub fn median_filter(img: &RasterGray, radius: usize) -> Result<RasterGray> {
    if radius == 0 {
        return Err(Error::InvalidInput("median radius must be at least 1".into()));
    }
    let window = 2 * radius + 1;
    if window > img.width && window > img.height {
        return Err(Error::ImageTooSmall {
            width: img.width,
            height: img.height,
            reason: format!("median window {window}x{window} exceeds both dimensions"),
        });
    }
    let mut data = Vec::with_capacity(img.data.len());
    let mut values = Vec::with_capacity(window * window);
    for row in 0..img.height {
        let r0 = row.saturating_sub(radius);
        let r1 = (row + radius).min(img.height - 1);
        for col in 0..img.width {
            let c0 = col.saturating_sub(radius);
            let c1 = (col + radius).min(img.width - 1);
            values.clear();
            for r in r0..=r1 {
                values.extend_from_slice(&img.data[r * img.width + c0..=r * img.width + c1]);
            }
            let mid = (values.len() - 1) / 2;
            let (_, median, _) = values.select_nth_unstable(mid);
            data.push(*median);
        }
    }
    Ok(RasterGray {
        width: img.width,
        height: img.height,
        data,
    })
}

/// Adds 127 to every pixel, saturating at 255. Lifts dark detail ahead of
/// edge detection.
pub fn sat_add_127(img: &RasterGray) -> RasterGray {
    let data = img.data.iter().map(|&v| v.saturating_add(127)).collect();
    RasterGray {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Hexcone RGB -> HSV conversion.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> HsvPixel {
    let rf = f64::from(r) / 255.0;
    let gf = f64::from(g) / 255.0;
    let bf = f64::from(b) / 255.0;
    let max = rf.max(gf).max(bf);
    let min = rf.min(gf).min(bf);
    let delta = max - min;

    let v = max;
    let s = if max == 0.0 { 0.0 } else { delta / max };
    let h = if delta == 0.0 {
        0.0
    } else if max == rf {
        let mut h = 60.0 * ((gf - bf) / delta);
        if h < 0.0 {
            h += 360.0;
        }
        h
    } else if max == gf {
        60.0 * ((bf - rf) / delta + 2.0)
    } else {
        60.0 * ((rf - gf) / delta + 4.0)
    };
    HsvPixel { h: h % 360.0, s, v }
}

/// The value (V) plane of an RGB raster.
pub fn value_plane(img: &RasterRgb) -> ValuePlane {
    let data = img
        .data
        .iter()
        .map(|&[r, g, b]| rgb_to_hsv(r, g, b).v)
        .collect();
    ValuePlane {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Otsu threshold of a grayscale histogram: the smallest threshold
/// maximizing between-class variance. `None` when every split has zero
/// between-class variance (constant image).
pub fn otsu_threshold(img: &RasterGray) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &v in &img.data {
        hist[v as usize] += 1;
    }
    let total = img.data.len() as u64;
    let sum_all: u64 = hist
        .iter()
        .enumerate()
        .map(|(i, &h)| i as u64 * h)
        .sum();

    let mut best: Option<(f64, u8)> = None;
    let mut w0 = 0u64;
    let mut sum0 = 0u64;
    for t in 0..256usize {
        w0 += hist[t];
        sum0 += t as u64 * hist[t];
        if w0 == 0 {
            continue;
        }
        let w1 = total - w0;
        if w1 == 0 {
            break;
        }
        let mu0 = sum0 as f64 / w0 as f64;
        let mu1 = (sum_all - sum0) as f64 / w1 as f64;
        let var = w0 as f64 * w1 as f64 * (mu0 - mu1) * (mu0 - mu1);
        if var > 0.0 && best.map_or(true, |(bv, _)| var > bv) {
            best = Some((var, t as u8));
        }
    }
    best.map(|(_, t)| t)
}

/// Binarizes with the Otsu threshold; dark pixels (`<= threshold`) become 1.
/// Degenerate (constant) images map to all zeros.
pub fn binarize_otsu(img: &RasterGray) -> RasterBinary {
    let data = match otsu_threshold(img) {
        Some(t) => img.data.iter().map(|&v| u8::from(v <= t)).collect(),
        None => vec![0; img.data.len()],
    };
    RasterBinary {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Rounds half-up: `floor(x + 0.5)`.
pub(crate) fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// Caps the raster width at `max_w`, scaling the height to keep the aspect
/// ratio. Images already narrow enough are returned unchanged.
/// Nearest-neighbor sampling.
pub fn resize_to_width(img: &RasterRgb, max_w: usize) -> RasterRgb {
    if img.width <= max_w || max_w == 0 {
        return img.clone();
    }
    let out_w = max_w;
    let out_h = (round_half_up(img.height as f64 * max_w as f64 / img.width as f64) as usize)
        .max(1);
    let mut data = Vec::with_capacity(out_w * out_h);
    for row in 0..out_h {
        let src_r = (((row as f64 + 0.5) * img.height as f64 / out_h as f64) as usize)
            .min(img.height - 1);
        for col in 0..out_w {
            let src_c = (((col as f64 + 0.5) * img.width as f64 / out_w as f64) as usize)
                .min(img.width - 1);
            data.push(img.data[src_r * img.width + src_c]);
        }
    }
    RasterRgb {
        width: out_w,
        height: out_h,
        data,
    }
}
