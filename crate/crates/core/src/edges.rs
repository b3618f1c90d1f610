//! Canny edge detection and projection profiles.
//!
//! The detector is the classical pipeline: Gaussian smoothing (clamp-to-edge
//! borders), 3x3 Sobel gradients, four-sector non-maximum suppression,
//! quantile-derived double threshold and 8-connected hysteresis. Thresholds
//! adapt per crop because component crops vary widely in contrast: the high
//! threshold is a quantile of the surviving (post-suppression) gradient
//! magnitudes and the low threshold a fixed fraction of it.

use crate::error::{Error, Result};
use crate::raster::{RasterBinary, RasterGray};

/// Canny detector parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    /// Gaussian smoothing sigma; kernel half-width is `ceil(3 sigma)`.
    pub gaussian_sigma: f64,
    /// Quantile of the nonzero suppressed gradient magnitudes used as the
    /// high threshold.
    pub high_quantile: f64,
    /// Low threshold as a fraction of the high threshold.
    pub low_ratio: f64,
    /// Suppressed magnitudes below this are treated as zero. Sub-quantization
    /// gradients (sensor noise smeared by the smoothing) are not edges in an
    /// 8-bit image; without the floor they would dominate the quantile's
    /// candidate set in low-texture crops. 30 corresponds to roughly a
    /// 13-gray-level step at the default sigma.
    pub min_magnitude: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            gaussian_sigma: 1.4,
            high_quantile: 0.70,
            low_ratio: 0.40,
            min_magnitude: 30.0,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_sigma > 0.0)
            || !(0.0 < self.high_quantile && self.high_quantile < 1.0)
            || !(0.0 < self.low_ratio && self.low_ratio < 1.0)
            || !(self.min_magnitude >= 0.0)
        {
            return Err(Error::InvalidInput(format!(
                "canny params out of range: sigma={} high_quantile={} low_ratio={} min_magnitude={}",
                self.gaussian_sigma, self.high_quantile, self.low_ratio, self.min_magnitude
            )));
        }
        Ok(())
    }
}

/// Normalized 2-D Gaussian kernel with half-width `ceil(3 sigma)`.
fn gaussian_kernel(sigma: f64) -> (Vec<f64>, usize) {
    let half = (3.0 * sigma).ceil() as usize;
    let size = 2 * half + 1;
    let mut kernel = Vec::with_capacity(size * size);
    let mut sum = 0.0;
    for dy in 0..size {
        for dx in 0..size {
            let ry = dy as f64 - half as f64;
            let rx = dx as f64 - half as f64;
            let w = (-(rx * rx + ry * ry) / (2.0 * sigma * sigma)).exp();
            kernel.push(w);
            sum += w;
        }
    }
    for w in &mut kernel {
        *w /= sum;
    }
    (kernel, half)
}

/// Direct 2-D convolution with clamp-to-edge replication.
fn smooth(img: &RasterGray, sigma: f64) -> Vec<f64> {
    let (kernel, half) = gaussian_kernel(sigma);
    let (w, h) = (img.width(), img.height());
    let size = 2 * half + 1;
    let mut out = Vec::with_capacity(w * h);
    for row in 0..h {
        for col in 0..w {
            let mut acc = 0.0;
            for dy in 0..size {
                let r = (row + dy).saturating_sub(half).min(h - 1);
                for dx in 0..size {
                    let c = (col + dx).saturating_sub(half).min(w - 1);
                    acc += kernel[dy * size + dx] * f64::from(img.get(r, c));
                }
            }
            out.push(acc);
        }
    }
    out
}

/// Sobel gradients of a smoothed plane, clamp-to-edge borders.
fn sobel(plane: &[f64], w: usize, h: usize) -> (Vec<f64>, Vec<f64>) {
    let at = |r: i64, c: i64| {
        let r = r.clamp(0, h as i64 - 1) as usize;
        let c = c.clamp(0, w as i64 - 1) as usize;
        plane[r * w + c]
    };
    let mut gx = Vec::with_capacity(w * h);
    let mut gy = Vec::with_capacity(w * h);
    for row in 0..h as i64 {
        for col in 0..w as i64 {
            let tl = at(row - 1, col - 1);
            let tc = at(row - 1, col);
            let tr = at(row - 1, col + 1);
            let ml = at(row, col - 1);
            let mr = at(row, col + 1);
            let bl = at(row + 1, col - 1);
            let bc = at(row + 1, col);
            let br = at(row + 1, col + 1);
            gx.push((tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl));
            gy.push((bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr));
        }
    }
    (gx, gy)
}

/// Four-sector non-maximum suppression; border pixels are suppressed and
/// ties with neighbors are kept.
fn suppress(gx: &[f64], gy: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut mag = vec![0.0f64; w * h];
    for i in 0..w * h {
        mag[i] = (gx[i] * gx[i] + gy[i] * gy[i]).sqrt();
    }
    let mut out = vec![0.0f64; w * h];
    if w < 3 || h < 3 {
        return out;
    }
    for row in 1..h - 1 {
        for col in 1..w - 1 {
            let i = row * w + col;
            if mag[i] == 0.0 {
                continue;
            }
            let mut angle = gy[i].atan2(gx[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let (n1, n2) = if !(22.5..157.5).contains(&angle) {
                (mag[i - 1], mag[i + 1])
            } else if angle < 67.5 {
                (mag[i + w + 1], mag[i - w - 1])
            } else if angle < 112.5 {
                (mag[i - w], mag[i + w])
            } else {
                (mag[i + w - 1], mag[i - w + 1])
            };
            if mag[i] >= n1 && mag[i] >= n2 {
                out[i] = mag[i];
            }
        }
    }
    out
}

/// Nearest-rank quantile of a sorted slice: `values[floor(q * (n - 1))]`.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = (q * (sorted.len() - 1) as f64).floor() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// Canny edge detection; 1 marks an edge pixel.
pub fn canny(img: &RasterGray, params: &CannyParams) -> Result<RasterBinary> {
    params.validate()?;
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            reason: "edge detection needs at least 3x3 pixels".into(),
        });
    }

    let smoothed = smooth(img, params.gaussian_sigma);
    let (gx, gy) = sobel(&smoothed, w, h);
    let mut suppressed = suppress(&gx, &gy, w, h);
    for m in &mut suppressed {
        if *m < params.min_magnitude {
            *m = 0.0;
        }
    }

    let mut candidates: Vec<f64> = suppressed.iter().copied().filter(|&m| m > 0.0).collect();
    if candidates.is_empty() {
        return RasterBinary::zeros(w, h);
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let high = quantile(&candidates, params.high_quantile);
    let low = params.low_ratio * high;

    // Hysteresis: grow from strong seeds through weak 8-neighbors.
    let mut edges = vec![0u8; w * h];
    let mut stack = Vec::new();
    for i in 0..w * h {
        if suppressed[i] >= high && edges[i] == 0 {
            edges[i] = 1;
            stack.push(i);
            while let Some(j) = stack.pop() {
                let (row, col) = (j / w, j % w);
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let (nr, nc) = (row as i64 + dr, col as i64 + dc);
                        if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                            continue;
                        }
                        let n = nr as usize * w + nc as usize;
                        if edges[n] == 0 && suppressed[n] >= low {
                            edges[n] = 1;
                            stack.push(n);
                        }
                    }
                }
            }
        }
    }
    RasterBinary::new(w, h, edges)
}

/// Per-row and per-column counts of 1-pixels.
pub fn edge_projection_profiles(edges: &RasterBinary) -> (Vec<usize>, Vec<usize>) {
    let mut rows = vec![0usize; edges.height()];
    let mut cols = vec![0usize; edges.width()];
    for row in 0..edges.height() {
        for col in 0..edges.width() {
            if edges.get(row, col) == 1 {
                rows[row] += 1;
                cols[col] += 1;
            }
        }
    }
    (rows, cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vertical_step(w: usize, h: usize, step_col: usize) -> RasterGray {
        let mut data = Vec::with_capacity(w * h);
        for _ in 0..h {
            for col in 0..w {
                data.push(if col < step_col { 0 } else { 255 });
            }
        }
        RasterGray::new(w, h, data).unwrap()
    }

    #[test]
    fn constant_image_has_no_edges() {
        let img = RasterGray::new(32, 32, vec![99; 1024]).unwrap();
        let edges = canny(&img, &CannyParams::default()).unwrap();
        assert_eq!(edges.count_ones(), 0);
    }

    #[test]
    fn vertical_step_edges_confined_to_step_columns() {
        let img = vertical_step(32, 32, 16);
        let edges = canny(&img, &CannyParams::default()).unwrap();
        assert!(edges.count_ones() > 0);
        let (_, cols) = edge_projection_profiles(&edges);
        let hit: Vec<usize> = (0..32).filter(|&c| cols[c] > 0).collect();
        assert!(!hit.is_empty() && hit.len() <= 2, "edge columns: {hit:?}");
        for c in &hit {
            assert!((15..=16).contains(c), "edge off the step at column {c}");
        }
    }

    #[test]
    fn rejects_tiny_images() {
        let img = RasterGray::new(2, 2, vec![0, 255, 255, 0]).unwrap();
        assert!(canny(&img, &CannyParams::default()).is_err());
    }

    #[test]
    fn detector_is_deterministic() {
        let mut data = Vec::new();
        let mut s = 7u64;
        for _ in 0..24 * 24 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            data.push((s >> 56) as u8);
        }
        let img = RasterGray::new(24, 24, data).unwrap();
        let a = canny(&img, &CannyParams::default()).unwrap();
        let b = canny(&img, &CannyParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn profile_reference_points() {
        let zero = RasterBinary::zeros(5, 5).unwrap();
        let (rows, cols) = edge_projection_profiles(&zero);
        assert_eq!(rows, vec![0; 5]);
        assert_eq!(cols, vec![0; 5]);

        let mut one = RasterBinary::zeros(5, 5).unwrap();
        one.set(2, 3, 1);
        let (rows, cols) = edge_projection_profiles(&one);
        assert_eq!(rows, vec![0, 0, 1, 0, 0]);
        assert_eq!(cols, vec![0, 0, 0, 1, 0]);
    }

    #[test]
    fn profile_sums_count_all_edges() {
        let mut img = RasterBinary::zeros(9, 7).unwrap();
        let mut s = 99u64;
        for row in 0..7 {
            for col in 0..9 {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                img.set(row, col, ((s >> 60) & 1) as u8);
            }
        }
        let (rows, cols) = edge_projection_profiles(&img);
        let total = img.count_ones();
        assert_eq!(rows.iter().sum::<usize>(), total);
        assert_eq!(cols.iter().sum::<usize>(), total);
    }

    #[test]
    fn higher_quantile_never_adds_edges() {
        let mut s = 0xDEADBEEFu64;
        let mut next = move || {
            s ^= s >> 12;
            s ^= s << 25;
            s ^= s >> 27;
            (s.wrapping_mul(0x2545F4914F6CDD1D) >> 56) as u8
        };
        for _ in 0..10 {
            let data: Vec<u8> = (0..20 * 20).map(|_| next()).collect();
            let img = RasterGray::new(20, 20, data).unwrap();
            let loose = canny(
                &img,
                &CannyParams {
                    high_quantile: 0.5,
                    ..CannyParams::default()
                },
            )
            .unwrap();
            let tight = canny(
                &img,
                &CannyParams {
                    high_quantile: 0.9,
                    ..CannyParams::default()
                },
            )
            .unwrap();
            for i in 0..400 {
                assert!(tight.pixels()[i] <= loose.pixels()[i]);
            }
        }
    }
}
