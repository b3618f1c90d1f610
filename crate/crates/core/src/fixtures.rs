//! Deterministic synthetic-face generator: idealized frontal faces with
//! drawn eyebrows, eyes, nose, nostrils and lip at parameterized positions,
//! plus the ground-truth boxes. These fixtures are the verification
//! substrate for the extraction pipeline.
//!
//! Layout positions and sizes are fractions of the face width so fixtures
//! scale the same way the prediction formulas do. Noise comes from an
//! in-repo xorshift64* sequence (seeded, documented below) so generated
//! bytes are identical on every platform.

use crate::error::{Error, Result};
use crate::geometry::{ComponentKind, RegionBox};
use crate::raster::{round_half_up, RasterRgb};

/// xorshift64*: `x ^= x >> 12; x ^= x << 25; x ^= x >> 27; x * 0x2545F4914F6CDD1D`.
/// A zero seed is replaced by a fixed odd constant.
#[derive(Debug, Clone)]
pub struct XorShift64Star(u64);

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        Self(if seed == 0 { 0x9E37_79B9_7F4A_7C15 } else { seed })
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform integer in `[-amp, amp]`.
    fn delta(&mut self, amp: u8) -> i16 {
        let span = 2 * i64::from(amp) + 1;
        (self.next_u64() % span as u64) as i16 - i16::from(amp)
    }

    /// Uniform float in `[-amp, amp)`.
    fn jitter(&mut self, amp: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        (2.0 * u - 1.0) * amp
    }
}

/// Generator parameters. Positions and sizes are fractions of the face
/// width; gray levels are 8-bit values drawn identically into all three
/// channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureParams {
    pub width: usize,
    /// Raster height as a fraction of the width (faces are taller than wide).
    pub height_frac: f64,

    pub skin_gray: u8,
    /// Eyes and eyebrows. Kept dark enough that the fuzzy value band
    /// separates features from skin.
    pub feature_gray: u8,
    pub nose_gray: u8,
    pub lip_gray: u8,
    /// Iris highlight; the face's strongest horizontal contrast sits on the
    /// eye center row because of it.
    pub glint_gray: u8,

    pub eye_row_frac: f64,
    pub right_eye_col_frac: f64,
    pub left_eye_col_frac: f64,
    pub eye_half_width_frac: f64,
    pub eye_half_height_frac: f64,

    /// Rows between the eye center and the top of the eyebrow bar.
    pub brow_lift_frac: f64,
    pub brow_height_frac: f64,
    pub brow_half_width_frac: f64,

    pub nose_center_col_frac: f64,
    pub nose_top_row_frac: f64,
    pub nose_bottom_row_frac: f64,
    pub nose_top_half_width_frac: f64,
    pub nose_bottom_half_width_frac: f64,
    pub nostril_row_frac: f64,
    pub nostril_offset_frac: f64,
    /// Nostril dot radius in pixels.
    pub nostril_radius: usize,

    pub lip_row_frac: f64,
    pub lip_half_width_frac: f64,
    pub lip_half_height_frac: f64,

    /// Additive uniform noise amplitude in gray levels; 0 disables noise.
    pub noise_amplitude: u8,
    pub seed: u64,
}

impl Default for FixtureParams {
    fn default() -> Self {
        // The layout keeps eyes and eyebrows outside the nose's column span
        // and starts the nose wedge at eyebrow height, so the nose's
        // first-populated-row upper boundary lands on the drawn wedge.
        Self {
            width: 200,
            height_frac: 1.25,
            skin_gray: 100,
            feature_gray: 8,
            nose_gray: 60,
            lip_gray: 30,
            glint_gray: 255,
            eye_row_frac: 0.52,
            right_eye_col_frac: 0.30,
            left_eye_col_frac: 0.70,
            eye_half_width_frac: 0.05,
            eye_half_height_frac: 0.05,
            brow_lift_frac: 0.13,
            brow_height_frac: 0.03,
            brow_half_width_frac: 0.05,
            nose_center_col_frac: 0.50,
            nose_top_row_frac: 0.39,
            nose_bottom_row_frac: 0.89,
            nose_top_half_width_frac: 0.025,
            nose_bottom_half_width_frac: 0.125,
            nostril_row_frac: 0.855,
            nostril_offset_frac: 0.035,
            nostril_radius: 2,
            lip_row_frac: 1.05,
            lip_half_width_frac: 0.20,
            lip_half_height_frac: 0.06,
            noise_amplitude: 4,
            seed: 7,
        }
    }
}

/// Ground-truth boxes of a generated face plus the drawn nostril center row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixtureTruth {
    pub right_eye: RegionBox,
    pub left_eye: RegionBox,
    pub right_eyebrow: RegionBox,
    pub left_eyebrow: RegionBox,
    pub nose: RegionBox,
    pub lip: RegionBox,
    pub nostril_row: usize,
}

impl FixtureTruth {
    pub fn get(&self, kind: ComponentKind) -> RegionBox {
        match kind {
            ComponentKind::RightEye => self.right_eye,
            ComponentKind::LeftEye => self.left_eye,
            ComponentKind::RightEyebrow => self.right_eyebrow,
            ComponentKind::LeftEyebrow => self.left_eyebrow,
            ComponentKind::Nose => self.nose,
            ComponentKind::Lip => self.lip,
        }
    }
}

/// Pixel-space layout derived from the fractional parameters.
struct Layout {
    height: usize,
    eye_row: i64,
    right_eye_col: i64,
    left_eye_col: i64,
    eye_a: i64,
    eye_b: i64,
    brow_top: i64,
    brow_bottom: i64,
    brow_hw: i64,
    nose_center: i64,
    nose_top: i64,
    nose_bottom: i64,
    nose_hw_top: i64,
    nose_hw_bottom: i64,
    nostril_row: i64,
    nostril_offset: i64,
    lip_row: i64,
    lip_center: i64,
    lip_a: i64,
    lip_b: i64,
    truth: FixtureTruth,
}

impl FixtureParams {
    fn layout(&self) -> Result<Layout> {
        let w = self.width as f64;
        let px = |frac: f64| round_half_up(frac * w);

        if self.width < 40 {
            return Err(Error::InvalidInput(format!(
                "fixture width {} below minimum 40",
                self.width
            )));
        }
        let height = px(self.height_frac);
        if height < 1 {
            return Err(Error::InvalidInput("fixture height rounds to zero".into()));
        }

        let eye_row = px(self.eye_row_frac);
        let right_eye_col = px(self.right_eye_col_frac);
        let left_eye_col = px(self.left_eye_col_frac);
        let eye_a = px(self.eye_half_width_frac);
        let eye_b = px(self.eye_half_height_frac);
        let brow_top = eye_row - px(self.brow_lift_frac);
        let brow_bottom = brow_top + px(self.brow_height_frac);
        let brow_hw = px(self.brow_half_width_frac);
        let nose_center = px(self.nose_center_col_frac);
        let nose_top = px(self.nose_top_row_frac);
        let nose_bottom = px(self.nose_bottom_row_frac);
        let nose_hw_top = px(self.nose_top_half_width_frac);
        let nose_hw_bottom = px(self.nose_bottom_half_width_frac);
        let nostril_row = px(self.nostril_row_frac);
        let nostril_offset = px(self.nostril_offset_frac);
        let lip_row = px(self.lip_row_frac);
        let lip_center = nose_center;
        let lip_a = px(self.lip_half_width_frac);
        let lip_b = px(self.lip_half_height_frac);

        for (name, v) in [
            ("eye half width", eye_a),
            ("eye half height", eye_b),
            ("eyebrow half width", brow_hw),
            ("nose half width", nose_hw_bottom),
            ("lip half width", lip_a),
            ("lip half height", lip_b),
        ] {
            if v < 1 {
                return Err(Error::InvalidInput(format!("{name} rounds to zero")));
            }
        }

        let truth = FixtureTruth {
            right_eye: RegionBox::new(
                eye_row - eye_b,
                right_eye_col - eye_a,
                eye_row + eye_b,
                right_eye_col + eye_a,
            ),
            left_eye: RegionBox::new(
                eye_row - eye_b,
                left_eye_col - eye_a,
                eye_row + eye_b,
                left_eye_col + eye_a,
            ),
            right_eyebrow: RegionBox::new(
                brow_top,
                right_eye_col - brow_hw,
                brow_bottom,
                right_eye_col + brow_hw,
            ),
            left_eyebrow: RegionBox::new(
                brow_top,
                left_eye_col - brow_hw,
                brow_bottom,
                left_eye_col + brow_hw,
            ),
            nose: RegionBox::new(
                nose_top,
                nose_center - nose_hw_bottom,
                nose_bottom,
                nose_center + nose_hw_bottom,
            ),
            lip: RegionBox::new(
                lip_row - lip_b,
                lip_center - lip_a,
                lip_row + lip_b,
                lip_center + lip_a,
            ),
            nostril_row: nostril_row.max(0) as usize,
        };

        // Every component fully on the raster.
        let raster = RegionBox::new(0, 0, height - 1, self.width as i64 - 1);
        for kind in ComponentKind::ALL {
            let b = truth.get(kind);
            if !raster.contains(&b) {
                return Err(Error::InvalidInput(format!(
                    "{kind} box (rows {}..{}, cols {}..{}) leaves the {}x{height} raster",
                    b.x1, b.x2, b.y1, b.y2, self.width
                )));
            }
        }
        // Components may not overlap.
        for (i, a) in ComponentKind::ALL.iter().enumerate() {
            for b in &ComponentKind::ALL[i + 1..] {
                if truth.get(*a).intersects(&truth.get(*b)) {
                    return Err(Error::InvalidInput(format!(
                        "{a} and {b} truth boxes overlap"
                    )));
                }
            }
        }
        // Eyes symmetric about the vertical midline (within 4% of W).
        let midline_err = (right_eye_col + left_eye_col - (self.width as i64 - 1)).abs();
        if midline_err > px(0.04) {
            return Err(Error::InvalidInput(format!(
                "eyes asymmetric about the midline by {midline_err} px"
            )));
        }
        // Nostril dots inside the nose box.
        let rad = self.nostril_radius as i64;
        let dots = RegionBox::new(
            nostril_row - rad,
            nose_center - nostril_offset - rad,
            nostril_row + rad,
            nose_center + nostril_offset + rad,
        );
        if !truth.nose.contains(&dots) {
            return Err(Error::InvalidInput(
                "nostril dots leave the nose box".into(),
            ));
        }

        Ok(Layout {
            height: height as usize,
            eye_row,
            right_eye_col,
            left_eye_col,
            eye_a,
            eye_b,
            brow_top,
            brow_bottom,
            brow_hw,
            nose_center,
            nose_top,
            nose_bottom,
            nose_hw_top,
            nose_hw_bottom,
            nostril_row,
            nostril_offset,
            lip_row,
            lip_center,
            lip_a,
            lip_b,
            truth,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.layout().map(|_| ())
    }
}

fn fill_rect(img: &mut RasterRgb, x1: i64, y1: i64, x2: i64, y2: i64, v: u8) {
    for row in x1.max(0)..=x2.min(img.height() as i64 - 1) {
        for col in y1.max(0)..=y2.min(img.width() as i64 - 1) {
            img.set(row as usize, col as usize, [v, v, v]);
        }
    }
}

fn fill_ellipse(img: &mut RasterRgb, center_row: i64, center_col: i64, a: i64, b: i64, v: u8) {
    for row in (center_row - b).max(0)..=(center_row + b).min(img.height() as i64 - 1) {
        for col in (center_col - a).max(0)..=(center_col + a).min(img.width() as i64 - 1) {
            let dy = (row - center_row) as f64 / b as f64;
            let dx = (col - center_col) as f64 / a as f64;
            if dx * dx + dy * dy <= 1.0 {
                img.set(row as usize, col as usize, [v, v, v]);
            }
        }
    }
}

fn fill_disc(img: &mut RasterRgb, center_row: i64, center_col: i64, radius: i64, v: u8) {
    for row in (center_row - radius).max(0)..=(center_row + radius).min(img.height() as i64 - 1) {
        for col in
            (center_col - radius).max(0)..=(center_col + radius).min(img.width() as i64 - 1)
        {
            let dr = row - center_row;
            let dc = col - center_col;
            if dr * dr + dc * dc <= radius * radius {
                img.set(row as usize, col as usize, [v, v, v]);
            }
        }
    }
}

/// Generates a face and its ground truth. Deterministic in the parameters:
/// equal params (including seed) produce bit-identical output.
pub fn gen_face(params: &FixtureParams) -> Result<(RasterRgb, FixtureTruth)> {
    let l = params.layout()?;
    let mut img = RasterRgb::filled(params.width, l.height, [params.skin_gray; 3])?;

    // Nose: widening wedge from the top half-width to the bottom one.
    let span = (l.nose_bottom - l.nose_top).max(1) as f64;
    for row in l.nose_top..=l.nose_bottom {
        let t = (row - l.nose_top) as f64 / span;
        let hw = round_half_up(l.nose_hw_top as f64 + (l.nose_hw_bottom - l.nose_hw_top) as f64 * t);
        fill_rect(&mut img, row, l.nose_center - hw, row, l.nose_center + hw, params.nose_gray);
    }
    for side in [-1, 1] {
        fill_disc(
            &mut img,
            l.nostril_row,
            l.nose_center + side * l.nostril_offset,
            params.nostril_radius as i64,
            0,
        );
    }

    for col in [l.right_eye_col, l.left_eye_col] {
        fill_rect(
            &mut img,
            l.brow_top,
            col - l.brow_hw,
            l.brow_bottom,
            col + l.brow_hw,
            params.feature_gray,
        );
        fill_ellipse(&mut img, l.eye_row, col, l.eye_a, l.eye_b, params.feature_gray);
        // Glint run centered on the eye row: the strongest horizontal
        // contrast in each half, anchoring the geometry scan. Wide fixtures
        // get a taller glint so it survives nearest-neighbor downsampling.
        let g = round_half_up(0.01 * params.width as f64)
            .max(2)
            .min(l.eye_a - 1)
            .max(0);
        let gv = (params.width / 320) as i64;
        fill_rect(
            &mut img,
            l.eye_row - gv,
            col - g,
            l.eye_row + gv,
            col + g,
            params.glint_gray,
        );
    }

    fill_ellipse(&mut img, l.lip_row, l.lip_center, l.lip_a, l.lip_b, params.lip_gray);

    if params.noise_amplitude > 0 {
        let mut rng = XorShift64Star::new(params.seed);
        for row in 0..img.height() {
            for col in 0..img.width() {
                let d = rng.delta(params.noise_amplitude);
                let v = img.get(row, col)[0];
                let noisy = (i16::from(v) + d).clamp(0, 255) as u8;
                img.set(row, col, [noisy, noisy, noisy]);
            }
        }
    }

    Ok((img, l.truth))
}

/// Serializes a truth record with the same TSV conventions as the component
/// manifest: a version header, one `kind x1 y1 x2 y2` line per component,
/// then the nostril row.
pub fn truth_to_tsv(truth: &FixtureTruth) -> String {
    let mut out = String::from("fasy-truth 1\n");
    for kind in ComponentKind::ALL {
        let b = truth.get(kind);
        out.push_str(&format!("{kind}\t{}\t{}\t{}\t{}\n", b.x1, b.y1, b.x2, b.y2));
    }
    out.push_str(&format!("nostril_row\t{}\n", truth.nostril_row));
    out
}

/// Parses [`truth_to_tsv`] output.
pub fn truth_from_tsv(content: &str) -> Result<FixtureTruth> {
    let bad = |reason: String| Error::InvalidInput(format!("truth file: {reason}"));
    let mut lines = content.lines();
    if lines.next() != Some("fasy-truth 1") {
        return Err(bad("missing header".into()));
    }
    let mut boxes = [None; 6];
    let mut nostril_row = None;
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields[0] == "nostril_row" {
            if fields.len() != 2 {
                return Err(bad("malformed nostril_row line".into()));
            }
            nostril_row = Some(
                fields[1]
                    .parse()
                    .map_err(|_| bad(format!("bad nostril row '{}'", fields[1])))?,
            );
            continue;
        }
        if fields.len() != 5 {
            return Err(bad(format!("expected 5 fields, found {}", fields.len())));
        }
        let kind: ComponentKind = fields[0]
            .parse()
            .map_err(|_| bad(format!("unknown kind '{}'", fields[0])))?;
        let mut coords = [0i64; 4];
        for (slot, field) in coords.iter_mut().zip(&fields[1..]) {
            *slot = field
                .parse()
                .map_err(|_| bad(format!("bad coordinate '{field}'")))?;
        }
        let idx = ComponentKind::ALL.iter().position(|k| *k == kind).unwrap();
        boxes[idx] = Some(RegionBox::new(coords[0], coords[1], coords[2], coords[3]));
    }
    let take = |kind: ComponentKind| {
        let idx = ComponentKind::ALL.iter().position(|k| *k == kind).unwrap();
        boxes[idx].ok_or_else(|| bad(format!("missing {kind} box")))
    };
    Ok(FixtureTruth {
        right_eye: take(ComponentKind::RightEye)?,
        left_eye: take(ComponentKind::LeftEye)?,
        right_eyebrow: take(ComponentKind::RightEyebrow)?,
        left_eyebrow: take(ComponentKind::LeftEyebrow)?,
        nose: take(ComponentKind::Nose)?,
        lip: take(ComponentKind::Lip)?,
        nostril_row: nostril_row.ok_or_else(|| bad("missing nostril_row".into()))?,
    })
}

/// Uniform jitter amplitudes applied to fixture positions and sizes, as
/// fractions of the face width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterSpec {
    pub position_frac: f64,
    pub size_frac: f64,
}

impl Default for JitterSpec {
    fn default() -> Self {
        Self {
            position_frac: 0.01,
            size_frac: 0.005,
        }
    }
}

/// Stream separator so jitter draws never reuse the face-noise sequence.
const JITTER_STREAM: u64 = 0x6A09_E667_F3BC_C909;

fn jittered(base: &FixtureParams, seed: u64, jitter: &JitterSpec) -> FixtureParams {
    let mut rng = XorShift64Star::new(seed ^ JITTER_STREAM);
    let mut params = base.clone();
    params.seed = seed;

    let p = jitter.position_frac;
    let s = jitter.size_frac;
    params.eye_row_frac += rng.jitter(p);
    // One symmetric draw for the eye columns keeps the midline invariant.
    let dx = rng.jitter(p);
    params.right_eye_col_frac += dx;
    params.left_eye_col_frac -= dx;
    params.brow_lift_frac += rng.jitter(p);
    params.nose_top_row_frac += rng.jitter(p);
    params.nose_bottom_row_frac += rng.jitter(p);
    params.nostril_row_frac += rng.jitter(p);
    params.lip_row_frac += rng.jitter(p);

    params.eye_half_width_frac += rng.jitter(s);
    params.eye_half_height_frac += rng.jitter(s);
    params.brow_half_width_frac += rng.jitter(s);
    params.brow_height_frac += rng.jitter(s);
    params.nose_bottom_half_width_frac += rng.jitter(s);
    params.lip_half_width_frac += rng.jitter(s);
    params.lip_half_height_frac += rng.jitter(s);
    params
}

/// Generates `n` fixtures with seeds `base.seed .. base.seed + n`, each with
/// positions and sizes jittered within `jitter`. A jittered sample that
/// violates the layout invariants is rejected with a message naming it.
pub fn gen_suite(
    n: usize,
    base: &FixtureParams,
    jitter: &JitterSpec,
) -> Result<Vec<(RasterRgb, FixtureTruth)>> {
    if n == 0 {
        return Err(Error::InvalidInput("suite size must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let seed = base.seed.wrapping_add(i as u64);
        let params = jittered(base, seed, jitter);
        let pair = gen_face(&params).map_err(|e| {
            Error::InvalidInput(format!("fixture {i} (seed {seed}) rejected: {e}"))
        })?;
        out.push(pair);
    }
    Ok(out)
}
