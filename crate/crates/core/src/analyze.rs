//! Component size characterization: width/height percentages relative to
//! nominal width fractions, and small/normal/large classification.
//!
//! A component spanning exactly its nominal fraction of the face width
//! scores 50; each percentage point is 1/50 of the face width. The
//! difference is normalized by W so the score is scale invariant.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::extract::ExtractionResult;
use crate::geometry::ComponentKind;

/// Nominal width/height fractions of the face width, per component.
///
/// The eyebrow pair is an artifact default, not an experimentally calibrated
/// value like the others; eyebrow percentages are reported on the same scale
/// but should be read accordingly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NominalFractions {
    pub eye: (f64, f64),
    pub nose: (f64, f64),
    pub lip: (f64, f64),
    pub eyebrow: (f64, f64),
}

impl Default for NominalFractions {
    fn default() -> Self {
        Self {
            eye: (0.24, 0.12),
            nose: (0.27, 0.47),
            lip: (0.40, 0.13),
            eyebrow: (0.24, 0.05),
        }
    }
}

impl NominalFractions {
    pub fn for_kind(&self, kind: ComponentKind) -> (f64, f64) {
        match kind {
            ComponentKind::RightEye | ComponentKind::LeftEye => self.eye,
            ComponentKind::Nose => self.nose,
            ComponentKind::Lip => self.lip,
            ComponentKind::RightEyebrow | ComponentKind::LeftEyebrow => self.eyebrow,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (fw, fh) in [self.eye, self.nose, self.lip, self.eyebrow] {
            if !(0.0 < fw && fw <= 1.0) || !(0.0 < fh && fh <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "nominal fractions must lie in (0, 1], got ({fw}, {fh})"
                )));
            }
        }
        Ok(())
    }
}

/// Percentage limits separating small, normal and large.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeClassLimits {
    pub x: f64,
    pub y: f64,
}

impl Default for SizeClassLimits {
    fn default() -> Self {
        Self { x: 40.0, y: 60.0 }
    }
}

impl SizeClassLimits {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.x && self.x <= self.y && self.y < 100.0) {
            return Err(Error::InvalidInput(format!(
                "size limits need 0 < x <= y < 100, got x={} y={}",
                self.x, self.y
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SizeClass {
    Small,
    Normal,
    Large,
}

impl SizeClass {
    pub fn token(&self) -> &'static str {
        match self {
            SizeClass::Small => "small",
            SizeClass::Normal => "normal",
            SizeClass::Large => "large",
        }
    }
}

impl fmt::Display for SizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for SizeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small" => Ok(SizeClass::Small),
            "normal" => Ok(SizeClass::Normal),
            "large" => Ok(SizeClass::Large),
            other => Err(Error::InvalidInput(format!("unknown size class '{other}'"))),
        }
    }
}

/// Width/height percentages and classes of one extracted component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Characteristics {
    pub kind: ComponentKind,
    pub width_pct: f64,
    pub height_pct: f64,
    pub width_class: SizeClass,
    pub height_class: SizeClass,
}

/// Size percentage of a `c`-pixel span against nominal fraction `f` of the
/// face width `w`: `50 + (c/w - f) * 50`. Equals 50 exactly when `c = w*f`.
pub fn size_pct(w: f64, c: f64, f: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::InvalidInput(format!(
            "face width must be positive, got {w}"
        )));
    }
    Ok(50.0 + (c / w - f) * 50.0)
}

/// Classifies a percentage: below `x` is small, `x..=y` is normal, above `y`
/// is large.
pub fn classify(pct: f64, limits: &SizeClassLimits) -> SizeClass {
    if pct < limits.x {
        SizeClass::Small
    } else if pct <= limits.y {
        SizeClass::Normal
    } else {
        SizeClass::Large
    }
}

/// Characterizes an extraction: spans come from the exact box, percentages
/// from [`size_pct`], classes from [`classify`].
pub fn analyze_component(
    result: &ExtractionResult,
    face_width: usize,
    fractions: &NominalFractions,
    limits: &SizeClassLimits,
) -> Result<Characteristics> {
    fractions.validate()?;
    limits.validate()?;
    let (fw, fh) = fractions.for_kind(result.kind);
    let cw = result.exact.width() as f64;
    let ch = result.exact.height() as f64;
    let width_pct = size_pct(face_width as f64, cw, fw)?;
    let height_pct = size_pct(face_width as f64, ch, fh)?;
    Ok(Characteristics {
        kind: result.kind,
        width_pct,
        height_pct,
        width_class: classify(width_pct, limits),
        height_class: classify(height_pct, limits),
    })
}
