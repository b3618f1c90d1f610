//! Binary netpbm I/O: P6 for RGB rasters, P5 for grayscale, maxval 255.
//!
//! The writers emit exactly `magic\nwidth height\n255\n` followed by raw
//! bytes so repeated runs are byte-identical. The readers accept any
//! whitespace-delimited header (no comments), which covers everything the
//! writers and common tools produce.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{RasterGray, RasterRgb};

fn parse_header(bytes: &[u8], magic: &str) -> Result<(usize, usize, usize)> {
    if bytes.len() < 2 || &bytes[..2] != magic.as_bytes() {
        return Err(Error::PnmParse(format!("missing {magic} magic")));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::PnmParse("truncated header".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::PnmParse("bad header field".into()))?;
    }
    // Exactly one whitespace byte separates the header from raster data.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::PnmParse("missing separator before raster data".into()));
    }
    pos += 1;
    let (w, h, maxval) = (fields[0], fields[1], fields[2]);
    if maxval != 255 {
        return Err(Error::PnmParse(format!("unsupported maxval {maxval}")));
    }
    if w == 0 || h == 0 {
        return Err(Error::PnmParse("zero dimension".into()));
    }
    Ok((w, h, pos))
}

/// Decodes a binary P6 image.
pub fn decode_ppm(bytes: &[u8]) -> Result<RasterRgb> {
    let (w, h, start) = parse_header(bytes, "P6")?;
    let need = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::PnmParse("dimensions overflow".into()))?;
    let data = &bytes[start..];
    if data.len() < need {
        return Err(Error::PnmParse(format!(
            "raster data truncated: need {need} bytes, have {}",
            data.len()
        )));
    }
    let pixels = data[..need]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    RasterRgb::new(w, h, pixels)
}

/// Decodes a binary P5 image.
pub fn decode_pgm(bytes: &[u8]) -> Result<RasterGray> {
    let (w, h, start) = parse_header(bytes, "P5")?;
    let need = w
        .checked_mul(h)
        .ok_or_else(|| Error::PnmParse("dimensions overflow".into()))?;
    let data = &bytes[start..];
    if data.len() < need {
        return Err(Error::PnmParse(format!(
            "raster data truncated: need {need} bytes, have {}",
            data.len()
        )));
    }
    RasterGray::new(w, h, data[..need].to_vec())
}

/// Encodes a binary P6 image.
pub fn encode_ppm(img: &RasterRgb) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    for px in img.pixels() {
        out.extend_from_slice(px);
    }
    out
}

/// Encodes a binary P5 image.
pub fn encode_pgm(img: &RasterGray) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn read_ppm(path: &Path) -> Result<RasterRgb> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_ppm(&bytes)
}

pub fn read_pgm(path: &Path) -> Result<RasterGray> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_pgm(&bytes)
}

pub fn write_ppm(path: &Path, img: &RasterRgb) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&encode_ppm(img))?;
    Ok(())
}

pub fn write_pgm(path: &Path, img: &RasterGray) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&encode_pgm(img))?;
    Ok(())
}
