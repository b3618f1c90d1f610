//! On-disk component database: P6 pixmaps under `components/<face>/` plus a
//! tab-separated manifest, one record per line.
//!
//! Manifest columns:
//! `face_id kind x1p y1p x2p y2p x1e y1e x2e y2e width_pct height_pct width_class height_class pixmap_path`
//! with percentages formatted to two decimals. The whole manifest is
//! rewritten through a temp file and renamed on every save, so a crash
//! leaves the previous manifest intact.
//!
//! Single writer, multiple readers: concurrent saves to one root are not
//! supported.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analyze::SizeClass;
use crate::error::{Error, Result};
use crate::geometry::{ComponentKind, RegionBox};
use crate::pnm;
use crate::raster::RasterRgb;

const MANIFEST_NAME: &str = "manifest.tsv";
const MANIFEST_HEADER: &str = "fasy-db 1";
const COMPONENTS_DIR: &str = "components";

/// One stored component: boxes, percentages, classes and the relative path
/// of its pixmap.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRecord {
    pub face_id: String,
    pub kind: ComponentKind,
    pub predicted: RegionBox,
    pub exact: RegionBox,
    pub width_pct: f64,
    pub height_pct: f64,
    pub width_class: SizeClass,
    pub height_class: SizeClass,
    pub pixmap_path: String,
}

/// Filter over stored records; at least one field must be set.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComponentQuery {
    pub kind: Option<ComponentKind>,
    pub width_class: Option<SizeClass>,
    pub height_class: Option<SizeClass>,
}

impl ComponentQuery {
    pub fn matches(&self, rec: &ComponentRecord) -> bool {
        self.kind.map_or(true, |k| rec.kind == k)
            && self.width_class.map_or(true, |c| rec.width_class == c)
            && self.height_class.map_or(true, |c| rec.height_class == c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.is_none() && self.width_class.is_none() && self.height_class.is_none() {
            return Err(Error::EmptyQuery);
        }
        Ok(())
    }
}

fn manifest_path(root: &Path) -> PathBuf {
    root.join(MANIFEST_NAME)
}

fn validate_face_id(face_id: &str) -> Result<()> {
    let ok = !face_id.is_empty()
        && face_id != "."
        && face_id != ".."
        && !face_id
            .chars()
            .any(|c| c == '/' || c == '\\' || c == '\t' || c == '\n' || c == '\r');
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "face id '{face_id}' not usable as a path component"
        )))
    }
}

/// Creates an empty database at `root`. With `exist_ok`, an already
/// initialized database is accepted unchanged; anything else non-empty is
/// refused.
pub fn init(root: &Path, exist_ok: bool) -> Result<()> {
    if root.exists() {
        if !root.is_dir() {
            return Err(Error::NotADatabase(root.to_path_buf()));
        }
        let initialized = manifest_path(root).is_file();
        if initialized {
            return if exist_ok {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!(
                    "'{}' is already a component database",
                    root.display()
                )))
            };
        }
        if root.read_dir()?.next().is_some() {
            return Err(Error::NotADatabase(root.to_path_buf()));
        }
    }
    std::fs::create_dir_all(root.join(COMPONENTS_DIR))?;
    write_manifest_atomically(root, &[])?;
    Ok(())
}

fn ensure_database(root: &Path) -> Result<()> {
    if manifest_path(root).is_file() {
        Ok(())
    } else {
        Err(Error::NotADatabase(root.to_path_buf()))
    }
}

fn format_record(rec: &ComponentRecord) -> String {
    let mut line = String::new();
    let p = &rec.predicted;
    let e = &rec.exact;
    let _ = write!(
        line,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.2}\t{:.2}\t{}\t{}\t{}",
        rec.face_id,
        rec.kind,
        p.x1,
        p.y1,
        p.x2,
        p.y2,
        e.x1,
        e.y1,
        e.x2,
        e.y2,
        rec.width_pct,
        rec.height_pct,
        rec.width_class,
        rec.height_class,
        rec.pixmap_path
    );
    line
}

fn parse_record(line: &str, line_no: usize) -> Result<ComponentRecord> {
    let corrupt = |reason: &str| Error::CorruptManifest {
        line: line_no,
        reason: reason.to_string(),
    };
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 15 {
        return Err(corrupt(&format!("expected 15 fields, found {}", fields.len())));
    }
    let int = |s: &str| -> Result<i64> {
        s.parse()
            .map_err(|_| corrupt(&format!("bad integer '{s}'")))
    };
    let pct = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| corrupt(&format!("bad percentage '{s}'")))
    };
    validate_face_id(fields[0]).map_err(|_| corrupt("bad face id"))?;
    Ok(ComponentRecord {
        face_id: fields[0].to_string(),
        kind: fields[1].parse().map_err(|_| corrupt("bad kind"))?,
        predicted: RegionBox::new(int(fields[2])?, int(fields[3])?, int(fields[4])?, int(fields[5])?),
        exact: RegionBox::new(int(fields[6])?, int(fields[7])?, int(fields[8])?, int(fields[9])?),
        width_pct: pct(fields[10])?,
        height_pct: pct(fields[11])?,
        width_class: fields[12].parse().map_err(|_| corrupt("bad width class"))?,
        height_class: fields[13].parse().map_err(|_| corrupt("bad height class"))?,
        pixmap_path: fields[14].to_string(),
    })
}

fn write_manifest_atomically(root: &Path, records: &[ComponentRecord]) -> Result<()> {
    let mut content = String::from(MANIFEST_HEADER);
    content.push('\n');
    for rec in records {
        content.push_str(&format_record(rec));
        content.push('\n');
    }
    let tmp = root.join(format!(".{MANIFEST_NAME}.tmp"));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, manifest_path(root))?;
    Ok(())
}

/// All records in manifest order.
pub fn load(root: &Path) -> Result<Vec<ComponentRecord>> {
    ensure_database(root)?;
    let content = std::fs::read_to_string(manifest_path(root))?;
    let mut lines = content.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == MANIFEST_HEADER => {}
        _ => return Err(Error::NotADatabase(root.to_path_buf())),
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        records.push(parse_record(line, idx + 1)?);
    }
    Ok(records)
}

/// Persists one component: writes the pixmap, canonicalizes the percentages
/// to their stored two-decimal form and rewrites the manifest atomically.
/// Returns the record as persisted.
pub fn save(
    root: &Path,
    rec: &ComponentRecord,
    pixels: &RasterRgb,
    overwrite: bool,
) -> Result<ComponentRecord> {
    ensure_database(root)?;
    validate_face_id(&rec.face_id)?;
    let mut records = load(root)?;
    let existing = records
        .iter()
        .position(|r| r.face_id == rec.face_id && r.kind == rec.kind);
    if existing.is_some() && !overwrite {
        return Err(Error::DuplicateRecord {
            face_id: rec.face_id.clone(),
            kind: rec.kind,
        });
    }

    let rel_path = format!("{COMPONENTS_DIR}/{}/{}.ppm", rec.face_id, rec.kind);
    let abs_path = root.join(&rel_path);
    std::fs::create_dir_all(abs_path.parent().expect("pixmap path has a parent"))?;
    pnm::write_ppm(&abs_path, pixels)?;

    let mut stored = rec.clone();
    stored.pixmap_path = rel_path;
    // Store the value the 2-decimal manifest field will parse back to.
    stored.width_pct = format!("{:.2}", rec.width_pct).parse().expect("2dp parse");
    stored.height_pct = format!("{:.2}", rec.height_pct).parse().expect("2dp parse");

    match existing {
        Some(i) => records[i] = stored.clone(),
        None => records.push(stored.clone()),
    }
    write_manifest_atomically(root, &records)?;
    Ok(stored)
}

/// Reads a stored pixmap back.
pub fn load_pixmap(root: &Path, rec: &ComponentRecord) -> Result<RasterRgb> {
    pnm::read_ppm(&root.join(&rec.pixmap_path))
}

/// Records matching every set query field, ordered by face id then kind.
pub fn query(root: &Path, q: &ComponentQuery) -> Result<Vec<ComponentRecord>> {
    q.validate()?;
    let mut matches: Vec<ComponentRecord> =
        load(root)?.into_iter().filter(|r| q.matches(r)).collect();
    matches.sort_by(|a, b| a.face_id.cmp(&b.face_id).then(a.kind.cmp(&b.kind)));
    Ok(matches)
}
