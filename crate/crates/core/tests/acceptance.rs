//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one pass/fail line (visible with `--nocapture`).

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use fasy::analyze::{size_pct, SizeClass};
use fasy::edges::{canny, edge_projection_profiles, CannyParams};
use fasy::extract::{bbox_from_edges, extract_all, BoundaryPolicy, ExtractConfig};
use fasy::fixtures::{gen_suite, FixtureParams, JitterSpec, XorShift64Star};
use fasy::geometry::{max_diff_row, predict_region, ComponentKind, FaceGeometry, RegionBox};
use fasy::raster::{
    binarize_otsu, fuzzy_v_binarize, median_filter, round_trip_probe_unused, FuzzyParams,
    RasterBinary, RasterGray, ValuePlane,
};
use fasy::store::{self, ComponentQuery, ComponentRecord};

fn pass(n: usize, name: &str) {
    println!("criterion {n} ({name}): PASS");
}

/// Table of published width/height percentages per component, three faces.
const TABLE: [[(f64, f64); 3]; 3] = [
    // (width, height) for eye, nose, lip.
    [(54.16, 41.66), (51.85, 55.31), (49.37, 50.00)],
    [(48.61, 63.88), (43.75, 48.57), (44.16, 34.21)],
    [(52.08, 41.66), (53.70, 48.40), (51.87, 51.92)],
];

const FRACTIONS: [(f64, f64); 3] = [(0.24, 0.12), (0.27, 0.47), (0.40, 0.13)];

#[test]
fn criterion_1_table_round_trip() {
    let start = Instant::now();
    let w = 200.0;
    for face in TABLE {
        for (component, (width_pct, height_pct)) in face.iter().enumerate() {
            let (fw, fh) = FRACTIONS[component];
            let cw = w * (fw + (width_pct - 50.0) / 50.0);
            let ch = w * (fh + (height_pct - 50.0) / 50.0);
            let got_w = size_pct(w, cw, fw).unwrap();
            let got_h = size_pct(w, ch, fh).unwrap();
            assert!(
                (got_w - width_pct).abs() <= 0.01,
                "width: {got_w} vs {width_pct}"
            );
            assert!(
                (got_h - height_pct).abs() <= 0.01,
                "height: {got_h} vs {height_pct}"
            );
        }
    }
    assert!(start.elapsed().as_secs_f64() < 1.0, "round trip too slow");
    pass(1, "table round-trip within 0.01");
}

#[test]
fn criterion_2_neutral_point() {
    for w in [40.0f64, 120.0, 200.0, 333.0, 400.0] {
        for f in [0.24, 0.27, 0.40] {
            let pct = size_pct(w, w * f, f).unwrap();
            assert!((pct - 50.0).abs() <= 1e-9, "pct {pct} at w={w} f={f}");
        }
    }
    pass(2, "nominal span scores exactly 50.00");
}

#[test]
fn criterion_3_fixture_extraction_suite() {
    let base = FixtureParams {
        seed: 1,
        noise_amplitude: 8,
        ..FixtureParams::default()
    };
    let suite = gen_suite(20, &base, &JitterSpec::default()).unwrap();
    let config = ExtractConfig::default();

    let mut fully_ok = 0;
    let mut times = Vec::new();
    for (face, truth) in &suite {
        let start = Instant::now();
        let batch = extract_all(face, &config, None).unwrap();
        times.push(start.elapsed().as_secs_f64());

        let mut face_ok = true;
        for (kind, outcome) in &batch.outcomes {
            match outcome {
                Ok(result) => {
                    let iou = result.exact.iou(&truth.get(*kind));
                    assert!(
                        iou >= 0.5,
                        "{kind}: successful extraction with IoU {iou:.3} < 0.5"
                    );
                }
                Err(_) => face_ok = false,
            }
        }
        if face_ok {
            fully_ok += 1;
        }
    }
    assert!(fully_ok >= 16, "only {fully_ok}/20 faces fully extracted");

    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = times[times.len() / 2];
    assert!(median < 2.0, "median per-face time {median:.3}s");
    pass(3, "20-face suite: all-six on >= 16 faces, IoU >= 0.5, median < 2 s");
}

fn median_oracle(img: &RasterGray, radius: usize) -> RasterGray {
    // Counting-sort selection, shrink-at-border windows, lower median.
    let (w, h) = (img.width(), img.height());
    let mut out = Vec::with_capacity(w * h);
    for row in 0..h {
        for col in 0..w {
            let mut hist = [0usize; 256];
            let mut count = 0usize;
            for r in row.saturating_sub(radius)..=(row + radius).min(h - 1) {
                for c in col.saturating_sub(radius)..=(col + radius).min(w - 1) {
                    hist[img.get(r, c) as usize] += 1;
                    count += 1;
                }
            }
            let target = (count - 1) / 2;
            let mut seen = 0usize;
            let mut median = 0u8;
            for (value, &n) in hist.iter().enumerate() {
                seen += n;
                if seen > target {
                    median = value as u8;
                    break;
                }
            }
            out.push(median);
        }
    }
    RasterGray::new(w, h, out).unwrap()
}

fn otsu_oracle(img: &RasterGray) -> RasterBinary {
    // Exhaustive threshold sweep with direct recomputation per threshold.
    let mut best: Option<(f64, u8)> = None;
    for t in 0..=255u8 {
        let (mut n0, mut n1, mut s0, mut s1) = (0u64, 0u64, 0u64, 0u64);
        for &v in img.pixels() {
            if v <= t {
                n0 += 1;
                s0 += u64::from(v);
            } else {
                n1 += 1;
                s1 += u64::from(v);
            }
        }
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let mu0 = s0 as f64 / n0 as f64;
        let mu1 = s1 as f64 / n1 as f64;
        let var = n0 as f64 * n1 as f64 * (mu0 - mu1) * (mu0 - mu1);
        if var > 0.0 && best.map_or(true, |(bv, _)| var > bv) {
            best = Some((var, t));
        }
    }
    let data = match best {
        Some((_, t)) => img.pixels().iter().map(|&v| u8::from(v <= t)).collect(),
        None => vec![0; img.pixels().len()],
    };
    RasterBinary::new(img.width(), img.height(), data).unwrap()
}

fn max_diff_row_oracle(img: &RasterGray) -> usize {
    let mut entries = Vec::new();
    for row in 0..img.height() {
        for col in 0..img.width() - 1 {
            let d = (i32::from(img.get(row, col)) - i32::from(img.get(row, col + 1))).abs();
            entries.push((d, row, col));
        }
    }
    entries.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    entries[0].1
}

fn bbox_oracle(edges: &RasterBinary, policy: &BoundaryPolicy) -> Option<RegionBox> {
    let mut x1 = None;
    let mut x2 = None;
    let mut y1 = None;
    let mut y2 = None;
    for row in 0..edges.height() {
        let count = (0..edges.width()).filter(|&c| edges.get(row, c) == 1).count();
        if count >= policy.min_row_count {
            x1.get_or_insert(row);
            x2 = Some(row);
        }
    }
    for col in 0..edges.width() {
        let count = (0..edges.height()).filter(|&r| edges.get(r, col) == 1).count();
        if count >= policy.min_col_count {
            y1.get_or_insert(col);
            y2 = Some(col);
        }
    }
    match (x1, y1, x2, y2) {
        (Some(x1), Some(y1), Some(x2), Some(y2)) => Some(RegionBox::new(
            x1 as i64, y1 as i64, x2 as i64, y2 as i64,
        )),
        _ => None,
    }
}

fn random_gray(rng: &mut XorShift64Star, w: usize, h: usize, bimodal: bool) -> RasterGray {
    let data: Vec<u8> = (0..w * h)
        .map(|_| {
            let r = rng.next_u64();
            if bimodal {
                if r & 1 == 0 {
                    20 + ((r >> 8) % 30) as u8
                } else {
                    180 + ((r >> 8) % 40) as u8
                }
            } else {
                (r >> 56) as u8
            }
        })
        .collect();
    RasterGray::new(w, h, data).unwrap()
}

#[test]
fn criterion_4_oracle_equivalence() {
    let mut rng = XorShift64Star::new(0x0A11_5EED);

    for case in 0..120 {
        let w = 3 + (rng.next_u64() % 12) as usize;
        let h = 3 + (rng.next_u64() % 12) as usize;
        let radius = if w.max(h) >= 5 && rng.next_u64() % 3 == 0 { 2 } else { 1 };
        let img = random_gray(&mut rng, w, h, false);
        assert_eq!(
            median_filter(&img, radius).unwrap(),
            median_oracle(&img, radius),
            "median mismatch on case {case}"
        );
    }

    for case in 0..120 {
        let w = 2 + (rng.next_u64() % 15) as usize;
        let h = 2 + (rng.next_u64() % 15) as usize;
        let img = random_gray(&mut rng, w, h, case % 2 == 0);
        assert_eq!(
            binarize_otsu(&img),
            otsu_oracle(&img),
            "otsu mismatch on case {case}"
        );
    }

    for case in 0..120 {
        let w = 2 + (rng.next_u64() % 19) as usize;
        let h = 1 + (rng.next_u64() % 19) as usize;
        let img = random_gray(&mut rng, w, h, false);
        assert_eq!(
            max_diff_row(&img).unwrap(),
            max_diff_row_oracle(&img),
            "max-diff-row mismatch on case {case}"
        );
    }

    for case in 0..120 {
        let w = 2 + (rng.next_u64() % 14) as usize;
        let h = 2 + (rng.next_u64() % 14) as usize;
        let data: Vec<u8> = (0..w * h).map(|_| (rng.next_u64() % 5 == 0) as u8).collect();
        let edges = RasterBinary::new(w, h, data).unwrap();
        let policy = BoundaryPolicy {
            min_row_count: 1 + (rng.next_u64() % 3) as usize,
            min_col_count: 1 + (rng.next_u64() % 3) as usize,
            ..BoundaryPolicy::default()
        };
        let got = bbox_from_edges(&edges, &policy).ok();
        assert_eq!(got, bbox_oracle(&edges, &policy), "bbox mismatch on case {case}");
    }

    // Query vs linear-scan filter on a randomized database.
    let dir = tempfile::TempDir::new().unwrap();
    store::init(dir.path(), false).unwrap();
    let classes = [SizeClass::Small, SizeClass::Normal, SizeClass::Large];
    let pixmap = fasy::raster::RasterRgb::filled(2, 2, [5, 6, 7]).unwrap();
    let mut saved = Vec::new();
    for i in 0..60 {
        let kind = ComponentKind::ALL[(rng.next_u64() % 6) as usize];
        let rec = ComponentRecord {
            face_id: format!("face{i:03}"),
            kind,
            predicted: RegionBox::new(0, 0, 9, 9),
            exact: RegionBox::new(1, 1, 8, 8),
            width_pct: (rng.next_u64() % 10000) as f64 / 100.0,
            height_pct: (rng.next_u64() % 10000) as f64 / 100.0,
            width_class: classes[(rng.next_u64() % 3) as usize],
            height_class: classes[(rng.next_u64() % 3) as usize],
            pixmap_path: String::new(),
        };
        saved.push(store::save(dir.path(), &rec, &pixmap, false).unwrap());
    }
    for case in 0..120 {
        let query = ComponentQuery {
            kind: (rng.next_u64() % 2 == 0)
                .then(|| ComponentKind::ALL[(rng.next_u64() % 6) as usize]),
            width_class: (rng.next_u64() % 2 == 0)
                .then(|| classes[(rng.next_u64() % 3) as usize]),
            height_class: (rng.next_u64() % 2 == 0)
                .then(|| classes[(rng.next_u64() % 3) as usize]),
        };
        if query.validate().is_err() {
            continue;
        }
        let got = store::query(dir.path(), &query).unwrap();
        let mut expected: Vec<ComponentRecord> = saved
            .iter()
            .filter(|r| query.matches(r))
            .cloned()
            .collect();
        expected.sort_by(|a, b| a.face_id.cmp(&b.face_id).then(a.kind.cmp(&b.kind)));
        assert_eq!(got, expected, "query mismatch on case {case}");
    }

    pass(4, "median/otsu/max-diff/bbox/query match brute-force oracles");
}

#[test]
fn criterion_5_canny_sanity() {
    let params = CannyParams::default();

    // Constant images: zero edges.
    for v in [0u8, 127, 255] {
        let img = RasterGray::new(24, 24, vec![v; 576]).unwrap();
        assert_eq!(canny(&img, &params).unwrap().count_ones(), 0);
    }

    // Vertical step: edges confined to the step columns.
    let mut data = Vec::new();
    for _ in 0..32 {
        for col in 0..32 {
            data.push(if col < 16 { 0 } else { 255 });
        }
    }
    let step = RasterGray::new(32, 32, data).unwrap();
    let edges = canny(&step, &params).unwrap();
    assert!(edges.count_ones() > 0);
    let (_, cols) = edge_projection_profiles(&edges);
    let hit: Vec<usize> = (0..32).filter(|&c| cols[c] > 0).collect();
    assert!((1..=2).contains(&hit.len()), "edge columns {hit:?}");
    assert!(hit.iter().all(|c| (15..=16).contains(c)), "columns {hit:?}");

    // Raising the high quantile never adds edge pixels.
    let mut rng = XorShift64Star::new(0xCA99_5EED);
    for _ in 0..50 {
        let img = random_gray(&mut rng, 16, 16, false);
        let loose = canny(
            &img,
            &CannyParams {
                high_quantile: 0.55,
                ..params
            },
        )
        .unwrap();
        let tight = canny(
            &img,
            &CannyParams {
                high_quantile: 0.85,
                ..params
            },
        )
        .unwrap();
        for (t, l) in tight.pixels().iter().zip(loose.pixels()) {
            assert!(t <= l, "tightening the quantile added an edge");
        }
    }
    pass(5, "canny: flat images clean, step localized, quantile monotone");
}

#[test]
fn criterion_6_fuzzy_boundary() {
    let params = FuzzyParams::default();
    let values: Vec<f64> = (0..256).map(|k| k as f64 / 255.0).collect();
    let plane = ValuePlane::new(256, 1, values).unwrap();
    let mask = fuzzy_v_binarize(&plane, &params);

    // Band edges at P -/+ Q/sqrt(2): V in (0.0732.., 0.4267..), i.e. steps
    // 19..=108 on the 256-step ramp.
    let lower = 0.25 - 0.25 / 2f64.sqrt();
    let upper = 0.25 + 0.25 / 2f64.sqrt();
    let first_zero = mask.pixels().iter().position(|&c| c == 0).unwrap();
    let last_zero = mask.pixels().iter().rposition(|&c| c == 0).unwrap();
    assert!(
        (first_zero as f64 / 255.0 - lower).abs() <= 1.0 / 255.0,
        "lower transition at step {first_zero}"
    );
    assert!(
        (last_zero as f64 / 255.0 - upper).abs() <= 1.0 / 255.0,
        "upper transition at step {last_zero}"
    );
    // The pass band is contiguous.
    for k in first_zero..=last_zero {
        assert_eq!(mask.pixels()[k], 0, "hole in the pass band at {k}");
    }
    assert_eq!(first_zero, 19);
    assert_eq!(last_zero, 108);
    pass(6, "fuzzy pass band transitions at P +/- Q/sqrt(2)");
}

fn run_binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fasy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_all_pixmaps(db: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let components = db.join("components");
    for face_dir in std::fs::read_dir(&components).unwrap() {
        let face_dir = face_dir.unwrap().path();
        for file in std::fs::read_dir(&face_dir).unwrap() {
            let path = file.unwrap().path();
            files.push((
                path.strip_prefix(db).unwrap().display().to_string(),
                std::fs::read(&path).unwrap(),
            ));
        }
    }
    files.sort();
    files
}

#[test]
fn criterion_7_determinism_and_persistence() {
    let dir = tempfile::TempDir::new().unwrap();
    let faces = dir.path().join("faces");
    let out = run_binary(&[
        "synth",
        "--out",
        faces.to_str().unwrap(),
        "--suite",
        "5",
        "--seed",
        "1",
        "--noise",
        "4",
    ]);
    assert!(out.status.success(), "synth failed: {out:?}");

    let mut inputs: Vec<String> = (1..=5)
        .map(|s| faces.join(format!("face_{s}.ppm")).display().to_string())
        .collect();
    inputs.sort();

    let mut manifests = Vec::new();
    let mut reports = Vec::new();
    let mut pixmaps = Vec::new();
    for run in 0..2 {
        let db = dir.path().join(format!("db{run}"));
        let mut args = vec!["extract", "--db", db.to_str().unwrap(), "--keep-going"];
        args.extend(inputs.iter().map(String::as_str));
        let out = run_binary(&args);
        assert!(out.status.success(), "extract failed: {out:?}");

        manifests.push(std::fs::read(db.join("manifest.tsv")).unwrap());
        let report = run_binary(&["report", "--db", db.to_str().unwrap()]);
        assert!(report.status.success());
        reports.push(report.stdout);
        pixmaps.push(read_all_pixmaps(&db));
    }
    assert_eq!(manifests[0], manifests[1], "manifests differ between runs");
    assert_eq!(reports[0], reports[1], "reports differ between runs");
    assert_eq!(pixmaps[0], pixmaps[1], "pixmaps differ between runs");
    assert!(!pixmaps[0].is_empty());

    // Save/load identity on 1000 randomized records.
    let db = dir.path().join("bulk");
    store::init(&db, false).unwrap();
    let mut rng = XorShift64Star::new(0xB55D);
    let classes = [SizeClass::Small, SizeClass::Normal, SizeClass::Large];
    let pixmap = fasy::raster::RasterRgb::filled(3, 2, [9, 8, 7]).unwrap();
    let mut saved = Vec::with_capacity(1000);
    for i in 0..1000 {
        let rec = ComponentRecord {
            face_id: format!("bulk{i:04}"),
            kind: ComponentKind::ALL[(rng.next_u64() % 6) as usize],
            predicted: RegionBox::new(
                (rng.next_u64() % 50) as i64,
                (rng.next_u64() % 50) as i64,
                50 + (rng.next_u64() % 50) as i64,
                50 + (rng.next_u64() % 50) as i64,
            ),
            exact: RegionBox::new(
                (rng.next_u64() % 50) as i64,
                (rng.next_u64() % 50) as i64,
                50 + (rng.next_u64() % 50) as i64,
                50 + (rng.next_u64() % 50) as i64,
            ),
            width_pct: (rng.next_u64() % 100000) as f64 / 1000.0,
            height_pct: (rng.next_u64() % 100000) as f64 / 1000.0,
            width_class: classes[(rng.next_u64() % 3) as usize],
            height_class: classes[(rng.next_u64() % 3) as usize],
            pixmap_path: String::new(),
        };
        saved.push(store::save(&db, &rec, &pixmap, false).unwrap());
    }
    let loaded = store::load(&db).unwrap();
    assert_eq!(loaded.len(), 1000);
    assert_eq!(loaded, saved, "loaded records differ from saved ones");
    pass(7, "byte-identical reruns; 1000-record save/load identity");
}

#[test]
fn criterion_8_geometry_bounds() {
    let mut rng = XorShift64Star::new(0x6E0B_0B5D);
    // Anchored rounding, replicated independently of the library path.
    let half_up = |x: f64| (x + 0.5).floor() as i64;
    for sample in 0..10_000 {
        let w = 40 + (rng.next_u64() % 361) as usize;
        let h = 40 + (rng.next_u64() % 461) as usize;
        let mi_r = (rng.next_u64() % h as u64) as usize;
        let mi_l = (rng.next_u64() % h as u64) as usize;
        let nose_lx = (rng.next_u64() % h as u64) as usize;
        let geom = FaceGeometry {
            w,
            h,
            max_index_right: mi_r,
            max_index_left: mi_l,
            nose_lower_row: Some(nose_lx),
        };
        for kind in ComponentKind::ALL {
            let wf = w as f64;
            let (x1, rows, y1, cols) = match kind {
                ComponentKind::RightEye => {
                    (mi_r as f64 - 0.06 * wf, 0.12 * wf, 0.14 * wf, 0.36 * wf)
                }
                ComponentKind::LeftEye => {
                    (mi_l as f64 - 0.06 * wf, 0.12 * wf, 0.5 * wf, 0.45 * wf)
                }
                ComponentKind::RightEyebrow => {
                    (mi_r as f64 - 0.15 * wf, 0.15 * wf, 0.05 * wf, 0.45 * wf)
                }
                ComponentKind::LeftEyebrow => {
                    (mi_l as f64 - 0.15 * wf, 0.15 * wf, 0.5 * wf, 0.45 * wf)
                }
                ComponentKind::Nose => {
                    (mi_r as f64 - 0.15 * wf, 0.55 * wf, 0.32 * wf, 0.4 * wf)
                }
                ComponentKind::Lip => {
                    (nose_lx as f64 + 0.05 * wf, 0.25 * wf, 0.25 * wf, 0.5 * wf)
                }
            };
            let raw_x1 = half_up(x1);
            let raw_x2 = raw_x1 + half_up(rows);
            let raw_y1 = half_up(y1);
            let raw_y2 = raw_y1 + half_up(cols);
            let empty = raw_x2 < 0
                || raw_x1 > h as i64 - 1
                || raw_y2 < 0
                || raw_y1 > w as i64 - 1;

            match predict_region(kind, &geom) {
                Ok(b) => {
                    assert!(!empty, "sample {sample}: {kind} should have errored");
                    assert!(
                        b.x1 >= 0
                            && b.y1 >= 0
                            && b.x2 < h as i64
                            && b.y2 < w as i64
                            && b.x1 <= b.x2
                            && b.y1 <= b.y2,
                        "sample {sample}: {kind} out of bounds: {b:?} on {w}x{h}"
                    );
                }
                Err(_) => {
                    assert!(
                        empty,
                        "sample {sample}: {kind} errored on a non-empty clamp \
                         (raw rows {raw_x1}..{raw_x2}, cols {raw_y1}..{raw_y2}, raster {w}x{h})"
                    );
                }
            }
        }
    }
    pass(8, "10^4 randomized geometries: in-bounds or provably-empty error");
}
