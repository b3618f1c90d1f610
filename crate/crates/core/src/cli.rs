//! Command-line workflow: batch extraction into a component database,
//! reporting, querying, database initialization and fixture synthesis.
//!
//! Exit codes: 0 all requested work done (per-component failures included
//! under `--keep-going`), 1 usage, 2 I/O, 3 extraction aborted without
//! `--keep-going`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analyze::{analyze_component, NominalFractions, SizeClass, SizeClassLimits};
use crate::edges::CannyParams;
use crate::error::Error;
use crate::extract::{extract_all, ExtractConfig, BoundaryPolicy, FaceTrace, StageImage};
use crate::fixtures::{gen_face, gen_suite, FixtureParams, JitterSpec};
use crate::geometry::{predict_region, ComponentKind, RegionBox};
use crate::pnm;
use crate::raster::{resize_to_width, FuzzyExponent, FuzzyParams, RasterGray, RasterRgb};
use crate::store::{self, ComponentQuery, ComponentRecord};

/// Box outline colors in annotated overlays.
const PREDICTED_COLOR: [u8; 3] = [0, 64, 255];
const EXACT_COLOR: [u8; 3] = [255, 32, 32];

#[derive(Debug, Parser)]
#[command(
    name = "fasy",
    version,
    about = "Extracts the six facial components from cropped face images, \
             scores their sizes and stores both in a component database"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract, analyze and store components of P6 face images.
    Extract(ExtractArgs),
    /// Print stored characteristics as a tab-separated table.
    Report(ReportArgs),
    /// Generate synthetic fixture faces with ground-truth files.
    Synth(SynthArgs),
    /// Create an empty component database.
    InitDb(InitDbArgs),
    /// List stored records matching the given filters.
    Query(QueryArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Input face images (binary P6, pre-cropped hair to chin).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,

    /// Component database root (initialized on first use).
    #[arg(long)]
    pub db: PathBuf,

    /// Face id for a single input; defaults to the file stem.
    #[arg(long)]
    pub face_id: Option<String>,

    /// Maximum face width; wider inputs are scaled down to this.
    #[arg(long, default_value_t = crate::raster::DEFAULT_MAX_WIDTH)]
    pub max_width: usize,

    /// Gaussian smoothing sigma for edge detection.
    #[arg(long, default_value_t = 1.4)]
    pub sigma: f64,

    /// Quantile of suppressed gradient magnitudes used as the high edge
    /// threshold.
    #[arg(long, default_value_t = 0.70)]
    pub high_quantile: f64,

    /// Low edge threshold as a fraction of the high one.
    #[arg(long, default_value_t = 0.40)]
    pub low_ratio: f64,

    /// Suppressed gradient magnitudes below this count as zero.
    #[arg(long, default_value_t = 30.0)]
    pub min_magnitude: f64,

    /// Fuzzy band center for eyebrow masking.
    #[arg(long, default_value_t = 0.25)]
    pub fuzzy_p: f64,

    /// Fuzzy band half-width for eyebrow masking.
    #[arg(long, default_value_t = 0.25)]
    pub fuzzy_q: f64,

    /// Use the literal membership exponent `1 - (V-P)/Q^2` instead of the
    /// ratio-squared form.
    #[arg(long)]
    pub fuzzy_literal_exponent: bool,

    /// Minimum edge pixels for a row to count as part of a component.
    #[arg(long, default_value_t = 2)]
    pub min_row_count: usize,

    /// Minimum edge pixels for a column to count as part of a component.
    #[arg(long, default_value_t = 2)]
    pub min_col_count: usize,

    /// Width fraction of the lower-nose bands searched for the nose sides.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub nose_band_fraction: f64,

    /// Nominal width fraction for eyes.
    #[arg(long, default_value_t = 0.24)]
    pub fw_eye: f64,
    /// Nominal height fraction for eyes.
    #[arg(long, default_value_t = 0.12)]
    pub fh_eye: f64,
    /// Nominal width fraction for the nose.
    #[arg(long, default_value_t = 0.27)]
    pub fw_nose: f64,
    /// Nominal height fraction for the nose.
    #[arg(long, default_value_t = 0.47)]
    pub fh_nose: f64,
    /// Nominal width fraction for the lip.
    #[arg(long, default_value_t = 0.40)]
    pub fw_lip: f64,
    /// Nominal height fraction for the lip.
    #[arg(long, default_value_t = 0.13)]
    pub fh_lip: f64,
    /// Nominal width fraction for eyebrows (artifact default).
    #[arg(long, default_value_t = 0.24)]
    pub fw_eyebrow: f64,
    /// Nominal height fraction for eyebrows (artifact default).
    #[arg(long, default_value_t = 0.05)]
    pub fh_eyebrow: f64,

    /// Percentages below this classify as small.
    #[arg(long, default_value_t = 40.0)]
    pub class_x: f64,
    /// Percentages above this classify as large.
    #[arg(long, default_value_t = 60.0)]
    pub class_y: f64,

    /// Replace records that already exist for a (face, component) pair.
    #[arg(long)]
    pub overwrite: bool,

    /// Keep processing after per-component failures and exit 0.
    #[arg(long)]
    pub keep_going: bool,

    /// Write an overlay image with predicted and exact boxes.
    #[arg(long)]
    pub annotate: bool,

    /// Write every pipeline intermediate under <db>/stages/<face>/.
    #[arg(long)]
    pub dump_stages: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Component database root.
    #[arg(long)]
    pub db: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory for fixture files.
    #[arg(long)]
    pub out: PathBuf,

    /// Base seed; suites use consecutive seeds from here.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Generate this many jittered fixtures instead of a single face.
    #[arg(long)]
    pub suite: Option<usize>,

    /// Face width in pixels.
    #[arg(long, default_value_t = 200)]
    pub width: usize,

    /// Additive uniform noise amplitude in gray levels.
    #[arg(long, default_value_t = 4)]
    pub noise: u8,

    /// Position jitter amplitude (fraction of width) for suites.
    #[arg(long, default_value_t = 0.01)]
    pub jitter_pos: f64,

    /// Size jitter amplitude (fraction of width) for suites.
    #[arg(long, default_value_t = 0.005)]
    pub jitter_size: f64,

    /// File name prefix.
    #[arg(long, default_value = "face_")]
    pub prefix: String,
}

#[derive(Debug, Args)]
pub struct InitDbArgs {
    /// Database root to create.
    pub path: PathBuf,

    /// Succeed silently when the database already exists.
    #[arg(long)]
    pub exist_ok: bool,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Component database root.
    #[arg(long)]
    pub db: PathBuf,

    /// Component kind filter (right_eye, left_eye, right_eyebrow,
    /// left_eyebrow, nose, lip).
    #[arg(long)]
    pub kind: Option<String>,

    /// Width class filter (small, normal, large).
    #[arg(long)]
    pub width_class: Option<String>,

    /// Height class filter (small, normal, large).
    #[arg(long)]
    pub height_class: Option<String>,
}

/// A command failure carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn aborted(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::InvalidInput(_) | Error::EmptyQuery => 1,
            _ => 2,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

pub type CliResult = std::result::Result<(), CliError>;

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Extract(args) => cmd_extract(&args),
        Command::Report(args) => cmd_report(&args),
        Command::Synth(args) => cmd_synth(&args),
        Command::InitDb(args) => cmd_init_db(&args),
        Command::Query(args) => cmd_query(&args),
    }
}

fn extract_config(args: &ExtractArgs) -> Result<ExtractConfig, CliError> {
    let config = ExtractConfig {
        canny: CannyParams {
            gaussian_sigma: args.sigma,
            high_quantile: args.high_quantile,
            low_ratio: args.low_ratio,
            min_magnitude: args.min_magnitude,
        },
        fuzzy: FuzzyParams {
            p: args.fuzzy_p,
            q: args.fuzzy_q,
            exponent: if args.fuzzy_literal_exponent {
                FuzzyExponent::RatioOverQSquared
            } else {
                FuzzyExponent::SquaredRatio
            },
        },
        policy: BoundaryPolicy {
            min_row_count: args.min_row_count,
            min_col_count: args.min_col_count,
            nose_band_fraction: args.nose_band_fraction,
        },
    };
    config.canny.validate().map_err(|e| CliError::usage(e.to_string()))?;
    config.fuzzy.validate().map_err(|e| CliError::usage(e.to_string()))?;
    config.policy.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(config)
}

fn fractions_and_limits(
    args: &ExtractArgs,
) -> Result<(NominalFractions, SizeClassLimits), CliError> {
    let fractions = NominalFractions {
        eye: (args.fw_eye, args.fh_eye),
        nose: (args.fw_nose, args.fh_nose),
        lip: (args.fw_lip, args.fh_lip),
        eyebrow: (args.fw_eyebrow, args.fh_eyebrow),
    };
    let limits = SizeClassLimits {
        x: args.class_x,
        y: args.class_y,
    };
    fractions.validate().map_err(|e| CliError::usage(e.to_string()))?;
    limits.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok((fractions, limits))
}

fn face_id_for(path: &Path, args: &ExtractArgs) -> Result<String, CliError> {
    if let Some(id) = &args.face_id {
        if args.inputs.len() > 1 {
            return Err(CliError::usage(
                "--face-id only applies to a single input",
            ));
        }
        return Ok(id.clone());
    }
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| CliError::usage(format!("cannot derive a face id from '{}'", path.display())))
}

fn draw_box(img: &mut RasterRgb, b: &RegionBox, color: [u8; 3]) {
    let Some(b) = b.clamp_to(img.width(), img.height()) else {
        return;
    };
    for col in b.y1..=b.y2 {
        img.set(b.x1 as usize, col as usize, color);
        img.set(b.x2 as usize, col as usize, color);
    }
    for row in b.x1..=b.x2 {
        img.set(row as usize, b.y1 as usize, color);
        img.set(row as usize, b.y2 as usize, color);
    }
}

fn binary_as_gray(img: &crate::raster::RasterBinary) -> RasterGray {
    let data = img.pixels().iter().map(|&v| v * 255).collect();
    RasterGray::new(img.width(), img.height(), data).expect("same dimensions")
}

fn dump_stages(db: &Path, face_id: &str, trace: &FaceTrace) -> Result<(), CliError> {
    let dir = db.join("stages").join(face_id);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(e.to_string()))?;
    for (kind, stages) in trace {
        for (name, image) in &stages.stages {
            let result = match image {
                StageImage::Rgb(img) => {
                    pnm::write_ppm(&dir.join(format!("{kind}_{name}.ppm")), img)
                }
                StageImage::Gray(img) => {
                    pnm::write_pgm(&dir.join(format!("{kind}_{name}.pgm")), img)
                }
                StageImage::Binary(img) => pnm::write_pgm(
                    &dir.join(format!("{kind}_{name}.pgm")),
                    &binary_as_gray(img),
                ),
            };
            result.map_err(CliError::from)?;
        }
    }
    Ok(())
}

pub fn cmd_extract(args: &ExtractArgs) -> CliResult {
    let config = extract_config(args)?;
    let (fractions, limits) = fractions_and_limits(args)?;
    store::init(&args.db, true).map_err(CliError::from)?;

    for input in &args.inputs {
        let face_id = face_id_for(input, args)?;
        let face = pnm::read_ppm(input)
            .map_err(|e| CliError::io(format!("cannot read '{}': {e}", input.display())))?;
        let face = resize_to_width(&face, args.max_width);

        let mut trace: FaceTrace = Vec::new();
        let trace_opt = args.dump_stages.then_some(&mut trace);
        let batch = extract_all(&face, &config, trace_opt).map_err(CliError::from)?;

        let mut ok = 0usize;
        let mut failures = Vec::new();
        for (kind, outcome) in &batch.outcomes {
            match outcome {
                Ok(result) => {
                    let ch = analyze_component(result, face.width(), &fractions, &limits)
                        .map_err(CliError::from)?;
                    let record = ComponentRecord {
                        face_id: face_id.clone(),
                        kind: *kind,
                        predicted: result.predicted,
                        exact: result.exact,
                        width_pct: ch.width_pct,
                        height_pct: ch.height_pct,
                        width_class: ch.width_class,
                        height_class: ch.height_class,
                        pixmap_path: String::new(),
                    };
                    store::save(&args.db, &record, &result.pixels, args.overwrite)
                        .map_err(CliError::from)?;
                    ok += 1;
                }
                Err(e) => failures.push((*kind, e.to_string())),
            }
        }

        if args.dump_stages {
            dump_stages(&args.db, &face_id, &trace)?;
        }
        if args.annotate {
            let mut overlay = face.clone();
            for kind in ComponentKind::ALL {
                if let Ok(predicted) = predict_region(kind, &batch.geometry) {
                    draw_box(&mut overlay, &predicted, PREDICTED_COLOR);
                }
            }
            for result in batch.successes() {
                draw_box(&mut overlay, &result.exact, EXACT_COLOR);
            }
            let dir = args.db.join("annotated");
            std::fs::create_dir_all(&dir).map_err(|e| CliError::io(e.to_string()))?;
            pnm::write_ppm(&dir.join(format!("{face_id}.ppm")), &overlay)
                .map_err(CliError::from)?;
        }

        println!("{face_id}\tok={ok}\tfailed={}", failures.len());
        for (kind, reason) in &failures {
            println!("{face_id}\t{kind}\tfailed\t{reason}");
        }
        if !failures.is_empty() && !args.keep_going {
            return Err(CliError::aborted(format!(
                "extraction aborted at '{face_id}' with {} component failure(s); \
                 pass --keep-going to continue",
                failures.len()
            )));
        }
    }
    Ok(())
}

pub fn cmd_report(args: &ReportArgs) -> CliResult {
    let mut records = store::load(&args.db).map_err(CliError::from)?;
    records.sort_by(|a, b| a.face_id.cmp(&b.face_id).then(a.kind.cmp(&b.kind)));
    println!("Face\tComponent\tWidth\tHeight");
    for rec in records {
        println!(
            "{}\t{}\t{:.2}\t{:.2}",
            rec.face_id, rec.kind, rec.width_pct, rec.height_pct
        );
    }
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> CliResult {
    let base = FixtureParams {
        width: args.width,
        noise_amplitude: args.noise,
        seed: args.seed,
        ..FixtureParams::default()
    };
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(e.to_string()))?;

    let faces = match args.suite {
        None => vec![gen_face(&base).map_err(CliError::from)?],
        Some(n) => {
            let jitter = JitterSpec {
                position_frac: args.jitter_pos,
                size_frac: args.jitter_size,
            };
            gen_suite(n, &base, &jitter).map_err(CliError::from)?
        }
    };

    for (i, (face, truth)) in faces.iter().enumerate() {
        let seed = args.seed.wrapping_add(i as u64);
        let stem = format!("{}{seed}", args.prefix);
        let img_path = args.out.join(format!("{stem}.ppm"));
        pnm::write_ppm(&img_path, face).map_err(CliError::from)?;
        let truth_path = args.out.join(format!("{stem}.truth.tsv"));
        std::fs::write(&truth_path, crate::fixtures::truth_to_tsv(truth))
            .map_err(|e| CliError::io(e.to_string()))?;
        println!("{}\t{}", img_path.display(), truth_path.display());
    }
    Ok(())
}

pub fn cmd_init_db(args: &InitDbArgs) -> CliResult {
    store::init(&args.path, args.exist_ok).map_err(CliError::from)?;
    println!("initialized {}", args.path.display());
    Ok(())
}

pub fn cmd_query(args: &QueryArgs) -> CliResult {
    let parse_class = |s: &Option<String>| -> Result<Option<SizeClass>, CliError> {
        s.as_deref()
            .map(|v| v.parse().map_err(|e: Error| CliError::usage(e.to_string())))
            .transpose()
    };
    let query = ComponentQuery {
        kind: args
            .kind
            .as_deref()
            .map(|v| v.parse().map_err(|e: Error| CliError::usage(e.to_string())))
            .transpose()?,
        width_class: parse_class(&args.width_class)?,
        height_class: parse_class(&args.height_class)?,
    };
    let records = store::query(&args.db, &query).map_err(CliError::from)?;
    for rec in &records {
        println!(
            "{}\t{}\t{:.2}\t{:.2}\t{}\t{}\t{}",
            rec.face_id,
            rec.kind,
            rec.width_pct,
            rec.height_pct,
            rec.width_class,
            rec.height_class,
            rec.pixmap_path
        );
    }
    Ok(())
}
