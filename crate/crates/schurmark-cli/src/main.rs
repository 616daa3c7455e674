//! Command-line front end for the watermarking toolkit.
//!
//! Exit codes are pipeline-friendly: 0 success (and "detected" for the
//! detection commands), 2 usage or validation failure, 3 watermark not
//! detected, 1 internal numeric or i/o failure.

use clap::{Parser, Subcommand};
use schurmark::attack::{Attack, AttackSpec};
use schurmark::corpus::{corpus, default_mark, NamedImage};
use schurmark::harness::{run_full_report, run_median_sweep, run_qf_sweep, ReportConfig};
use schurmark::metrics::{correlation, psnr, DetectionResult, DEFAULT_THRESHOLD};
use schurmark::watermark::{embed, extract, AlphaSchedule, WatermarkError};
use schurmark::{read_key, read_pgm, write_key, write_key_json, write_pgm, GrayImage, KeyError};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_NOT_DETECTED: u8 = 3;

#[derive(Parser)]
#[command(name = "schurmark", version, about = "Image watermarking via a Schur factor added in the DCT domain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a mark image into a host image; writes the watermarked image and the detection key
    Embed {
        /// Host (cover) image, square PGM
        host: PathBuf,
        /// Mark image, PGM, same size as the host
        mark: PathBuf,
        /// Gain applied to every coefficient except the DC term
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        /// Gain applied to the DC coefficient
        #[arg(long = "alpha-dc", default_value_t = 0.03)]
        alpha_dc: f64,
        /// Output path for the watermarked PGM
        #[arg(long)]
        out: PathBuf,
        /// Output path for the key; a `.json` extension selects the JSON sidecar format
        #[arg(long)]
        key: PathBuf,
    },
    /// Extract the mark from a (possibly attacked) watermarked image
    Extract {
        /// Watermarked image, PGM
        image: PathBuf,
        /// Key file written by `embed`
        #[arg(long)]
        key: PathBuf,
        /// Output path for the extracted mark PGM
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply one attack to an image and echo the resolved attack spec
    Attack {
        /// Input image, PGM
        input: PathBuf,
        /// Output path for the attacked PGM
        #[arg(long)]
        out: PathBuf,
        /// Full attack spec as JSON, e.g. {"kind":"jpeg","params":{"qf":10}}
        #[arg(long, conflicts_with = "kind")]
        spec: Option<String>,
        /// Attack kind: jpeg, gaussian_noise, salt_pepper, median, histeq, crop_border, rotate, color_reduce
        #[arg(long = "type", required_unless_present = "spec")]
        kind: Option<String>,
        /// JPEG quality factor, 1..=100
        #[arg(long)]
        qf: Option<u32>,
        /// Gaussian noise variance on the unit pixel scale
        #[arg(long)]
        variance: Option<f64>,
        /// Salt-and-pepper flip probability, 0..=1
        #[arg(long)]
        density: Option<f64>,
        /// Median filter window, odd and >= 3
        #[arg(long)]
        window: Option<u64>,
        /// Border width to blank, in pixels
        #[arg(long)]
        border: Option<u64>,
        /// Rotation angle in degrees
        #[arg(long)]
        degrees: Option<f64>,
        /// Number of gray levels to keep, 2..=256
        #[arg(long)]
        levels: Option<u32>,
        /// Seed for the stochastic attacks
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Correlate an extracted mark against the original and decide detection
    Evaluate {
        /// Original mark, PGM
        mark: PathBuf,
        /// Extracted mark, PGM
        extracted: PathBuf,
        /// Detection threshold on the correlation
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Run the robustness benchmark described by a JSON config
    Bench {
        /// Benchmark config JSON
        #[arg(long)]
        config: PathBuf,
        /// Output path for the report JSON
        #[arg(long)]
        report: PathBuf,
        /// Directory for sweep CSVs
        #[arg(long = "csv-dir")]
        csv_dir: PathBuf,
    },
    /// Write the built-in synthetic corpus and default mark as PGM files
    Corpus {
        /// Directory to create the PGM files in
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
}

enum CliError {
    Usage(String),
    Internal(String),
}

impl CliError {
    fn report(self) -> ExitCode {
        match self {
            CliError::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            CliError::Internal(msg) => {
                eprintln!("internal error: {msg}");
                ExitCode::from(1)
            }
        }
    }
}

fn usage(e: impl Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn internal(e: impl Display) -> CliError {
    CliError::Internal(e.to_string())
}

/// Shape and gain problems are the caller's to fix; only an iteration
/// failure inside the decomposition counts as internal.
fn watermark_error(e: WatermarkError) -> CliError {
    match e {
        WatermarkError::Matrix(m) => CliError::Internal(m.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

fn read_image(path: &Path) -> Result<GrayImage, CliError> {
    read_pgm(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_image(path: &Path, img: &GrayImage) -> Result<(), CliError> {
    write_pgm(path, img).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => e.report(),
    }
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Embed { host, mark, alpha, alpha_dc, out, key } => {
            cmd_embed(&host, &mark, alpha, alpha_dc, &out, &key)
        }
        Command::Extract { image, key, out } => cmd_extract(&image, &key, &out),
        Command::Attack {
            input,
            out,
            spec,
            kind,
            qf,
            variance,
            density,
            window,
            border,
            degrees,
            levels,
            seed,
        } => {
            let flags = AttackFlags { qf, variance, density, window, border, degrees, levels };
            cmd_attack(&input, &out, spec.as_deref(), kind.as_deref(), &flags, seed)
        }
        Command::Evaluate { mark, extracted, threshold } => {
            cmd_evaluate(&mark, &extracted, threshold)
        }
        Command::Bench { config, report, csv_dir } => cmd_bench(&config, &report, &csv_dir),
        Command::Corpus { out_dir } => cmd_corpus(&out_dir),
    }
}

fn cmd_embed(
    host: &Path,
    mark: &Path,
    alpha: f64,
    alpha_dc: f64,
    out: &Path,
    key_path: &Path,
) -> Result<ExitCode, CliError> {
    let host_img = read_image(host)?;
    let mark_img = read_image(mark)?;
    let schedule = AlphaSchedule::new(alpha, alpha_dc).map_err(usage)?;
    let (wm, key) = embed(&host_img, &mark_img, schedule).map_err(watermark_error)?;
    write_image(out, &wm)?;
    let write_result = if key_path.extension().is_some_and(|e| e == "json") {
        write_key_json(key_path, &key)
    } else {
        write_key(key_path, &key)
    };
    write_result.map_err(|e| CliError::Internal(format!("{}: {e}", key_path.display())))?;
    let p = psnr(&host_img, &wm).map_err(internal)?;
    println!("psnr_db={p:?}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_extract(image: &Path, key_path: &Path, out: &Path) -> Result<ExitCode, CliError> {
    let img = read_image(image)?;
    let key = read_key(key_path).map_err(|e| match e {
        KeyError::Io(io) => CliError::Usage(format!("{}: {io}", key_path.display())),
        other => CliError::Usage(format!("{}: {other}", key_path.display())),
    })?;
    let est = extract(&img, &key).map_err(watermark_error)?;
    write_image(out, &est)?;
    Ok(ExitCode::SUCCESS)
}

struct AttackFlags {
    qf: Option<u32>,
    variance: Option<f64>,
    density: Option<f64>,
    window: Option<u64>,
    border: Option<u64>,
    degrees: Option<f64>,
    levels: Option<u32>,
}

/// Builds the spec from either the JSON form or the flag form, and funnels
/// both through the same validation path.
fn resolve_attack(
    spec_json: Option<&str>,
    kind: Option<&str>,
    flags: &AttackFlags,
    seed: u64,
) -> Result<Attack, CliError> {
    let spec = match spec_json {
        Some(json) => serde_json::from_str::<AttackSpec>(json)
            .map_err(|e| CliError::Usage(format!("invalid attack spec: {e}")))?,
        None => {
            let kind = kind.expect("clap enforces --type when --spec is absent");
            let mut params = BTreeMap::new();
            if let Some(v) = flags.qf {
                params.insert("qf".into(), v.into());
            }
            if let Some(v) = flags.variance {
                params.insert("variance".into(), serde_json::json!(v));
            }
            if let Some(v) = flags.density {
                params.insert("density".into(), serde_json::json!(v));
            }
            if let Some(v) = flags.window {
                params.insert("window".into(), v.into());
            }
            if let Some(v) = flags.border {
                params.insert("border".into(), v.into());
            }
            if let Some(v) = flags.degrees {
                params.insert("degrees".into(), serde_json::json!(v));
            }
            if let Some(v) = flags.levels {
                params.insert("levels".into(), v.into());
            }
            AttackSpec { kind: kind.to_string(), params, seed }
        }
    };
    Attack::from_spec(&spec).map_err(usage)
}

fn cmd_attack(
    input: &Path,
    out: &Path,
    spec_json: Option<&str>,
    kind: Option<&str>,
    flags: &AttackFlags,
    seed: u64,
) -> Result<ExitCode, CliError> {
    let img = read_image(input)?;
    let attack = resolve_attack(spec_json, kind, flags, seed)?;
    if let Attack::Rotate { degrees } = attack {
        if degrees.abs() > 45.0 {
            eprintln!(
                "warning: rotation by {degrees} degrees is far outside the small-angle range; \
                 detection after it is not expected to survive"
            );
        }
    }
    let attacked = attack.apply(&img).map_err(usage)?;
    write_image(out, &attacked)?;
    println!("{}", serde_json::to_string(&attack.to_spec()).map_err(internal)?);
    let p = psnr(&img, &attacked).map_err(internal)?;
    println!("psnr_db={p:?}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_evaluate(mark: &Path, extracted: &Path, threshold: f64) -> Result<ExitCode, CliError> {
    if !threshold.is_finite() {
        return Err(CliError::Usage(format!("threshold must be finite, got {threshold}")));
    }
    let mark_img = read_image(mark)?;
    let extracted_img = read_image(extracted)?;
    let c = correlation(&mark_img, &extracted_img).map_err(usage)?;
    let result = DetectionResult::new(c, threshold);
    println!("corr={:?} detected={}", result.correlation(), result.detected());
    if result.detected() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_NOT_DETECTED))
    }
}

/// Benchmark description: host image paths, the mark, gains, the attack
/// suite, and optional sweep parameter lists. Paths are resolved relative
/// to the working directory.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchConfig {
    #[serde(default = "default_corpus_id")]
    corpus_id: String,
    corpus: Vec<PathBuf>,
    mark: PathBuf,
    alpha: AlphaSchedule,
    attacks: Vec<AttackSpec>,
    seed: u64,
    threshold: f64,
    #[serde(default)]
    qf_sweep: Vec<u32>,
    #[serde(default)]
    median_sweep: Vec<u64>,
}

fn default_corpus_id() -> String {
    "unnamed-corpus".to_string()
}

fn cmd_bench(config: &Path, report_path: &Path, csv_dir: &Path) -> Result<ExitCode, CliError> {
    let text = fs::read_to_string(config)
        .map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
    let cfg: BenchConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
    if cfg.corpus.is_empty() {
        return Err(CliError::Usage("config lists an empty corpus".to_string()));
    }
    if !cfg.threshold.is_finite() {
        return Err(CliError::Usage(format!("threshold must be finite, got {}", cfg.threshold)));
    }
    let mut images = Vec::with_capacity(cfg.corpus.len());
    for path in &cfg.corpus {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| CliError::Usage(format!("cannot name corpus image {}", path.display())))?;
        images.push(NamedImage::new(name, read_image(path)?));
    }
    let mark = read_image(&cfg.mark)?;
    let attacks: Vec<Attack> = cfg
        .attacks
        .iter()
        .map(Attack::from_spec)
        .collect::<Result<_, _>>()
        .map_err(usage)?;
    let report_cfg =
        ReportConfig { corpus_id: cfg.corpus_id, threshold: cfg.threshold, seed: cfg.seed };
    let mut report =
        run_full_report(&images, &mark, cfg.alpha, &attacks, &report_cfg).map_err(usage)?;

    fs::create_dir_all(csv_dir).map_err(internal)?;
    if !cfg.qf_sweep.is_empty() {
        let sweep = run_qf_sweep(&images, &mark, cfg.alpha, &cfg.qf_sweep).map_err(usage)?;
        fs::write(csv_dir.join("jpeg_sweep.csv"), sweep.to_csv()).map_err(internal)?;
        report.sweeps.push(sweep);
    }
    if !cfg.median_sweep.is_empty() {
        let windows: Vec<usize> = cfg.median_sweep.iter().map(|&w| w as usize).collect();
        let sweep = run_median_sweep(&images, &mark, cfg.alpha, &windows).map_err(usage)?;
        fs::write(csv_dir.join("median_sweep.csv"), sweep.to_csv()).map_err(internal)?;
        report.sweeps.push(sweep);
    }
    let mut json = serde_json::to_string_pretty(&report).map_err(internal)?;
    json.push('\n');
    fs::write(report_path, json)
        .map_err(|e| CliError::Internal(format!("{}: {e}", report_path.display())))?;
    println!("detected={}", report.all_detected());
    if report.all_detected() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_NOT_DETECTED))
    }
}

fn cmd_corpus(out_dir: &Path) -> Result<ExitCode, CliError> {
    fs::create_dir_all(out_dir).map_err(internal)?;
    for img in corpus() {
        let path = out_dir.join(format!("{}.pgm", img.name));
        write_image(&path, &img.image)?;
        println!("wrote {}", path.display());
    }
    let mark_path = out_dir.join("mark.pgm");
    write_image(&mark_path, &default_mark())?;
    println!("wrote {}", mark_path.display());
    Ok(ExitCode::SUCCESS)
}
