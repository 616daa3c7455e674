//! Deterministic attack suite for robustness benchmarking.
//!
//! Every attack maps a grayscale image to one of identical dimensions and is
//! a pure function of (image, parameters, seed), so benchmark runs reproduce
//! bit-for-bit. JPEG is simulated (blockwise DCT quantization with the
//! standard luminance table) rather than delegated to a codec, keeping
//! results stable across platforms and library versions.

use crate::dct::DctPlan;
use crate::gray::GrayImage;
use crate::matrix::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AttackError {
    #[error("unknown attack kind {0:?}")]
    UnknownKind(String),
    #[error("invalid parameter {name}: {message}")]
    Parameter { name: &'static str, message: String },
    #[error("missing parameter {name:?} for attack {kind:?}")]
    MissingParameter { kind: String, name: &'static str },
    #[error("unexpected parameter {name:?} for attack {kind:?}")]
    UnexpectedParameter { kind: String, name: String },
}

fn param_err(name: &'static str, message: impl Into<String>) -> AttackError {
    AttackError::Parameter { name, message: message.into() }
}

/// A validated attack with all parameters resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum Attack {
    Jpeg { qf: u32 },
    GaussianNoise { variance: f64, seed: u64 },
    SaltPepper { density: f64, seed: u64 },
    Median { window: usize },
    HistEq,
    CropBorder { border: usize },
    Rotate { degrees: f64 },
    ColorReduce { levels: u32 },
}

impl Attack {
    pub fn kind(&self) -> &'static str {
        match self {
            Attack::Jpeg { .. } => "jpeg",
            Attack::GaussianNoise { .. } => "gaussian_noise",
            Attack::SaltPepper { .. } => "salt_pepper",
            Attack::Median { .. } => "median",
            Attack::HistEq => "histeq",
            Attack::CropBorder { .. } => "crop_border",
            Attack::Rotate { .. } => "rotate",
            Attack::ColorReduce { .. } => "color_reduce",
        }
    }

    /// Short row label for reports and CSVs, e.g. `jpeg_qf10`.
    pub fn label(&self) -> String {
        match self {
            Attack::Jpeg { qf } => format!("jpeg_qf{qf}"),
            Attack::GaussianNoise { variance, .. } => format!("gaussian_noise_v{variance}"),
            Attack::SaltPepper { density, .. } => format!("salt_pepper_d{density}"),
            Attack::Median { window } => format!("median_w{window}"),
            Attack::HistEq => "histeq".to_string(),
            Attack::CropBorder { border } => format!("crop_border_{border}"),
            Attack::Rotate { degrees } => format!("rotate_{degrees}deg"),
            Attack::ColorReduce { levels } => format!("color_reduce_{levels}"),
        }
    }

    pub fn apply(&self, img: &GrayImage) -> Result<GrayImage, AttackError> {
        match *self {
            Attack::Jpeg { qf } => attack_jpeg(img, qf),
            Attack::GaussianNoise { variance, seed } => attack_gaussian(img, variance, seed),
            Attack::SaltPepper { density, seed } => attack_salt_pepper(img, density, seed),
            Attack::Median { window } => attack_median(img, window),
            Attack::HistEq => Ok(attack_histeq(img)),
            Attack::CropBorder { border } => attack_crop_border(img, border),
            Attack::Rotate { degrees } => Ok(attack_rotate(img, degrees)),
            Attack::ColorReduce { levels } => attack_color_reduce(img, levels),
        }
    }

    /// Serializable form, seed included so reruns reproduce exactly.
    pub fn to_spec(&self) -> AttackSpec {
        let mut params = BTreeMap::new();
        let mut seed = 0u64;
        match *self {
            Attack::Jpeg { qf } => {
                params.insert("qf".into(), qf.into());
            }
            Attack::GaussianNoise { variance, seed: s } => {
                params.insert("variance".into(), json_f64(variance));
                seed = s;
            }
            Attack::SaltPepper { density, seed: s } => {
                params.insert("density".into(), json_f64(density));
                seed = s;
            }
            Attack::Median { window } => {
                params.insert("window".into(), (window as u64).into());
            }
            Attack::HistEq => {}
            Attack::CropBorder { border } => {
                params.insert("border".into(), (border as u64).into());
            }
            Attack::Rotate { degrees } => {
                params.insert("degrees".into(), json_f64(degrees));
            }
            Attack::ColorReduce { levels } => {
                params.insert("levels".into(), levels.into());
            }
        }
        AttackSpec { kind: self.kind().to_string(), params, seed }
    }

    pub fn from_spec(spec: &AttackSpec) -> Result<Self, AttackError> {
        let mut p = ParamReader::new(&spec.kind, &spec.params);
        let attack = match spec.kind.as_str() {
            "jpeg" => {
                let qf = p.take_u64("qf")?;
                validate_qf(qf)?;
                Attack::Jpeg { qf: qf as u32 }
            }
            "gaussian_noise" => {
                let variance = p.take_f64("variance")?;
                validate_variance(variance)?;
                Attack::GaussianNoise { variance, seed: spec.seed }
            }
            "salt_pepper" => {
                let density = p.take_f64("density")?;
                validate_density(density)?;
                Attack::SaltPepper { density, seed: spec.seed }
            }
            "median" => {
                let window = p.take_u64("window")?;
                validate_window(window)?;
                Attack::Median { window: window as usize }
            }
            "histeq" => Attack::HistEq,
            "crop_border" => Attack::CropBorder { border: p.take_u64("border")? as usize },
            "rotate" => {
                let degrees = p.take_f64("degrees")?;
                if !degrees.is_finite() {
                    return Err(param_err("degrees", "must be finite"));
                }
                Attack::Rotate { degrees }
            }
            "color_reduce" => {
                let levels = p.take_u64("levels")?;
                validate_levels(levels)?;
                Attack::ColorReduce { levels: levels as u32 }
            }
            other => return Err(AttackError::UnknownKind(other.to_string())),
        };
        p.finish()?;
        Ok(attack)
    }
}

fn json_f64(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v).map_or(serde_json::Value::Null, serde_json::Value::Number)
}

/// Wire format of one attack: `{"kind": …, "params": {…}, "seed": …}`.
///
/// `params` is a sorted map so serialization is deterministic; `seed` is
/// always present (stochastic attacks consume it, the rest ignore it).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub seed: u64,
}

struct ParamReader<'a> {
    kind: &'a str,
    params: &'a BTreeMap<String, serde_json::Value>,
    used: Vec<&'static str>,
}

impl<'a> ParamReader<'a> {
    fn new(kind: &'a str, params: &'a BTreeMap<String, serde_json::Value>) -> Self {
        ParamReader { kind, params, used: Vec::new() }
    }

    fn take(&mut self, name: &'static str) -> Result<&'a serde_json::Value, AttackError> {
        self.used.push(name);
        self.params
            .get(name)
            .ok_or_else(|| AttackError::MissingParameter { kind: self.kind.to_string(), name })
    }

    fn take_f64(&mut self, name: &'static str) -> Result<f64, AttackError> {
        self.take(name)?
            .as_f64()
            .ok_or_else(|| param_err(name, "must be a number"))
    }

    fn take_u64(&mut self, name: &'static str) -> Result<u64, AttackError> {
        self.take(name)?
            .as_u64()
            .ok_or_else(|| param_err(name, "must be a nonnegative integer"))
    }

    fn finish(self) -> Result<(), AttackError> {
        for key in self.params.keys() {
            if !self.used.contains(&key.as_str()) {
                return Err(AttackError::UnexpectedParameter {
                    kind: self.kind.to_string(),
                    name: key.clone(),
                });
            }
        }
        Ok(())
    }
}

fn validate_qf(qf: u64) -> Result<(), AttackError> {
    if !(1..=100).contains(&qf) {
        return Err(param_err("qf", format!("must be in [1, 100], got {qf}")));
    }
    Ok(())
}

fn validate_variance(v: f64) -> Result<(), AttackError> {
    if !v.is_finite() || v < 0.0 {
        return Err(param_err("variance", format!("must be >= 0, got {v}")));
    }
    Ok(())
}

fn validate_density(d: f64) -> Result<(), AttackError> {
    if !d.is_finite() || !(0.0..=1.0).contains(&d) {
        return Err(param_err("density", format!("must be in [0, 1], got {d}")));
    }
    Ok(())
}

fn validate_window(w: u64) -> Result<(), AttackError> {
    if w < 3 || w.is_multiple_of(2) {
        return Err(param_err("window", format!("must be odd and >= 3, got {w}")));
    }
    Ok(())
}

fn validate_levels(l: u64) -> Result<(), AttackError> {
    if !(2..=256).contains(&l) {
        return Err(param_err("levels", format!("must be in [2, 256], got {l}")));
    }
    Ok(())
}

/// Symmetric reflection of index `i` into `[0, n)`: …2 1 0 | 0 1 2… n-1 | n-1….
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let i = i.rem_euclid(period);
    (if i < n { i } else { period - 1 - i }) as usize
}

/// Standard JPEG luminance quantization table in zig-zag-free row-major order.
const JPEG_LUMINANCE_TABLE: [u32; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99, //
];

/// Quality-factor scaling: integer arithmetic, round-half-up, clamp [1, 255].
fn scaled_luminance_table(qf: u32) -> [f64; 64] {
    let scale = if qf < 50 { 5000 / qf } else { 200 - 2 * qf };
    let mut out = [0.0; 64];
    for (o, &base) in out.iter_mut().zip(&JPEG_LUMINANCE_TABLE) {
        *o = f64::from((base * scale + 50) / 100).clamp(1.0, 255.0);
    }
    out
}

/// Simulated JPEG compression loss at the given quality factor.
///
/// Level-shift by -128, 8x8 block DCT, quantize/dequantize with the scaled
/// luminance table, inverse DCT, shift back. Non-multiple-of-8 images are
/// reflect-padded for the transform and cropped back afterwards.
pub fn attack_jpeg(img: &GrayImage, qf: u32) -> Result<GrayImage, AttackError> {
    validate_qf(u64::from(qf))?;
    let table = scaled_luminance_table(qf);
    let (w, h) = (img.width(), img.height());
    let plan = DctPlan::new(8).expect("8 > 0");
    let mut out = vec![0u8; w * h];
    let mut block = Matrix::zeros(8, 8);
    for by in (0..h).step_by(8) {
        for bx in (0..w).step_by(8) {
            for r in 0..8 {
                for c in 0..8 {
                    let sr = reflect((by + r) as isize, h);
                    let sc = reflect((bx + c) as isize, w);
                    block[(r, c)] = f64::from(img.get(sr, sc)) - 128.0;
                }
            }
            let mut coeffs = plan.dct2(&block).expect("plan size matches block");
            for (v, q) in coeffs.data_mut().iter_mut().zip(&table) {
                *v = (*v / q).round() * q;
            }
            let spatial = plan.idct2(&coeffs).expect("plan size matches block");
            for r in 0..8 {
                let y = by + r;
                if y >= h {
                    break;
                }
                for c in 0..8 {
                    let x = bx + c;
                    if x >= w {
                        break;
                    }
                    out[y * w + x] = (spatial[(r, c)] + 128.0).clamp(0.0, 255.0).round() as u8;
                }
            }
        }
    }
    Ok(GrayImage::new(w, h, out).expect("same dimensions as input"))
}

/// Additive zero-mean Gaussian noise; `variance` is on the [0, 1] pixel scale
/// (std of variance v corresponds to sqrt(v)*255 gray levels).
pub fn attack_gaussian(img: &GrayImage, variance: f64, seed: u64) -> Result<GrayImage, AttackError> {
    validate_variance(variance)?;
    if variance == 0.0 {
        return Ok(img.clone());
    }
    let sigma = variance.sqrt() * 255.0;
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = img
        .pixels()
        .iter()
        .map(|&v| (f64::from(v) + normal.sample(&mut rng)).clamp(0.0, 255.0).round() as u8)
        .collect();
    Ok(GrayImage::new(img.width(), img.height(), data).expect("same dimensions as input"))
}

/// Salt-and-pepper impulse noise: each pixel independently becomes 0 or 255
/// (equal odds) with probability `density`.
pub fn attack_salt_pepper(
    img: &GrayImage,
    density: f64,
    seed: u64,
) -> Result<GrayImage, AttackError> {
    validate_density(density)?;
    if density == 0.0 {
        return Ok(img.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = img
        .pixels()
        .iter()
        .map(|&v| {
            if rng.gen::<f64>() < density {
                if rng.gen::<bool>() {
                    255
                } else {
                    0
                }
            } else {
                v
            }
        })
        .collect();
    Ok(GrayImage::new(img.width(), img.height(), data).expect("same dimensions as input"))
}

/// Median filter over an odd square window, reflect padding at edges.
pub fn attack_median(img: &GrayImage, window: usize) -> Result<GrayImage, AttackError> {
    validate_window(window as u64)?;
    let (w, h) = (img.width(), img.height());
    let r = (window / 2) as isize;
    let mut out = vec![0u8; w * h];
    let mut buf = vec![0u8; window * window];
    for y in 0..h {
        for x in 0..w {
            let mut k = 0;
            for dy in -r..=r {
                let sy = reflect(y as isize + dy, h);
                for dx in -r..=r {
                    let sx = reflect(x as isize + dx, w);
                    buf[k] = img.get(sy, sx);
                    k += 1;
                }
            }
            buf.sort_unstable();
            out[y * w + x] = buf[buf.len() / 2];
        }
    }
    Ok(GrayImage::new(w, h, out).expect("same dimensions as input"))
}

/// Global histogram equalization via the cumulative distribution.
///
/// out(v) = round(255 * (cdf(v) - cdf_min) / (N - cdf_min)); a constant image
/// (all mass at one level, N == cdf_min) is returned unchanged.
pub fn attack_histeq(img: &GrayImage) -> GrayImage {
    let mut hist = [0u64; 256];
    for &v in img.pixels() {
        hist[v as usize] += 1;
    }
    let mut cdf = [0u64; 256];
    let mut acc = 0;
    for (c, &h) in cdf.iter_mut().zip(&hist) {
        acc += h;
        *c = acc;
    }
    let n = img.pixels().len() as u64;
    let cdf_min = *cdf.iter().find(|&&c| c > 0).expect("image is non-empty");
    if cdf_min == n {
        return img.clone();
    }
    let denom = (n - cdf_min) as f64;
    let mut lut = [0u8; 256];
    for (l, &c) in lut.iter_mut().zip(&cdf) {
        let num = c.saturating_sub(cdf_min) as f64;
        *l = (255.0 * num / denom).round() as u8;
    }
    let data = img.pixels().iter().map(|&v| lut[v as usize]).collect();
    GrayImage::new(img.width(), img.height(), data).expect("same dimensions as input")
}

/// Zero out the first `border` rows and columns, keeping dimensions.
pub fn attack_crop_border(img: &GrayImage, border: usize) -> Result<GrayImage, AttackError> {
    let (w, h) = (img.width(), img.height());
    if 2 * border >= w.min(h) {
        return Err(param_err(
            "border",
            format!("2*{border} must be < min({w}, {h})"),
        ));
    }
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            if y < border || x < border {
                out.set(y, x, 0);
            }
        }
    }
    Ok(out)
}

/// Rotate about the image center with bilinear interpolation; samples falling
/// outside the frame read as 0. Output keeps the input dimensions.
pub fn attack_rotate(img: &GrayImage, degrees: f64) -> GrayImage {
    if degrees == 0.0 {
        return img.clone();
    }
    let (w, h) = (img.width(), img.height());
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let theta = degrees.to_radians();
    let (sin, cos) = theta.sin_cos();
    let sample = |r: isize, c: isize| -> f64 {
        if r < 0 || c < 0 || r >= h as isize || c >= w as isize {
            0.0
        } else {
            f64::from(img.get(r as usize, c as usize))
        }
    };
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let u = x as f64 - cx;
            let v = y as f64 - cy;
            let sc = cos * u + sin * v + cx;
            let sr = cos * v - sin * u + cy;
            let (r0, c0) = (sr.floor(), sc.floor());
            let (fr, fc) = (sr - r0, sc - c0);
            let (r0, c0) = (r0 as isize, c0 as isize);
            let val = (1.0 - fr) * (1.0 - fc) * sample(r0, c0)
                + (1.0 - fr) * fc * sample(r0, c0 + 1)
                + fr * (1.0 - fc) * sample(r0 + 1, c0)
                + fr * fc * sample(r0 + 1, c0 + 1);
            out[y * w + x] = val.clamp(0.0, 255.0).round() as u8;
        }
    }
    GrayImage::new(w, h, out).expect("same dimensions as input")
}

/// Uniform gray-level requantization to the given number of levels.
pub fn attack_color_reduce(img: &GrayImage, levels: u32) -> Result<GrayImage, AttackError> {
    validate_levels(u64::from(levels))?;
    let steps = f64::from(levels - 1);
    let mut lut = [0u8; 256];
    for (v, l) in lut.iter_mut().enumerate() {
        *l = ((v as f64 * steps / 255.0).round() * 255.0 / steps).round() as u8;
    }
    let data = img.pixels().iter().map(|&v| lut[v as usize]).collect();
    Ok(GrayImage::new(img.width(), img.height(), data).expect("same dimensions as input"))
}
