//! Deterministic synthetic benchmark corpus and mark generators.
//!
//! Six 512x512 grayscale fixtures cover the texture classes the robustness
//! suite cares about: smooth gradients (ramp, radial), band-limited noise
//! fields (clouds, texture), a composed scene with edges and a global
//! gradient, and a hard block checkerboard. All generators are pure
//! functions of their seeds, so every benchmark run sees identical bytes.
//!
//! Host histograms are deliberately wide and smooth: histogram equalization
//! on a narrow-histogram host rescales the host's own spectrum through the
//! extraction key and can masquerade as a weak mark; the wide-histogram
//! fixtures keep that false-positive band low.

use crate::gray::GrayImage;
use crate::matrix::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifier stamped into reports produced from the built-in corpus.
pub const CORPUS_ID: &str = "schurmark-synthetic-v1";
/// Side length of every built-in corpus image.
pub const CORPUS_SIDE: usize = 512;
/// Seed of the default benchmark mark.
pub const DEFAULT_MARK_SEED: u64 = 7;
/// Candidate marks for detector-response runs use seeds from this base.
pub const CANDIDATE_MARK_SEED_BASE: u64 = 1000;

/// An image with the name it is reported under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedImage {
    pub name: String,
    pub image: GrayImage,
}

impl NamedImage {
    pub fn new(name: impl Into<String>, image: GrayImage) -> Self {
        NamedImage { name: name.into(), image }
    }
}

/// Band-limited lattice value noise: per octave, a seeded uniform [-1, 1]
/// lattice is sampled with smoothstep bilinear interpolation; octaves are
/// summed with the given weights. `octaves` are cell sizes in pixels.
pub fn value_noise(n: usize, octaves: &[usize], weights: &[f64], seed: u64) -> Matrix {
    assert_eq!(octaves.len(), weights.len(), "one weight per octave");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Matrix::zeros(n, n);
    for (&cell, &w) in octaves.iter().zip(weights) {
        assert!(cell >= 1, "octave cell size must be >= 1");
        let g = n / cell + 2;
        let lattice: Vec<f64> = (0..g * g).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for r in 0..n {
            let fy = r as f64 / cell as f64;
            let y0 = fy as usize;
            let ty = fy - y0 as f64;
            let sy = ty * ty * (3.0 - 2.0 * ty);
            for c in 0..n {
                let fx = c as f64 / cell as f64;
                let x0 = fx as usize;
                let tx = fx - x0 as f64;
                let sx = tx * tx * (3.0 - 2.0 * tx);
                let v00 = lattice[y0 * g + x0];
                let v01 = lattice[y0 * g + x0 + 1];
                let v10 = lattice[(y0 + 1) * g + x0];
                let v11 = lattice[(y0 + 1) * g + x0 + 1];
                let top = v00 + (v01 - v00) * sx;
                let bot = v10 + (v11 - v10) * sx;
                out[(r, c)] += w * (top + (bot - top) * sy);
            }
        }
    }
    out
}

/// Affine-rescale a field to the target mean/std and quantize to 8 bits.
fn normalize_to_u8(field: &Matrix, mean: f64, std: f64) -> GrayImage {
    let data = field.data();
    let n = data.len() as f64;
    let m = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
    let s = var.sqrt();
    let scale = if s > 0.0 { std / s } else { 0.0 };
    let px = data.iter().map(|v| ((v - m) * scale + mean).clamp(0.0, 255.0).round() as u8);
    GrayImage::new(field.cols(), field.rows(), px.collect()).expect("length matches dimensions")
}

fn center_distance(r: usize, c: usize, n: usize) -> f64 {
    let mid = (n as f64 - 1.0) / 2.0;
    let dr = r as f64 - mid;
    let dc = c as f64 - mid;
    (dr * dr + dc * dc).sqrt()
}

fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> GrayImage {
    let mut px = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            px.push(f(r, c).clamp(0.0, 255.0).round() as u8);
        }
    }
    GrayImage::new(n, n, px).expect("length matches dimensions")
}

fn ramp(n: usize) -> GrayImage {
    from_fn(n, |r, c| 40.0 + (140.0 * c as f64 + 35.0 * r as f64) / n as f64)
}

fn radial(n: usize) -> GrayImage {
    from_fn(n, |r, c| 235.0 - 0.55 * center_distance(r, c, n))
}

fn clouds(n: usize) -> GrayImage {
    normalize_to_u8(&value_noise(n, &[64, 128, 256], &[1.0, 1.4, 2.0], 11), 127.0, 44.0)
}

fn texture(n: usize) -> GrayImage {
    normalize_to_u8(&value_noise(n, &[16, 32, 64, 128], &[0.6, 1.0, 1.4, 1.8], 12), 128.0, 40.0)
}

fn scene(n: usize) -> GrayImage {
    let noise = value_noise(n, &[32, 64, 128], &[0.8, 1.2, 1.6], 13);
    let data = noise.data();
    let nn = data.len() as f64;
    let m = data.iter().sum::<f64>() / nn;
    let s = (data.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / nn).sqrt();
    from_fn(n, |r, c| {
        let z = (noise[(r, c)] - m) / s * 35.0;
        let mut v = z + 20.0 + 0.45 * center_distance(r, c, n);
        let d1r = r as f64 - 340.0;
        let d1c = c as f64 - 160.0;
        if d1r * d1r + d1c * d1c < 70.0 * 70.0 {
            v += 45.0;
        }
        let d2r = r as f64 - 140.0;
        let d2c = c as f64 - 360.0;
        if d2r * d2r + d2c * d2c < 50.0 * 50.0 {
            v -= 35.0;
        }
        v
    })
}

fn checker(n: usize) -> GrayImage {
    from_fn(n, |r, c| if (r / 32 + c / 32) % 2 == 0 { 64.0 } else { 192.0 })
}

/// The full six-image corpus, in reporting order.
pub fn corpus() -> Vec<NamedImage> {
    let n = CORPUS_SIDE;
    vec![
        NamedImage::new("ramp", ramp(n)),
        NamedImage::new("radial", radial(n)),
        NamedImage::new("clouds", clouds(n)),
        NamedImage::new("texture", texture(n)),
        NamedImage::new("scene", scene(n)),
        NamedImage::new("checker", checker(n)),
    ]
}

/// The five smooth hosts used for the robustness sweeps (the checkerboard is
/// kept out: its own block spectrum is atypical of natural hosts and it
/// exists to exercise edge cases, not sweep statistics).
pub fn sweep_corpus() -> Vec<NamedImage> {
    let mut all = corpus();
    all.retain(|img| img.name != "checker");
    all
}

/// A benchmark mark: smooth symmetric value noise, low contrast (std 36
/// around mid-gray). Symmetry makes the Schur triangular factor nearly
/// diagonal and keeps its energy in the low-frequency corner of the DCT
/// grid, which is what lets the embedded mark survive coarse JPEG
/// quantization; low contrast keeps the embedding near 30 dB PSNR.
pub fn synthetic_mark(seed: u64, n: usize) -> GrayImage {
    let octaves = [
        (n / 64).max(4),
        (n / 32).max(4),
        (n / 16).max(4),
        (n / 8).max(4),
    ];
    let field = value_noise(n, &octaves, &[0.5, 1.0, 1.3, 1.6], seed);
    let sym = field.add(&field.transpose()).expect("same shape").scale(0.5);
    normalize_to_u8(&sym, 128.0, 36.0)
}

/// The default mark embedded by the benchmark suite.
pub fn default_mark() -> GrayImage {
    synthetic_mark(DEFAULT_MARK_SEED, CORPUS_SIDE)
}

/// Candidate set for detector-response experiments; the true mark should be
/// one of these (they are drawn from the same family, so peaks are earned,
/// not artifacts of a family mismatch).
pub fn candidate_marks(count: usize) -> Vec<GrayImage> {
    (0..count as u64)
        .map(|i| synthetic_mark(CANDIDATE_MARK_SEED_BASE + i, CORPUS_SIDE))
        .collect()
}
