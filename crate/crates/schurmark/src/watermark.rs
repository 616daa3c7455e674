//! The embedding/extraction scheme: the mark's Schur triangular factor is
//! added, scaled by a gain schedule, to the host's global DCT coefficients.
//!
//! Embed: i_dct = dct2(host); (u_w, t_w) = schur(mark);
//!        watermarked = idct2(i_dct + g .* t_w)
//! Extract: t_hat = (dct2(image) - i_dct) ./ g; mark_hat = u_w * t_hat * u_w^T
//!
//! The gain g is `alpha.base` everywhere except the (0,0) entry, which uses
//! the much smaller `alpha.dc`: t_w[0,0] carries the mark's dominant
//! eigenvalue (roughly n times its mean gray level), and a full-strength copy
//! of it would swamp the host's DC coefficient. Extraction is non-blind; the
//! key holds u_w and the host's original DCT grid.

use crate::dct::DctPlan;
use crate::gray::GrayImage;
use crate::matrix::{Matrix, MatrixError};
use crate::schur::schur_decompose;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Orthogonality budget for key validation, generous against the ~1e-14
/// error of a fresh decomposition but tight enough to reject corrupt keys.
pub const KEY_ORTHOGONALITY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum WatermarkError {
    #[error("host is {host_width}x{host_height}, mark is {mark_width}x{mark_height}: both must be square and equal-sized")]
    ShapeMismatch {
        host_width: usize,
        host_height: usize,
        mark_width: usize,
        mark_height: usize,
    },
    #[error("image is {width}x{height} but the key is for {n}x{n}")]
    KeyMismatch { width: usize, height: usize, n: usize },
    #[error("host is {height}x{width}: tile size {tile} must divide both dimensions")]
    TileMismatch { height: usize, width: usize, tile: usize },
    #[error("alpha gains must be positive, got base={base}, dc={dc}")]
    BadAlpha { base: f64, dc: f64 },
    #[error("key unitary factor is not orthogonal: max |u^T u - I| = {max_dev:.3e}")]
    NotOrthogonal { max_dev: f64 },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Embedding gain schedule: `base` scales every triangular-factor entry
/// except the top-left one, which uses `dc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlphaScheduleRaw")]
pub struct AlphaSchedule {
    base: f64,
    dc: f64,
}

#[derive(Deserialize)]
struct AlphaScheduleRaw {
    base: f64,
    dc: f64,
}

impl TryFrom<AlphaScheduleRaw> for AlphaSchedule {
    type Error = WatermarkError;

    fn try_from(raw: AlphaScheduleRaw) -> Result<Self, WatermarkError> {
        AlphaSchedule::new(raw.base, raw.dc)
    }
}

impl AlphaSchedule {
    /// Extraction divides by both gains, so each must be strictly positive.
    pub fn new(base: f64, dc: f64) -> Result<Self, WatermarkError> {
        if !(base > 0.0 && base.is_finite() && dc > 0.0 && dc.is_finite()) {
            return Err(WatermarkError::BadAlpha { base, dc });
        }
        Ok(AlphaSchedule { base, dc })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn dc(&self) -> f64 {
        self.dc
    }

    pub fn gain_at(&self, row: usize, col: usize) -> f64 {
        if row == 0 && col == 0 {
            self.dc
        } else {
            self.base
        }
    }
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        AlphaSchedule { base: 0.3, dc: 0.03 }
    }
}

/// Extraction key: the mark's orthogonal Schur factor plus the host's
/// original DCT grid and the gain schedule used at embed time.
#[derive(Debug, Clone, PartialEq)]
pub struct WatermarkKey {
    n: usize,
    u_w: Matrix,
    i_dct: Matrix,
    alpha: AlphaSchedule,
}

impl WatermarkKey {
    pub fn new(u_w: Matrix, i_dct: Matrix, alpha: AlphaSchedule) -> Result<Self, WatermarkError> {
        let n = u_w.rows();
        if !u_w.is_square() || !i_dct.is_square() || i_dct.rows() != n || n == 0 {
            return Err(MatrixError::Dimension {
                left_rows: u_w.rows(),
                left_cols: u_w.cols(),
                right_rows: i_dct.rows(),
                right_cols: i_dct.cols(),
            }
            .into());
        }
        let gram = u_w.transpose().matmul(&u_w)?;
        let max_dev = gram.max_abs_diff(&Matrix::identity(n))?;
        if max_dev > KEY_ORTHOGONALITY_TOL {
            return Err(WatermarkError::NotOrthogonal { max_dev });
        }
        Ok(WatermarkKey { n, u_w, i_dct, alpha })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn u_w(&self) -> &Matrix {
        &self.u_w
    }

    pub fn i_dct(&self) -> &Matrix {
        &self.i_dct
    }

    pub fn alpha(&self) -> AlphaSchedule {
        self.alpha
    }
}

fn check_pair(host: &GrayImage, mark: &GrayImage) -> Result<(), WatermarkError> {
    if !host.is_square() || !mark.is_square() || host.width() != mark.width() {
        return Err(WatermarkError::ShapeMismatch {
            host_width: host.width(),
            host_height: host.height(),
            mark_width: mark.width(),
            mark_height: mark.height(),
        });
    }
    Ok(())
}

/// Float-domain embed; `host` and `mark` are square matrices of one size.
/// Returns the watermarked image before 8-bit quantization, plus the key.
pub fn embed_float(
    host: &Matrix,
    mark: &Matrix,
    alpha: AlphaSchedule,
) -> Result<(Matrix, WatermarkKey), WatermarkError> {
    if !host.is_square() || !mark.is_square() || host.rows() != mark.rows() || host.rows() == 0 {
        return Err(WatermarkError::ShapeMismatch {
            host_width: host.cols(),
            host_height: host.rows(),
            mark_width: mark.cols(),
            mark_height: mark.rows(),
        });
    }
    let n = host.rows();
    let plan = DctPlan::new(n)?;
    let i_dct = plan.dct2(host)?;
    let factors = schur_decompose(mark)?;
    let mut i_dctw = i_dct.clone();
    for i in 0..n {
        for j in 0..n {
            i_dctw[(i, j)] += alpha.gain_at(i, j) * factors.t[(i, j)];
        }
    }
    let watermarked = plan.idct2(&i_dctw)?;
    let key = WatermarkKey::new(factors.u, i_dct, alpha)?;
    Ok((watermarked, key))
}

/// Embed `mark` into `host` and quantize the result to 8 bits.
pub fn embed(
    host: &GrayImage,
    mark: &GrayImage,
    alpha: AlphaSchedule,
) -> Result<(GrayImage, WatermarkKey), WatermarkError> {
    check_pair(host, mark)?;
    let (wm_float, key) = embed_float(&host.to_matrix(), &mark.to_matrix(), alpha)?;
    let watermarked = GrayImage::from_matrix(&wm_float)
        .expect("embed_float preserves the host dimensions");
    Ok((watermarked, key))
}

/// Float-domain extraction of the mark estimate from a (possibly attacked)
/// image using the key.
pub fn extract_float(image: &Matrix, key: &WatermarkKey) -> Result<Matrix, WatermarkError> {
    if image.rows() != key.n || image.cols() != key.n {
        return Err(WatermarkError::KeyMismatch {
            width: image.cols(),
            height: image.rows(),
            n: key.n,
        });
    }
    let plan = DctPlan::new(key.n)?;
    let mut t_hat = plan.dct2(image)?.sub(&key.i_dct)?;
    for i in 0..key.n {
        for j in 0..key.n {
            t_hat[(i, j)] /= key.alpha.gain_at(i, j);
        }
    }
    Ok(key.u_w.matmul(&t_hat)?.matmul_transposed(&key.u_w)?)
}

/// Extract the mark estimate and quantize it to 8 bits.
pub fn extract(image: &GrayImage, key: &WatermarkKey) -> Result<GrayImage, WatermarkError> {
    if image.width() != key.n || image.height() != key.n {
        return Err(WatermarkError::KeyMismatch {
            width: image.width(),
            height: image.height(),
            n: key.n,
        });
    }
    let est = extract_float(&image.to_matrix(), key)?;
    Ok(GrayImage::from_matrix(&est).expect("extract_float preserves dimensions"))
}

/// Embed the same square mark into every `B`x`B` tile of a host whose sides
/// are multiples of `B`. Tiles are visited row-major; the returned keys share
/// u_w and alpha but carry each tile's own DCT grid, in the same order.
pub fn embed_tiled(
    host: &GrayImage,
    mark: &GrayImage,
    alpha: AlphaSchedule,
) -> Result<(GrayImage, Vec<WatermarkKey>), WatermarkError> {
    let b = mark.width();
    if !mark.is_square() || b == 0 || !host.width().is_multiple_of(b) || !host.height().is_multiple_of(b) {
        return Err(WatermarkError::TileMismatch {
            height: host.height(),
            width: host.width(),
            tile: b,
        });
    }
    let plan = DctPlan::new(b)?;
    let factors = schur_decompose(&mark.to_matrix())?;
    let mut out = host.clone();
    let mut keys = Vec::with_capacity((host.height() / b) * (host.width() / b));
    for ty in (0..host.height()).step_by(b) {
        for tx in (0..host.width()).step_by(b) {
            let mut tile = Matrix::zeros(b, b);
            for r in 0..b {
                for c in 0..b {
                    tile[(r, c)] = f64::from(host.get(ty + r, tx + c));
                }
            }
            let i_dct = plan.dct2(&tile)?;
            let mut i_dctw = i_dct.clone();
            for i in 0..b {
                for j in 0..b {
                    i_dctw[(i, j)] += alpha.gain_at(i, j) * factors.t[(i, j)];
                }
            }
            let wm = plan.idct2(&i_dctw)?;
            for r in 0..b {
                for c in 0..b {
                    out.set(ty + r, tx + c, wm[(r, c)].clamp(0.0, 255.0).round() as u8);
                }
            }
            keys.push(WatermarkKey::new(factors.u.clone(), i_dct, alpha)?);
        }
    }
    Ok((out, keys))
}
