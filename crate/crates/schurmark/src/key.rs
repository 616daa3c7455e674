//! Key file serialization.
//!
//! Binary layout (little-endian): magic `SWMK`, format version u32, side
//! length n u32, alpha base f64, alpha dc f64, then the unitary factor and
//! the host DCT grid as row-major n^2 f64 runs. A JSON sidecar carrying the
//! same fields (matrices base64-encoded) is accepted on read and can be
//! written for interoperability. Reads re-validate the key invariants, so a
//! corrupt or hand-edited key fails here rather than inside extraction.

use crate::matrix::Matrix;
use crate::watermark::{AlphaSchedule, WatermarkError, WatermarkKey};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io;
use std::path::Path;
use thiserror::Error;

pub const KEY_MAGIC: [u8; 4] = *b"SWMK";
pub const KEY_FORMAT_VERSION: u32 = 1;

/// Largest accepted side length; a key this size is ~4 GiB, anything bigger
/// is a corrupt header rather than a real key.
const MAX_SIDE: u32 = 1 << 14;

#[derive(Debug, Error)]
pub enum KeyError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("invalid key file at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("key fails validation: {0}")]
    Invalid(#[from] WatermarkError),
}

fn format_err(offset: usize, message: impl Into<String>) -> KeyError {
    KeyError::Format { offset, message: message.into() }
}

pub fn write_key(path: impl AsRef<Path>, key: &WatermarkKey) -> Result<(), KeyError> {
    Ok(fs::write(path, encode_key(key))?)
}

/// Read either format, sniffing JSON by its leading `{`.
pub fn read_key(path: impl AsRef<Path>) -> Result<WatermarkKey, KeyError> {
    decode_key(&fs::read(path)?)
}

pub fn encode_key(key: &WatermarkKey) -> Vec<u8> {
    let n = key.n();
    let mut out = Vec::with_capacity(4 + 4 + 4 + 16 + 16 * n * n);
    out.extend_from_slice(&KEY_MAGIC);
    out.extend_from_slice(&KEY_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&key.alpha().base().to_le_bytes());
    out.extend_from_slice(&key.alpha().dc().to_le_bytes());
    for &v in key.u_w().data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &v in key.i_dct().data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_key(buf: &[u8]) -> Result<WatermarkKey, KeyError> {
    match buf.iter().find(|b| !b.is_ascii_whitespace()) {
        Some(b'{') => decode_key_json(buf),
        _ if buf.starts_with(&KEY_MAGIC) => decode_key_binary(buf),
        _ => Err(format_err(0, "neither SWMK magic nor a JSON object")),
    }
}

fn decode_key_binary(buf: &[u8]) -> Result<WatermarkKey, KeyError> {
    let mut r = Reader { buf, pos: 4 };
    let version = r.u32("format version")?;
    if version != KEY_FORMAT_VERSION {
        return Err(format_err(4, format!("unsupported format version {version}")));
    }
    let n_at = r.pos;
    let n = r.u32("side length")?;
    if n == 0 || n > MAX_SIDE {
        return Err(format_err(n_at, format!("unsupported side length {n}")));
    }
    let base = r.f64("alpha base")?;
    let dc = r.f64("alpha dc")?;
    let n = n as usize;
    let u_w = r.matrix(n, "unitary factor")?;
    let i_dct = r.matrix(n, "dct grid")?;
    if r.pos != buf.len() {
        return Err(format_err(r.pos, format!("{} trailing bytes", buf.len() - r.pos)));
    }
    let alpha = AlphaSchedule::new(base, dc)?;
    Ok(WatermarkKey::new(u_w, i_dct, alpha)?)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn bytes(&mut self, len: usize, what: &str) -> Result<&[u8], KeyError> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.buf.len()).ok_or_else(
            || {
                format_err(
                    self.buf.len(),
                    format!("truncated reading {what}: need {len} bytes at offset {}", self.pos),
                )
            },
        )?;
        let slice = &self.buf[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32, KeyError> {
        let b = self.bytes(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().expect("length checked")))
    }

    fn f64(&mut self, what: &str) -> Result<f64, KeyError> {
        let b = self.bytes(8, what)?;
        Ok(f64::from_le_bytes(b.try_into().expect("length checked")))
    }

    fn matrix(&mut self, n: usize, what: &str) -> Result<Matrix, KeyError> {
        let at = self.pos;
        let raw = self.bytes(8 * n * n, what)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunks are 8 bytes")))
            .collect();
        Matrix::from_vec(n, n, data).map_err(|e| format_err(at, format!("{what}: {e}")))
    }
}

/// JSON sidecar with matrices as base64 little-endian f64 runs.
#[derive(Serialize, Deserialize)]
struct KeyJson {
    format_version: u32,
    n: u32,
    alpha_base: f64,
    alpha_dc: f64,
    u_w: String,
    i_dct: String,
}

pub fn encode_key_json(key: &WatermarkKey) -> String {
    let pack = |m: &Matrix| {
        let mut bytes = Vec::with_capacity(8 * m.data().len());
        for &v in m.data() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        BASE64.encode(bytes)
    };
    serde_json::to_string(&KeyJson {
        format_version: KEY_FORMAT_VERSION,
        n: key.n() as u32,
        alpha_base: key.alpha().base(),
        alpha_dc: key.alpha().dc(),
        u_w: pack(key.u_w()),
        i_dct: pack(key.i_dct()),
    })
    .expect("key fields always serialize")
}

pub fn write_key_json(path: impl AsRef<Path>, key: &WatermarkKey) -> Result<(), KeyError> {
    Ok(fs::write(path, encode_key_json(key))?)
}

fn decode_key_json(buf: &[u8]) -> Result<WatermarkKey, KeyError> {
    let parsed: KeyJson =
        serde_json::from_slice(buf).map_err(|e| format_err(0, format!("json: {e}")))?;
    if parsed.format_version != KEY_FORMAT_VERSION {
        return Err(format_err(0, format!("unsupported format version {}", parsed.format_version)));
    }
    if parsed.n == 0 || parsed.n > MAX_SIDE {
        return Err(format_err(0, format!("unsupported side length {}", parsed.n)));
    }
    let n = parsed.n as usize;
    let unpack = |field: &str, name: &str| -> Result<Matrix, KeyError> {
        let bytes = BASE64
            .decode(field)
            .map_err(|e| format_err(0, format!("{name}: bad base64: {e}")))?;
        if bytes.len() != 8 * n * n {
            return Err(format_err(
                0,
                format!("{name}: expected {} bytes, got {}", 8 * n * n, bytes.len()),
            ));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunks are 8 bytes")))
            .collect();
        Matrix::from_vec(n, n, data).map_err(|e| format_err(0, format!("{name}: {e}")))
    };
    let u_w = unpack(&parsed.u_w, "u_w")?;
    let i_dct = unpack(&parsed.i_dct, "i_dct")?;
    let alpha = AlphaSchedule::new(parsed.alpha_base, parsed.alpha_dc)?;
    Ok(WatermarkKey::new(u_w, i_dct, alpha)?)
}
