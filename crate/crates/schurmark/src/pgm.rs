//! PGM (portable graymap) reading and writing.
//!
//! Reads binary `P5` and ASCII `P2` files with 8-bit samples (maxval 255);
//! writes binary `P5`. Header comments (`#` to end of line) are honored.
//! Parse failures report the byte offset where the problem was found.

use crate::gray::GrayImage;
use std::fs;
use std::io;
use std::path::Path;
use thiserror::Error;

/// Guard against absurd headers before allocating pixel buffers.
const MAX_DIMENSION: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("invalid pgm at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
}

fn parse_err(offset: usize, message: impl Into<String>) -> PgmError {
    PgmError::Parse { offset, message: message.into() }
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage, PgmError> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<(), PgmError> {
    Ok(fs::write(path, encode_pgm(img))?)
}

/// Encode as binary P5 with maxval 255.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.pixels());
    out
}

pub fn decode_pgm(buf: &[u8]) -> Result<GrayImage, PgmError> {
    let mut s = Scanner { buf, pos: 0 };
    let magic_at = 0;
    let magic = s.token("magic number")?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => {
            return Err(parse_err(
                magic_at,
                format!("expected magic P5 or P2, got {:?}", String::from_utf8_lossy(magic)),
            ))
        }
    };
    let width = s.number("width")?;
    let height = s.number("height")?;
    if width == 0 || height == 0 || width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(parse_err(s.pos, format!("unsupported dimensions {width}x{height}")));
    }
    let maxval_at = s.peek_token_offset();
    let maxval = s.number("maxval")?;
    if maxval != 255 {
        return Err(parse_err(maxval_at, format!("only maxval 255 is supported, got {maxval}")));
    }
    let n = (width * height) as usize;
    let data = if binary {
        // Exactly one whitespace byte separates the header from the raster.
        match s.buf.get(s.pos) {
            Some(b) if b.is_ascii_whitespace() => s.pos += 1,
            _ => return Err(parse_err(s.pos, "expected single whitespace before raster")),
        }
        let raster = &s.buf[s.pos..];
        if raster.len() < n {
            return Err(parse_err(
                s.buf.len(),
                format!("raster truncated: need {n} bytes, have {}", raster.len()),
            ));
        }
        raster[..n].to_vec()
    } else {
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            let at = s.peek_token_offset();
            let v = s.number("sample")?;
            if v > maxval {
                return Err(parse_err(at, format!("sample {v} exceeds maxval {maxval}")));
            }
            data.push(v as u8);
        }
        data
    };
    GrayImage::new(width as usize, height as usize, data)
        .map_err(|e| parse_err(s.pos, e.to_string()))
}

struct Scanner<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn skip_ws_and_comments(&mut self) {
        loop {
            while self.buf.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
                self.pos += 1;
            }
            if self.buf.get(self.pos) == Some(&b'#') {
                while self.buf.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn peek_token_offset(&mut self) -> usize {
        self.skip_ws_and_comments();
        self.pos
    }

    fn token(&mut self, what: &str) -> Result<&'a [u8], PgmError> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while self
            .buf
            .get(self.pos)
            .is_some_and(|&b| !b.is_ascii_whitespace() && b != b'#')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(parse_err(start, format!("unexpected end of input reading {what}")));
        }
        Ok(&self.buf[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u64, PgmError> {
        let at = self.peek_token_offset();
        let tok = self.token(what)?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| {
                parse_err(at, format!("invalid {what}: {:?}", String::from_utf8_lossy(tok)))
            })
    }
}
