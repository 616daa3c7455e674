//! 8-bit grayscale image buffer and float-domain conversions.

use crate::matrix::Matrix;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("image dimensions must be >= 1, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("pixel buffer length {len} does not match {width}x{height}")]
    BadLength { width: usize, height: usize, len: usize },
    #[error("image is {width}x{height}, expected square")]
    NotSquare { width: usize, height: usize },
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyDimensions { width, height });
        }
        if data.len() != width * height {
            return Err(ImageError::BadLength { width, height, len: data.len() });
        }
        Ok(GrayImage { width, height, data })
    }

    /// Image filled with one value.
    pub fn flat(width: usize, height: usize, value: u8) -> Result<Self, ImageError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        debug_assert!(row < self.height && col < self.width);
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        debug_assert!(row < self.height && col < self.width);
        self.data[row * self.width + col] = value;
    }

    pub fn is_square(&self) -> bool {
        self.width == self.height
    }

    /// Lift to f64 without rescaling: pixel value v maps to v exactly.
    pub fn to_matrix(&self) -> Matrix {
        let data = self.data.iter().map(|&v| f64::from(v)).collect();
        Matrix::from_vec(self.height, self.width, data)
            .expect("u8 pixels are always finite and the length is checked on construction")
    }

    /// Quantize a float image back to 8 bits: clamp to [0, 255], then round
    /// halves away from zero (254.5 -> 255).
    pub fn from_matrix(m: &Matrix) -> Result<Self, ImageError> {
        let data = m.data().iter().map(|&v| v.clamp(0.0, 255.0).round() as u8).collect();
        Self::new(m.cols(), m.rows(), data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_through_matrix_is_identity() {
        let img = GrayImage::new(3, 2, vec![0, 1, 127, 128, 254, 255]).unwrap();
        let back = GrayImage::from_matrix(&img.to_matrix()).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn from_matrix_clamps_and_rounds_half_away_from_zero() {
        let m = Matrix::from_vec(
            1,
            6,
            vec![-3.7, 0.49999, 0.5, 254.4999, 254.5, 300.0],
        )
        .unwrap();
        let img = GrayImage::from_matrix(&m).unwrap();
        assert_eq!(img.pixels(), &[0, 0, 1, 254, 255, 255]);
    }

    #[test]
    fn constructor_validates_dimensions() {
        assert_eq!(
            GrayImage::new(0, 4, vec![]).unwrap_err(),
            ImageError::EmptyDimensions { width: 0, height: 4 }
        );
        assert_eq!(
            GrayImage::new(2, 2, vec![1, 2, 3]).unwrap_err(),
            ImageError::BadLength { width: 2, height: 2, len: 3 }
        );
    }

    #[test]
    fn get_set_are_row_major() {
        let mut img = GrayImage::flat(3, 2, 0).unwrap();
        img.set(1, 2, 9);
        assert_eq!(img.get(1, 2), 9);
        assert_eq!(img.pixels()[5], 9);
    }
}
