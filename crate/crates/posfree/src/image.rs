//! HDR RGB raster, PFM serialization and image error metrics.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("malformed PFM header: {0}")]
    BadHeader(String),
    #[error("big-endian PFM files (positive scale {0}) are not supported")]
    BigEndian(f32),
    #[error("truncated PFM payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
}

/// Row-major RGB image, top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize) -> Self {
        ImageBuffer { width, height, data: vec![0.0; width * height * 3] }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: &[[f32; 3]]) -> Self {
        assert_eq!(pixels.len(), width * height, "pixel count does not match dimensions");
        ImageBuffer { width, height, data: pixels.iter().flatten().copied().collect() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> [f32; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: usize, y: usize, rgb: [f32; 3]) {
        let i = 3 * (y * self.width + x);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Interleaved channel data.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> ImageBuffer {
        ImageBuffer { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn is_finite_non_negative(&self) -> bool {
        self.data.iter().all(|v| v.is_finite() && *v >= 0.0)
    }

    pub fn to_pfm_bytes(&self) -> Vec<u8> {
        let mut out = format!("PF\n{} {}\n-1.0\n", self.width, self.height).into_bytes();
        out.reserve(self.data.len() * 4);
        for y in (0..self.height).rev() {
            let row = &self.data[3 * y * self.width..3 * (y + 1) * self.width];
            for v in row {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_pfm_bytes(bytes: &[u8]) -> Result<ImageBuffer, ImageError> {
        let mut pos = 0;
        let mut next_token = || -> Result<String, ImageError> {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(ImageError::BadHeader("unexpected end of header".into()));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        let magic = next_token()?;
        if magic != "PF" {
            return Err(ImageError::BadHeader(format!("expected magic 'PF', found '{magic}'")));
        }
        let parse_dim = |s: String| s.parse::<usize>().map_err(|_| ImageError::BadHeader(format!("bad dimension '{s}'")));
        let width = parse_dim(next_token()?)?;
        let height = parse_dim(next_token()?)?;
        let scale_token = next_token()?;
        let scale: f32 =
            scale_token.parse().map_err(|_| ImageError::BadHeader(format!("bad scale '{scale_token}'")))?;
        if scale > 0.0 {
            return Err(ImageError::BigEndian(scale));
        }
        if scale == 0.0 || !scale.is_finite() {
            return Err(ImageError::BadHeader(format!("bad scale '{scale_token}'")));
        }
        // exactly one whitespace byte separates the header from the payload
        pos += 1;
        let expected = width * height * 3 * 4;
        let payload = bytes.get(pos..).unwrap_or(&[]);
        if payload.len() < expected {
            return Err(ImageError::Truncated { expected, found: payload.len() });
        }
        let mut img = ImageBuffer::new(width, height);
        for (i, chunk) in payload[..expected].chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            let file_row = i / (3 * width);
            let within = i % (3 * width);
            let y = height - 1 - file_row;
            img.data[3 * y * width + within] = v;
        }
        Ok(img)
    }
}

pub fn write_pfm(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let mut file = fs::File::create(path)?;
    file.write_all(&img.to_pfm_bytes())?;
    Ok(())
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<ImageBuffer, ImageError> {
    ImageBuffer::from_pfm_bytes(&fs::read(path)?)
}

/// Mean squared difference over all pixels and channels.
pub fn mse(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64, ImageError> {
    if a.width != b.width || a.height != b.height {
        return Err(ImageError::DimensionMismatch(a.width, a.height, b.width, b.height));
    }
    if a.data.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = a.data.iter().zip(&b.data).map(|(&x, &y)| (f64::from(x) - f64::from(y)).powi(2)).sum();
    Ok(sum / a.data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_pixel_payload_is_twelve_bytes() {
        let img = ImageBuffer::from_pixels(1, 1, &[[1.0, 2.0, 3.0]]);
        let bytes = img.to_pfm_bytes();
        let header = b"PF\n1 1\n-1.0\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len() - header.len(), 12);
    }

    #[test]
    fn rows_are_stored_bottom_up() {
        let img = ImageBuffer::from_pixels(1, 2, &[[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]]);
        let bytes = img.to_pfm_bytes();
        let payload = &bytes[bytes.len() - 24..];
        assert_eq!(f32::from_le_bytes(payload[0..4].try_into().unwrap()), 2.0);
    }

    #[test]
    fn rejects_big_endian_and_truncation() {
        let err = ImageBuffer::from_pfm_bytes(b"PF\n1 1\n1.0\n\0\0\0\0\0\0\0\0\0\0\0\0").unwrap_err();
        assert!(matches!(err, ImageError::BigEndian(_)));
        assert!(err.to_string().contains("big-endian"));
        let err = ImageBuffer::from_pfm_bytes(b"PF\n2 1\n-1.0\n\0\0\0\0").unwrap_err();
        assert!(matches!(err, ImageError::Truncated { expected: 24, found: 4 }));
        assert!(matches!(ImageBuffer::from_pfm_bytes(b"Pf\n1 1\n-1.0\n"), Err(ImageError::BadHeader(_))));
    }

    #[test]
    fn mse_examples() {
        let a = ImageBuffer::from_pixels(2, 1, &[[0.25, 0.125, 0.75], [1.0, 2.0, 3.0]]);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        let b = a.map(|v| v + 0.5);
        assert!((mse(&a, &b).unwrap() - 0.25).abs() < 1e-12);
        assert!(matches!(mse(&a, &ImageBuffer::new(1, 2)), Err(ImageError::DimensionMismatch(..))));
    }
}
