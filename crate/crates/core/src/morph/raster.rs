//! Float RGB raster images in [0,1] with PNG interchange.

use std::path::Path;

use crate::error::{MiiError, Result};

pub const CHANNELS: usize = 3;

/// Row-major float RGB image; every sample stays in [0,1] after any
/// operation (constructors and writes clamp).
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(MiiError::InvalidParameter(
                "image dimensions must be positive".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            data: vec![0.0; width * height * CHANNELS],
        })
    }

    pub fn from_data(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(MiiError::InvalidParameter(
                "image dimensions must be positive".into(),
            ));
        }
        if data.len() != width * height * CHANNELS {
            return Err(MiiError::ShapeMismatch(format!(
                "expected {} samples, got {}",
                width * height * CHANNELS,
                data.len()
            )));
        }
        let data = data
            .into_iter()
            .map(|v| if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 })
            .collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * CHANNELS + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * CHANNELS + c] = v.clamp(0.0, 1.0);
    }

    /// Bilinear sample at a fractional position with edge clamping.
    pub fn sample_bilinear(&self, x: f64, y: f64, c: usize) -> f64 {
        let clamp_x = |v: isize| v.clamp(0, self.width as isize - 1) as usize;
        let clamp_y = |v: isize| v.clamp(0, self.height as isize - 1) as usize;
        let x0f = x.floor();
        let y0f = y.floor();
        let fx = x - x0f;
        let fy = y - y0f;
        let x0 = clamp_x(x0f as isize);
        let x1 = clamp_x(x0f as isize + 1);
        let y0 = clamp_y(y0f as isize);
        let y1 = clamp_y(y0f as isize + 1);
        let top = self.get(x0, y0, c) * (1.0 - fx) + self.get(x1, y0, c) * fx;
        let bot = self.get(x0, y1, c) * (1.0 - fx) + self.get(x1, y1, c) * fx;
        top * (1.0 - fy) + bot * fy
    }

    /// Largest per-sample absolute difference; images must be shape-equal.
    pub fn max_abs_diff(&self, other: &RasterImage) -> Result<f64> {
        if self.width != other.width || self.height != other.height {
            return Err(MiiError::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// 8-bit PNG load; samples map to [0,1] by /255.
    pub fn load_png<P: AsRef<Path>>(path: P) -> Result<Self> {
        let img = image::open(path.as_ref())
            .map_err(|e| MiiError::Format(format!("png read failed: {e}")))?
            .to_rgb8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let data = img.as_raw().iter().map(|&b| b as f64 / 255.0).collect();
        Self::from_data(w, h, data)
    }

    /// 8-bit PNG save; samples map back by round(v·255) with clamping.
    pub fn save_png<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let bytes: Vec<u8> = self
            .data
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect();
        let img: image::RgbImage =
            image::ImageBuffer::from_raw(self.width as u32, self.height as u32, bytes)
                .expect("buffer length matches dimensions");
        img.save(path.as_ref())
            .map_err(|e| MiiError::Format(format!("png write failed: {e}")))
    }
}
