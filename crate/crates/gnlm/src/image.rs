//! Raster containers shared by filtering, simulation, metrics and I/O.
//!
//! All rasters are row-major; coordinates are `(x, y)` with `x` the column
//! and `y` the row. SAR pixels are linear intensities. Optical guides are
//! multi-band with values normalized to `[0, 1]` and stored band-sequential.

use crate::error::{Error, Result};

/// Single-channel nonnegative intensity raster with a nominal look count.
///
/// `looks` is metadata describing the speckle law of the data
/// (`f64::INFINITY` marks a noiseless synthetic image).
#[derive(Debug, Clone, PartialEq)]
pub struct SarImage {
    width: usize,
    height: usize,
    looks: f64,
    pixels: Vec<f64>,
}

impl SarImage {
    pub fn new(width: usize, height: usize, looks: f64, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension("SAR image dimensions must be positive".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::Dimension(format!(
                "pixel count {} does not match {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        if looks.is_nan() || looks <= 0.0 {
            return Err(Error::Domain(format!("look count must be positive, got {looks}")));
        }
        if let Some(bad) = pixels.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::Domain(format!("SAR pixels must be finite and nonnegative, found {bad}")));
        }
        Ok(Self { width, height, looks, pixels })
    }

    pub fn constant(width: usize, height: usize, looks: f64, value: f64) -> Result<Self> {
        Self::new(width, height, looks, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn looks(&self) -> f64 {
        self.looks
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Copy with every pixel clamped to at least `floor`. The filters run on
    /// clamped data because the SAR log-distance is undefined at zero.
    pub fn with_intensity_floor(&self, floor: f64) -> Result<Self> {
        if !(floor > 0.0 && floor.is_finite()) {
            return Err(Error::Domain(format!("intensity floor must be positive and finite, got {floor}")));
        }
        let pixels = self.pixels.iter().map(|&p| p.max(floor)).collect();
        Self::new(self.width, self.height, self.looks, pixels)
    }
}

/// M-band optical raster co-registered with a SAR image, values in `[0, 1]`,
/// stored band-sequential (`plane(b)` is one full row-major image).
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalGuide {
    width: usize,
    height: usize,
    bands: usize,
    planes: Vec<f64>,
}

impl OpticalGuide {
    pub fn new(width: usize, height: usize, bands: usize, planes: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || bands == 0 {
            return Err(Error::Dimension("guide dimensions and band count must be positive".into()));
        }
        if planes.len() != width * height * bands {
            return Err(Error::Dimension(format!(
                "guide payload {} does not match {} bands of {}x{}",
                planes.len(),
                bands,
                width,
                height
            )));
        }
        if let Some(bad) = planes.iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
            return Err(Error::Domain(format!("guide values must lie in [0, 1], found {bad}")));
        }
        Ok(Self { width, height, bands, planes })
    }

    pub fn constant(width: usize, height: usize, bands: usize, value: f64) -> Result<Self> {
        Self::new(width, height, bands, vec![value; width * height * bands])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn plane(&self, band: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.planes[band * n..(band + 1) * n]
    }

    #[inline]
    pub fn get(&self, band: usize, x: usize, y: usize) -> f64 {
        self.planes[band * self.width * self.height + y * self.width + x]
    }
}

/// Plain single-band float raster used for filter outputs and ratio images.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension("raster dimensions must be positive".into()));
        }
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "raster payload {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0.0; width * height] }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}
