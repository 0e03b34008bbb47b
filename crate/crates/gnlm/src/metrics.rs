//! Quality assessment: equivalent number of looks over a declared
//! homogeneous region, the ratio image, and the ratio-image structuredness
//! index (RIS).
//!
//! RIS quantizes the ratio image, builds the symmetric gray-level
//! co-occurrence matrix over 4-connected pixel pairs, and compares the
//! Haralick homogeneity `H = sum p(i,j) / (1 + (i-j)^2)` against its value
//! `H0` under independent marginals: `RIS = 100 (H - H0) / H0`. An i.i.d.
//! ratio field scores near zero; structure leaking into the ratio raises it.
//!
//! The printed form of the descriptor divides by `(i-j)^2 - 1`, which is
//! singular whenever adjacent levels co-occur and negative on the diagonal;
//! it is exposed behind [`RisOptions::literal_denominator`] for comparison
//! but the corrected denominator is the default.

use crate::error::{Error, Result};
use crate::image::{Raster, SarImage};
use serde::{Deserialize, Serialize};

/// Axis-aligned region used for ENL estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionRect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl RegionRect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self { x, y, width, height }
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn validate(&self, image_width: usize, image_height: usize) -> Result<()> {
        if self.x + self.width > image_width || self.y + self.height > image_height {
            return Err(Error::Dimension(format!(
                "region {self:?} exceeds image {image_width}x{image_height}"
            )));
        }
        if self.area() < 16 {
            return Err(Error::Config(format!("region area {} is below the 16-pixel minimum", self.area())));
        }
        Ok(())
    }
}

/// Equivalent number of looks `(mean / std)^2` over a region (sample
/// standard deviation). A constant region is degenerate.
pub fn enl(data: &[f64], width: usize, height: usize, region: &RegionRect) -> Result<f64> {
    if data.len() != width * height {
        return Err(Error::Dimension(format!("payload {} does not match {width}x{height}", data.len())));
    }
    region.validate(width, height)?;
    let n = region.area() as f64;
    let mut sum = 0.0;
    for y in region.y..region.y + region.height {
        for x in region.x..region.x + region.width {
            sum += data[y * width + x];
        }
    }
    let mean = sum / n;
    let mut ss = 0.0;
    for y in region.y..region.y + region.height {
        for x in region.x..region.x + region.width {
            let d = data[y * width + x] - mean;
            ss += d * d;
        }
    }
    let variance = ss / (n - 1.0);
    if variance == 0.0 {
        return Err(Error::Degenerate("region is constant, ENL undefined".into()));
    }
    Ok(mean * mean / variance)
}

/// Ratio image `r = z / max(x_hat, epsilon)` between original and filtered
/// data. Under ideal filtering of fully developed speckle it is a field of
/// i.i.d. unit-mean speckle samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioImage {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
    pub epsilon: f64,
}

pub fn ratio_image(original: &SarImage, filtered: &Raster, epsilon: Option<f64>) -> Result<RatioImage> {
    if original.width() != filtered.width || original.height() != filtered.height {
        return Err(Error::Dimension(format!(
            "original {}x{} does not match filtered {}x{}",
            original.width(),
            original.height(),
            filtered.width,
            filtered.height
        )));
    }
    let eps = match epsilon {
        Some(e) => e,
        None => 1e-8 * filtered.mean(),
    };
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be positive and finite, got {eps}")));
    }
    let values = original
        .pixels()
        .iter()
        .zip(&filtered.data)
        .map(|(&z, &xh)| z / xh.max(eps))
        .collect();
    Ok(RatioImage { width: filtered.width, height: filtered.height, values, epsilon: eps })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisOptions {
    /// Number of quantization levels Q (at least 8).
    pub levels: usize,
    /// Use the printed `(i-j)^2 - 1` denominator instead of `1 + (i-j)^2`.
    pub literal_denominator: bool,
}

impl Default for RisOptions {
    fn default() -> Self {
        Self { levels: 64, literal_denominator: false }
    }
}

/// Ratio-image structuredness in percent.
///
/// Quantization is equal-width between the 1st and 99th percentiles with
/// outliers clamped into the end bins, which makes the index invariant to
/// positive rescaling of the ratio.
pub fn ris(ratio: &RatioImage, opts: &RisOptions) -> Result<f64> {
    if opts.levels < 8 {
        return Err(Error::Config(format!("need at least 8 quantization levels, got {}", opts.levels)));
    }
    if ratio.values.len() < 4 {
        return Err(Error::Degenerate("ratio image too small for co-occurrence statistics".into()));
    }
    let q = opts.levels;
    let (lo, hi) = percentile_bounds(&ratio.values, 0.01, 0.99)?;
    if hi <= lo || hi.is_nan() || lo.is_nan() {
        return Err(Error::Degenerate("ratio quantization collapses to a single bin".into()));
    }
    let scale = q as f64 / (hi - lo);
    let quantized: Vec<usize> = ratio
        .values
        .iter()
        .map(|&v| (((v - lo) * scale) as isize).clamp(0, q as isize - 1) as usize)
        .collect();

    // symmetric GLCM over horizontal and vertical neighbors
    let (w, h) = (ratio.width, ratio.height);
    let mut joint = vec![0.0f64; q * q];
    let mut pairs = 0u64;
    for y in 0..h {
        for x in 0..w {
            let a = quantized[y * w + x];
            if x + 1 < w {
                let b = quantized[y * w + x + 1];
                joint[a * q + b] += 1.0;
                joint[b * q + a] += 1.0;
                pairs += 2;
            }
            if y + 1 < h {
                let b = quantized[(y + 1) * w + x];
                joint[a * q + b] += 1.0;
                joint[b * q + a] += 1.0;
                pairs += 2;
            }
        }
    }
    let inv = 1.0 / pairs as f64;
    for p in joint.iter_mut() {
        *p *= inv;
    }
    ris_from_joint(&joint, q, opts.literal_denominator)
}

/// RIS from an explicit joint co-occurrence distribution (row-major `q x q`,
/// summing to one). Exposed so synthetic histograms can be scored directly.
pub fn ris_from_joint(joint: &[f64], q: usize, literal_denominator: bool) -> Result<f64> {
    if joint.len() != q * q {
        return Err(Error::Dimension(format!("joint histogram len {} is not {q}x{q}", joint.len())));
    }
    let total: f64 = joint.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::Domain(format!("joint histogram must sum to 1, got {total}")));
    }
    let weight = |i: usize, j: usize| -> f64 {
        let d = i as f64 - j as f64;
        if literal_denominator {
            1.0 / (d * d - 1.0)
        } else {
            1.0 / (1.0 + d * d)
        }
    };
    let mut marg = vec![0.0f64; q];
    for i in 0..q {
        for j in 0..q {
            marg[i] += joint[i * q + j];
        }
    }
    let mut h_joint = 0.0;
    let mut h_indep = 0.0;
    for i in 0..q {
        for j in 0..q {
            let wij = weight(i, j);
            h_joint += joint[i * q + j] * wij;
            h_indep += marg[i] * marg[j] * wij;
        }
    }
    Ok(100.0 * (h_joint - h_indep) / h_indep)
}

fn percentile_bounds(values: &[f64], p_lo: f64, p_hi: f64) -> Result<(f64, f64)> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("ratio image contains non-finite values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok((percentile(&sorted, p_lo), percentile(&sorted, p_hi)))
}

/// Linear-interpolation percentile of pre-sorted data.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = p * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
