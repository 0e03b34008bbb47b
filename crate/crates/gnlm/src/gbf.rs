//! Pixel-wise generalized bilateral filter, the earlier optical-guided
//! method kept as a comparison baseline.
//!
//! Weights over a square window combine a Gaussian spatial term with
//! amplitude distances in both domains:
//!
//! ```text
//! w(s, t) ~ exp{ -alpha ||s - t||^2 - lambda_opt d_O[o(s), o(t)] - lambda_sar d_S[z(s), z(t)] }
//! ```
//!
//! `d_O` is the squared Euclidean distance across bands at the two single
//! pixels and `d_S` is the pixel-wise SAR log-distance. With
//! `lambda_opt = 0` this reduces to a plain SAR-domain bilateral filter;
//! with `alpha = lambda_sar = 0` the weights depend on the guide alone.

use crate::error::{Error, Result};
use crate::image::{OpticalGuide, Raster, SarImage};
use rayon::prelude::*;
use serde::Serialize;

/// Baseline filter knobs. The default window and decay values were chosen on
/// the synthetic simulator (the original work tuned them on training data
/// without publishing values).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GbfConfig {
    pub window_side: usize,
    pub alpha: f64,
    pub lambda_opt: f64,
    pub lambda_sar: f64,
    pub intensity_floor: Option<f64>,
}

impl Default for GbfConfig {
    fn default() -> Self {
        Self { window_side: 15, alpha: 0.04, lambda_opt: 10.0, lambda_sar: 3.0, intensity_floor: None }
    }
}

impl GbfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_side == 0 || self.window_side.is_multiple_of(2) {
            return Err(Error::Config(format!("window side must be odd, got {}", self.window_side)));
        }
        for (name, v) in [("alpha", self.alpha), ("lambda_opt", self.lambda_opt), ("lambda_sar", self.lambda_sar)]
        {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be nonnegative and finite, got {v}")));
            }
        }
        if self.alpha == 0.0 && self.lambda_opt == 0.0 && self.lambda_sar == 0.0 {
            return Err(Error::Config("at least one of alpha, lambda_opt, lambda_sar must be positive".into()));
        }
        if let Some(f) = self.intensity_floor {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Config(format!("intensity floor must be positive, got {f}")));
            }
        }
        Ok(())
    }
}

/// Run the generalized bilateral filter. Rows are independent, so the output
/// is deterministic for any worker count.
pub fn filter_gbf(sar: &SarImage, guide: &OpticalGuide, config: &GbfConfig) -> Result<Raster> {
    config.validate()?;
    let (w, h) = (sar.width(), sar.height());
    if guide.width() != w || guide.height() != h {
        return Err(Error::Dimension(format!(
            "guide {}x{} does not match SAR {}x{}",
            guide.width(),
            guide.height(),
            w,
            h
        )));
    }
    let floor = config.intensity_floor.unwrap_or(1e-8 * sar.mean());
    let clamped = sar.with_intensity_floor(floor)?;
    let z = clamped.pixels();
    let bands: Vec<&[f64]> = (0..guide.bands()).map(|b| guide.plane(b)).collect();
    let half = (config.window_side / 2) as i64;
    let (alpha, lo, ls) = (config.alpha, config.lambda_opt, config.lambda_sar);

    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|ty| {
            let mut out_row = vec![0.0f64; w];
            let mut exponents: Vec<f64> = Vec::with_capacity(config.window_side * config.window_side);
            let mut values: Vec<f64> = Vec::with_capacity(exponents.capacity());
            for tx in 0..w {
                let zt = z[ty * w + tx];
                exponents.clear();
                values.clear();
                let y_lo = (ty as i64 - half).max(0) as usize;
                let y_hi = (ty as i64 + half).min(h as i64 - 1) as usize;
                let x_lo = (tx as i64 - half).max(0) as usize;
                let x_hi = (tx as i64 + half).min(w as i64 - 1) as usize;
                for sy in y_lo..=y_hi {
                    for sx in x_lo..=x_hi {
                        let zs = z[sy * w + sx];
                        let ddx = sx as f64 - tx as f64;
                        let ddy = sy as f64 - ty as f64;
                        let mut e = alpha * (ddx * ddx + ddy * ddy);
                        if lo > 0.0 {
                            let mut d_o = 0.0;
                            for plane in &bands {
                                let diff = plane[sy * w + sx] - plane[ty * w + tx];
                                d_o += diff * diff;
                            }
                            e += lo * d_o;
                        }
                        if ls > 0.0 {
                            e += ls * ((zs + zt) / (2.0 * (zs * zt).sqrt())).ln();
                        }
                        exponents.push(e);
                        values.push(zs);
                    }
                }
                let emin = exponents.iter().fold(f64::INFINITY, |m, &e| m.min(e));
                let mut wsum = 0.0;
                let mut acc = 0.0;
                for (&e, &v) in exponents.iter().zip(&values) {
                    let wgt = (-(e - emin)).exp();
                    wsum += wgt;
                    acc += wgt * v;
                }
                out_row[tx] = acc / wsum;
            }
            out_row
        })
        .collect();

    let mut data = Vec::with_capacity(w * h);
    for row in rows {
        data.extend_from_slice(&row);
    }
    Raster::new(w, h, data)
}
