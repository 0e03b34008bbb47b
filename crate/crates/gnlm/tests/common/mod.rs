//! Shared test support: a direct nested-loop reference implementation of the
//! guided NLM (the oracle for the optimized engine), contributor bounds for
//! the convex-combination checks, and small helpers.
//!
//! Each test target compiles this module independently and uses a subset of
//! it, so unused-item lints are off.
#![allow(dead_code)]

use gnlm::image::{OpticalGuide, SarImage};
use gnlm::stats::{distance_moments, SpeckleModel};
use gnlm::FilterConfig;
use std::sync::Mutex;

/// Serializes the heavy acceptance criteria so wall-clock measurements are
/// not polluted by sibling tests.
pub static GATE: Mutex<()> = Mutex::new(());

pub fn gate() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

/// Reference output plus per-pixel bounds of every SAR value that
/// contributed to the pixel through any covering patch estimate.
pub struct Reference {
    pub out: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

fn anchor_grid(dim: usize, patch: usize, step: usize) -> Vec<usize> {
    let last = dim - patch;
    let mut v: Vec<usize> = (0..=last).step_by(step).collect();
    if *v.last().unwrap() != last {
        v.push(last);
    }
    v
}

/// Direct nested-loop implementation of the filter semantics: candidate
/// gathering in raster order, reliability test, optical-ranked cap,
/// min-shifted exponential weights, patch estimation and uniform
/// aggregation. No sliding sums, no parallelism.
pub fn filter_reference(sar: &SarImage, guide: &OpticalGuide, config: &FilterConfig) -> Reference {
    let (w, h) = (sar.width(), sar.height());
    let ps = config.patch_side;
    let n = (ps * ps) as f64;
    let model = SpeckleModel::new(sar.looks()).expect("valid looks");
    let stats = distance_moments(model);
    let t_thr = config.threshold.resolve(&stats, ps * ps);
    let floor = config.intensity_floor.unwrap_or(1e-8 * sar.mean());
    let z: Vec<f64> = sar.pixels().iter().map(|&p| p.max(floor)).collect();
    let s0 = config.s0.unwrap_or(usize::MAX);
    let half = (config.search_side - 1) / 2;
    let bands = guide.bands();

    let mut acc = vec![0.0f64; w * h];
    let mut cnt = vec![0u32; w * h];
    let mut lo = vec![f64::INFINITY; w * h];
    let mut hi = vec![f64::NEG_INFINITY; w * h];

    for &ty in &anchor_grid(h, ps, config.anchor_step) {
        for &tx in &anchor_grid(w, ps, config.anchor_step) {
            let mut cands: Vec<(usize, usize, f64, f64)> = Vec::new();
            for sy in ty.saturating_sub(half)..=(ty + half).min(h - ps) {
                for sx in tx.saturating_sub(half)..=(tx + half).min(w - ps) {
                    let mut d_s = 0.0;
                    if (sx, sy) != (tx, ty) {
                        for ky in 0..ps {
                            for kx in 0..ps {
                                let a = z[(sy + ky) * w + sx + kx];
                                let b = z[(ty + ky) * w + tx + kx];
                                d_s += ((a + b) / (2.0 * (a * b).sqrt())).ln();
                            }
                        }
                        d_s /= stats.mean * n;
                    }
                    let mut d_o = 0.0;
                    for band in 0..bands {
                        for ky in 0..ps {
                            for kx in 0..ps {
                                let d = guide.get(band, sx + kx, sy + ky) - guide.get(band, tx + kx, ty + ky);
                                d_o += d * d;
                            }
                        }
                    }
                    d_o /= bands as f64 * n;
                    cands.push((sx, sy, d_s, d_o));
                }
            }

            let mut survivors: Vec<usize> = (0..cands.len()).filter(|&i| cands[i].2 < t_thr).collect();
            if survivors.len() > s0 {
                survivors.sort_by(|&a, &b| {
                    cands[a]
                        .3
                        .total_cmp(&cands[b].3)
                        .then(cands[a].2.total_cmp(&cands[b].2))
                        .then(a.cmp(&b))
                });
                survivors.truncate(s0);
                survivors.sort_unstable();
            }

            let v_of = |i: usize| config.gamma * cands[i].2 + (1.0 - config.gamma) * cands[i].3;
            let vmin = survivors.iter().map(|&i| v_of(i)).fold(f64::INFINITY, f64::min);
            let raws: Vec<f64> = survivors.iter().map(|&i| (-config.lambda * (v_of(i) - vmin)).exp()).collect();
            let wsum: f64 = raws.iter().sum();

            for ky in 0..ps {
                for kx in 0..ps {
                    let p = (ty + ky) * w + tx + kx;
                    let mut est = 0.0;
                    for (&i, &raw) in survivors.iter().zip(&raws) {
                        let (sx, sy, _, _) = cands[i];
                        let v = z[(sy + ky) * w + sx + kx];
                        est += (raw / wsum) * v;
                        lo[p] = lo[p].min(v);
                        hi[p] = hi[p].max(v);
                    }
                    acc[p] += est;
                    cnt[p] += 1;
                }
            }
        }
    }

    let out = acc.iter().zip(&cnt).map(|(&s, &c)| s / c as f64).collect();
    Reference { out, lo, hi }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|&p| (p - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

pub fn sample_std(v: &[f64]) -> f64 {
    variance(v).sqrt()
}

/// PSNR of `data` against `reference` over a rectangle, peak taken from the
/// reference maximum.
pub fn psnr_region(
    data: &[f64],
    reference: &[f64],
    width: usize,
    rect: (usize, usize, usize, usize),
) -> f64 {
    let (x0, y0, rw, rh) = rect;
    let mut mse = 0.0;
    let mut peak: f64 = 0.0;
    for y in y0..y0 + rh {
        for x in x0..x0 + rw {
            let d = data[y * width + x] - reference[y * width + x];
            mse += d * d;
            peak = peak.max(reference[y * width + x]);
        }
    }
    mse /= (rw * rh) as f64;
    10.0 * (peak * peak / mse).log10()
}

/// Column index of the strongest horizontal step in one row.
pub fn max_gradient_col(data: &[f64], width: usize, row: usize) -> usize {
    let mut best = 0;
    let mut best_g = -1.0;
    for x in 0..width - 1 {
        let g = (data[row * width + x + 1] - data[row * width + x]).abs();
        if g > best_g {
            best_g = g;
            best = x;
        }
    }
    best
}
