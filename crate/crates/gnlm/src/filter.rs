//! Guided patch-wise nonlocal means.
//!
//! For every anchor `t` on the anchor grid, candidate patches inside a
//! `search_side x search_side` window are scored with the normalized SAR
//! distance `d_S` and the optical distance `d_O`. Candidates with
//! `d_S < T` form the reliable set; if more than `S0` survive, the `S0`
//! with smallest optical distance are kept. Weights follow
//!
//! ```text
//! w(s, t) = C exp{ -lambda [ gamma d_S(s,t) + (1 - gamma) d_O(s,t) ] }
//! ```
//!
//! normalized to sum one over the surviving set, and the whole target patch
//! is estimated at once: `x_hat(t + k) = sum_s w(s,t) z(s + k)`. Overlapping
//! patch estimates are aggregated by uniform averaging. The output is a
//! convex combination of (clamped) SAR input values only; the guide shapes
//! the weights and the ranking but never enters the average, so swapping the
//! guide can never push a pixel outside the range of its SAR contributors.
//! Note the `S0` ranking uses optical distances even at `gamma = 1`; full
//! guide independence additionally needs an inactive cap (`s0 = None`).
//!
//! The anchor's own patch has `d_S = 0` and always survives, so the
//! estimator is total; an anchor whose reliable set is just itself copies
//! the noisy patch through and is flagged in the unfiltered mask.
//!
//! # Determinism
//!
//! Anchor rows are processed as independent read-only tasks; each row
//! accumulates into a private strip which is merged in row order afterwards,
//! so outputs are bit-identical for any worker count.

use crate::distance::{optical_patch_distance, sar_patch_distance, PatchGeometry};
use crate::error::{Error, Result};
use crate::image::{OpticalGuide, Raster, SarImage};
use crate::stats::{distance_moments, DistanceStats, SpeckleModel};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Reliability threshold: either `T = 1 + k sigma_P` resolved from the
/// speckle statistics, or an explicit value (possibly infinite, which
/// disables the test).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSpec {
    KSigma(f64),
    Absolute(f64),
}

impl ThresholdSpec {
    pub fn resolve(&self, stats: &DistanceStats, patch_pixels: usize) -> f64 {
        match *self {
            ThresholdSpec::Absolute(t) => t,
            ThresholdSpec::KSigma(k) => {
                1.0 + k * stats.std() / (stats.mean * (patch_pixels as f64).sqrt())
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ThresholdSpec::Absolute(t) => {
                if t > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!("threshold must be positive, got {t}")))
                }
            }
            ThresholdSpec::KSigma(k) => {
                if k >= 0.0 && k.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config(format!("k-sigma multiplier must be nonnegative, got {k}")))
                }
            }
        }
    }
}

impl Serialize for ThresholdSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ThresholdSpec", 2)?;
        match self {
            ThresholdSpec::KSigma(k) => {
                s.serialize_field("kind", "k_sigma")?;
                s.serialize_field("value", k)?;
            }
            ThresholdSpec::Absolute(t) if t.is_finite() => {
                s.serialize_field("kind", "absolute")?;
                s.serialize_field("value", t)?;
            }
            ThresholdSpec::Absolute(_) => {
                s.serialize_field("kind", "absolute")?;
                s.serialize_field("value", "inf")?;
            }
        }
        s.end()
    }
}

/// All G-NLM knobs. `sharp()` is the default configuration
/// (`T = 1 + 2 sigma`, `S0 = 256`, `lambda = 0.002`, `gamma = 0.15`);
/// `smooth()` is the conservative variant with an inactive cap and
/// `lambda = 0.004`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterConfig {
    pub patch_side: usize,
    pub search_side: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub threshold: ThresholdSpec,
    /// Maximum number of surviving predictors; `None` keeps all of them.
    pub s0: Option<usize>,
    pub anchor_step: usize,
    /// Clamp applied to intensities before log-distances;
    /// `None` resolves to `1e-8 x mean(image)`.
    pub intensity_floor: Option<f64>,
}

impl FilterConfig {
    pub fn sharp() -> Self {
        Self {
            patch_side: 8,
            search_side: 39,
            lambda: 0.002,
            gamma: 0.15,
            threshold: ThresholdSpec::KSigma(2.0),
            s0: Some(256),
            anchor_step: 1,
            intensity_floor: None,
        }
    }

    pub fn smooth() -> Self {
        Self { lambda: 0.004, s0: None, ..Self::sharp() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_side == 0 {
            return Err(Error::Config("patch side must be positive".into()));
        }
        if self.search_side.is_multiple_of(2) {
            return Err(Error::Config(format!("search side must be odd, got {}", self.search_side)));
        }
        if self.patch_side > self.search_side {
            return Err(Error::Config(format!(
                "patch side {} exceeds search side {}",
                self.patch_side, self.search_side
            )));
        }
        if let Some(s0) = self.s0 {
            let s = self.search_side * self.search_side;
            if s0 == 0 || s0 > s {
                return Err(Error::Config(format!("s0 must lie in [1, {s}], got {s0}")));
            }
        }
        if self.anchor_step == 0 || self.anchor_step > self.patch_side {
            return Err(Error::Config(format!(
                "anchor step must lie in [1, patch side {}], got {}",
                self.patch_side, self.anchor_step
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma must lie in [0, 1], got {}", self.gamma)));
        }
        if let Some(f) = self.intensity_floor {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Config(format!("intensity floor must be positive, got {f}")));
            }
        }
        self.threshold.validate()
    }
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self::sharp()
    }
}

/// One scored candidate of a predictor set.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub pos: (usize, usize),
    pub d_sar: f64,
    pub d_opt: f64,
    /// `d_S < T`.
    pub passed_test: bool,
    /// Passed the test but was dropped by the S0 cap.
    pub capped: bool,
    /// Normalized weight; zero for rejected or capped candidates.
    pub weight: f64,
}

impl Candidate {
    pub fn survives(&self) -> bool {
        self.passed_test && !self.capped
    }
}

/// All candidates of one anchor with their distances, flags and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorSet {
    pub anchor: (usize, usize),
    pub candidates: Vec<Candidate>,
}

impl PredictorSet {
    pub fn survivors(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(|c| c.survives())
    }

    /// |Omega'|: candidates passing the reliability test.
    pub fn reliable_count(&self) -> usize {
        self.candidates.iter().filter(|c| c.passed_test).count()
    }
}

/// Filter result: the despeckled raster plus per-anchor diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    pub filtered: Raster,
    /// |Omega'(t)| at each anchor position, 0 where no anchor sits.
    pub predictor_count_map: Vec<u32>,
    /// Anchors whose reliable set is only themselves.
    pub unfiltered_mask: Vec<bool>,
}

/// Candidate anchor positions inside the search window centered on `anchor`,
/// clipped so every candidate patch lies fully inside the image, in raster
/// order. Always contains the anchor itself.
pub fn candidate_offsets(
    anchor: (usize, usize),
    config: &FilterConfig,
    width: usize,
    height: usize,
) -> Result<Vec<(usize, usize)>> {
    config.validate()?;
    let ps = config.patch_side;
    let geom = PatchGeometry::new(ps)?;
    if !geom.fits(anchor, width, height) {
        return Err(Error::Dimension(format!(
            "anchor {anchor:?} with patch side {ps} exceeds {width}x{height}"
        )));
    }
    let half = (config.search_side - 1) / 2;
    let x_lo = anchor.0.saturating_sub(half);
    let x_hi = (anchor.0 + half).min(width - ps);
    let y_lo = anchor.1.saturating_sub(half);
    let y_hi = (anchor.1 + half).min(height - ps);
    let mut out = Vec::with_capacity((x_hi - x_lo + 1) * (y_hi - y_lo + 1));
    for y in y_lo..=y_hi {
        for x in x_lo..=x_hi {
            out.push((x, y));
        }
    }
    Ok(out)
}

/// Anchor coordinates along one dimension: the `anchor_step` grid, with the
/// last anchor clamped to touch the border so every pixel is covered.
pub(crate) fn anchor_positions(dim: usize, patch_side: usize, step: usize) -> Vec<usize> {
    let last = dim - patch_side;
    let mut v: Vec<usize> = (0..=last).step_by(step).collect();
    if *v.last().expect("at least one anchor") != last {
        v.push(last);
    }
    v
}

/// Keep the `s0` best survivors ranked by ascending `d_O`, ties by ascending
/// `d_S`, then candidate order. `survivors` holds `(d_opt, d_sar, index)` in
/// candidate order; the kept entries are returned in candidate order too.
fn apply_cap(survivors: &mut Vec<(f64, f64, u32)>, s0: usize) {
    if survivors.len() > s0 {
        survivors.select_nth_unstable_by(s0 - 1, |a, b| {
            a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2))
        });
        survivors.truncate(s0);
        survivors.sort_unstable_by_key(|t| t.2);
    }
}

/// Normalized weights for survivors, in the order given. The exponent is
/// shifted by its minimum so the normalizing sum never underflows.
fn normalized_weights(survivors: &[(f64, f64, u32)], lambda: f64, gamma: f64, out: &mut Vec<f64>) {
    out.clear();
    let mut vmin = f64::INFINITY;
    for &(d_opt, d_sar, _) in survivors {
        let v = gamma * d_sar + (1.0 - gamma) * d_opt;
        if v < vmin {
            vmin = v;
        }
    }
    let mut sum = 0.0;
    for &(d_opt, d_sar, _) in survivors {
        let v = gamma * d_sar + (1.0 - gamma) * d_opt;
        let raw = (-lambda * (v - vmin)).exp();
        out.push(raw);
        sum += raw;
    }
    let inv = 1.0 / sum;
    for w in out.iter_mut() {
        *w *= inv;
    }
}

/// Score every candidate of one anchor: distances, reliability test, S0 cap
/// and normalized weights. Diagnostic path; [`filter`] computes the same
/// quantities with a sliding-sum engine. Expects strictly positive pixels
/// (the filter clamps before calling, see `SarImage::with_intensity_floor`).
pub fn select_predictors(
    sar: &SarImage,
    guide: &OpticalGuide,
    anchor: (usize, usize),
    config: &FilterConfig,
    stats: &DistanceStats,
) -> Result<PredictorSet> {
    if guide.width() != sar.width() || guide.height() != sar.height() {
        return Err(Error::Dimension(format!(
            "guide {}x{} does not match SAR {}x{}",
            guide.width(),
            guide.height(),
            sar.width(),
            sar.height()
        )));
    }
    let positions = candidate_offsets(anchor, config, sar.width(), sar.height())?;
    let geom = PatchGeometry::new(config.patch_side)?;
    let t_thr = config.threshold.resolve(stats, geom.pixel_count());

    let mut candidates = Vec::with_capacity(positions.len());
    let mut survivors: Vec<(f64, f64, u32)> = Vec::new();
    for (idx, &pos) in positions.iter().enumerate() {
        let d_sar = sar_patch_distance(sar, pos, anchor, geom, stats.mean)?;
        let d_opt = optical_patch_distance(guide, pos, anchor, geom)?;
        let passed = d_sar < t_thr;
        if passed {
            survivors.push((d_opt, d_sar, idx as u32));
        }
        candidates.push(Candidate { pos, d_sar, d_opt, passed_test: passed, capped: false, weight: 0.0 });
    }

    let s0 = config.s0.unwrap_or(usize::MAX);
    let reliable = survivors.len();
    apply_cap(&mut survivors, s0);
    if survivors.len() < reliable {
        let kept: std::collections::HashSet<u32> = survivors.iter().map(|t| t.2).collect();
        for (idx, c) in candidates.iter_mut().enumerate() {
            if c.passed_test && !kept.contains(&(idx as u32)) {
                c.capped = true;
            }
        }
    }

    let mut weights = Vec::new();
    normalized_weights(&survivors, config.lambda, config.gamma, &mut weights);
    for (&(_, _, idx), &w) in survivors.iter().zip(&weights) {
        candidates[idx as usize].weight = w;
    }
    Ok(PredictorSet { anchor, candidates })
}

struct RowResult {
    strip_sum: Vec<f64>,
    strip_cnt: Vec<u32>,
    counts: Vec<u32>,
    unfiltered: Vec<bool>,
}

/// Run the guided nonlocal means over the whole image.
pub fn filter(sar: &SarImage, guide: &OpticalGuide, config: &FilterConfig) -> Result<FilterOutput> {
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
    let ps = config.patch_side;
    if ps > w || ps > h {
        return Err(Error::Dimension(format!("patch side {ps} exceeds image {w}x{h}")));
    }

    let model = SpeckleModel::new(sar.looks())?;
    let stats = distance_moments(model);
    let n = (ps * ps) as f64;
    let t_thr = config.threshold.resolve(&stats, ps * ps);
    let floor = config.intensity_floor.unwrap_or(1e-8 * sar.mean());
    let clamped = sar.with_intensity_floor(floor)?;
    let z = clamped.pixels();
    let s0 = config.s0.unwrap_or(usize::MAX);
    let (lambda, gamma) = (config.lambda, config.gamma);
    let half = ((config.search_side - 1) / 2) as i64;

    let xs = anchor_positions(w, ps, config.anchor_step);
    let ys = anchor_positions(h, ps, config.anchor_step);
    let offsets: Vec<(i64, i64)> = (-half..=half)
        .flat_map(|dy| (-half..=half).map(move |dx| (dy, dx)))
        .collect();
    let n_off = offsets.len();
    let bands: Vec<&[f64]> = (0..guide.bands()).map(|b| guide.plane(b)).collect();
    let mu_n = stats.mean * n;
    let mn = bands.len() as f64 * n;

    let rows: Vec<RowResult> = ys
        .par_iter()
        .map(|&y| {
            let nx = xs.len();
            let mut d_sar = vec![f64::INFINITY; nx * n_off];
            let mut d_opt = vec![0.0f64; nx * n_off];
            let mut col_sar = vec![0.0f64; w];
            let mut col_opt = vec![0.0f64; w];

            for (oi, &(dy, dx)) in offsets.iter().enumerate() {
                if dy == 0 && dx == 0 {
                    for ax in 0..nx {
                        d_sar[ax * n_off + oi] = 0.0;
                    }
                    continue;
                }
                let sy = y as i64 + dy;
                if sy < 0 || sy as usize + ps > h {
                    continue;
                }
                let sy = sy as usize;
                let ax_lo = (-dx).max(0) as usize;
                let ax_hi_signed = (w - ps) as i64 - dx.max(0);
                if ax_hi_signed < ax_lo as i64 {
                    continue;
                }
                let ax_hi = ax_hi_signed as usize;

                for u in ax_lo..=(ax_hi + ps - 1) {
                    let su = (u as i64 + dx) as usize;
                    let mut ssum = 0.0;
                    for ky in 0..ps {
                        let a = z[(y + ky) * w + u];
                        let b = z[(sy + ky) * w + su];
                        ssum += ((a + b) / (2.0 * (a * b).sqrt())).ln();
                    }
                    col_sar[u] = ssum;
                    let mut osum = 0.0;
                    for plane in &bands {
                        for ky in 0..ps {
                            let diff = plane[(y + ky) * w + u] - plane[(sy + ky) * w + su];
                            osum += diff * diff;
                        }
                    }
                    col_opt[u] = osum;
                }
                for (ax, &x) in xs.iter().enumerate() {
                    if x < ax_lo || x > ax_hi {
                        continue;
                    }
                    let mut ssum = 0.0;
                    let mut osum = 0.0;
                    for u in x..x + ps {
                        ssum += col_sar[u];
                        osum += col_opt[u];
                    }
                    d_sar[ax * n_off + oi] = ssum / mu_n;
                    d_opt[ax * n_off + oi] = osum / mn;
                }
            }

            let mut strip_sum = vec![0.0f64; ps * w];
            let mut strip_cnt = vec![0u32; ps * w];
            let mut counts = vec![0u32; nx];
            let mut unfiltered = vec![false; nx];
            let mut survivors: Vec<(f64, f64, u32)> = Vec::with_capacity(n_off);
            let mut weights: Vec<f64> = Vec::with_capacity(n_off);
            let mut est = vec![0.0f64; ps * ps];

            for (ax, &x) in xs.iter().enumerate() {
                survivors.clear();
                let row_s = &d_sar[ax * n_off..(ax + 1) * n_off];
                let row_o = &d_opt[ax * n_off..(ax + 1) * n_off];
                for oi in 0..n_off {
                    if row_s[oi] < t_thr {
                        survivors.push((row_o[oi], row_s[oi], oi as u32));
                    }
                }
                counts[ax] = survivors.len() as u32;
                unfiltered[ax] = survivors.len() == 1;
                apply_cap(&mut survivors, s0);
                normalized_weights(&survivors, lambda, gamma, &mut weights);

                est.fill(0.0);
                for (&wgt, &(_, _, oi)) in weights.iter().zip(survivors.iter()) {
                    let (dy, dx) = offsets[oi as usize];
                    let sy = (y as i64 + dy) as usize;
                    let sx = (x as i64 + dx) as usize;
                    for ky in 0..ps {
                        let src = &z[(sy + ky) * w + sx..][..ps];
                        let dst = &mut est[ky * ps..][..ps];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += wgt * s;
                        }
                    }
                }
                for ky in 0..ps {
                    let src = &est[ky * ps..][..ps];
                    let dst_s = &mut strip_sum[ky * w + x..][..ps];
                    let dst_c = &mut strip_cnt[ky * w + x..][..ps];
                    for i in 0..ps {
                        dst_s[i] += src[i];
                        dst_c[i] += 1;
                    }
                }
            }
            RowResult { strip_sum, strip_cnt, counts, unfiltered }
        })
        .collect();

    // Merge per-row strips in row order: fixed summation order regardless of
    // how the rows were scheduled.
    let mut acc = vec![0.0f64; w * h];
    let mut cnt = vec![0u32; w * h];
    let mut count_map = vec![0u32; w * h];
    let mut mask = vec![false; w * h];
    for (row, &y) in rows.iter().zip(&ys) {
        for ky in 0..ps {
            let src_s = &row.strip_sum[ky * w..][..w];
            let src_c = &row.strip_cnt[ky * w..][..w];
            let dst_s = &mut acc[(y + ky) * w..][..w];
            let dst_c = &mut cnt[(y + ky) * w..][..w];
            for i in 0..w {
                dst_s[i] += src_s[i];
                dst_c[i] += src_c[i];
            }
        }
        for (ax, &x) in xs.iter().enumerate() {
            count_map[y * w + x] = row.counts[ax];
            mask[y * w + x] = row.unfiltered[ax];
        }
    }

    debug_assert!(cnt.iter().all(|&c| c > 0), "anchor grid must cover every pixel");
    let data: Vec<f64> = acc.iter().zip(&cnt).map(|(&s, &c)| s / c as f64).collect();
    Ok(FilterOutput {
        filtered: Raster::new(w, h, data)?,
        predictor_count_map: count_map,
        unfiltered_mask: mask,
    })
}
