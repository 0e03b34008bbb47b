//! Synthetic scenes, multiplicative Gamma speckle, and Monte-Carlo sampling
//! of the pixel/patch distance statistics.
//!
//! Scenes are painted region by region in declaration order (later regions
//! win on overlap). Guides render the same geometry as the clean image with
//! fixed per-region band values, except inside declared mismatch rectangles
//! where the guide is replaced by a constant, emulating temporal change
//! between the SAR acquisition and the optical reference.

use crate::distance::pixel_distance;
use crate::error::{Error, Result};
use crate::image::{OpticalGuide, SarImage};
use crate::stats::{distance_moments, SpeckleModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionShape {
    Rect { x: usize, y: usize, width: usize, height: usize },
    /// All columns `x >= from`.
    HalfPlaneCols { from: usize },
    /// All rows `y >= from`.
    HalfPlaneRows { from: usize },
    /// Polyline of `(x, y)` vertices dilated to the given thickness.
    Road { points: Vec<(f64, f64)>, thickness: f64 },
}

impl RegionShape {
    fn contains(&self, x: usize, y: usize) -> bool {
        match self {
            RegionShape::Rect { x: rx, y: ry, width, height } => {
                x >= *rx && x < rx + width && y >= *ry && y < ry + height
            }
            RegionShape::HalfPlaneCols { from } => x >= *from,
            RegionShape::HalfPlaneRows { from } => y >= *from,
            RegionShape::Road { points, thickness } => {
                let p = (x as f64, y as f64);
                let r = 0.5 * thickness;
                points.windows(2).any(|seg| dist_to_segment(p, seg[0], seg[1]) <= r)
                    || (points.len() == 1 && dist2(p, points[0]).sqrt() <= r)
            }
        }
    }
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    dx * dx + dy * dy
}

fn dist_to_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let len2 = dist2(a, b);
    if len2 == 0.0 {
        return dist2(p, a).sqrt();
    }
    let t = (((p.0 - a.0) * (b.0 - a.0) + (p.1 - a.1) * (b.1 - a.1)) / len2).clamp(0.0, 1.0);
    dist2(p, (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub shape: RegionShape,
    /// Clean SAR intensity inside the region.
    pub intensity: f64,
    /// Per-band guide values in [0, 1].
    pub guide: Vec<f64>,
}

/// Bright scatterer multiplying the clean intensity over an
/// `extent x extent` square anchored at `(x, y)`. The default extent of 1 is
/// a single-pixel point target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reflector {
    pub x: usize,
    pub y: usize,
    pub multiplier: f64,
    #[serde(default = "default_extent")]
    pub extent: usize,
}

fn default_extent() -> usize {
    1
}

/// Rectangle where the guide (all bands) is replaced by a constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchRegion {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    pub guide_value: f64,
}

/// Spatially correlated texture overlaid on the rendered guide bands.
///
/// Real optical imagery is never flat; without band texture every same-region
/// candidate ties at zero optical distance and the predictor-cap ranking
/// degenerates to speckle similarity. The texture is white noise smoothed by
/// `smoothing` box-blur passes of the given radius, rescaled to standard
/// deviation `amplitude`, and drawn from the scene stream of the seed passed
/// to [`generate_scene`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuideTexture {
    pub amplitude: f64,
    #[serde(default = "default_texture_radius")]
    pub radius: usize,
    #[serde(default = "default_texture_passes")]
    pub smoothing: usize,
}

fn default_texture_radius() -> usize {
    3
}

fn default_texture_passes() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub regions: Vec<Region>,
    #[serde(default)]
    pub reflectors: Vec<Reflector>,
    #[serde(default)]
    pub mismatch_regions: Vec<MismatchRegion>,
    #[serde(default)]
    pub guide_texture: Option<GuideTexture>,
}

impl SceneSpec {
    pub fn new(width: usize, height: usize, regions: Vec<Region>) -> Self {
        Self { width, height, regions, reflectors: vec![], mismatch_regions: vec![], guide_texture: None }
    }

    pub fn bands(&self) -> usize {
        self.regions.first().map_or(0, |r| r.guide.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config("scene dimensions must be positive".into()));
        }
        if self.regions.is_empty() {
            return Err(Error::Config("scene needs at least one region".into()));
        }
        let bands = self.bands();
        if bands == 0 {
            return Err(Error::Config("regions need at least one guide band".into()));
        }
        for region in &self.regions {
            if !(region.intensity > 0.0 && region.intensity.is_finite()) {
                return Err(Error::Config(format!(
                    "region intensity must be positive, got {}",
                    region.intensity
                )));
            }
            if region.guide.len() != bands {
                return Err(Error::Config("all regions must declare the same number of guide bands".into()));
            }
            if region.guide.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Config("guide values must lie in [0, 1]".into()));
            }
            if let RegionShape::Road { points, thickness } = &region.shape {
                if points.is_empty() || thickness.is_nan() || *thickness <= 0.0 {
                    return Err(Error::Config("road regions need points and positive thickness".into()));
                }
            }
        }
        for r in &self.reflectors {
            if !(r.multiplier > 0.0 && r.multiplier.is_finite()) || r.extent == 0 {
                return Err(Error::Config("reflector needs positive multiplier and extent".into()));
            }
            if r.x + r.extent > self.width || r.y + r.extent > self.height {
                return Err(Error::Config(format!("reflector at ({}, {}) exceeds scene", r.x, r.y)));
            }
        }
        for m in &self.mismatch_regions {
            if m.x + m.width > self.width || m.y + m.height > self.height {
                return Err(Error::Config("mismatch region exceeds scene".into()));
            }
            if !(0.0..=1.0).contains(&m.guide_value) {
                return Err(Error::Config("mismatch guide value must lie in [0, 1]".into()));
            }
        }
        if let Some(t) = &self.guide_texture {
            if !(t.amplitude >= 0.0 && t.amplitude.is_finite()) {
                return Err(Error::Config(format!("texture amplitude must be nonnegative, got {}", t.amplitude)));
            }
        }
        Ok(())
    }
}

/// Zero-mean correlated noise field with unit standard deviation.
fn texture_field(width: usize, height: usize, texture: &GuideTexture, rng: &mut ChaCha8Rng) -> Vec<f64> {
    use rand::Rng;
    let mut field: Vec<f64> = (0..width * height).map(|_| rng.random::<f64>() - 0.5).collect();
    let r = texture.radius;
    if r > 0 {
        let mut tmp = vec![0.0f64; width * height];
        for _ in 0..texture.smoothing {
            // horizontal then vertical box blur
            for y in 0..height {
                for x in 0..width {
                    let lo = x.saturating_sub(r);
                    let hi = (x + r).min(width - 1);
                    let sum: f64 = field[y * width + lo..=y * width + hi].iter().sum();
                    tmp[y * width + x] = sum / (hi - lo + 1) as f64;
                }
            }
            for x in 0..width {
                for y in 0..height {
                    let lo = y.saturating_sub(r);
                    let hi = (y + r).min(height - 1);
                    let mut sum = 0.0;
                    for yy in lo..=hi {
                        sum += tmp[yy * width + x];
                    }
                    field[y * width + x] = sum / (hi - lo + 1) as f64;
                }
            }
        }
    }
    let n = field.len() as f64;
    let mean = field.iter().sum::<f64>() / n;
    let std = (field.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if std > 0.0 {
        for v in field.iter_mut() {
            *v = (*v - mean) / std;
        }
    }
    field
}

/// Render the clean intensity image and the co-registered guide.
///
/// Regions are painted in order (later wins), reflectors multiplied in
/// afterwards, optional guide texture added per band, and mismatch
/// rectangles overwrite the guide last (they stay exactly constant). Every
/// pixel must be covered by some region. The geometry is fully determined by
/// the scene spec; the seed drives only the texture stream, which is independent
/// of the speckle stream by construction (distinct ChaCha streams). The
/// clean image carries `looks = +inf` (noiseless); [`apply_speckle`] assigns
/// the real look count.
pub fn generate_scene(spec: &SceneSpec, seed: u64) -> Result<(SarImage, OpticalGuide)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let bands = spec.bands();
    let mut clean = vec![f64::NAN; w * h];
    let mut guide = vec![f64::NAN; w * h * bands];

    for y in 0..h {
        for x in 0..w {
            for region in &spec.regions {
                if region.shape.contains(x, y) {
                    clean[y * w + x] = region.intensity;
                    for (b, &val) in region.guide.iter().enumerate() {
                        guide[b * w * h + y * w + x] = val;
                    }
                }
            }
        }
    }
    if let Some(i) = clean.iter().position(|v| v.is_nan()) {
        return Err(Error::Config(format!(
            "scene regions leave pixel ({}, {}) uncovered",
            i % w,
            i / w
        )));
    }

    for r in &spec.reflectors {
        for dy in 0..r.extent {
            for dx in 0..r.extent {
                clean[(r.y + dy) * w + r.x + dx] *= r.multiplier;
            }
        }
    }

    if let Some(texture) = &spec.guide_texture {
        if texture.amplitude > 0.0 {
            for b in 0..bands {
                // one stream per band, all distinct from the speckle stream
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64 + 1);
                let field = texture_field(w, h, texture, &mut rng);
                for (dst, t) in guide[b * w * h..(b + 1) * w * h].iter_mut().zip(field) {
                    *dst = (*dst + texture.amplitude * t).clamp(0.0, 1.0);
                }
            }
        }
    }

    for m in &spec.mismatch_regions {
        for b in 0..bands {
            for dy in 0..m.height {
                for dx in 0..m.width {
                    guide[b * w * h + (m.y + dy) * w + m.x + dx] = m.guide_value;
                }
            }
        }
    }

    let clean = SarImage::new(w, h, f64::INFINITY, clean)?;
    let guide = OpticalGuide::new(w, h, bands, guide)?;
    Ok((clean, guide))
}

/// Multiply the clean image by i.i.d. unit-mean Gamma speckle of shape
/// `looks`. Deterministic given the seed.
pub fn apply_speckle(clean: &SarImage, looks: f64, seed: u64) -> Result<SarImage> {
    let model = SpeckleModel::new(looks)?;
    if clean.pixels().iter().any(|&p| p <= 0.0) {
        return Err(Error::Domain("speckle requires strictly positive clean intensities".into()));
    }
    let gamma = Gamma::new(model.looks(), 1.0 / model.looks())
        .map_err(|e| Error::Domain(format!("gamma sampler: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = clean.pixels().iter().map(|&x| x * gamma.sample(&mut rng)).collect();
    SarImage::new(clean.width(), clean.height(), looks, pixels)
}

/// Monte-Carlo samples of the SAR distance under the constant-ratio
/// hypothesis: pairs are drawn as `(intensity_ratio * u1, u2)` with `u`
/// unit-mean Gamma speckle.
///
/// For `patch_size == 1` the samples are raw pixel distances (mean `mu_D`);
/// for larger patches they are normalized patch distances (unit mean under
/// `intensity_ratio = 1`), matching how the filter consumes them.
pub fn mc_distance_samples(
    looks: f64,
    intensity_ratio: f64,
    patch_size: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let model = SpeckleModel::new(looks)?;
    if !(intensity_ratio > 0.0 && intensity_ratio.is_finite()) {
        return Err(Error::Domain(format!("intensity ratio must be positive, got {intensity_ratio}")));
    }
    if patch_size == 0 {
        return Err(Error::Config("patch size must be positive".into()));
    }
    if n_samples < 10_000 {
        return Err(Error::Config(format!("need at least 10^4 samples, got {n_samples}")));
    }
    let gamma = Gamma::new(model.looks(), 1.0 / model.looks())
        .map_err(|e| Error::Domain(format!("gamma sampler: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norm = if patch_size == 1 {
        1.0
    } else {
        distance_moments(model).mean * patch_size as f64
    };
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let mut sum = 0.0;
        for _ in 0..patch_size {
            let a = intensity_ratio * gamma.sample(&mut rng);
            let b = gamma.sample(&mut rng);
            sum += pixel_distance(a, b)?;
        }
        out.push(sum / norm);
    }
    Ok(out)
}

/// Fixed-width histogram with explicit under/overflow buckets.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn from_samples(samples: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 || hi.is_nan() || lo.is_nan() || hi <= lo {
            return Err(Error::Config("histogram needs bins > 0 and hi > lo".into()));
        }
        let mut counts = vec![0u64; bins];
        let (mut underflow, mut overflow) = (0u64, 0u64);
        let scale = bins as f64 / (hi - lo);
        for &s in samples {
            if s < lo {
                underflow += 1;
            } else if s >= hi {
                overflow += 1;
            } else {
                let b = (((s - lo) * scale) as usize).min(bins - 1);
                counts[b] += 1;
            }
        }
        Ok(Self { lo, hi, counts, underflow, overflow })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    /// Overlap coefficient `sum_b min(p_a(b), p_b(b))` of two histograms over
    /// the same binning (under/overflow included).
    pub fn overlap_coefficient(&self, other: &Histogram) -> Result<f64> {
        if self.counts.len() != other.counts.len() || self.lo != other.lo || self.hi != other.hi {
            return Err(Error::Dimension("histograms must share their binning".into()));
        }
        let (na, nb) = (self.total() as f64, other.total() as f64);
        if na == 0.0 || nb == 0.0 {
            return Err(Error::Degenerate("empty histogram".into()));
        }
        let mut overlap = (self.underflow as f64 / na).min(other.underflow as f64 / nb)
            + (self.overflow as f64 / na).min(other.overflow as f64 / nb);
        for (a, b) in self.counts.iter().zip(&other.counts) {
            overlap += (*a as f64 / na).min(*b as f64 / nb);
        }
        Ok(overlap)
    }
}
