//! Pixel-wise and patch-wise dissimilarities between SAR patches and between
//! optical patches. Natural logarithm throughout.

use crate::error::{Error, Result};
use crate::image::{OpticalGuide, SarImage};

/// Square patch geometry. The offset set is the `side x side` grid anchored
/// at the patch's top-left corner, so a patch at anchor `(x, y)` covers
/// `[x, x + side) x [y, y + side)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchGeometry {
    side: usize,
}

impl PatchGeometry {
    pub fn new(side: usize) -> Result<Self> {
        if side == 0 {
            return Err(Error::Config("patch side must be positive".into()));
        }
        Ok(Self { side })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// N = side^2.
    pub fn pixel_count(&self) -> usize {
        self.side * self.side
    }

    /// Offsets `(dx, dy)` in row-major order.
    pub fn offsets(&self) -> impl Iterator<Item = (usize, usize)> {
        let side = self.side;
        (0..side).flat_map(move |dy| (0..side).map(move |dx| (dx, dy)))
    }

    /// Whether the patch anchored at `(x, y)` lies fully inside `width x height`.
    pub fn fits(&self, anchor: (usize, usize), width: usize, height: usize) -> bool {
        anchor.0 + self.side <= width && anchor.1 + self.side <= height
    }
}

/// Pixel-wise SAR distance `D = ln[(z1 + z2) / (2 sqrt(z1 z2))]`.
///
/// Symmetric, zero iff the intensities coincide. Zero or negative intensities
/// are a domain error; the filters clamp their input to a positive floor
/// before calling in here.
pub fn pixel_distance(z1: f64, z2: f64) -> Result<f64> {
    if !(z1 > 0.0 && z1.is_finite()) || !(z2 > 0.0 && z2.is_finite()) {
        return Err(Error::Domain(format!(
            "pixel distance requires positive finite intensities, got {z1} and {z2}"
        )));
    }
    Ok(((z1 + z2) / (2.0 * (z1 * z2).sqrt())).ln())
}

/// Speckle-free distance `D_SF(rho) = ln(rho/2 + 1/(2 rho))` between pixels
/// whose clean amplitude ratio is `rho` (intensity ratio `rho^2`).
/// Minimum 0 at `rho = 1`, invariant under `rho -> 1/rho`.
pub fn speckle_free_distance(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("amplitude ratio must be positive and finite, got {rho}")));
    }
    Ok((0.5 * rho + 0.5 / rho).ln())
}

/// Normalized SAR patch distance between the patches anchored at `s` and `t`:
/// `d_S(s, t) = 1/(mu_D N) sum_k D(z(s+k), z(t+k))`.
///
/// `mu_d` is the single-pixel mean from [`crate::stats::distance_moments`]
/// for the image's look count; the normalization gives unit expected distance
/// between homogeneous patches. Identical anchors return exactly zero.
pub fn sar_patch_distance(
    sar: &SarImage,
    s: (usize, usize),
    t: (usize, usize),
    geom: PatchGeometry,
    mu_d: f64,
) -> Result<f64> {
    if !(mu_d > 0.0 && mu_d.is_finite()) {
        return Err(Error::Domain(format!("mu_D must be positive and finite, got {mu_d}")));
    }
    let (w, h) = (sar.width(), sar.height());
    if !geom.fits(s, w, h) || !geom.fits(t, w, h) {
        return Err(Error::Dimension(format!(
            "patch of side {} at {s:?} or {t:?} exceeds {w}x{h}",
            geom.side()
        )));
    }
    if s == t {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (dx, dy) in geom.offsets() {
        sum += pixel_distance(sar.get(s.0 + dx, s.1 + dy), sar.get(t.0 + dx, t.1 + dy))?;
    }
    Ok(sum / (mu_d * geom.pixel_count() as f64))
}

/// Normalized optical patch distance
/// `d_O(s, t) = 1/(M N) sum_i sum_k [o_i(s+k) - o_i(t+k)]^2`.
pub fn optical_patch_distance(
    guide: &OpticalGuide,
    s: (usize, usize),
    t: (usize, usize),
    geom: PatchGeometry,
) -> Result<f64> {
    let (w, h) = (guide.width(), guide.height());
    if !geom.fits(s, w, h) || !geom.fits(t, w, h) {
        return Err(Error::Dimension(format!(
            "patch of side {} at {s:?} or {t:?} exceeds guide {w}x{h}",
            geom.side()
        )));
    }
    let mut sum = 0.0;
    for band in 0..guide.bands() {
        let plane = guide.plane(band);
        for (dx, dy) in geom.offsets() {
            let a = plane[(s.1 + dy) * w + s.0 + dx];
            let b = plane[(t.1 + dy) * w + t.0 + dx];
            let diff = a - b;
            sum += diff * diff;
        }
    }
    Ok(sum / ((guide.bands() * geom.pixel_count()) as f64))
}
