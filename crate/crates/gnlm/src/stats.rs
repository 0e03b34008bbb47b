//! Statistics of the pixel-wise SAR distance under homogeneous signal, and
//! the reliability-threshold calculus built on them.
//!
//! For two i.i.d. unit-mean Gamma speckle samples `X`, `Y` with shape `L`
//! (the number of looks), the distance `D = ln[(X + Y) / (2 sqrt(X Y))]` has
//! density
//!
//! ```text
//! p_D(d) = C(L) e^{-2 L d} / sqrt(1 - e^{-2 d}),   C(L) = G(2L) / [2^{L-1} G(L)]^2
//! ```
//!
//! with `G` the gamma function, and moments
//!
//! ```text
//! E[D]   = psi0(2L) - psi0(L) - ln 2
//! VAR[D] = psi1(L) / 2 - psi1(2L)
//! ```
//!
//! in terms of the digamma and trigamma functions. The normalized patch
//! distance over `N` pixels then has unit mean and standard deviation
//! `sigma_P = sigma_D / (mu_D sqrt(N))`, which is what the reliability
//! threshold `T = 1 + k sigma_P` is calibrated against.
//!
//! All logarithms are natural.

use crate::error::{Error, Result};
use serde::Serialize;

const LN_2: f64 = std::f64::consts::LN_2;

/// Speckle law of an L-look intensity image: unit-mean Gamma with shape `L`.
/// Non-integer looks are accepted (effective look counts of processed
/// products are rarely integral).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeckleModel {
    looks: f64,
}

impl SpeckleModel {
    pub fn new(looks: f64) -> Result<Self> {
        if !(looks > 0.0 && looks.is_finite()) {
            return Err(Error::Domain(format!("look count must be positive and finite, got {looks}")));
        }
        Ok(Self { looks })
    }

    pub fn looks(&self) -> f64 {
        self.looks
    }
}

/// Mean and variance of the single-pixel distance for one speckle model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceStats {
    /// mu_D in nats.
    pub mean: f64,
    /// sigma_D^2.
    pub variance: f64,
    pub looks: f64,
}

impl DistanceStats {
    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Digamma (order 0) or trigamma (order 1) at `x > 0`.
///
/// Upward recurrence shifts the argument above 10, then a Bernoulli
/// asymptotic series is applied; accurate to well over 10 significant digits.
pub fn polygamma(order: u32, x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("polygamma requires x > 0, got {x}")));
    }
    match order {
        0 => Ok(digamma(x)),
        1 => Ok(trigamma(x)),
        other => Err(Error::Domain(format!("polygamma order {other} not supported (only 0 and 1)"))),
    }
}

const SHIFT_CUTOFF: f64 = 10.0;

fn digamma(x: f64) -> f64 {
    let mut acc = 0.0;
    let mut y = x;
    while y < SHIFT_CUTOFF {
        acc -= 1.0 / y;
        y += 1.0;
    }
    // psi0(y) ~ ln y - 1/(2y) - sum_k B_{2k} / (2k y^{2k})
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    acc + y.ln() - 0.5 * inv - series
}

fn trigamma(x: f64) -> f64 {
    let mut acc = 0.0;
    let mut y = x;
    while y < SHIFT_CUTOFF {
        acc += 1.0 / (y * y);
        y += 1.0;
    }
    // psi1(y) ~ 1/y + 1/(2y^2) + sum_k B_{2k} / y^{2k+1}
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let series = inv2
        * inv
        * (1.0 / 6.0
            - inv2
                * (1.0 / 30.0
                    - inv2
                        * (1.0 / 42.0
                            - inv2 * (1.0 / 30.0 - inv2 * (5.0 / 66.0 - inv2 * (691.0 / 2730.0 - inv2 * 7.0 / 6.0))))));
    acc + inv + 0.5 * inv2 + series
}

/// ln Gamma(x) for x > 0, by the same shift-then-Stirling-series scheme.
fn ln_gamma(x: f64) -> f64 {
    let mut acc = 0.0;
    let mut y = x;
    while y < SHIFT_CUTOFF {
        acc -= y.ln();
        y += 1.0;
    }
    const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    acc + (y - 0.5) * y.ln() - y + HALF_LN_TWO_PI + series
}

/// ln C(L) for the pdf normalizing constant C(L) = G(2L) / [2^{L-1} G(L)]^2.
fn ln_pdf_constant(looks: f64) -> f64 {
    ln_gamma(2.0 * looks) - 2.0 * ((looks - 1.0) * LN_2 + ln_gamma(looks))
}

/// Density of the pixel-wise distance `D` under homogeneous signal.
///
/// The density diverges as `d^{-1/2}` at the origin; `d = 0` returns positive
/// infinity, quadrature handles the integrable endpoint by substitution.
pub fn distance_pdf(d: f64, model: SpeckleModel) -> Result<f64> {
    if d.is_nan() || d < 0.0 {
        return Err(Error::Domain(format!("distance must be nonnegative, got {d}")));
    }
    if d == 0.0 {
        return Ok(f64::INFINITY);
    }
    let l = model.looks();
    let ln_c = ln_pdf_constant(l);
    // 1 - e^{-2d} via expm1 keeps the small-d endpoint accurate.
    Ok((ln_c - 2.0 * l * d).exp() / (-(-2.0 * d).exp_m1()).sqrt())
}

/// Closed-form mean and variance of the pixel-wise distance.
pub fn distance_moments(model: SpeckleModel) -> DistanceStats {
    let l = model.looks();
    let mean = digamma(2.0 * l) - digamma(l) - LN_2;
    let variance = 0.5 * trigamma(l) - trigamma(2.0 * l);
    DistanceStats { mean, variance, looks: l }
}

/// Standard deviation `sigma_P = sigma_D / (mu_D sqrt(N))` of the normalized
/// patch distance over `N` pixels (its mean is 1 by construction).
pub fn patch_sigma(model: SpeckleModel, patch_size: usize) -> f64 {
    assert!(patch_size >= 1, "patch size must be at least 1");
    let stats = distance_moments(model);
    stats.std() / (stats.mean * (patch_size as f64).sqrt())
}

/// Reliability threshold `T = 1 + k sigma_P`.
pub fn threshold(model: SpeckleModel, patch_size: usize, k: f64) -> f64 {
    assert!(k >= 0.0, "threshold multiplier must be nonnegative");
    1.0 + k * patch_sigma(model, patch_size)
}

/// `P(D > d0)` by adaptive quadrature of the density.
///
/// The `[d0, 1]` part is integrated under the substitution `d = u^2`, which
/// removes the inverse-square-root endpoint; the smooth remainder is
/// integrated directly up to a cutoff where the integrand falls below 1e-18.
/// The result is not clamped, so `tail_probability(model, 0.0)` doubles as a
/// normalization check of the density.
pub fn tail_probability(model: SpeckleModel, d0: f64) -> Result<f64> {
    if !(d0 >= 0.0 && d0.is_finite()) {
        return Err(Error::Domain(format!("tail point must be nonnegative and finite, got {d0}")));
    }
    let l = model.looks();
    let ln_c = ln_pdf_constant(l);
    const QUAD_TOL: f64 = 1e-9;

    // e^{ln_c - 2 L d} < 1e-18 beyond this point; the sqrt factor is ~1 there.
    let upper = ((ln_c + 42.0) / (2.0 * l)).max(2.0);
    if d0 >= upper {
        // Bound the remaining mass analytically instead of integrating noise.
        let tail = (ln_c - 2.0 * l * d0).exp() / (2.0 * l * (-(-2.0 * d0).exp_m1()).sqrt());
        return Ok(tail);
    }

    let sqrt2_c = std::f64::consts::SQRT_2 * ln_c.exp();
    // Integrand after d = u^2: g(u) = 2 u p_D(u^2), finite at u = 0.
    let substituted = |u: f64| -> f64 {
        if u < 1e-100 {
            return sqrt2_c;
        }
        let d = u * u;
        2.0 * u * (ln_c - 2.0 * l * d).exp() / (-(-2.0 * d).exp_m1()).sqrt()
    };
    let direct = |d: f64| -> f64 { (ln_c - 2.0 * l * d).exp() / (-(-2.0 * d).exp_m1()).sqrt() };

    let split = 1.0_f64;
    let mut total = 0.0;
    if d0 < split {
        total += adaptive_simpson(&substituted, d0.sqrt(), split.sqrt(), QUAD_TOL);
        total += adaptive_simpson(&direct, split, upper, QUAD_TOL);
    } else {
        total += adaptive_simpson(&direct, d0, upper, QUAD_TOL);
    }
    Ok(total)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 52)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
