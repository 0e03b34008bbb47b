//! Distribution-level checks tying the simulator, the closed-form density
//! and the patch distance together.

mod common;

use common::{mean, sample_std};
use gnlm::distance::{sar_patch_distance, PatchGeometry};
use gnlm::image::SarImage;
use gnlm::sim;
use gnlm::stats::{distance_moments, patch_sigma, tail_probability, SpeckleModel};

/// chi^2 0.99 quantile at 64 degrees of freedom (65 bins, no fitted
/// parameters); a goodness-of-fit statistic below this corresponds to
/// p > 0.01.
const CHI2_99_DOF64: f64 = 93.216_859_660_238_43;

fn chi2_statistic(looks: f64, seed: u64) -> f64 {
    let model = SpeckleModel::new(looks).unwrap();
    let n = 1_000_000usize;
    let samples = sim::mc_distance_samples(looks, 1.0, 1, n, seed).unwrap();

    // upper edge where the tail holds 1e-4 of the mass, found by bisection
    let (mut lo, mut hi) = (1e-6, 60.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if tail_probability(model, mid).unwrap() > 1e-4 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let edge = 0.5 * (lo + hi);

    let bins = 64usize;
    let mut observed = vec![0u64; bins + 1]; // last cell = overflow
    for &s in &samples {
        let b = ((s / edge * bins as f64) as usize).min(bins);
        observed[b] += 1;
    }
    let mut chi2 = 0.0;
    let mut prev_tail = 1.0;
    for (b, &obs) in observed.iter().enumerate() {
        let tail = if b < bins {
            tail_probability(model, (b + 1) as f64 * edge / bins as f64).unwrap()
        } else {
            0.0
        };
        let p = prev_tail - tail;
        prev_tail = tail;
        let expected = p * n as f64;
        chi2 += (obs as f64 - expected).powi(2) / expected;
    }
    chi2
}

#[test]
fn empirical_pixel_distance_matches_density_single_look() {
    let chi2 = chi2_statistic(1.0, 2001);
    assert!(chi2 < CHI2_99_DOF64, "chi2 {chi2} exceeds the 0.99 quantile");
}

#[test]
fn empirical_pixel_distance_matches_density_sixteen_looks() {
    let chi2 = chi2_statistic(16.0, 2016);
    assert!(chi2 < CHI2_99_DOF64, "chi2 {chi2} exceeds the 0.99 quantile");
}

/// Patch distances measured between non-overlapping patches of a real
/// homogeneous speckled image: unit mean, sigma_P spread.
fn patch_distance_stats(looks: f64, seed: u64) -> (f64, f64) {
    let side = 200usize;
    let clean = SarImage::constant(side, side, f64::INFINITY, 1.0).unwrap();
    let z = sim::apply_speckle(&clean, looks, seed).unwrap();
    let geom = PatchGeometry::new(8).unwrap();
    let mu = distance_moments(SpeckleModel::new(looks).unwrap()).mean;

    // deterministic pseudo-random anchor pairs with disjoint patches
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 33) as usize) % (side - 8)
    };
    let mut out = Vec::with_capacity(10_000);
    while out.len() < 10_000 {
        let s = (next(), next());
        let t = (next(), next());
        if s.0.abs_diff(t.0) < 8 && s.1.abs_diff(t.1) < 8 {
            continue; // overlapping patches share pixels and bias the mean
        }
        out.push(sar_patch_distance(&z, s, t, geom, mu).unwrap());
    }
    (mean(&out), sample_std(&out))
}

#[test]
fn homogeneous_patch_distance_normalizes_to_unit_mean() {
    for &(looks, seed) in &[(1.0, 3001u64), (4.0, 3004)] {
        let (m, s) = patch_distance_stats(looks, seed);
        let sigma_p = patch_sigma(SpeckleModel::new(looks).unwrap(), 64);
        assert!((m - 1.0).abs() < 0.01, "L={looks}: mean {m}");
        assert!((s / sigma_p - 1.0).abs() < 0.05, "L={looks}: std {s} vs sigma_P {sigma_p}");
    }
}

#[test]
fn chi2_statistic_is_in_the_plausible_band() {
    // dof = 64: mean 64, std ~11.3; guard against a degenerate statistic
    let chi2 = chi2_statistic(1.0, 2001);
    assert!(chi2 > 20.0 && chi2 < CHI2_99_DOF64, "chi2 {chi2}");
}
