//! Optical-guided patch-wise nonlocal means for SAR despeckling.
//!
//! The filter averages SAR patches across a search window with weights
//! driven by both a normalized SAR-domain distance and the distance measured
//! on a co-registered optical guide. A statistical reliability test on the
//! SAR distance rejects risky predictors before they enter the average, and
//! a cap keeps only the optically closest survivors, so optical structure
//! steers the weighting without ever leaking pixel values into the output.
//!
//! Alongside the filter ([`filter()`]) the crate ships the closed-form speckle
//! distance statistics backing the test ([`stats`]), the pixel/patch
//! distances ([`distance`]), a pixel-wise generalized bilateral baseline
//! ([`gbf`]), ENL/ratio/RIS quality metrics ([`metrics`]), a synthetic scene
//! and speckle simulator ([`sim`]), raw-float raster persistence ([`io`])
//! and the `gnlm` command-line tool ([`cli`]).

pub mod cli;
pub mod distance;
pub mod error;
pub mod filter;
pub mod gbf;
pub mod image;
pub mod io;
pub mod metrics;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use filter::{filter, FilterConfig, FilterOutput, PredictorSet, ThresholdSpec};
pub use image::{OpticalGuide, Raster, SarImage};
