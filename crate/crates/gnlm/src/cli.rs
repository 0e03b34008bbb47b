//! Command-line front end binding the library into reproducible workflows.
//!
//! Every file-producing subcommand drops a `*.manifest.json` next to its
//! output recording the resolved configuration, input hashes and seeds;
//! re-running with the same inputs and settings reproduces the outputs
//! bit-exactly for any `--threads` value.

use crate::error::{Error, Result};
use crate::filter::{self, FilterConfig, ThresholdSpec};
use crate::gbf::{self, GbfConfig};
use crate::image::{Raster, SarImage};
use crate::io;
use crate::metrics::{self, RegionRect, RisOptions};
use crate::sim::{self, SceneSpec};
use crate::stats::{self, SpeckleModel};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "gnlm", version, about = "Optical-guided nonlocal SAR despeckling toolkit")]
pub struct Cli {
    /// Cap on worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Guided patch-wise nonlocal-means despeckling
    Despeckle(DespeckleArgs),
    /// Pixel-wise generalized bilateral filter baseline
    Gbf(GbfArgs),
    /// Render a synthetic scene and speckle it
    Simulate(SimulateArgs),
    /// Speckle-distance statistics as JSON on stdout
    Stats(StatsArgs),
    /// ENL / RIS quality metrics as JSON on stdout
    Metrics(MetricsArgs),
    /// Threshold/cap parameter grid, one CSV row per run
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// T = 1 + 2 sigma, S0 = 256, lambda = 0.002, gamma = 0.15
    Sharp,
    /// Conservative: unlimited S0, lambda = 0.004
    Smooth,
}

impl Preset {
    fn config(self) -> FilterConfig {
        match self {
            Preset::Sharp => FilterConfig::sharp(),
            Preset::Smooth => FilterConfig::smooth(),
        }
    }
}

#[derive(Args)]
pub struct DespeckleArgs {
    #[arg(long)]
    pub sar: PathBuf,
    #[arg(long)]
    pub guide: PathBuf,
    /// Output raster path (sidecar and manifest are written next to it)
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Preset::Sharp)]
    pub preset: Preset,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Multiply lambda by this factor (dataset-scale adaptation)
    #[arg(long, default_value_t = 1.0)]
    pub lambda_scale: f64,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Reliability threshold as T = 1 + k sigma_P
    #[arg(long)]
    pub k_sigma: Option<f64>,
    /// Explicit threshold value, or "inf" to disable the test
    #[arg(long, conflicts_with = "k_sigma")]
    pub threshold: Option<String>,
    /// Predictor cap, or "unlimited"
    #[arg(long)]
    pub s0: Option<String>,
    #[arg(long)]
    pub patch: Option<usize>,
    #[arg(long)]
    pub search: Option<usize>,
    #[arg(long)]
    pub step: Option<usize>,
    /// Look count override when the input header lacks one
    #[arg(long)]
    pub looks: Option<f64>,
    /// Also write the predictor-count map (raster + PNG), unfiltered mask
    /// and ratio image
    #[arg(long)]
    pub emit_diagnostics: bool,
}

#[derive(Args)]
pub struct GbfArgs {
    #[arg(long)]
    pub sar: PathBuf,
    #[arg(long)]
    pub guide: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 15)]
    pub window: usize,
    #[arg(long, default_value_t = 0.04)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10.0)]
    pub lambda_o: f64,
    #[arg(long, default_value_t = 3.0)]
    pub lambda_s: f64,
    #[arg(long)]
    pub looks: Option<f64>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Scene description (JSON, see `sim::SceneSpec`)
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub looks: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving clean.f32, noisy.f32, guide.f32 and the manifest
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub looks: f64,
    /// Patch side (the patch holds side^2 pixels)
    #[arg(long, default_value_t = 8)]
    pub patch: usize,
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    /// Distances d0 for which P(D > d0) is reported
    #[arg(long, value_delimiter = ',', default_value = "0.2")]
    pub tail_at: Vec<f64>,
}

#[derive(Args)]
pub struct MetricsArgs {
    /// Raster under assessment (ENL regions are evaluated here)
    #[arg(long)]
    pub image: PathBuf,
    /// Original speckled image; enables the ratio image and RIS
    #[arg(long)]
    pub original: Option<PathBuf>,
    /// ENL region "x,y,width,height"; repeatable
    #[arg(long = "region", value_parser = parse_region)]
    pub regions: Vec<RegionRect>,
    #[arg(long, default_value_t = 64)]
    pub levels: usize,
    /// Score RIS with the uncorrected (i-j)^2 - 1 denominator as well
    #[arg(long)]
    pub ris_literal: bool,
    /// Predictor-count raster from `despeckle --emit-diagnostics`
    #[arg(long)]
    pub count_map: Option<PathBuf>,
    /// Write the ratio image raster here
    #[arg(long)]
    pub ratio_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub sar: PathBuf,
    #[arg(long)]
    pub guide: PathBuf,
    /// CSV output path
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub looks: Option<f64>,
    /// Homogeneous region for ENL, "x,y,width,height"
    #[arg(long, value_parser = parse_region)]
    pub region: RegionRect,
    /// k-sigma grid; "inf" disables the test
    #[arg(long, value_delimiter = ',', default_value = "inf,4,2,1,0")]
    pub k_list: Vec<String>,
    /// Predictor-cap grid; "unlimited" keeps all survivors
    #[arg(long, value_delimiter = ',', default_value = "256")]
    pub s0_list: Vec<String>,
    #[arg(long, value_enum, default_value_t = Preset::Sharp)]
    pub preset: Preset,
    #[arg(long)]
    pub patch: Option<usize>,
    #[arg(long)]
    pub search: Option<usize>,
    #[arg(long)]
    pub step: Option<usize>,
}

fn parse_region(s: &str) -> std::result::Result<RegionRect, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err("expected x,y,width,height".into());
    }
    let mut vals = [0usize; 4];
    for (v, p) in vals.iter_mut().zip(&parts) {
        *v = p.trim().parse().map_err(|e| format!("bad region component {p:?}: {e}"))?;
    }
    Ok(RegionRect::new(vals[0], vals[1], vals[2], vals[3]))
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    subcommand: String,
    wall_clock_seconds: f64,
    config: serde_json::Value,
    inputs: Vec<InputDigest>,
    seeds: Vec<u64>,
    outputs: Vec<String>,
}

fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

fn input_digest(path: &Path) -> Result<InputDigest> {
    Ok(InputDigest { path: path.display().to_string(), sha256: file_sha256(path)? })
}

fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let json = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

/// `<out>.suffix` next to the output raster.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Despeckle(args) => run_despeckle(args),
        Command::Gbf(args) => run_gbf(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Stats(args) => run_stats(args),
        Command::Metrics(args) => run_metrics(args),
        Command::Sweep(args) => run_sweep(args),
    }
}

fn parse_threshold(s: &str) -> Result<ThresholdSpec> {
    if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
        return Ok(ThresholdSpec::Absolute(f64::INFINITY));
    }
    s.parse::<f64>()
        .map(ThresholdSpec::Absolute)
        .map_err(|e| Error::Config(format!("bad threshold {s:?}: {e}")))
}

fn parse_s0(s: &str) -> Result<Option<usize>> {
    if s.eq_ignore_ascii_case("unlimited") {
        return Ok(None);
    }
    s.parse::<usize>().map(Some).map_err(|e| Error::Config(format!("bad s0 {s:?}: {e}")))
}

fn resolve_filter_config(args: &DespeckleArgs) -> Result<FilterConfig> {
    let mut config = args.preset.config();
    if let Some(p) = args.patch {
        config.patch_side = p;
    }
    if let Some(s) = args.search {
        config.search_side = s;
    }
    if let Some(s) = args.step {
        config.anchor_step = s;
    }
    if let Some(l) = args.lambda {
        config.lambda = l;
    }
    config.lambda *= args.lambda_scale;
    if let Some(g) = args.gamma {
        config.gamma = g;
    }
    if let Some(k) = args.k_sigma {
        config.threshold = ThresholdSpec::KSigma(k);
    }
    if let Some(t) = &args.threshold {
        config.threshold = parse_threshold(t)?;
    }
    if let Some(s0) = &args.s0 {
        config.s0 = parse_s0(s0)?;
    }
    config.validate()?;
    Ok(config)
}

fn run_despeckle(args: DespeckleArgs) -> Result<()> {
    let config = resolve_filter_config(&args)?;
    let sar = io::read_sar(&args.sar, args.looks)?;
    let guide = io::read_guide(&args.guide)?;

    let start = Instant::now();
    let output = filter::filter(&sar, &guide, &config)?;
    let wall = start.elapsed().as_secs_f64();

    io::write_single_band(&args.out, &output.filtered)?;
    let mut outputs = vec![args.out.display().to_string()];

    if args.emit_diagnostics {
        let counts_path = sibling(&args.out, "counts.f32");
        let counts: Vec<f32> = output.predictor_count_map.iter().map(|&c| c as f32).collect();
        let header = io::RasterHeader {
            band_names: Some(vec!["predictor_count".into()]),
            ..io::RasterHeader::single_band(output.filtered.width, output.filtered.height)
        };
        io::write_raster(&counts_path, &header, &counts)?;
        outputs.push(counts_path.display().to_string());

        let png_path = sibling(&args.out, "counts.png");
        io::export_count_map_png(
            &png_path,
            &output.predictor_count_map,
            output.filtered.width,
            output.filtered.height,
            (config.search_side * config.search_side) as u32,
        )?;
        outputs.push(png_path.display().to_string());

        let mask_path = sibling(&args.out, "mask.f32");
        let mask: Vec<f32> = output.unfiltered_mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let header = io::RasterHeader {
            band_names: Some(vec!["unfiltered".into()]),
            ..io::RasterHeader::single_band(output.filtered.width, output.filtered.height)
        };
        io::write_raster(&mask_path, &header, &mask)?;
        outputs.push(mask_path.display().to_string());

        let ratio_path = sibling(&args.out, "ratio.f32");
        let ratio = metrics::ratio_image(&sar, &output.filtered, None)?;
        let raster = Raster::new(ratio.width, ratio.height, ratio.values)?;
        io::write_single_band(&ratio_path, &raster)?;
        outputs.push(ratio_path.display().to_string());
    }

    let model = SpeckleModel::new(sar.looks())?;
    let dstats = stats::distance_moments(model);
    let resolved_t = config.threshold.resolve(&dstats, config.patch_side * config.patch_side);
    let manifest = RunManifest {
        tool: "gnlm",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: "despeckle".into(),
        wall_clock_seconds: wall,
        config: serde_json::json!({
            "filter": config,
            "resolved_threshold": if resolved_t.is_finite() {
                serde_json::json!(resolved_t)
            } else {
                serde_json::json!("inf")
            },
            "looks": sar.looks(),
        }),
        inputs: vec![input_digest(&args.sar)?, input_digest(&args.guide)?],
        seeds: vec![],
        outputs,
    };
    write_manifest(&sibling(&args.out, "manifest.json"), &manifest)
}

fn run_gbf(args: GbfArgs) -> Result<()> {
    let config = GbfConfig {
        window_side: args.window,
        alpha: args.alpha,
        lambda_opt: args.lambda_o,
        lambda_sar: args.lambda_s,
        intensity_floor: None,
    };
    let sar = io::read_sar(&args.sar, args.looks)?;
    let guide = io::read_guide(&args.guide)?;
    let start = Instant::now();
    let out = gbf::filter_gbf(&sar, &guide, &config)?;
    let wall = start.elapsed().as_secs_f64();
    io::write_single_band(&args.out, &out)?;
    let manifest = RunManifest {
        tool: "gnlm",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: "gbf".into(),
        wall_clock_seconds: wall,
        config: serde_json::to_value(&config).expect("config serializes"),
        inputs: vec![input_digest(&args.sar)?, input_digest(&args.guide)?],
        seeds: vec![],
        outputs: vec![args.out.display().to_string()],
    };
    write_manifest(&sibling(&args.out, "manifest.json"), &manifest)
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let spec_bytes = std::fs::read(&args.scene).map_err(|e| Error::io(&args.scene, e))?;
    let spec: SceneSpec = serde_json::from_slice(&spec_bytes)
        .map_err(|e| Error::format(&args.scene, format!("bad scene spec: {e}")))?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;

    let start = Instant::now();
    let (clean, guide) = sim::generate_scene(&spec, args.seed)?;
    let noisy = sim::apply_speckle(&clean, args.looks, args.seed)?;
    let wall = start.elapsed().as_secs_f64();

    let clean_path = args.out_dir.join("clean.f32");
    let noisy_path = args.out_dir.join("noisy.f32");
    let guide_path = args.out_dir.join("guide.f32");
    io::write_sar(&clean_path, &clean)?;
    io::write_sar(&noisy_path, &noisy)?;
    io::write_guide(&guide_path, &guide)?;

    let manifest = RunManifest {
        tool: "gnlm",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: "simulate".into(),
        wall_clock_seconds: wall,
        config: serde_json::json!({ "scene": spec, "looks": args.looks }),
        inputs: vec![input_digest(&args.scene)?],
        seeds: vec![args.seed],
        outputs: vec![
            clean_path.display().to_string(),
            noisy_path.display().to_string(),
            guide_path.display().to_string(),
        ],
    };
    write_manifest(&args.out_dir.join("manifest.json"), &manifest)
}

/// Upper tail of the standard normal via the Abramowitz-Stegun erfc
/// approximation (abs error < 1.5e-7, plenty for a reported fraction).
fn normal_upper_tail(k: f64) -> f64 {
    let x = k / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.327_591_1 * x);
    let poly = t
        * (0.254_829_592
            + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    0.5 * poly * (-x * x).exp()
}

fn run_stats(args: StatsArgs) -> Result<()> {
    let model = SpeckleModel::new(args.looks)?;
    if args.patch == 0 {
        return Err(Error::Config("patch side must be positive".into()));
    }
    if !(args.k >= 0.0 && args.k.is_finite()) {
        return Err(Error::Config(format!("k must be nonnegative, got {}", args.k)));
    }
    let dstats = stats::distance_moments(model);
    let n = args.patch * args.patch;
    let sigma_p = stats::patch_sigma(model, n);
    let t = stats::threshold(model, n, args.k);
    let mut tails = Vec::new();
    for &d0 in &args.tail_at {
        tails.push(serde_json::json!({ "d0": d0, "probability": stats::tail_probability(model, d0)? }));
    }
    let report = serde_json::json!({
        "looks": args.looks,
        "patch_side": args.patch,
        "patch_pixels": n,
        "mu_d": dstats.mean,
        "sigma_d": dstats.std(),
        "sigma_p": sigma_p,
        "k": args.k,
        "threshold": t,
        "gaussian_rejection_fraction": normal_upper_tail(args.k),
        "tails": tails,
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn read_assessed(path: &Path) -> Result<Raster> {
    let (header, data) = io::read_raster(path)?;
    if header.bands != 1 {
        return Err(Error::format(path, format!("expected single band, found {}", header.bands)));
    }
    Raster::new(header.width, header.height, data.into_iter().map(f64::from).collect())
}

fn run_metrics(args: MetricsArgs) -> Result<()> {
    let image = read_assessed(&args.image)?;
    let mut enl_entries = Vec::new();
    for region in &args.regions {
        let value = metrics::enl(&image.data, image.width, image.height, region)?;
        enl_entries.push(serde_json::json!({
            "region": region,
            "enl": value,
        }));
    }

    let mut ris_value = None;
    let mut ris_literal_value = None;
    if let Some(orig_path) = &args.original {
        let (header, data) = io::read_raster(orig_path)?;
        if header.bands != 1 {
            return Err(Error::format(orig_path, "original must be single-band"));
        }
        // the ratio needs pixel values only; a missing look count is fine here
        let original = SarImage::new(
            header.width,
            header.height,
            header.looks.unwrap_or(1.0),
            data.into_iter().map(f64::from).collect(),
        )?;
        let ratio = metrics::ratio_image(&original, &image, None)?;
        let opts = RisOptions { levels: args.levels, literal_denominator: false };
        ris_value = Some(metrics::ris(&ratio, &opts)?);
        if args.ris_literal {
            let lit = RisOptions { levels: args.levels, literal_denominator: true };
            let v = metrics::ris(&ratio, &lit)?;
            ris_literal_value = Some(if v.is_finite() { serde_json::json!(v) } else { serde_json::json!(null) });
        }
        if let Some(ratio_out) = &args.ratio_out {
            let raster = Raster::new(ratio.width, ratio.height, ratio.values)?;
            io::write_single_band(ratio_out, &raster)?;
        }
    }

    let count_summary = match &args.count_map {
        Some(path) => {
            let counts = read_assessed(path)?;
            let anchors: Vec<f64> = counts.data.iter().copied().filter(|&c| c > 0.0).collect();
            if anchors.is_empty() {
                return Err(Error::Degenerate("count map holds no anchors".into()));
            }
            let n = anchors.len() as f64;
            let mean = anchors.iter().sum::<f64>() / n;
            let min = anchors.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = anchors.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let unfiltered = anchors.iter().filter(|&&c| c == 1.0).count() as f64 / n;
            Some(serde_json::json!({
                "anchors": anchors.len(),
                "min": min,
                "mean": mean,
                "max": max,
                "unfiltered_fraction": unfiltered,
            }))
        }
        None => None,
    };

    let report = serde_json::json!({
        "image": args.image.display().to_string(),
        "enl": enl_entries,
        "ris": ris_value,
        "ris_literal": ris_literal_value,
        "ris_levels": args.levels,
        "count_map": count_summary,
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let sar = io::read_sar(&args.sar, args.looks)?;
    let guide = io::read_guide(&args.guide)?;
    let mut base = args.preset.config();
    if let Some(p) = args.patch {
        base.patch_side = p;
    }
    if let Some(s) = args.search {
        base.search_side = s;
    }
    if let Some(s) = args.step {
        base.anchor_step = s;
    }

    let model = SpeckleModel::new(sar.looks())?;
    let dstats = stats::distance_moments(model);
    let n = base.patch_side * base.patch_side;

    let mut csv = String::from("k_sigma,threshold,s0,lambda,gamma,enl,ris,runtime_s\n");
    for k_str in &args.k_list {
        for s0_str in &args.s0_list {
            let mut config = base.clone();
            let k_label;
            if k_str.eq_ignore_ascii_case("inf") || k_str.eq_ignore_ascii_case("infinity") {
                config.threshold = ThresholdSpec::Absolute(f64::INFINITY);
                k_label = "inf".to_string();
            } else {
                let k: f64 = k_str
                    .parse()
                    .map_err(|e| Error::Config(format!("bad k value {k_str:?}: {e}")))?;
                config.threshold = ThresholdSpec::KSigma(k);
                k_label = k_str.trim().to_string();
            }
            config.s0 = parse_s0(s0_str)?;
            config.validate()?;

            let start = Instant::now();
            let output = filter::filter(&sar, &guide, &config)?;
            let runtime = start.elapsed().as_secs_f64();
            let enl = metrics::enl(&output.filtered.data, output.filtered.width, output.filtered.height, &args.region)?;
            let ratio = metrics::ratio_image(&sar, &output.filtered, None)?;
            let ris = metrics::ris(&ratio, &RisOptions::default())?;
            let t = config.threshold.resolve(&dstats, n);
            let t_label = if t.is_finite() { format!("{t:.6}") } else { "inf".to_string() };
            let s0_label = config.s0.map_or("unlimited".to_string(), |v| v.to_string());
            csv.push_str(&format!(
                "{k_label},{t_label},{s0_label},{},{},{enl:.4},{ris:.4},{runtime:.3}\n",
                config.lambda, config.gamma
            ));
        }
    }
    std::fs::write(&args.out, &csv).map_err(|e| Error::io(&args.out, e))?;

    let manifest = RunManifest {
        tool: "gnlm",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: "sweep".into(),
        wall_clock_seconds: 0.0,
        config: serde_json::json!({
            "base": base,
            "k_list": args.k_list,
            "s0_list": args.s0_list,
            "region": args.region,
        }),
        inputs: vec![input_digest(&args.sar)?, input_digest(&args.guide)?],
        seeds: vec![],
        outputs: vec![args.out.display().to_string()],
    };
    write_manifest(&sibling(&args.out, "manifest.json"), &manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_parser() {
        assert_eq!(parse_region("1,2,30,40").unwrap(), RegionRect::new(1, 2, 30, 40));
        assert!(parse_region("1,2,3").is_err());
        assert!(parse_region("a,b,c,d").is_err());
    }

    #[test]
    fn threshold_and_s0_parsers() {
        assert_eq!(parse_threshold("inf").unwrap(), ThresholdSpec::Absolute(f64::INFINITY));
        assert_eq!(parse_threshold("1.34").unwrap(), ThresholdSpec::Absolute(1.34));
        assert!(parse_threshold("x").is_err());
        assert_eq!(parse_s0("unlimited").unwrap(), None);
        assert_eq!(parse_s0("256").unwrap(), Some(256));
        assert!(parse_s0("-1").is_err());
    }

    #[test]
    fn normal_tail_reference_points() {
        assert!((normal_upper_tail(0.0) - 0.5).abs() < 2e-7);
        assert!((normal_upper_tail(2.0) - 0.022_750_13).abs() < 2e-7);
        assert!((normal_upper_tail(4.0) - 3.167_12e-5).abs() < 2e-7);
    }
}
